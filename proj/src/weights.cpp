#include "recursep/weights.hpp"

#include <algorithm>

#include "recursep/errors.hpp"

namespace recursep {

WeightProcess compute_weights(const Dataset& dataset,
                              const DeathHazardModel& control_model,
                              const DeathHazardModel& treated_model, int a_y,
                              int a_d, const WeightBounds& bounds) {
  if ((a_y != 0 && a_y != 1) || (a_d != 0 && a_d != 1)) {
    throw DataError("treatment components must be 0 or 1");
  }
  if (control_model.arm != 0 || treated_model.arm != 1) {
    throw DataError("hazard models must be fitted per arm (control, treated)");
  }
  if (!(bounds.lower > 0.0) || !(bounds.upper >= bounds.lower)) {
    throw DataError("weight truncation bounds must satisfy 0 < lower <= upper");
  }

  const DeathHazardModel& numerator_model =
      a_d == 0 ? control_model : treated_model;
  const DeathHazardModel& denominator_model =
      a_y == 0 ? control_model : treated_model;

  WeightProcess w;
  w.a_y = a_y;
  w.a_d = a_d;
  w.bounds = bounds;
  w.per_subject_.resize(dataset.size());

  const int K = dataset.intervals();
  std::size_t total_entries = 0;
  std::size_t truncated = 0;

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const SubjectHistory& s = dataset.subject(i);
    if (s.arm != a_y) continue;
    const int last = s.last_at_risk(K);
    std::vector<double>& out = w.per_subject_[i];
    out.resize(last);
    if (a_y == a_d) {
      std::fill(out.begin(), out.end(), 1.0);
      total_entries += out.size();
      continue;
    }
    double running = 1.0;
    int y = 0;
    for (int q = 1; q <= last; ++q) {
      const double hd = numerator_model.predict(q, y);
      const double hy = denominator_model.predict(q, y);
      const bool died = s.death_interval && *s.death_interval == q;
      running *= died ? hd / hy : (1.0 - hd) / (1.0 - hy);
      ++total_entries;
      if (running < bounds.lower || running > bounds.upper) {
        ++truncated;
        out[q - 1] = std::clamp(running, bounds.lower, bounds.upper);
      } else {
        out[q - 1] = running;
      }
      y += s.event_counts[q - 1];
    }
  }
  w.truncated_fraction =
      total_entries == 0
          ? 0.0
          : static_cast<double>(truncated) / static_cast<double>(total_entries);
  return w;
}

}  // namespace recursep
