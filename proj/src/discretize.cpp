#include "recursep/discretize.hpp"

#include <unordered_set>

#include "recursep/errors.hpp"

namespace recursep {

Dataset discretize(const std::vector<RawRecord>& records, const TimeGrid& grid,
                   DeathIntervalEvents on_death_interval_event) {
  const int K = grid.intervals();
  const double tau = grid.tau();
  std::vector<SubjectHistory> subjects;
  subjects.reserve(records.size());
  std::unordered_set<std::string> seen;

  for (const RawRecord& r : records) {
    if (!seen.insert(r.id).second) {
      throw DataError("duplicate subject id: " + r.id);
    }
    if (r.death_time.has_value() == r.censor_time.has_value()) {
      throw DataError("subject " + r.id +
                      ": exactly one of death time or censor time is required");
    }
    const double exit_time = r.death_time ? *r.death_time : *r.censor_time;
    if (!(exit_time > 0.0)) {
      throw DataError("subject " + r.id + ": exit time must be positive");
    }
    for (double u : r.event_times) {
      if (!(u > 0.0)) {
        throw DataError("subject " + r.id + ": event times must be positive");
      }
      if (r.death_time && u > *r.death_time) {
        throw DataError("subject " + r.id + ": event after death");
      }
    }

    SubjectHistory s;
    s.id = r.id;
    s.arm = r.arm;
    s.event_counts.assign(K, 0);

    if (r.death_time && *r.death_time <= tau) {
      s.death_interval = grid.interval_containing(*r.death_time);
    } else if (r.censor_time && *r.censor_time < tau) {
      const int c = grid.first_incomplete_interval(*r.censor_time);
      if (c <= K) s.censor_interval = c;
    }
    // Exit at or beyond tau leaves the subject observed through the whole
    // grid: no censor index is stored.

    // First interval the subject no longer observes, for truncation.
    int open_end = K + 1;
    if (s.death_interval) open_end = *s.death_interval + 1;
    if (s.censor_interval) open_end = *s.censor_interval;

    for (double u : r.event_times) {
      if (u > tau) continue;  // administratively censored at tau
      const int k = grid.interval_containing(u);
      if (s.death_interval && k == *s.death_interval) {
        if (on_death_interval_event == DeathIntervalEvents::reject) {
          throw DataError("subject " + r.id +
                          ": event in the death interval cannot be represented "
                          "on this grid");
        }
        continue;
      }
      if (k >= open_end) continue;  // beyond observed follow-up
      ++s.event_counts[k - 1];
    }
    subjects.push_back(std::move(s));
  }
  return Dataset(grid, std::move(subjects));
}

}  // namespace recursep
