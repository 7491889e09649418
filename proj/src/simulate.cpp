#include "recursep/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "recursep/errors.hpp"
#include "recursep/rng.hpp"

namespace recursep {

double baseline_recurrence(const DiscreteDGPConfig& config, int interval) {
  const double k = static_cast<double>(config.intervals);
  const int step_every = std::max(1, config.intervals / 5);
  const int steps = (interval - 1) / step_every;
  switch (config.pattern) {
    case BaselinePattern::constant:
      return 2.0 / k;
    case BaselinePattern::decreasing:
      return std::max(3.0 / k - 0.5 / k * steps, 1.0 / k);
    case BaselinePattern::increasing:
      return std::min(1.0 / k + 0.5 / k * steps, 3.0 / k);
  }
  return 2.0 / k;
}

namespace {

std::string padded_id(const char* prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%s%06d", prefix, i);
  return buf;
}

}  // namespace

Dataset generate_discrete(const DiscreteDGPConfig& config,
                          int* violation_count) {
  if (config.intervals < 1 || config.subjects < 2) {
    throw DataError("discrete generator needs at least one interval and two subjects");
  }
  const int K = config.intervals;
  Rng rng(derive_seed(config.seed, 0));
  int violations = 0;
  const auto clamped = [&violations](double p) {
    if (p < 0.0 || p > 1.0) {
      ++violations;
      return std::clamp(p, 0.0, 1.0);
    }
    return p;
  };

  std::vector<SubjectHistory> subjects(config.subjects);
  for (int i = 0; i < config.subjects; ++i) {
    SubjectHistory& s = subjects[i];
    s.id = padded_id("s", i + 1);
    s.arm = rng.bernoulli(0.5) ? 1 : 0;
    s.event_counts.assign(K, 0);
    int y = 0;
    for (int k = 1; k <= K; ++k) {
      const double p_death =
          clamped(config.beta_d_0 + config.beta_d_a * s.arm + config.beta_y_d * y);
      if (rng.bernoulli(p_death)) {
        s.death_interval = k;
        break;
      }
      const double p_event =
          clamped(baseline_recurrence(config, k) + config.beta_y_a * s.arm);
      if (rng.bernoulli(p_event)) {
        s.event_counts[k - 1] = 1;
        ++y;
      }
    }
  }
  if (violation_count != nullptr) *violation_count = violations;
  if (config.strict_probabilities && violations > 0) {
    throw DataError("discrete generator produced " + std::to_string(violations) +
                    " probabilities outside [0, 1]");
  }
  return Dataset(TimeGrid::uniform(K, static_cast<double>(K)),
                 std::move(subjects));
}

std::vector<RawRecord> generate_continuous(const ContinuousDGPConfig& config) {
  if (!(config.base_rate >= 0.0) || !(config.max_follow_up > 0.0) ||
      !(config.epoch_length > 0.0) || config.subjects < 2) {
    throw DataError("invalid continuous generator configuration");
  }
  Rng rng(derive_seed(config.seed, 0));
  std::vector<RawRecord> records(config.subjects);
  for (int i = 0; i < config.subjects; ++i) {
    RawRecord& r = records[i];
    r.id = padded_id("c", i + 1);
    r.arm = rng.bernoulli(0.5) ? 1 : 0;

    const double death_rate =
        config.control_death_rate * (r.arm == 1 ? config.hazard_ratio : 1.0);
    const double death_u = rng.exponential(death_rate);
    const double follow_up = std::min(death_u, config.max_follow_up);
    if (death_u <= config.max_follow_up) {
      r.death_time = death_u;
    } else {
      r.censor_time = config.max_follow_up;
    }

    // Piecewise-constant Poisson process on [0, follow_up): exponential gaps
    // restarted at each epoch boundary.
    const double arm_factor = r.arm == 1 ? config.rate_ratio : 1.0;
    int epoch = 0;
    double epoch_start = 0.0;
    while (epoch_start < follow_up) {
      const double epoch_end =
          std::min(epoch_start + config.epoch_length, follow_up);
      const double rate =
          config.base_rate * std::pow(config.step_factor, epoch) * arm_factor;
      double u = epoch_start;
      for (;;) {
        u += rng.exponential(rate);
        if (u >= epoch_end) break;
        r.event_times.push_back(u);
      }
      epoch_start += config.epoch_length;
      ++epoch;
    }
  }
  return records;
}

}  // namespace recursep
