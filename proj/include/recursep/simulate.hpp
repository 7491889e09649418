#pragma once

#include <cstdint>
#include <vector>

#include "recursep/discretize.hpp"
#include "recursep/history.hpp"

namespace recursep {

enum class BaselinePattern { constant, decreasing, increasing };

// Additive-intensity discrete-time generator: per interval, death with
// probability beta_d_0 + beta_d_a * A + beta_y_d * Y_{k-1} (resolved first),
// then at most one recurrent event with probability
// baseline(k) + beta_y_a * A. Arms are assigned by fair coin. The baseline
// patterns scale with the interval count: constant holds 2/K; decreasing
// starts at 3/K and steps down 0.5/K every K/5 intervals to 1/K; increasing
// mirrors it upward.
struct DiscreteDGPConfig {
  int intervals = 1000;
  int subjects = 1000;
  BaselinePattern pattern = BaselinePattern::constant;
  double beta_y_a = 0.0;
  double beta_d_0 = 1.5e-3;
  double beta_d_a = -0.5e-3;
  double beta_y_d = 0.5e-3;
  std::uint64_t seed = 1;
  // Paper configurations keep every probability inside [0, 1]; with strict
  // mode on, any clamped draw is an error rather than a silent adjustment.
  bool strict_probabilities = true;
};

double baseline_recurrence(const DiscreteDGPConfig& config, int interval);

Dataset generate_discrete(const DiscreteDGPConfig& config,
                          int* violation_count = nullptr);

// Continuous-time generator: exponential survival (control rate scaled by
// the hazard ratio for the treated arm) truncated at the maximum follow-up,
// and an independent piecewise-constant Poisson recurrence process whose
// rate starts at base_rate and multiplies by step_factor each epoch (times
// the rate ratio for the treated arm).
struct ContinuousDGPConfig {
  double base_rate = 2.0;
  double step_factor = 1.6487212707001282;  // exp(0.5)
  double epoch_length = 1.2;
  double max_follow_up = 5.0;
  double rate_ratio = 1.0;
  double hazard_ratio = 1.0;
  double control_death_rate = 0.6;
  int subjects = 500;
  std::uint64_t seed = 1;
};

std::vector<RawRecord> generate_continuous(const ContinuousDGPConfig& config);

}  // namespace recursep
