#include "recursep/comparators.hpp"

#include <cmath>
#include <functional>
#include <vector>

#include "recursep/errors.hpp"
#include "recursep/estimators.hpp"
#include "recursep/rng.hpp"
#include "recursep/stats.hpp"

namespace recursep {

namespace {

int resolve_horizon(const Dataset& dataset, int horizon_index) {
  const int h = horizon_index == 0 ? dataset.intervals() : horizon_index;
  if (h < 1 || h > dataset.intervals()) {
    throw DataError("horizon index out of range");
  }
  return h;
}

bool censored_before(const Dataset& dataset, int horizon) {
  for (const SubjectHistory& s : dataset.subjects()) {
    if (s.censor_interval && *s.censor_interval <= horizon) return true;
  }
  return false;
}

// Per-subject event count and restricted time alive by the horizon, valid
// for uncensored data.
struct ArmMoments {
  std::vector<double> events;
  std::vector<double> lifetime;
};

ArmMoments arm_moments(const Dataset& dataset, int arm, int horizon) {
  ArmMoments m;
  const double tau = dataset.grid().end_of(horizon);
  for (const SubjectHistory& s : dataset.subjects()) {
    if (s.arm != arm) continue;
    m.events.push_back(s.cumulative_events(horizon));
    if (s.death_interval && *s.death_interval <= horizon) {
      m.lifetime.push_back(dataset.grid().end_of(*s.death_interval));
    } else {
      m.lifetime.push_back(tau);
    }
  }
  return m;
}

// Delta-method variance of log(mean(events) / mean(lifetime)).
double log_ratio_variance(const ArmMoments& m) {
  const double n = static_cast<double>(m.events.size());
  const double mx = mean(m.events);
  const double ml = mean(m.lifetime);
  if (!(mx > 0.0)) throw NumericError("no events in one arm: WA ratio undefined");
  const double vx = sample_variance(m.events);
  const double vl = sample_variance(m.lifetime);
  const double cxl = sample_covariance(m.events, m.lifetime);
  return (vx / (mx * mx) + vl / (ml * ml) - 2.0 * cxl / (mx * ml)) / n;
}

double bootstrap_effect_variance(
    const Dataset& dataset, int replicates, std::uint64_t seed,
    const std::function<double(const Dataset&)>& effect) {
  if (replicates < 2) throw DataError("bootstrap needs at least 2 replicates");
  std::vector<std::size_t> arm_indices[2];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    arm_indices[dataset.subject(i).arm].push_back(i);
  }
  std::vector<double> effects;
  effects.reserve(replicates);
  int failed = 0;
  for (int b = 0; b < replicates; ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    std::vector<std::size_t> picked;
    picked.reserve(dataset.size());
    for (int a : {0, 1}) {
      const std::vector<std::size_t>& pool = arm_indices[a];
      for (std::size_t j = 0; j < pool.size(); ++j) {
        picked.push_back(pool[rng.index(pool.size())]);
      }
    }
    try {
      effects.push_back(effect(dataset.resample(picked)));
    } catch (const std::exception&) {
      ++failed;
    }
  }
  if (failed * 10 > replicates) {
    throw NumericError("bootstrap failed in more than 10% of replicates");
  }
  if (effects.size() < 2) {
    throw NumericError("bootstrap produced fewer than 2 usable replicates");
  }
  return sample_variance(effects);
}

}  // namespace

TestResult wa_test(const Dataset& dataset, const ComparatorOptions& options) {
  const int h = resolve_horizon(dataset, options.horizon_index);
  const auto effect = [h](const Dataset& d) {
    const WhileAliveResult w1 = while_alive_loss(d, 1, h);
    const WhileAliveResult w0 = while_alive_loss(d, 0, h);
    if (!(w1.walr > 0.0) || !(w0.walr > 0.0)) {
      throw NumericError("no events in one arm: WA ratio undefined");
    }
    return std::log(w1.walr / w0.walr);
  };

  TestResult result;
  result.method = "WA";
  result.horizon_index = h;
  result.tau = dataset.grid().end_of(h);
  result.effect_estimate = effect(dataset);
  result.statistic = result.effect_estimate;
  result.variance_method = options.variance;
  if (options.variance == VarianceMethod::empirical) {
    if (censored_before(dataset, h)) {
      throw DataError(
          "empirical WA variance requires data without censoring before the "
          "horizon; use bootstrap");
    }
    result.variance = log_ratio_variance(arm_moments(dataset, 1, h)) +
                      log_ratio_variance(arm_moments(dataset, 0, h));
  } else if (options.variance == VarianceMethod::bootstrap) {
    result.variance = bootstrap_effect_variance(
        dataset, options.bootstrap_replicates, options.seed, effect);
  } else {
    throw DataError("WA test supports empirical or bootstrap variance");
  }
  if (!(result.variance > 0.0)) {
    throw NumericError("degenerate WA variance");
  }
  result.standardize();
  return result;
}

TestResult gl_test(const Dataset& dataset, const ComparatorOptions& options) {
  const int h = resolve_horizon(dataset, options.horizon_index);
  const auto effect = [h](const Dataset& d) {
    return ghosh_lin_mean(d, 1).at(h) - ghosh_lin_mean(d, 0).at(h);
  };

  TestResult result;
  result.method = "GL";
  result.horizon_index = h;
  result.tau = dataset.grid().end_of(h);
  result.effect_estimate = effect(dataset);
  result.statistic = result.effect_estimate;
  result.variance_method = options.variance;
  if (options.variance == VarianceMethod::empirical) {
    if (censored_before(dataset, h)) {
      throw DataError(
          "empirical GL variance requires data without censoring before the "
          "horizon; use bootstrap");
    }
    const ArmMoments m1 = arm_moments(dataset, 1, h);
    const ArmMoments m0 = arm_moments(dataset, 0, h);
    result.variance =
        sample_variance(m1.events) / static_cast<double>(m1.events.size()) +
        sample_variance(m0.events) / static_cast<double>(m0.events.size());
  } else if (options.variance == VarianceMethod::bootstrap) {
    result.variance = bootstrap_effect_variance(
        dataset, options.bootstrap_replicates, options.seed, effect);
  } else {
    throw DataError("GL test supports empirical or bootstrap variance");
  }
  if (!(result.variance > 0.0)) {
    throw NumericError("degenerate GL variance");
  }
  result.standardize();
  return result;
}

}  // namespace recursep
