#include "recursep/separable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "recursep/errors.hpp"
#include "recursep/estimators.hpp"
#include "recursep/rng.hpp"
#include "recursep/stats.hpp"

namespace recursep {

CounterfactualMeanCurve counterfactual_mean_curve(const Dataset& dataset,
                                                  int a_y, int a_d,
                                                  const WeightProcess& weights) {
  if (weights.a_y != a_y || weights.a_d != a_d) {
    throw DataError("weight process does not match the requested (a_Y, a_D)");
  }
  if (weights.per_subject_.size() != dataset.size()) {
    throw DataError("weight process does not match the dataset");
  }
  const int K = dataset.intervals();
  CounterfactualMeanCurve curve{a_y, a_d, dataset.grid(), {}, {}, {}, {}};
  curve.increments.assign(K, 0.0);
  curve.cumulative.assign(K, 0.0);
  curve.risk_weighted.assign(K, 0.0);
  curve.survival = kaplan_meier(dataset, a_y).values;

  // Weighted event sums over at-risk subjects of arm a_y, per interval.
  std::vector<double> weighted_events(K + 1, 0.0);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const SubjectHistory& s = dataset.subject(i);
    if (s.arm != a_y) continue;
    const std::vector<double>& w = weights.for_subject(i);
    for (int t = 1; t <= static_cast<int>(w.size()); ++t) {
      const int dy = s.event_counts[t - 1];
      if (dy != 0) weighted_events[t] += w[t - 1] * dy;
    }
  }

  double run = 0.0;
  for (int t = 1; t <= K; ++t) {
    const int r = dataset.at_risk_count(a_y, t);
    if (r > 0) {
      curve.risk_weighted[t - 1] = weighted_events[t] / r;
      curve.increments[t - 1] = curve.survival[t - 1] * curve.risk_weighted[t - 1];
    }
    run += curve.increments[t - 1];
    curve.cumulative[t - 1] = run;
  }
  return curve;
}

namespace {

void check_pair(const CounterfactualMeanCurve& treated_curve,
                const CounterfactualMeanCurve& control_curve,
                const Dataset& dataset, int horizon_index) {
  if (treated_curve.a_y != 1 || control_curve.a_y != 0) {
    throw DataError("curves must be the (a_Y=1, a_Y=0) pair");
  }
  if (treated_curve.a_d != control_curve.a_d) {
    throw DataError("curves must share a_D");
  }
  if (!(treated_curve.grid == dataset.grid()) ||
      !(control_curve.grid == dataset.grid())) {
    throw DataError("curves and dataset must share the grid");
  }
  if (horizon_index < 1 || horizon_index > dataset.intervals()) {
    throw DataError("horizon index out of range");
  }
}

}  // namespace

PrMsmFit fit_pr_msm(const CounterfactualMeanCurve& treated_curve,
                    const CounterfactualMeanCurve& control_curve,
                    const Dataset& dataset, int horizon_index) {
  check_pair(treated_curve, control_curve, dataset, horizon_index);
  double numerator = 0.0;
  double denominator = 0.0;
  for (int t = 1; t <= horizon_index; ++t) {
    const double q = dataset.at_risk_count(1, t);
    numerator += q * treated_curve.increments[t - 1];
    denominator += q * control_curve.increments[t - 1];
  }
  if (denominator <= 0.0) {
    throw NumericError(
        "proportional-rate fit undefined: no events in the control curve");
  }
  if (numerator <= 0.0) {
    return {-std::numeric_limits<double>::infinity(), true};
  }
  return {std::log(numerator / denominator), false};
}

double score_statistic(const CounterfactualMeanCurve& treated_curve,
                       const CounterfactualMeanCurve& control_curve,
                       const Dataset& dataset, int horizon_index) {
  check_pair(treated_curve, control_curve, dataset, horizon_index);
  double u = 0.0;
  for (int t = 1; t <= horizon_index; ++t) {
    const double q = dataset.at_risk_count(1, t);
    u += q * (treated_curve.increments[t - 1] - control_curve.increments[t - 1]);
  }
  return u;
}

double plugin_variance(const Dataset& dataset,
                       const CounterfactualMeanCurve& treated_curve,
                       const CounterfactualMeanCurve& control_curve,
                       const WeightProcess& treated_weights,
                       const WeightProcess& control_weights,
                       int horizon_index) {
  check_pair(treated_curve, control_curve, dataset, horizon_index);
  const double n = static_cast<double>(dataset.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const SubjectHistory& s = dataset.subject(i);
    const WeightProcess& w =
        s.arm == 1 ? treated_weights : control_weights;
    const std::vector<double>& wi = w.for_subject(i);
    const std::vector<double>& surv =
        s.arm == 1 ? treated_curve.survival : control_curve.survival;
    const int last = std::min<int>(horizon_index, static_cast<int>(wi.size()));
    for (int t = 1; t <= last; ++t) {
      const int dn = s.event_counts[t - 1];
      if (dn == 0) continue;
      const double q = dataset.at_risk_count(1, t);
      const double d_own = dataset.at_risk_count(s.arm, t);
      const double phi = n * surv[t - 1] * wi[t - 1] / d_own;
      const double psi = s.arm == 1 ? q * phi : -q * phi;
      acc += psi * psi * dn;
    }
  }
  return acc / (n * n);  // n * sigma^2 with sigma^2 = acc / n^3
}

namespace {

struct Pipeline {
  CounterfactualMeanCurve treated;
  CounterfactualMeanCurve control;
  WeightProcess treated_weights;
  WeightProcess control_weights;
};

Pipeline run_pipeline(const Dataset& dataset, const PrMsmatOptions& options) {
  const DeathHazardModel control_model =
      fit_death_hazard(dataset, 0, options.hazard);
  const DeathHazardModel treated_model =
      fit_death_hazard(dataset, 1, options.hazard);
  WeightProcess treated_weights = compute_weights(
      dataset, control_model, treated_model, 1, options.a_d, options.truncation);
  WeightProcess control_weights = compute_weights(
      dataset, control_model, treated_model, 0, options.a_d, options.truncation);
  CounterfactualMeanCurve treated =
      counterfactual_mean_curve(dataset, 1, options.a_d, treated_weights);
  CounterfactualMeanCurve control =
      counterfactual_mean_curve(dataset, 0, options.a_d, control_weights);
  return Pipeline{std::move(treated), std::move(control),
                  std::move(treated_weights), std::move(control_weights)};
}

int resolve_horizon(const Dataset& dataset, int horizon_index) {
  const int h = horizon_index == 0 ? dataset.intervals() : horizon_index;
  if (h < 1 || h > dataset.intervals()) {
    throw DataError("horizon index out of range");
  }
  return h;
}

}  // namespace

double bootstrap_variance(const Dataset& dataset, const PrMsmatOptions& options,
                          int replicates, std::uint64_t seed,
                          BootstrapReport* report) {
  if (replicates < 2) throw DataError("bootstrap needs at least 2 replicates");
  const int h = resolve_horizon(dataset, options.horizon_index);

  std::vector<std::size_t> arm_indices[2];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    arm_indices[dataset.subject(i).arm].push_back(i);
  }

  std::vector<double> scores;
  scores.reserve(replicates);
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
      const Dataset resampled = dataset.resample(picked);
      const Pipeline p = run_pipeline(resampled, options);
      scores.push_back(score_statistic(p.treated, p.control, resampled, h));
    } catch (const std::exception&) {
      ++failed;
    }
  }
  if (report != nullptr) {
    report->requested = replicates;
    report->completed = static_cast<int>(scores.size());
    report->failed = failed;
  }
  if (failed * 10 > replicates) {
    throw NumericError("bootstrap failed in more than 10% of replicates");
  }
  if (scores.size() < 2) {
    throw NumericError("bootstrap produced fewer than 2 usable replicates");
  }
  return sample_variance(scores);
}

void TestResult::standardize() {
  z = statistic / std::sqrt(variance);
  p_two = 2.0 * normal_cdf(-std::abs(z));
  p_left = normal_cdf(z);
  p_right = 1.0 - normal_cdf(z);
}

std::string variance_method_name(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::plugin: return "plugin";
    case VarianceMethod::bootstrap: return "bootstrap";
    case VarianceMethod::empirical: return "empirical";
  }
  return "plugin";
}

std::string TestResult::to_json() const {
  nlohmann::json j;
  j["method"] = method;
  j["tau"] = tau;
  j["u"] = statistic;
  j["var"] = variance;
  j["z"] = z;
  j["p_two"] = p_two;
  j["p_left"] = p_left;
  j["p_right"] = p_right;
  if (std::isfinite(effect_estimate)) {
    j["beta_hat"] = effect_estimate;
  } else {
    j["beta_hat"] = nullptr;
  }
  j["beta_boundary"] = effect_at_boundary;
  if (a_d) {
    j["a_d"] = *a_d;
  } else {
    j["a_d"] = nullptr;
  }
  j["variance_method"] = variance_method_name(variance_method);
  if (truncated_fraction) {
    j["truncated_fraction"] = *truncated_fraction;
  } else {
    j["truncated_fraction"] = nullptr;
  }
  return j.dump(2);
}

TestResult pr_msmat_test(const Dataset& dataset, const PrMsmatOptions& options) {
  const int h = resolve_horizon(dataset, options.horizon_index);
  const Pipeline p = run_pipeline(dataset, options);

  TestResult result;
  result.method = "PR-MSMaT";
  result.horizon_index = h;
  result.tau = dataset.grid().end_of(h);
  result.a_d = options.a_d;
  result.statistic = score_statistic(p.treated, p.control, dataset, h);
  result.variance_method = options.variance;
  if (options.variance == VarianceMethod::bootstrap) {
    result.variance = bootstrap_variance(dataset, options,
                                         options.bootstrap_replicates,
                                         options.seed);
  } else if (options.variance == VarianceMethod::plugin) {
    result.variance = plugin_variance(dataset, p.treated, p.control,
                                      p.treated_weights, p.control_weights, h);
  } else {
    throw DataError("PR-MSMaT supports plugin or bootstrap variance");
  }
  if (!(result.variance > 0.0)) {
    throw NumericError(
        "degenerate variance: no events contribute to the score");
  }
  result.standardize();

  const PrMsmFit fit = fit_pr_msm(p.treated, p.control, dataset, h);
  result.effect_estimate = fit.beta_hat;
  result.effect_at_boundary = fit.at_boundary;

  const auto entries = [](const WeightProcess& w) {
    std::size_t total = 0;
    for (const auto& v : w.per_subject_) total += v.size();
    return total;
  };
  const std::size_t n1 = entries(p.treated_weights);
  const std::size_t n0 = entries(p.control_weights);
  if (n1 + n0 > 0) {
    result.truncated_fraction =
        (p.treated_weights.truncated_fraction * n1 +
         p.control_weights.truncated_fraction * n0) /
        static_cast<double>(n1 + n0);
  } else {
    result.truncated_fraction = 0.0;
  }
  return result;
}

}  // namespace recursep
