#pragma once

#include <cstdint>
#include <vector>

#include "recursep/death_hazard.hpp"
#include "recursep/history.hpp"
#include "recursep/step_curve.hpp"
#include "recursep/test_result.hpp"
#include "recursep/weights.hpp"

namespace recursep {

// Estimated counterfactual mean curve for one (a_Y, a_D) configuration:
// increments are S_t^{a_Y} times the weighted at-risk event average, with the
// per-interval components retained for diagnostics.
struct CounterfactualMeanCurve {
  int a_y = 0;
  int a_d = 0;
  TimeGrid grid;
  std::vector<double> increments;     // per interval
  std::vector<double> cumulative;     // running sum of increments
  std::vector<double> survival;       // S(t_k) for arm a_y
  std::vector<double> risk_weighted;  // weighted event average per interval
};

CounterfactualMeanCurve counterfactual_mean_curve(const Dataset& dataset,
                                                  int a_y, int a_d,
                                                  const WeightProcess& weights);

struct PrMsmFit {
  double beta_hat = 0.0;
  bool at_boundary = false;  // no events in the treated curve: beta is -inf
};

// Closed-form proportional-rate coefficient: exp(beta) is the ratio of the
// Q(t)-weighted increment sums of the two curves up to the horizon.
PrMsmFit fit_pr_msm(const CounterfactualMeanCurve& treated_curve,
                    const CounterfactualMeanCurve& control_curve,
                    const Dataset& dataset, int horizon_index);

// Score U_n = sum_{t<=h} Q(t) (dmu1_t - dmu0_t), Q(t) = treated at-risk count.
double score_statistic(const CounterfactualMeanCurve& treated_curve,
                       const CounterfactualMeanCurve& control_curve,
                       const Dataset& dataset, int horizon_index);

// Plug-in variance of U_n from the influence-type terms, integrating the
// squared per-subject contributions against the event counting process.
double plugin_variance(const Dataset& dataset,
                       const CounterfactualMeanCurve& treated_curve,
                       const CounterfactualMeanCurve& control_curve,
                       const WeightProcess& treated_weights,
                       const WeightProcess& control_weights, int horizon_index);

struct PrMsmatOptions {
  int a_d = 0;
  int horizon_index = 0;  // 0 means the full grid
  VarianceMethod variance = VarianceMethod::plugin;
  int bootstrap_replicates = 500;
  std::uint64_t seed = 20260809;
  WeightBounds truncation;
  HazardFitOptions hazard;
};

struct BootstrapReport {
  int requested = 0;
  int completed = 0;
  int failed = 0;
};

// Nonparametric bootstrap variance of U_n: subjects are resampled with
// replacement within arm, the whole pipeline (hazards, weights, curves) is
// refitted per replicate, and the empirical variance of the replicate scores
// is returned. Deterministic given the seed.
double bootstrap_variance(const Dataset& dataset, const PrMsmatOptions& options,
                          int replicates, std::uint64_t seed,
                          BootstrapReport* report = nullptr);

// The full test: hazard fits, weights, counterfactual curves, score,
// variance, and the standardized statistic with two- and one-sided p-values.
TestResult pr_msmat_test(const Dataset& dataset,
                         const PrMsmatOptions& options = {});

}  // namespace recursep
