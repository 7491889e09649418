#pragma once

#include <string>
#include <vector>

#include "recursep/errors.hpp"
#include "recursep/history.hpp"

namespace recursep {

enum class HazardLink { logit, identity };

struct HazardFitOptions {
  HazardLink link = HazardLink::logit;
  int time_bins = 10;       // coarsened by equal at-risk exposure
  bool event_slope = true;  // include the lagged cumulative-event term
  double tolerance = 1e-8;  // on the coefficient change
  int max_iterations = 100;
};

struct FitDiagnostics {
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  // Set when a degenerate bin (all-death or no-death) or an unidentifiable
  // slope forced the fit back to bin-level empirical rates with gamma = 0.
  bool separation_fallback = false;
};

struct HazardFitError : NumericError {
  HazardFitError(const std::string& what, FitDiagnostics diag)
      : NumericError(what), diagnostics(diag) {}
  FitDiagnostics diagnostics;
};

// Per-arm discrete-time death hazard: the probability of death within
// interval q given survival to its start, the lagged cumulative event count,
// and the arm. Linear predictor alpha_{bin(q)} + gamma * y on the link scale.
class DeathHazardModel {
 public:
  int arm = 0;
  HazardLink link = HazardLink::logit;
  // bin b covers intervals [bin_start[b], bin_start[b+1]); bin_start.front()
  // is 1 and bin_start.back() is K+1.
  std::vector<int> bin_start;
  std::vector<double> alpha;
  double gamma = 0.0;
  FitDiagnostics diagnostics;

  static constexpr double kEps = 1e-6;

  int bins() const { return static_cast<int>(alpha.size()); }
  int bin_of(int interval) const;

  // Predicted hazard, clamped to [kEps, 1 - kEps].
  double predict(int interval, int prior_events) const;
};

// Fits the model on all at-risk subject-intervals of the arm. The logit link
// uses damped Newton iterations; the identity link uses exposure-weighted
// least squares with clamped predictions. Degenerate bins under the logit
// link fall back to bin-level empirical rates (flagged in the diagnostics);
// non-convergence without separation raises HazardFitError.
DeathHazardModel fit_death_hazard(const Dataset& dataset, int arm,
                                  const HazardFitOptions& options = {});

}  // namespace recursep
