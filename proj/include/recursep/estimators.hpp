#pragma once

#include "recursep/history.hpp"
#include "recursep/step_curve.hpp"

namespace recursep {

// Cumulative event rate treating death as censoring: increment at k is
// (arm events in k) / (arm at-risk count in k); zero-risk intervals
// contribute 0.
StepCurve nelson_aalen_events(const Dataset& dataset, int arm);

// Discrete Kaplan-Meier survival levels S(t_k) = prod_{j<=k} (1 - d_j/r_j).
// Subjects dying in an interval are at risk for it; censored subjects leave
// the risk set at their censor interval.
StepCurve kaplan_meier(const Dataset& dataset, int arm);

// Per-interval Ghosh-Lin increments S(t_k) * e_k / r_k.
std::vector<double> ghosh_lin_increments(const Dataset& dataset, int arm);

// Marginal mean number of recurrent events acknowledging death (cumulative).
StepCurve ghosh_lin_mean(const Dataset& dataset, int arm);

struct WhileAliveResult {
  double walr;  // events per unit time alive over [0, tau]
  double sccl;  // survival-completed cumulative loss L = walr * tau
};

// While-alive loss rate at the horizon: Ghosh-Lin mean divided by the
// restricted mean survival time sum_{j<=h} S(t_{j-1}) (t_j - t_{j-1}).
WhileAliveResult while_alive_loss(const Dataset& dataset, int arm,
                                  int tau_index);

// L(t_k) for every k (levels).
StepCurve while_alive_curve(const Dataset& dataset, int arm);

}  // namespace recursep
