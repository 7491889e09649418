#include "recursep/estimators.hpp"

#include "recursep/errors.hpp"

namespace recursep {

namespace {

void require_arm(const Dataset& dataset, int arm) {
  if (arm != 0 && arm != 1) throw DataError("arm must be 0 or 1");
  if (dataset.arm_counts()[arm] == 0) throw DataError("arm has no subjects");
}

}  // namespace

StepCurve nelson_aalen_events(const Dataset& dataset, int arm) {
  require_arm(dataset, arm);
  const int K = dataset.intervals();
  StepCurve out{dataset.grid(), std::vector<double>(K, 0.0),
                CurveKind::cumulative};
  double run = 0.0;
  for (int k = 1; k <= K; ++k) {
    const int r = dataset.at_risk_count(arm, k);
    if (r > 0) run += static_cast<double>(dataset.event_count(arm, k)) / r;
    out.values[k - 1] = run;
  }
  return out;
}

StepCurve kaplan_meier(const Dataset& dataset, int arm) {
  require_arm(dataset, arm);
  const int K = dataset.intervals();
  StepCurve out{dataset.grid(), std::vector<double>(K, 0.0),
                CurveKind::cumulative};
  double surv = 1.0;
  for (int k = 1; k <= K; ++k) {
    const int r = dataset.at_risk_count(arm, k);
    if (r > 0) {
      surv *= 1.0 - static_cast<double>(dataset.death_count(arm, k)) / r;
    }
    out.values[k - 1] = surv;
  }
  return out;
}

std::vector<double> ghosh_lin_increments(const Dataset& dataset, int arm) {
  require_arm(dataset, arm);
  const int K = dataset.intervals();
  const StepCurve surv = kaplan_meier(dataset, arm);
  std::vector<double> inc(K, 0.0);
  for (int k = 1; k <= K; ++k) {
    const int r = dataset.at_risk_count(arm, k);
    if (r > 0) {
      inc[k - 1] =
          surv.at(k) * static_cast<double>(dataset.event_count(arm, k)) / r;
    }
  }
  return inc;
}

StepCurve ghosh_lin_mean(const Dataset& dataset, int arm) {
  StepCurve out{dataset.grid(), ghosh_lin_increments(dataset, arm),
                CurveKind::increment};
  return out.cumulative();
}

namespace {

// Restricted mean survival time sum_{j<=h} S(t_{j-1}) (t_j - t_{j-1}).
double restricted_mean(const Dataset& dataset, const StepCurve& surv, int h) {
  const TimeGrid& grid = dataset.grid();
  double rmst = 0.0;
  for (int j = 1; j <= h; ++j) {
    rmst += surv.level(j - 1, 1.0) * (grid.end_of(j) - grid.start_of(j));
  }
  return rmst;
}

}  // namespace

WhileAliveResult while_alive_loss(const Dataset& dataset, int arm,
                                  int tau_index) {
  require_arm(dataset, arm);
  if (tau_index < 1 || tau_index > dataset.intervals()) {
    throw DataError("horizon index out of range");
  }
  const StepCurve surv = kaplan_meier(dataset, arm);
  const double rmst = restricted_mean(dataset, surv, tau_index);
  if (!(rmst > 0.0)) {
    throw NumericError("while-alive estimand undefined: zero time at risk");
  }
  const StepCurve mean = ghosh_lin_mean(dataset, arm);
  const double walr = mean.at(tau_index) / rmst;
  return {walr, walr * dataset.grid().end_of(tau_index)};
}

StepCurve while_alive_curve(const Dataset& dataset, int arm) {
  require_arm(dataset, arm);
  const int K = dataset.intervals();
  const TimeGrid& grid = dataset.grid();
  const StepCurve surv = kaplan_meier(dataset, arm);
  const StepCurve mean = ghosh_lin_mean(dataset, arm);
  StepCurve out{grid, std::vector<double>(K, 0.0), CurveKind::cumulative};
  double rmst = 0.0;
  for (int k = 1; k <= K; ++k) {
    rmst += surv.level(k - 1, 1.0) * (grid.end_of(k) - grid.start_of(k));
    out.values[k - 1] = rmst > 0.0 ? mean.at(k) / rmst * grid.end_of(k) : 0.0;
  }
  return out;
}

}  // namespace recursep
