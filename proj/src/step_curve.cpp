#include "recursep/step_curve.hpp"

namespace recursep {

StepCurve StepCurve::cumulative() const {
  if (kind == CurveKind::cumulative) return *this;
  StepCurve out{grid, values, CurveKind::cumulative};
  double run = 0.0;
  for (double& v : out.values) {
    run += v;
    v = run;
  }
  return out;
}

std::vector<double> StepCurve::increments() const {
  if (kind == CurveKind::increment) return values;
  std::vector<double> out(values.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = values[i] - prev;
    prev = values[i];
  }
  return out;
}

}  // namespace recursep
