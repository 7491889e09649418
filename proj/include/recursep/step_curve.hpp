#pragma once

#include <vector>

#include "recursep/time_grid.hpp"

namespace recursep {

enum class CurveKind { increment, cumulative };

// Piecewise-constant curve on a grid: values[k-1] belongs to interval k,
// either as the per-interval increment or as the level at t_k.
struct StepCurve {
  TimeGrid grid;
  std::vector<double> values;
  CurveKind kind = CurveKind::cumulative;

  // Value attached to interval k (1..K).
  double at(int interval) const { return values[interval - 1]; }

  // Level at t_k for a cumulative curve, with at_time(0) = `origin`
  // (0 for counting curves, 1 for survival).
  double level(int interval, double origin = 0.0) const {
    return interval == 0 ? origin : values[interval - 1];
  }

  StepCurve cumulative() const;
  std::vector<double> increments() const;
};

}  // namespace recursep
