#pragma once

#include <cstddef>
#include <vector>

#include "recursep/death_hazard.hpp"
#include "recursep/history.hpp"

namespace recursep {

struct WeightBounds {
  double lower = 0.05;
  double upper = 20.0;
};

// Per-subject, per-interval weight process W_{i,t}(a_Y, a_D): the running
// product over q <= t of (1 - h(a_D)) / (1 - h(a_Y)) while the subject
// survives interval q and h(a_D) / h(a_Y) in the death interval, with the
// hazards evaluated at the subject's own lagged event count. Identically 1
// when a_Y == a_D. Only subjects with A_i == a_Y carry weights.
class WeightProcess {
 public:
  int a_y = 0;
  int a_d = 0;
  WeightBounds bounds;
  double truncated_fraction = 0.0;

  // Weight at interval t (1..last at-risk interval of subject i).
  double at(std::size_t subject, int interval) const {
    return per_subject_[subject][interval - 1];
  }
  const std::vector<double>& for_subject(std::size_t subject) const {
    return per_subject_[subject];
  }

  std::vector<std::vector<double>> per_subject_;  // empty for the other arm
};

WeightProcess compute_weights(const Dataset& dataset,
                              const DeathHazardModel& control_model,
                              const DeathHazardModel& treated_model, int a_y,
                              int a_d, const WeightBounds& bounds = {});

}  // namespace recursep
