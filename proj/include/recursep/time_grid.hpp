#pragma once

#include <vector>

namespace recursep {

// Discrete partition 0 = t_0 < t_1 < ... < t_K = tau. Intervals are
// left-open/right-closed: interval k covers (t_{k-1}, t_k], k = 1..K.
class TimeGrid {
 public:
  // Validates: strictly increasing, boundaries[0] == 0, at least one interval.
  explicit TimeGrid(std::vector<double> boundaries);

  // K equal-width intervals over [0, tau].
  static TimeGrid uniform(int intervals, double tau);

  int intervals() const { return static_cast<int>(boundaries_.size()) - 1; }
  double tau() const { return boundaries_.back(); }
  const std::vector<double>& boundaries() const { return boundaries_; }

  double start_of(int interval) const { return boundaries_[interval - 1]; }
  double end_of(int interval) const { return boundaries_[interval]; }

  // Interval k with t_{k-1} < u <= t_k. Requires 0 < u <= tau.
  int interval_containing(double u) const;

  // First interval not fully observed when follow-up ends at u: the smallest
  // k with t_k > u, or K+1 when the whole grid is covered (u >= tau).
  int first_incomplete_interval(double u) const;

  // Largest k with t_k <= time (with a tiny relative slack so boundary
  // values written to file map back to themselves). Throws if the time
  // precedes the first boundary.
  int horizon_index(double time) const;

  bool operator==(const TimeGrid& other) const = default;

 private:
  std::vector<double> boundaries_;
};

}  // namespace recursep
