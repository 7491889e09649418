#include "recursep/time_grid.hpp"

#include <algorithm>
#include <string>

#include "recursep/errors.hpp"

namespace recursep {

TimeGrid::TimeGrid(std::vector<double> boundaries)
    : boundaries_(std::move(boundaries)) {
  if (boundaries_.size() < 2) {
    throw DataError("time grid needs at least one interval");
  }
  if (boundaries_.front() != 0.0) {
    throw DataError("time grid must start at 0");
  }
  for (std::size_t i = 1; i < boundaries_.size(); ++i) {
    if (!(boundaries_[i] > boundaries_[i - 1])) {
      throw DataError("time grid boundaries must be strictly increasing");
    }
  }
}

TimeGrid TimeGrid::uniform(int intervals, double tau) {
  if (intervals < 1) throw DataError("time grid needs at least one interval");
  if (!(tau > 0.0)) throw DataError("time grid horizon must be positive");
  std::vector<double> b(static_cast<std::size_t>(intervals) + 1);
  for (int k = 0; k <= intervals; ++k) {
    b[k] = tau * static_cast<double>(k) / static_cast<double>(intervals);
  }
  b.back() = tau;
  return TimeGrid(std::move(b));
}

int TimeGrid::interval_containing(double u) const {
  if (!(u > 0.0) || u > tau()) {
    throw DataError("time " + std::to_string(u) + " is outside (0, tau]");
  }
  const auto it = std::lower_bound(boundaries_.begin() + 1, boundaries_.end(), u);
  return static_cast<int>(it - boundaries_.begin());
}

int TimeGrid::first_incomplete_interval(double u) const {
  if (u >= tau()) return intervals() + 1;
  const auto it = std::upper_bound(boundaries_.begin() + 1, boundaries_.end(), u);
  return static_cast<int>(it - boundaries_.begin());
}

int TimeGrid::horizon_index(double time) const {
  const double slack = std::abs(time) * 1e-9 + 1e-12;
  int best = 0;
  for (int k = 1; k <= intervals(); ++k) {
    if (boundaries_[k] <= time + slack) best = k;
  }
  if (best < 1) {
    throw DataError("horizon " + std::to_string(time) +
                    " precedes the first grid boundary");
  }
  return best;
}

}  // namespace recursep
