#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "recursep/time_grid.hpp"

namespace recursep {

// One subject's observed history on a shared grid. Intervals are 1-based.
// A terminal event in interval k precludes recurrent events at or after k
// (within the interval, death is resolved before recurrences). Censoring at
// interval k means follow-up ended at the start of k, so the subject is at
// risk through k-1 only; a subject observed through the whole grid carries
// no censor interval.
struct SubjectHistory {
  std::string id;
  int arm = 0;  // treatment A in {0, 1}
  std::vector<int> event_counts;  // event_counts[k-1] = increment in interval k
  std::optional<int> death_interval;
  std::optional<int> censor_interval;

  // Throws DataError if any invariant fails on a grid with K intervals.
  void validate(int intervals) const;

  // Alive at the start of the interval and not yet censored.
  bool at_risk(int interval) const {
    return (!death_interval || interval <= *death_interval) &&
           (!censor_interval || interval < *censor_interval);
  }

  // Last interval in which the subject is at risk; 0 if never at risk.
  int last_at_risk(int intervals) const {
    int last = intervals;
    if (death_interval) last = std::min(last, *death_interval);
    if (censor_interval) last = std::min(last, *censor_interval - 1);
    return last;
  }

  // Cumulative number of events Y_k by the end of interval k (Y_0 = 0).
  int cumulative_events(int interval) const;

  int total_events() const;

  bool operator==(const SubjectHistory& other) const = default;
};

// Immutable collection of subject histories on a shared grid, together with
// per-arm counting-process views (at-risk counts, death counts, event counts
// per interval) precomputed at construction.
class Dataset {
 public:
  Dataset(TimeGrid grid, std::vector<SubjectHistory> subjects);

  const TimeGrid& grid() const { return grid_; }
  int intervals() const { return grid_.intervals(); }
  std::size_t size() const { return subjects_.size(); }
  const SubjectHistory& subject(std::size_t i) const { return subjects_[i]; }
  const std::vector<SubjectHistory>& subjects() const { return subjects_; }
  std::array<std::size_t, 2> arm_counts() const { return arm_counts_; }

  // Subjects of `arm` at risk at the start of the interval.
  int at_risk_count(int arm, int interval) const {
    return at_risk_[arm][interval];
  }
  // Deaths of `arm` within the interval.
  int death_count(int arm, int interval) const {
    return deaths_[arm][interval];
  }
  // Recurrent events of `arm` within the interval.
  int event_count(int arm, int interval) const {
    return events_[arm][interval];
  }

  // Index of the first subject with this id; DataError if unknown.
  std::size_t index_of(const std::string& id) const;

  // New dataset made of copies of the given subject indices (bootstrap).
  Dataset resample(const std::vector<std::size_t>& indices) const;

  bool operator==(const Dataset& other) const {
    return grid_ == other.grid_ && subjects_ == other.subjects_;
  }

 private:
  TimeGrid grid_;
  std::vector<SubjectHistory> subjects_;
  std::array<std::size_t, 2> arm_counts_{0, 0};
  // Indexed [arm][interval], interval 1..K (slot 0 unused).
  std::array<std::vector<int>, 2> at_risk_;
  std::array<std::vector<int>, 2> deaths_;
  std::array<std::vector<int>, 2> events_;
  std::unordered_map<std::string, std::size_t> id_index_;
};

// At-risk indicator Z for the given subject id; interval must be in 1..K.
int at_risk(const Dataset& dataset, const std::string& id, int interval);

// Y_k for a subject; interval in 0..K.
int cumulative_events(const SubjectHistory& subject, int interval);

}  // namespace recursep
