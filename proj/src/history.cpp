#include "recursep/history.hpp"

#include <algorithm>

#include "recursep/errors.hpp"

namespace recursep {

void SubjectHistory::validate(int intervals) const {
  if (arm != 0 && arm != 1) {
    throw DataError("subject " + id + ": arm must be 0 or 1");
  }
  if (static_cast<int>(event_counts.size()) != intervals) {
    throw DataError("subject " + id + ": event counts do not match the grid");
  }
  for (int c : event_counts) {
    if (c < 0) throw DataError("subject " + id + ": negative event count");
  }
  if (death_interval && (*death_interval < 1 || *death_interval > intervals)) {
    throw DataError("subject " + id + ": death interval out of range");
  }
  if (censor_interval && (*censor_interval < 1 || *censor_interval > intervals)) {
    throw DataError("subject " + id + ": censor interval out of range");
  }
  if (death_interval && censor_interval && !(*death_interval < *censor_interval)) {
    throw DataError("subject " + id +
                    ": death must precede censoring when both are given");
  }
  if (death_interval) {
    for (int k = *death_interval; k <= intervals; ++k) {
      if (event_counts[k - 1] != 0) {
        throw DataError("subject " + id +
                        ": events at or after the death interval");
      }
    }
  }
  if (censor_interval) {
    for (int k = *censor_interval; k <= intervals; ++k) {
      if (event_counts[k - 1] != 0) {
        throw DataError("subject " + id + ": events after censoring");
      }
    }
  }
}

int SubjectHistory::cumulative_events(int interval) const {
  if (interval < 0 || interval > static_cast<int>(event_counts.size())) {
    throw DataError("subject " + id + ": interval out of range");
  }
  int sum = 0;
  for (int k = 1; k <= interval; ++k) sum += event_counts[k - 1];
  return sum;
}

int SubjectHistory::total_events() const {
  int sum = 0;
  for (int c : event_counts) sum += c;
  return sum;
}

Dataset::Dataset(TimeGrid grid, std::vector<SubjectHistory> subjects)
    : grid_(std::move(grid)), subjects_(std::move(subjects)) {
  const int K = grid_.intervals();
  for (int a : {0, 1}) {
    at_risk_[a].assign(K + 1, 0);
    deaths_[a].assign(K + 1, 0);
    events_[a].assign(K + 1, 0);
  }
  for (std::size_t i = 0; i < subjects_.size(); ++i) {
    const SubjectHistory& s = subjects_[i];
    s.validate(K);
    ++arm_counts_[s.arm];
    const int last = s.last_at_risk(K);
    for (int k = 1; k <= last; ++k) {
      ++at_risk_[s.arm][k];
      events_[s.arm][k] += s.event_counts[k - 1];
    }
    if (s.death_interval) ++deaths_[s.arm][*s.death_interval];
    id_index_.emplace(s.id, i);  // first occurrence wins
  }
  if (arm_counts_[0] == 0 || arm_counts_[1] == 0) {
    throw DataError("dataset must contain subjects in both arms");
  }
}

std::size_t Dataset::index_of(const std::string& id) const {
  const auto it = id_index_.find(id);
  if (it == id_index_.end()) throw DataError("unknown subject id: " + id);
  return it->second;
}

Dataset Dataset::resample(const std::vector<std::size_t>& indices) const {
  std::vector<SubjectHistory> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(subjects_[i]);
  return Dataset(grid_, std::move(picked));
}

int at_risk(const Dataset& dataset, const std::string& id, int interval) {
  if (interval < 1 || interval > dataset.intervals()) {
    throw DataError("interval out of range");
  }
  return dataset.subject(dataset.index_of(id)).at_risk(interval) ? 1 : 0;
}

int cumulative_events(const SubjectHistory& subject, int interval) {
  return subject.cumulative_events(interval);
}

}  // namespace recursep
