#pragma once

#include <optional>
#include <string>
#include <vector>

#include "recursep/history.hpp"
#include "recursep/time_grid.hpp"

namespace recursep {

// Continuous-time record for one subject: recurrent-event times plus exactly
// one of a death time or a censoring time, in the grid's time unit.
struct RawRecord {
  std::string id;
  int arm = 0;
  std::vector<double> event_times;
  std::optional<double> death_time;
  std::optional<double> censor_time;
};

// What to do with an event that falls in the same interval as the subject's
// death. Within an interval the model resolves death before recurrences, so
// such an event cannot be represented. `reject` treats it as a data error
// (user-supplied files); `drop` truncates it away, which is the right reading
// for strictly-ordered continuous records where the collision is a
// discretization artifact, not corrupt data.
enum class DeathIntervalEvents { reject, drop };

// Maps continuous records onto the grid. Event and death times land in the
// interval (t_{k-1}, t_k]; censoring keeps every fully observed interval at
// risk. Follow-up beyond tau is administratively censored at tau, and events
// in intervals the subject no longer fully observes are truncated away.
Dataset discretize(const std::vector<RawRecord>& records, const TimeGrid& grid,
                   DeathIntervalEvents on_death_interval_event =
                       DeathIntervalEvents::reject);

}  // namespace recursep
