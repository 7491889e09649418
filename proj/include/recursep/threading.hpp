#pragma once

#include <cstddef>
#include <functional>

namespace recursep {

// Number of workers to use: the smaller of `requested` (0 = hardware
// concurrency) and the RECURSEP_THREADS environment cap, at least 1.
std::size_t worker_count(std::size_t requested = 0);

// Runs body(i) for i in [0, n) on up to `workers` threads. Tasks are
// distributed by index stride; the first exception thrown by any task is
// rethrown after all workers join. Callers that need deterministic output
// must write to per-index slots.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace recursep
