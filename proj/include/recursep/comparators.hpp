#pragma once

#include <cstdint>

#include "recursep/history.hpp"
#include "recursep/test_result.hpp"

namespace recursep {

struct ComparatorOptions {
  int horizon_index = 0;  // 0 means the full grid
  // `empirical` uses the delta method on per-subject (event count, restricted
  // lifetime) pairs; it is exact when nobody is censored before the horizon
  // and refuses to run otherwise. `bootstrap` resamples within arm.
  VarianceMethod variance = VarianceMethod::empirical;
  int bootstrap_replicates = 500;
  std::uint64_t seed = 20260809;
};

// While-alive test: the effect is the log ratio of while-alive loss rates
// (treated over control) at the horizon.
TestResult wa_test(const Dataset& dataset, const ComparatorOptions& = {});

// Ghosh-Lin test: the effect is the difference in marginal mean event counts
// (treated minus control) at the horizon.
TestResult gl_test(const Dataset& dataset, const ComparatorOptions& = {});

}  // namespace recursep
