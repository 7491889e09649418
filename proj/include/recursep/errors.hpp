#pragma once

#include <stdexcept>
#include <string>

namespace recursep {

// Invalid user input: malformed files, impossible histories, bad configuration.
// The CLI maps this to exit code 2.
struct DataError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Estimation failed numerically: degenerate variance, empty risk sets,
// non-convergent fits. The CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace recursep
