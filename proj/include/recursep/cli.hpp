#pragma once

#include <string>
#include <vector>

namespace recursep {

// Entry point behind the `recursep` binary. Returns the process exit code:
// 0 on success, 2 on input errors, 3 on numerical or degenerate failures.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace recursep
