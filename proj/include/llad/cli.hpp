#pragma once

#include <string>
#include <vector>

namespace llad {

// Runs the command-line driver; returns the process exit code
// (0 success, 1 user error, 2 internal invariant violation).
int cli_run(const std::vector<std::string>& args);

}  // namespace llad
