#pragma once

#include <string>
#include <vector>

namespace clap {

// Dispatches one CLI invocation (argv without the program name).
// Exit codes: 0 success, 1 validation error, 2 runtime error.
int run_command(const std::vector<std::string>& args);

}  // namespace clap
