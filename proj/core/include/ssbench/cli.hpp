#pragma once

#include <string>
#include <vector>

#include "ssbench/common.hpp"

namespace ssbench {

// Command-line misuse (unknown command, bad flag/config value); maps to
// exit code 1, while runtime failures map to 2.
struct UsageError : Error {
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

// Entry point behind the ssbench binary. Commands: gen-data, train, attack,
// defend, eval, sweep, report. Returns the process exit code.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace ssbench
