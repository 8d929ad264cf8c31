#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sizzle {

/// Entry point of the command-line tool. `args` excludes the program name. Returns the exit code:
/// 0 success, 2 validation, 3 nonconvergence, 4 numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sizzle
