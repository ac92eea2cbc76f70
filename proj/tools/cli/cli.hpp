#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace disrupt::cli {

/// Runs one invocation. args excludes the program name. Returns the exit
/// status: 0 on success, 1 on a runtime failure, 2 on a usage error. Failures
/// print a JSON object {"error": {...}} to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace disrupt::cli
