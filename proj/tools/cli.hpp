#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace reelprint::cli {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on a domain error, 2 on a usage error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reelprint::cli
