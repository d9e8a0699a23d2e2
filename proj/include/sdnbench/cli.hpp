#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sdnbench {

/// Entry point of the `sdnbench` tool. args excludes the program name.
/// Returns the process exit status; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sdnbench
