#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bisimdist::cli {

/// Runs the command line `args` (without the program name). Returns the exit code:
/// 0 ok, 1 input error, 2 numeric non-convergence, 3 internal assertion.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bisimdist::cli
