// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hiercon::cli {

/// Runs the command line (args[0] is the program name) and returns the exit
/// code: 0 success, 1 validation/feasibility/usage failure, 2 solver
/// non-convergence, 3 I/O or parse failure.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace hiercon::cli
