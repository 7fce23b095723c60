#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dirac/error.hpp"

namespace dirac::cli {

/// Process exit code for an error kind: 2 parse, 3 bad input or usage,
/// 4 numerical failure, 5 io, 1 anything else.
int exit_code(ErrorKind kind);

/// Runs one subcommand. `args` excludes the program name. CSV output goes to
/// the --out files (or `out` when absent); errors are written to `err` as a
/// JSON object {kind, message, context}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dirac::cli
