#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lsqroot {

/// Runs the command line `args` (without the program name).
///
/// Exit codes: 0 success, 1 usage error (bad flags, malformed expression),
/// 2 when `solve` or `rate` ends without converging.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lsqroot
