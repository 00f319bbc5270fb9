#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace compsim::cli {

/// Runs one command line (without the program name). Results go to files
/// or `out`, progress and errors to `err`. Returns the process exit code:
/// 0 success, 1 usage error, 2 data error, 3 computation error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace compsim::cli
