#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace conducta::cli {

/// Runs the command line and returns the process exit code: 0 success,
/// 1 computation failure, 2 usage or validation failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace conducta::cli
