#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nlbox::cli {

/// Runs the command line `args` (without the program name) and returns the
/// process exit code. Reports that are not written to a file go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nlbox::cli
