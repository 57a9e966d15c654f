#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace learnafe::cli {

/// Parses and runs one command line; args[0] is the program name. Returns the process exit status:
/// 0 on success, 1 on a runtime or contract error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace learnafe::cli
