#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bw::cli {

enum ExitStatus { kClean = 0, kErrors = 1, kUsage = 2 };

// Runs one `bw` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bw::cli
