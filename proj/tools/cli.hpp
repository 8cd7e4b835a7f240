#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bisg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNoConvergence = 4;

// Runs one invocation; args exclude the program name. Results go to `out`
// unless --out names a file; errors go to `err` as {"error": {code, message}}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bisg::cli
