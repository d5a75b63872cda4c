#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace maelstrom::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiverged = 3;

/// Entry point shared by the `maelstrom` executable and tests. args[0] is
/// the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace maelstrom::cli
