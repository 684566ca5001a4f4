#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace odcsr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNonConverged = 3;

/// Entry point for the `odcsr` tool. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace odcsr::cli
