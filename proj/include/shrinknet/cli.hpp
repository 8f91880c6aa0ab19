#pragma once

// Command-line front end: infer, simulate, benchmark, stability.

#include <ostream>
#include <string_view>

namespace shrinknet {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr int kFormatVersion = 1;

/// Exit status: 0 ok, 2 input error, 3 numerical failure, 4 configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shrinknet
