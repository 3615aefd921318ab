#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fucik {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 2 usage or config error, 3 solver failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fucik
