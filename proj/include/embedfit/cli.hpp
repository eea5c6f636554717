#pragma once

#include <iosfwd>

#include "embedfit/error.hpp"

namespace embedfit {

// Exit codes: 0 success, 2 invalid input (arguments, configs, files, formats),
// 1 runtime failure (numerical breakdown, failed writes, failed checks).
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInvalid = 2;

int exit_code_for(ErrorCode code);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace embedfit
