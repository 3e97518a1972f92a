#pragma once

#include <optional>

#include "couplex/models.hpp"

namespace couplex::app {

/// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailed = 2;

/// --threads if given, else COUPLEX_THREADS if it parses as a positive
/// integer, else 1.
unsigned resolve_threads(std::optional<unsigned> flag, const char* env_value);

/// Full command line tool. Programs that register extra models build their
/// own registry and call this from main.
int run_main(int argc, char** argv, const ModelRegistry& registry);
int run_main(int argc, char** argv);

} // namespace couplex::app
