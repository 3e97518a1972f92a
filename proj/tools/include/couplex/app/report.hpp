#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "couplex/app/config.hpp"

namespace couplex::app {

inline constexpr const char* kReportSchema = "couplex.report/v1";

/// What a subcommand produces. `checks` maps check names to verdicts; any
/// false verdict turns the exit code into 2.
struct CommandOutput {
    Json result = Json::object();
    Json checks = Json::object();
    std::vector<std::pair<std::string, std::string>> files;  ///< file name -> contents
    Json timing = Json::object();  ///< wall-clock extras; written to the sidecar only
};

bool all_checks_pass(const CommandOutput& output);

/// {schema, command, version, seed, config, status, checks, result}. Contains
/// no timestamps, so equal inputs serialize to equal bytes.
Json make_report(const std::string& command, std::uint64_t seed, const Json& resolved_config,
                 const CommandOutput& output);

std::string dump_report(const Json& report);

struct RunClock {
    std::chrono::system_clock::time_point started;
    std::chrono::system_clock::time_point finished;
};

/// ISO-8601 UTC with seconds resolution.
std::string utc_timestamp(std::chrono::system_clock::time_point t);

/// Writes <out>/<command>.json, every output file, and the sidecar
/// <out>/<command>.timing.json. Returns the report path.
std::filesystem::path write_outputs(const std::filesystem::path& out_dir, const std::string& command,
                                    const Json& report, const CommandOutput& output, const RunClock& clock,
                                    unsigned threads);

} // namespace couplex::app
