#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "couplex/app/config.hpp"
#include "couplex/app/report.hpp"
#include "couplex/models.hpp"

namespace couplex::app {

struct RunContext {
    std::uint64_t seed = 0;
    unsigned threads = 1;
    const ModelRegistry* registry = nullptr;
};

using Runner = std::function<CommandOutput(const ConfigView& config, const RunContext& ctx)>;

/// One subcommand: its default configuration doubles as its schema.
struct Command {
    std::string name;
    std::string summary;
    Json defaults;
    Runner run;
};

const std::vector<Command>& command_table();
const Command* find_command(std::string_view name);

struct Execution {
    Json resolved;  ///< defaults overlaid with the user config; "seed" is the seed actually used
    std::uint64_t seed = 0;
    CommandOutput output;
    Json report;
};

/// Resolves `user_config` against the command schema, applies the seed
/// override and runs. Throws ConfigError for schema problems and
/// couplex::Error for failures inside the library.
Execution execute(const Command& command, const Json& user_config, std::optional<std::uint64_t> seed_override,
                  unsigned threads, const ModelRegistry& registry);

} // namespace couplex::app
