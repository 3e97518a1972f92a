#include "couplex/app/main_entry.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "couplex/app/commands.hpp"
#include "couplex/error.hpp"

namespace couplex::app {
namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "couplex-out";
    std::optional<unsigned> threads;
};

void print_summary(const std::string& command, const Execution& e, const std::filesystem::path& report_path) {
    if (command == "suite") {
        const Json& rows = e.report["result"]["criteria"];
        for (const auto& r : rows) {
            std::cout << (r["passed"].get<bool>() ? "[PASS] " : "[FAIL] ") << r["id"].get<int>() << ' '
                      << r["title"].get<std::string>() << ": " << r["summary"].get<std::string>() << '\n';
        }
        std::cout << "suite: " << e.report["result"]["passed"] << " passed, " << e.report["result"]["failed"]
                  << " failed\n";
    } else {
        for (const auto& [name, verdict] : e.output.checks.items()) {
            std::cout << "check " << name << ": " << (verdict.get<bool>() ? "pass" : "FAIL") << '\n';
        }
    }
    std::cout << "report: " << report_path.string() << '\n';
}

} // namespace

unsigned resolve_threads(std::optional<unsigned> flag, const char* env_value) {
    if (flag && *flag > 0) {
        return *flag;
    }
    if (env_value != nullptr) {
        unsigned v = 0;
        const char* end = env_value + std::strlen(env_value);
        const auto res = std::from_chars(env_value, end, v);
        if (res.ec == std::errc{} && res.ptr == end && v > 0) {
            return v;
        }
    }
    return 1;
}

int run_main(int argc, char** argv, const ModelRegistry& registry) {
    CLI::App app{"couplex: coupling, mixing and Harnack-ratio experiments for SDEs"};
    app.require_subcommand(1);
    Flags flags;
    for (const auto& c : command_table()) {
        CLI::App* sub = app.add_subcommand(c.name, c.summary);
        sub->add_option("--config", flags.config, "TOML config, or a JSON report to replay");
        sub->add_option("--seed", flags.seed, "Seed; overrides the config");
        sub->add_option("--out", flags.out, "Output directory")->capture_default_str();
        sub->add_option("--threads", flags.threads, "Worker threads (fallback: COUPLEX_THREADS, then 1)")
            ->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitError;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    const Command* command = find_command(name);
    const unsigned threads = resolve_threads(flags.threads, std::getenv("COUPLEX_THREADS"));
    try {
        const Json user = flags.config.empty() ? Json::object() : load_config_file(flags.config);
        RunClock clock;
        clock.started = std::chrono::system_clock::now();
        const Execution e = execute(*command, user, flags.seed, threads, registry);
        clock.finished = std::chrono::system_clock::now();
        const auto path = write_outputs(flags.out, name, e.report, e.output, clock, threads);
        print_summary(name, e, path);
        return all_checks_pass(e.output) ? kExitOk : kExitCheckFailed;
    } catch (const ConfigError& e) {
        std::cerr << "couplex " << name << ": config error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "couplex " << name << ": error: " << e.what() << '\n';
    }
    return kExitError;
}

int run_main(int argc, char** argv) {
    static const ModelRegistry registry = ModelRegistry::with_builtins();
    return run_main(argc, argv, registry);
}

} // namespace couplex::app
