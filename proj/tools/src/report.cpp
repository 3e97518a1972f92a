#include "couplex/app/report.hpp"

#include <ctime>
#include <fstream>

#include "couplex/error.hpp"

namespace couplex::app {
namespace {

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << contents;
    if (!out) {
        throw Error("short write to '" + path.string() + "'");
    }
}

} // namespace

bool all_checks_pass(const CommandOutput& output) {
    for (const auto& [name, verdict] : output.checks.items()) {
        if (!verdict.is_boolean() || !verdict.get<bool>()) {
            return false;
        }
    }
    return true;
}

Json make_report(const std::string& command, std::uint64_t seed, const Json& resolved_config,
                 const CommandOutput& output) {
    Json r = Json::object();
    r["schema"] = kReportSchema;
    r["command"] = command;
    r["version"] = COUPLEX_VERSION;
    r["seed"] = seed;
    r["config"] = resolved_config;
    r["status"] = all_checks_pass(output) ? "pass" : "check_failed";
    r["checks"] = output.checks;
    r["result"] = output.result;
    return r;
}

std::string dump_report(const Json& report) {
    return report.dump(2) + "\n";
}

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::filesystem::path write_outputs(const std::filesystem::path& out_dir, const std::string& command,
                                    const Json& report, const CommandOutput& output, const RunClock& clock,
                                    unsigned threads) {
    std::filesystem::create_directories(out_dir);
    const auto report_path = out_dir / (command + ".json");
    write_file(report_path, dump_report(report));
    for (const auto& [name, contents] : output.files) {
        write_file(out_dir / name, contents);
    }
    Json sidecar = Json::object();
    sidecar["report"] = report_path.filename().string();
    sidecar["started_utc"] = utc_timestamp(clock.started);
    sidecar["finished_utc"] = utc_timestamp(clock.finished);
    sidecar["elapsed_seconds"] = std::chrono::duration<double>(clock.finished - clock.started).count();
    sidecar["threads"] = threads;
    if (!output.timing.empty()) {
        sidecar["detail"] = output.timing;
    }
    write_file(out_dir / (command + ".timing.json"), sidecar.dump(2) + "\n");
    return report_path;
}

} // namespace couplex::app
