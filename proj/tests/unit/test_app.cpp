#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <string>

#include "couplex/app/commands.hpp"
#include "couplex/app/config.hpp"
#include "couplex/app/main_entry.hpp"
#include "couplex/app/report.hpp"
#include "couplex/app/suite.hpp"

using namespace couplex;
using namespace couplex::app;

namespace {

const ModelRegistry& registry() {
    static const ModelRegistry r = ModelRegistry::with_builtins();
    return r;
}

std::string error_of(const Json& defaults, const Json& user) {
    try {
        resolve_config(defaults, user);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Config, ParsesTomlIntoJson) {
    const Json j = parse_toml("seed = 3\nmodel = \"ou{theta=1}\"\n[bins]\ncells = 10\nlo = [-1.0]\n");
    EXPECT_EQ(j["seed"].get<std::int64_t>(), 3);
    EXPECT_EQ(j["model"], "ou{theta=1}");
    EXPECT_EQ(j["bins"]["cells"].get<int>(), 10);
    EXPECT_THROW(parse_toml("n = [1,"), ConfigError);
}

TEST(Config, ResolveReportsUnknownKeysAndTypeMismatches) {
    const Json defaults = Json::parse(R"({"n": 10, "p": 0.5, "name": "x", "opt": null, "t": {"a": 1}})");
    const Json merged = resolve_config(defaults, Json::parse(R"({"p": 0.25, "opt": [1, 2], "t": {"a": 2}})"));
    EXPECT_EQ(merged["p"], 0.25);
    EXPECT_EQ(merged["n"], 10);
    EXPECT_EQ(merged["opt"].size(), 2u);
    EXPECT_EQ(merged["t"]["a"], 2);

    const std::string msg = error_of(defaults, Json::parse(R"({"samples": 1, "p": "high", "t": {"b": 1}})"));
    EXPECT_NE(msg.find("unknown key 'samples'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("key 'p': expected number, got string"), std::string::npos) << msg;
    EXPECT_NE(msg.find("t.b"), std::string::npos) << msg;
}

TEST(Config, SeedParsing) {
    EXPECT_EQ(parse_seed(Json(42)), 42u);
    EXPECT_EQ(parse_seed(Json("18446744073709551615")), 18446744073709551615ull);
    EXPECT_THROW(parse_seed(Json(-1)), ConfigError);
    EXPECT_THROW(parse_seed(Json(1.5)), ConfigError);
    EXPECT_THROW(parse_seed(Json("12x")), ConfigError);
}

TEST(Config, ViewAccessors) {
    const Json j = Json::parse(R"({"n": 1e5, "x": [1, 2], "pts": [[0, 1], [2, 3]], "flag": true, "s": "a"})");
    const ConfigView v(j);
    EXPECT_EQ(v.count("n"), 100000u);
    EXPECT_EQ(v.numbers("x"), (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(v.points("x").size(), 2u);
    EXPECT_EQ(v.points("pts")[1], (Point{2.0, 3.0}));
    EXPECT_TRUE(v.flag("flag"));
    EXPECT_EQ(v.text("s"), "a");
    EXPECT_THROW(v.number("s"), ConfigError);
    EXPECT_THROW(v.count("missing"), ConfigError);
    EXPECT_EQ(scaled_count(1000, 0.01), 100u);
    EXPECT_EQ(scaled_count(1000, 0.5), 500u);
}

TEST(Config, BinsFromConfigBroadcastsCorners) {
    const Json j = Json::parse(R"({"region": "box", "lo": [-1], "hi": [1], "cells": 4})");
    const BinSpec b = bins_from_config(ConfigView(j), 2);
    EXPECT_EQ(b.size(), 16u);
    EXPECT_EQ(b.region.kind(), Region::Kind::box);
    const Json ball = Json::parse(R"({"region": "ball", "radius": 0.5, "cells": 4})");
    EXPECT_EQ(bins_from_config(ConfigView(ball), 2).region.kind(), Region::Kind::ball);
}

TEST(Commands, TableCoversEverySubcommand) {
    for (const char* name : {"simulate", "estimate-md", "couple", "meet-1d", "girsanov-check", "harnack-parabolic",
                             "harnack-elliptic", "md-elliptic", "tv-curve", "oracle", "suite"}) {
        const Command* c = find_command(name);
        ASSERT_NE(c, nullptr) << name;
        EXPECT_TRUE(c->defaults.is_object());
    }
    EXPECT_EQ(find_command("bogus"), nullptr);
}

TEST(Commands, MissingSeedIsAConfigError) {
    const Command* c = find_command("couple");
    EXPECT_THROW(execute(*c, Json::object(), std::nullopt, 1, registry()), ConfigError);
}

TEST(Commands, ExecutionIsDeterministicAndReplayable) {
    const Command* c = find_command("couple");
    const Json user = Json::parse(R"({"n": 2000})");
    const Execution a = execute(*c, user, 17, 1, registry());
    const Execution b = execute(*c, user, 17, 2, registry());
    EXPECT_EQ(dump_report(a.report), dump_report(b.report));
    EXPECT_EQ(a.report["schema"], kReportSchema);
    EXPECT_EQ(a.report["seed"], 17);
    EXPECT_EQ(a.report["config"]["seed"], 17);
    // The embedded config reproduces the report without a seed override.
    const Execution replay = execute(*c, a.report["config"], std::nullopt, 1, registry());
    EXPECT_EQ(dump_report(replay.report), dump_report(a.report));
    EXPECT_EQ(a.report["status"], all_checks_pass(a.output) ? "pass" : "check_failed");
    EXPECT_EQ(a.output.files.front().first, "coupling.csv");
}

TEST(Commands, EstimateMdReportFields) {
    const Command* c = find_command("estimate-md");
    const Json user = Json::parse(R"({"n": 2000, "bins": {"cells": 10}})");
    const Execution e = execute(*c, user, 5, 1, registry());
    const Json& r = e.report["result"];
    for (const char* key : {"kappa", "pairs", "argmin", "n", "bins", "convention"}) {
        EXPECT_TRUE(r.contains(key)) << key;
    }
}

TEST(Commands, OracleQueryNeedsNoSimulation) {
    const Command* c = find_command("oracle");
    const Json user = Json::parse(R"({"query": "reflection", "distance": 1.0, "horizon": 1.0})");
    const Execution e = execute(*c, user, 1, 1, registry());
    EXPECT_NEAR(e.report["result"]["value"].get<double>(), 0.4795001221869535, 1e-12);
}

TEST(Commands, UserRegisteredModelIsResolved) {
    ModelRegistry custom = ModelRegistry::with_builtins();
    custom.add("pinned", [](const ModelSpec&) { return models::ornstein_uhlenbeck(1, 3.0); }, "OU with theta 3");
    const Command* c = find_command("estimate-md");
    const Json user = Json::parse(R"({"model": "pinned{}", "n": 500, "bins": {"cells": 5}})");
    const Execution e = execute(*c, user, 2, 1, custom);
    EXPECT_GT(e.report["result"]["kappa"].get<double>(), 0.0);
    EXPECT_THROW(execute(*c, user, 2, 1, registry()), std::exception);
}

TEST(MainEntry, ThreadResolution) {
    EXPECT_EQ(resolve_threads(4u, "2"), 4u);
    EXPECT_EQ(resolve_threads(std::nullopt, "3"), 3u);
    EXPECT_EQ(resolve_threads(std::nullopt, "x"), 1u);
    EXPECT_EQ(resolve_threads(std::nullopt, "0"), 1u);
    EXPECT_EQ(resolve_threads(std::nullopt, nullptr), 1u);
}

TEST(Suite, CriterionLinesAndTitles) {
    for (int id = 1; id <= kCriterionCount; ++id) {
        EXPECT_FALSE(criterion_title(id).empty());
    }
    CriterionResult r{3, "t", true, "ok", Json::object(), 1.25};
    EXPECT_EQ(format_criterion_line(r).rfind("[PASS] 3 t: ok", 0), 0u);
    EXPECT_FALSE(criterion_json(r).contains("seconds"));
}

TEST(ShippedConfigs, EveryFileResolvesAgainstItsCommand) {
    const std::map<std::string, std::string> owner{
        {"simulate", "simulate"},           {"estimate_md", "estimate-md"},
        {"couple", "couple"},               {"meet_1d", "meet-1d"},
        {"girsanov_check", "girsanov-check"}, {"harnack_parabolic", "harnack-parabolic"},
        {"harnack_elliptic", "harnack-elliptic"}, {"md_elliptic", "md-elliptic"},
        {"tv_curve", "tv-curve"},           {"tv_chain", "tv-curve"},
        {"oracle", "oracle"},               {"suite", "suite"},
        {"suite_quick", "suite"}};
    std::size_t seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(COUPLEX_CONFIG_DIR)) {
        const std::string stem = entry.path().stem().string();
        ASSERT_TRUE(owner.count(stem)) << "no command for " << stem;
        const Command* c = find_command(owner.at(stem));
        ASSERT_NE(c, nullptr);
        const Json resolved = resolve_config(c->defaults, load_config_file(entry.path()));
        EXPECT_NO_THROW(parse_seed(resolved["seed"])) << stem;
        ++seen;
    }
    EXPECT_EQ(seen, owner.size());
}
