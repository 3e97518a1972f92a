#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "couplex/distribution.hpp"
#include "couplex/sde.hpp"

namespace couplex::app {

/// Insertion-ordered JSON so reports list keys in a stable, readable order.
using Json = nlohmann::ordered_json;

/// Invalid or incomplete configuration. Messages name the offending key path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// TOML document as JSON. Dates and times are rejected.
Json parse_toml(std::string_view text, std::string_view source = "config");

/// A TOML file, or the "config" object embedded in a JSON report, so any
/// report can be replayed as its own configuration.
Json load_config_file(const std::filesystem::path& path);

/// Overlays `user` on `defaults`. Every user key must exist in `defaults`
/// with a compatible type; a null default accepts any value. Tables merge
/// recursively.
Json resolve_config(const Json& defaults, const Json& user);

/// Seed from a non-negative integer or a decimal string (for values >= 2^63).
std::uint64_t parse_seed(const Json& value, std::string_view where = "seed");

/// Typed, path-aware access to a resolved configuration table.
class ConfigView {
public:
    ConfigView(const Json& table, std::string path = {});

    bool has(std::string_view key) const;  ///< present and not null
    const Json& raw(std::string_view key) const;
    ConfigView table(std::string_view key) const;

    double number(std::string_view key) const;
    /// Non-negative integer; integral floats such as 1e5 are accepted.
    std::size_t count(std::string_view key) const;
    bool flag(std::string_view key) const;
    std::string text(std::string_view key) const;
    std::vector<double> numbers(std::string_view key) const;
    /// Array of arrays of numbers; a flat array of numbers reads as 1-D points.
    std::vector<Point> points(std::string_view key) const;
    std::vector<std::vector<double>> matrix(std::string_view key) const;

    std::string where(std::string_view key) const;

private:
    const Json* table_;
    std::string path_;
};

/// Scales a sample size, keeping at least `floor` samples.
std::size_t scaled_count(std::size_t n, double scale, std::size_t floor = 100);

/// Histogram layout from a table {region = "box" | "ball" | "whole", lo, hi,
/// radius, half_width, cells}. Length-1 lo / hi broadcast to every axis.
BinSpec bins_from_config(const ConfigView& table, std::size_t dim);

} // namespace couplex::app
