#include "couplex/app/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <toml.hpp>

namespace couplex::app {
namespace {

Json toml_to_json(const toml::node& node, const std::string& path) {
    if (const auto* t = node.as_table()) {
        Json out = Json::object();
        for (auto&& [key, value] : *t) {
            const std::string k(key.str());
            out[k] = toml_to_json(value, path.empty() ? k : path + "." + k);
        }
        return out;
    }
    if (const auto* a = node.as_array()) {
        Json out = Json::array();
        for (std::size_t i = 0; i < a->size(); ++i) {
            out.push_back(toml_to_json(*a->get(i), path + "[" + std::to_string(i) + "]"));
        }
        return out;
    }
    if (const auto* s = node.as_string()) {
        return s->get();
    }
    if (const auto* i = node.as_integer()) {
        return i->get();
    }
    if (const auto* f = node.as_floating_point()) {
        return f->get();
    }
    if (const auto* b = node.as_boolean()) {
        return b->get();
    }
    throw ConfigError("key '" + path + "': dates and times are not supported");
}

std::string kind_name(const Json& j) {
    if (j.is_number()) {
        return "number";
    }
    if (j.is_object()) {
        return "table";
    }
    return j.type_name();
}

bool same_kind(const Json& a, const Json& b) {
    return (a.is_number() && b.is_number()) || (a.is_string() && b.is_string()) ||
           (a.is_boolean() && b.is_boolean()) || (a.is_array() && b.is_array()) ||
           (a.is_object() && b.is_object());
}

std::string join_path(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

Json merge(const Json& defaults, const Json& user, const std::string& path, std::vector<std::string>& errors) {
    Json out = defaults;
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string p = join_path(path, it.key());
        const auto d = defaults.find(it.key());
        if (d == defaults.end()) {
            std::string allowed;
            for (auto k = defaults.begin(); k != defaults.end(); ++k) {
                allowed += allowed.empty() ? k.key() : ", " + k.key();
            }
            errors.push_back("unknown key '" + p + "' (allowed here: " + allowed + ")");
            continue;
        }
        if (d->is_null()) {
            out[it.key()] = it.value();
        } else if (d->is_object() && it.value().is_object()) {
            out[it.key()] = merge(*d, it.value(), p, errors);
        } else if (!same_kind(*d, it.value())) {
            errors.push_back("key '" + p + "': expected " + kind_name(*d) + ", got " + kind_name(it.value()));
        } else {
            out[it.key()] = it.value();
        }
    }
    return out;
}

std::vector<double> as_numbers(const Json& j, const std::string& where) {
    if (j.is_number()) {
        return {j.get<double>()};
    }
    if (!j.is_array()) {
        throw ConfigError("key '" + where + "' must be a number or an array of numbers");
    }
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) {
            throw ConfigError("key '" + where + "' must contain only numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace

Json parse_toml(std::string_view text, std::string_view source) {
    try {
        const toml::table table = toml::parse(text, source);
        return toml_to_json(table, "");
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << source << ':' << e.source().begin.line << ':' << e.source().begin.column << ": "
            << e.description();
        throw ConfigError(msg.str());
    }
}

Json load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (path.extension() == ".json") {
        Json j;
        try {
            j = Json::parse(text);
        } catch (const Json::parse_error& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
        if (!j.is_object()) {
            throw ConfigError(path.string() + ": expected a JSON object");
        }
        const auto embedded = j.find("config");
        return embedded != j.end() && j.contains("schema") ? *embedded : j;
    }
    return parse_toml(text, path.string());
}

Json resolve_config(const Json& defaults, const Json& user) {
    if (!user.is_object()) {
        throw ConfigError("configuration must be a table");
    }
    std::vector<std::string> errors;
    Json out = merge(defaults, user, "", errors);
    if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) {
            msg += "\n  " + e;
        }
        throw ConfigError(msg);
    }
    return out;
}

std::uint64_t parse_seed(const Json& value, std::string_view where) {
    const std::string w(where);
    if (value.is_null()) {
        throw ConfigError("key '" + w + "' is required (set it in the config or pass --seed)");
    }
    if (value.is_number_unsigned()) {
        return value.get<std::uint64_t>();
    }
    if (value.is_number_integer()) {
        const auto v = value.get<std::int64_t>();
        if (v < 0) {
            throw ConfigError("key '" + w + "' must be non-negative");
        }
        return static_cast<std::uint64_t>(v);
    }
    if (value.is_string()) {
        const auto s = value.get<std::string>();
        std::uint64_t out = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
            throw ConfigError("key '" + w + "' must be an unsigned 64-bit decimal integer");
        }
        return out;
    }
    throw ConfigError("key '" + w + "' must be an integer or a decimal string");
}

ConfigView::ConfigView(const Json& table, std::string path) : table_(&table), path_(std::move(path)) {
    if (!table.is_object()) {
        throw ConfigError("key '" + path_ + "' must be a table");
    }
}

std::string ConfigView::where(std::string_view key) const {
    return join_path(path_, std::string(key));
}

bool ConfigView::has(std::string_view key) const {
    const auto it = table_->find(std::string(key));
    return it != table_->end() && !it->is_null();
}

const Json& ConfigView::raw(std::string_view key) const {
    const auto it = table_->find(std::string(key));
    if (it == table_->end() || it->is_null()) {
        throw ConfigError("required key '" + where(key) + "' is missing");
    }
    return *it;
}

ConfigView ConfigView::table(std::string_view key) const {
    return ConfigView(raw(key), where(key));
}

double ConfigView::number(std::string_view key) const {
    const Json& j = raw(key);
    if (!j.is_number()) {
        throw ConfigError("key '" + where(key) + "' must be a number");
    }
    return j.get<double>();
}

std::size_t ConfigView::count(std::string_view key) const {
    const Json& j = raw(key);
    if (j.is_number_unsigned()) {
        return j.get<std::size_t>();
    }
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
        return static_cast<std::size_t>(j.get<std::int64_t>());
    }
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (v >= 0.0 && v < 0x1.0p53 && std::floor(v) == v) {
            return static_cast<std::size_t>(v);
        }
    }
    throw ConfigError("key '" + where(key) + "' must be a non-negative integer");
}

bool ConfigView::flag(std::string_view key) const {
    const Json& j = raw(key);
    if (!j.is_boolean()) {
        throw ConfigError("key '" + where(key) + "' must be true or false");
    }
    return j.get<bool>();
}

std::string ConfigView::text(std::string_view key) const {
    const Json& j = raw(key);
    if (!j.is_string()) {
        throw ConfigError("key '" + where(key) + "' must be a string");
    }
    return j.get<std::string>();
}

std::vector<double> ConfigView::numbers(std::string_view key) const {
    return as_numbers(raw(key), where(key));
}

std::vector<Point> ConfigView::points(std::string_view key) const {
    const Json& j = raw(key);
    if (!j.is_array()) {
        throw ConfigError("key '" + where(key) + "' must be an array of points");
    }
    std::vector<Point> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(as_numbers(j[i], where(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::vector<std::vector<double>> ConfigView::matrix(std::string_view key) const {
    return points(key);
}

std::size_t scaled_count(std::size_t n, double scale, std::size_t floor) {
    const double v = std::round(static_cast<double>(n) * scale);
    return std::max<std::size_t>(floor, static_cast<std::size_t>(std::max(v, 0.0)));
}

BinSpec bins_from_config(const ConfigView& t, std::size_t dim) {
    const std::string region = t.text("region");
    const std::size_t cells = t.count("cells");
    if (cells == 0) {
        throw ConfigError("key '" + t.where("cells") + "' must be positive");
    }
    auto corner = [&](std::string_view key) {
        auto v = t.numbers(key);
        if (v.size() == 1 && dim > 1) {
            v.assign(dim, v[0]);
        }
        if (v.size() != dim) {
            throw ConfigError("key '" + t.where(key) + "' must have " + std::to_string(dim) + " entries");
        }
        return v;
    };
    if (region == "box") {
        return BinSpec::over_box(corner("lo"), corner("hi"), cells);
    }
    if (region == "ball") {
        return BinSpec::over_ball(dim, t.number("radius"), cells);
    }
    if (region == "whole") {
        return BinSpec::whole_space(dim, t.number("half_width"), cells);
    }
    throw ConfigError("key '" + t.where("region") + "' must be \"box\", \"ball\" or \"whole\"");
}

} // namespace couplex::app
