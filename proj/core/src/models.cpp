#include "couplex/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "couplex/error.hpp"

namespace couplex {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

double parse_number(std::string_view text, std::string_view context) {
    text = trim(text);
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw InvalidArgument("model spec: cannot parse number '" + std::string(text) + "' in '" +
                              std::string(context) + "'");
    }
    return value;
}

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

MatrixField isotropic(std::size_t d, double s) {
    return [d, s](std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            out[i * d + i] = s;
        }
    };
}

std::string with_params(std::string name, std::initializer_list<std::pair<const char*, double>> kv) {
    ModelSpec spec{std::move(name), {}};
    for (const auto& [k, v] : kv) {
        spec.params[k] = v;
    }
    return spec.str();
}

} // namespace

ModelSpec ModelSpec::parse(std::string_view text) {
    const std::string_view whole = trim(text);
    ModelSpec spec;
    const auto brace = whole.find('{');
    if (brace == std::string_view::npos) {
        spec.name = std::string(whole);
    } else {
        if (whole.back() != '}') {
            throw InvalidArgument("model spec '" + std::string(whole) + "' is missing a closing '}'");
        }
        spec.name = std::string(trim(whole.substr(0, brace)));
        std::string_view body = whole.substr(brace + 1, whole.size() - brace - 2);
        while (!trim(body).empty()) {
            const auto comma = body.find(',');
            const std::string_view item = trim(body.substr(0, comma));
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) {
                throw InvalidArgument("model spec: expected key=value, got '" + std::string(item) + "'");
            }
            const std::string key(trim(item.substr(0, eq)));
            if (key.empty()) {
                throw InvalidArgument("model spec: empty parameter name in '" + std::string(whole) + "'");
            }
            spec.params[key] = parse_number(item.substr(eq + 1), whole);
            if (comma == std::string_view::npos) {
                break;
            }
            body.remove_prefix(comma + 1);
        }
    }
    if (spec.name.empty()) {
        throw InvalidArgument("model spec: empty model name");
    }
    return spec;
}

std::string ModelSpec::str() const {
    std::ostringstream os;
    os.precision(17);
    os << name;
    if (!params.empty()) {
        os << '{';
        bool first = true;
        for (const auto& [k, v] : params) {
            os << (first ? "" : ",") << k << '=' << v;
            first = false;
        }
        os << '}';
    }
    return os.str();
}

double ModelSpec::get(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

std::size_t ModelSpec::get_dim(std::size_t fallback) const {
    const double d = get("d", static_cast<double>(fallback));
    if (d < 1.0 || d != std::floor(d) || d > 64.0) {
        throw InvalidArgument("model spec '" + str() + "': d must be an integer in [1, 64]");
    }
    return static_cast<std::size_t>(d);
}

void ModelSpec::expect_only(std::initializer_list<std::string_view> allowed) const {
    for (const auto& [k, _] : params) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
            std::string names;
            for (auto a : allowed) {
                names += (names.empty() ? "" : ", ") + std::string(a);
            }
            throw InvalidArgument("model '" + name + "' has no parameter '" + k + "' (accepted: " + names + ")");
        }
    }
}

namespace models {

SdeModel zero(std::size_t dim) {
    return SdeModel(
        dim, [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); },
        isotropic(dim, 0.0), CoefficientBounds{0.0, 0.0, std::nullopt},
        with_params("zero", {{"d", static_cast<double>(dim)}}));
}

SdeModel brownian(std::size_t dim, double sigma) {
    if (!(sigma > 0.0)) {
        throw InvalidArgument("bm: sigma must be positive");
    }
    return SdeModel(
        dim, [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); },
        isotropic(dim, sigma), CoefficientBounds{0.0, sigma, 1.0 / sigma},
        with_params("bm", {{"d", static_cast<double>(dim)}, {"sigma", sigma}}));
}

SdeModel ornstein_uhlenbeck(std::size_t dim, double theta, double sigma) {
    if (!(sigma > 0.0)) {
        throw InvalidArgument("ou: sigma must be positive");
    }
    return SdeModel(
        dim,
        [theta](std::span<const double> x, std::span<double> out) {
            for (std::size_t i = 0; i < x.size(); ++i) {
                out[i] = -theta * x[i];
            }
        },
        isotropic(dim, sigma), CoefficientBounds{std::nullopt, sigma, 1.0 / sigma},
        with_params("ou", {{"d", static_cast<double>(dim)}, {"theta", theta}, {"sigma", sigma}}));
}

SdeModel bounded_drift_1d(double a, double s0, double s1) {
    if (!(s0 > std::abs(s1))) {
        throw InvalidArgument("bounded_drift_1d: need s0 > |s1| for a non-degenerate diffusion");
    }
    return SdeModel(
        1, [a](std::span<const double> x, std::span<double> out) { out[0] = -a * sgn(x[0]); },
        [s0, s1](std::span<const double> x, std::span<double> out) { out[0] = s0 + s1 * std::sin(x[0]); },
        CoefficientBounds{std::abs(a), s0 + std::abs(s1), 1.0 / (s0 - std::abs(s1))},
        with_params("bounded_drift_1d", {{"a", a}, {"s0", s0}, {"s1", s1}}));
}

SdeModel sign_drift(std::size_t dim, double a, double sigma) {
    if (!(sigma > 0.0)) {
        throw InvalidArgument("sign_drift: sigma must be positive");
    }
    return SdeModel(
        dim,
        [a](std::span<const double> x, std::span<double> out) {
            for (std::size_t i = 0; i < x.size(); ++i) {
                out[i] = -a * sgn(x[i]);
            }
        },
        isotropic(dim, sigma),
        CoefficientBounds{std::abs(a) * std::sqrt(static_cast<double>(dim)), sigma, 1.0 / sigma},
        with_params("sign_drift", {{"d", static_cast<double>(dim)}, {"a", a}, {"sigma", sigma}}));
}

} // namespace models

ModelRegistry ModelRegistry::with_builtins() {
    ModelRegistry reg;
    reg.add(
        "zero", [](const ModelSpec& s) {
            s.expect_only({"d"});
            return models::zero(s.get_dim(1));
        }, "b = 0, sigma = 0");
    reg.add(
        "bm", [](const ModelSpec& s) {
            s.expect_only({"d", "sigma"});
            return models::brownian(s.get_dim(1), s.get("sigma", 1.0));
        },
        "Brownian motion, sigma I");
    reg.add(
        "ou",
        [](const ModelSpec& s) {
            s.expect_only({"d", "theta", "sigma"});
            return models::ornstein_uhlenbeck(s.get_dim(1), s.get("theta", 1.0), s.get("sigma", 1.0));
        },
        "Ornstein-Uhlenbeck, b = -theta x");
    reg.add(
        "bounded_drift_1d",
        [](const ModelSpec& s) {
            s.expect_only({"d", "a", "s0", "s1"});
            if (s.params.count("d") && s.get("d", 1.0) != 1.0) {
                throw InvalidArgument("bounded_drift_1d is one-dimensional");
            }
            return models::bounded_drift_1d(s.get("a", 1.0), s.get("s0", 1.0), s.get("s1", 0.5));
        },
        "b = -a sgn(x), sigma = s0 + s1 sin(x)");
    reg.add(
        "sign_drift",
        [](const ModelSpec& s) {
            s.expect_only({"d", "a", "sigma"});
            return models::sign_drift(s.get_dim(2), s.get("a", 1.0), s.get("sigma", 1.0));
        },
        "b_i = -a sgn(x_i), sigma I");
    return reg;
}

void ModelRegistry::add(std::string name, ModelFactory factory, std::string summary) {
    if (name.empty() || !factory) {
        throw InvalidArgument("ModelRegistry::add needs a name and a factory");
    }
    entries_[std::move(name)] = Entry{std::move(factory), std::move(summary)};
}

bool ModelRegistry::contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

SdeModel ModelRegistry::make(const ModelSpec& spec) const {
    const auto it = entries_.find(spec.name);
    if (it == entries_.end()) {
        std::string known;
        for (const auto& [k, _] : entries_) {
            known += (known.empty() ? "" : ", ") + k;
        }
        throw InvalidArgument("unknown model '" + spec.name + "' (known: " + known + ")");
    }
    return it->second.factory(spec);
}

std::vector<std::pair<std::string, std::string>> ModelRegistry::list() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, e] : entries_) {
        out.emplace_back(k, e.summary);
    }
    return out;
}

} // namespace couplex
