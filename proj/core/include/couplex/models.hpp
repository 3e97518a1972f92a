#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "couplex/sde.hpp"

namespace couplex {

/// "name{key=value,key=value}" with numeric values, e.g. "ou{theta=1}".
struct ModelSpec {
    std::string name;
    std::map<std::string, double> params;

    static ModelSpec parse(std::string_view text);

    /// Canonical text form; keys in sorted order.
    std::string str() const;

    double get(const std::string& key, double fallback) const;
    std::size_t get_dim(std::size_t fallback) const;

    /// Throws InvalidArgument if a parameter outside `allowed` is present.
    void expect_only(std::initializer_list<std::string_view> allowed) const;
};

using ModelFactory = std::function<SdeModel(const ModelSpec&)>;

/// Name -> factory table. `with_builtins()` ships:
///   zero{d}                    b = 0, sigma = 0 (degenerate)
///   bm{d, sigma}               b = 0, sigma = s I
///   ou{d, theta, sigma}        b = -theta x, sigma = s I
///   bounded_drift_1d{a, s0, s1} b = -a sgn(x), sigma = s0 + s1 sin(x)
///   sign_drift{d, a, sigma}    b_i = -a sgn(x_i), sigma = s I
/// User models are added with `add`; the CLI resolves specs against its registry.
class ModelRegistry {
public:
    static ModelRegistry with_builtins();

    void add(std::string name, ModelFactory factory, std::string summary = {});
    bool contains(std::string_view name) const;
    SdeModel make(const ModelSpec& spec) const;
    SdeModel make(std::string_view spec) const { return make(ModelSpec::parse(spec)); }
    std::vector<std::pair<std::string, std::string>> list() const;

private:
    struct Entry {
        ModelFactory factory;
        std::string summary;
    };
    std::map<std::string, Entry, std::less<>> entries_;
};

namespace models {

SdeModel zero(std::size_t dim);
SdeModel brownian(std::size_t dim, double sigma = 1.0);
SdeModel ornstein_uhlenbeck(std::size_t dim, double theta, double sigma = 1.0);
SdeModel bounded_drift_1d(double a, double s0, double s1);
SdeModel sign_drift(std::size_t dim, double a, double sigma = 1.0);

} // namespace models

} // namespace couplex
