#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "couplex/rng.hpp"

namespace couplex {

using Point = std::vector<double>;

/// b: R^d -> R^d, written into `out` (size d).
using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;
/// sigma: R^d -> R^{d x d}, written row-major into `out` (size d*d).
using MatrixField = std::function<void(std::span<const double> x, std::span<double> out)>;

/// Declared global bounds. An empty optional means "unknown".
struct CoefficientBounds {
    std::optional<double> drift_sup;              ///< sup_x |b(x)|
    std::optional<double> diffusion_sup;          ///< sup_x ||sigma(x)|| (operator norm)
    std::optional<double> inverse_diffusion_sup;  ///< sup_x ||sigma(x)^{-1}||
};

/// dX = b(X) dt + sigma(X) dW in R^d. Coefficient functions must be pure.
class SdeModel {
public:
    SdeModel(std::size_t dim, VectorField drift, MatrixField diffusion,
             CoefficientBounds bounds = {}, std::string name = "custom");

    std::size_t dim() const noexcept { return dim_; }
    const CoefficientBounds& bounds() const noexcept { return bounds_; }
    const std::string& name() const noexcept { return name_; }

    void drift(std::span<const double> x, std::span<double> out) const { drift_(x, out); }
    void diffusion(std::span<const double> x, std::span<double> out) const { diffusion_(x, out); }

    const VectorField& drift_field() const noexcept { return drift_; }
    const MatrixField& diffusion_field() const noexcept { return diffusion_; }

    /// True when sup ||sigma^{-1}|| is declared finite.
    bool non_degenerate() const noexcept { return bounds_.inverse_diffusion_sup.has_value(); }

    /// Throws InvalidArgument naming `operation` unless the model is non-degenerate.
    void require_non_degenerate(std::string_view operation) const;

private:
    std::size_t dim_;
    VectorField drift_;
    MatrixField diffusion_;
    CoefficientBounds bounds_;
    std::string name_;
};

/// Checks the declared bounds of `model` at state x; throws BoundViolation.
void check_declared_bounds(const SdeModel& model, std::span<const double> x);

struct IntegratorConfig {
    double step = 1e-3;
    double horizon = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t substream = 0;
    unsigned threads = 1;

    void validate() const;
};

/// t_k = k*h for k < steps, with the last node placed exactly on the horizon.
struct TimeGrid {
    std::size_t steps = 0;
    double step = 0.0;
    double horizon = 0.0;

    double time(std::size_t k) const noexcept { return k == steps ? horizon : static_cast<double>(k) * step; }
    double dt(std::size_t k) const noexcept { return time(k + 1) - time(k); }
};

TimeGrid make_time_grid(double horizon, double step);

struct Provenance {
    std::uint64_t seed = 0;
    std::uint64_t substream = 0;
    std::uint32_t path = 0;
};

struct Path {
    std::size_t dim = 0;
    std::vector<double> times;
    std::vector<double> states;      ///< times.size() x dim, row-major
    std::vector<double> increments;  ///< (times.size() - 1) x dim Brownian increments
    Provenance provenance;

    std::size_t size() const noexcept { return times.size(); }
    std::span<const double> state(std::size_t k) const { return {states.data() + k * dim, dim}; }
    std::span<const double> increment(std::size_t k) const { return {increments.data() + k * dim, dim}; }
};

/// Weighted or unweighted cloud of points in R^d.
struct EmpiricalMeasure {
    std::size_t dim = 0;
    std::vector<double> points;   ///< size() x dim, row-major
    std::vector<double> weights;  ///< empty means every point has weight 1
    Provenance provenance;

    std::size_t size() const noexcept { return dim == 0 ? 0 : points.size() / dim; }
    std::span<const double> point(std::size_t i) const { return {points.data() + i * dim, dim}; }
    double weight(std::size_t i) const noexcept { return weights.empty() ? 1.0 : weights[i]; }
};

/// First passage of |X_t| to the radius, detected on grid nodes only.
struct ExitRecord {
    double time = 0.0;
    Point state;
    bool exited = false;
    double radius = 0.0;
    std::optional<double> time_cap;
};

/// One Euler-Maruyama step at a time. Holds scratch buffers; not thread-safe,
/// create one per worker.
class EulerStepper {
public:
    explicit EulerStepper(const SdeModel& model);

    /// x <- x + b(x) dt + sigma(x) dW with dW ~ N(0, dt I). The increment is
    /// written into `dw`. `time` is only used for error reporting.
    void step(std::span<double> x, double dt, Stream& rng, std::span<double> dw, double time = 0.0);

    const SdeModel& model() const noexcept { return *model_; }

private:
    const SdeModel* model_;
    std::vector<double> drift_;
    std::vector<double> sigma_;
};

Path simulate_path(const SdeModel& model, std::span<const double> x0, const IntegratorConfig& cfg,
                   std::uint32_t path_id = 0);

/// X_T only; no path storage.
Point simulate_terminal(const SdeModel& model, std::span<const double> x0, double horizon,
                        const IntegratorConfig& cfg, std::uint32_t path_id = 0);

/// n independent draws of X_T from x0. Path i uses Stream(seed, substream, i).
EmpiricalMeasure sample_transition(const SdeModel& model, std::span<const double> x0, double horizon,
                                   std::size_t n, const IntegratorConfig& cfg);

/// Draws of X_t at each of the ascending `times` along the same n paths.
std::vector<EmpiricalMeasure> sample_at_times(const SdeModel& model, std::span<const double> x0,
                                              std::span<const double> times, std::size_t n,
                                              const IntegratorConfig& cfg);

struct ExitOptions {
    std::size_t max_steps = 20'000'000;  ///< budget for uncapped runs
};

/// Largest deviation | |X_tau| - R | the grid-only detection allows for 99% of
/// exits: sup||sigma|| * 3 sqrt(h) + sup|b| * h. Empty if a bound is unknown.
std::optional<double> exit_overshoot_tolerance(const SdeModel& model, double step);

ExitRecord simulate_exit(const SdeModel& model, std::span<const double> x0, double radius,
                         std::optional<double> time_cap, const IntegratorConfig& cfg,
                         std::uint32_t path_id = 0, ExitOptions options = {});

std::vector<ExitRecord> sample_exits(const SdeModel& model, std::span<const double> x0, double radius,
                                     std::optional<double> time_cap, std::size_t n,
                                     const IntegratorConfig& cfg, ExitOptions options = {});

namespace detail {
/// Solves a x = b for a small dense row-major d x d matrix. Returns false if singular.
bool solve_small(std::span<const double> a, std::span<const double> b, std::span<double> x);
} // namespace detail

} // namespace couplex
