#include "couplex/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "couplex/error.hpp"
#include "couplex/parallel.hpp"

namespace couplex {

namespace {

std::string format_state(std::span<const double> x) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) {
        os << (i ? ", " : "") << x[i];
    }
    os << ')';
    return os.str();
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double a : v) {
        s += a * a;
    }
    return std::sqrt(s);
}

// Extreme eigenvalues of sigma * sigma^T.
std::pair<double, double> gram_eigen_range(std::span<const double> sigma, std::size_t d) {
    if (d == 1) {
        const double g = sigma[0] * sigma[0];
        return {g, g};
    }
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> s(
        sigma.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const Eigen::MatrixXd gram = s * s.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
    return {solver.eigenvalues().minCoeff(), solver.eigenvalues().maxCoeff()};
}

constexpr double kBoundSlack = 1e-9;

} // namespace

SdeModel::SdeModel(std::size_t dim, VectorField drift, MatrixField diffusion, CoefficientBounds bounds,
                   std::string name)
    : dim_(dim),
      drift_(std::move(drift)),
      diffusion_(std::move(diffusion)),
      bounds_(bounds),
      name_(std::move(name)) {
    if (dim_ == 0) {
        throw InvalidArgument("SdeModel: dimension must be >= 1");
    }
    if (!drift_ || !diffusion_) {
        throw InvalidArgument("SdeModel: drift and diffusion must be callable");
    }
    for (const auto& b : {bounds_.drift_sup, bounds_.diffusion_sup, bounds_.inverse_diffusion_sup}) {
        if (b && (!std::isfinite(*b) || *b < 0.0)) {
            throw InvalidArgument("SdeModel: declared bounds must be finite and nonnegative");
        }
    }
}

void SdeModel::require_non_degenerate(std::string_view operation) const {
    if (!non_degenerate()) {
        throw InvalidArgument(std::string(operation) + " requires a model with declared sup||sigma^-1|| (model '" +
                              name_ + "')");
    }
}

void check_declared_bounds(const SdeModel& model, std::span<const double> x) {
    const auto& bounds = model.bounds();
    const std::size_t d = model.dim();
    if (bounds.drift_sup) {
        std::vector<double> b(d);
        model.drift(x, b);
        if (norm(b) > *bounds.drift_sup * (1.0 + kBoundSlack) + kBoundSlack) {
            throw BoundViolation("declared sup|b| = " + std::to_string(*bounds.drift_sup) + " exceeded at " +
                                 format_state(x));
        }
    }
    if (bounds.diffusion_sup || bounds.inverse_diffusion_sup) {
        std::vector<double> s(d * d);
        model.diffusion(x, s);
        const auto [lo, hi] = gram_eigen_range(s, d);
        if (bounds.diffusion_sup && std::sqrt(std::max(hi, 0.0)) > *bounds.diffusion_sup * (1.0 + kBoundSlack)) {
            throw BoundViolation("declared sup||sigma|| exceeded at " + format_state(x));
        }
        if (bounds.inverse_diffusion_sup) {
            const double s_inv = *bounds.inverse_diffusion_sup;
            if (lo * s_inv * s_inv < 1.0 - kBoundSlack) {
                throw BoundViolation("sigma sigma^T has eigenvalue below 1/sup||sigma^-1||^2 at " + format_state(x));
            }
        }
    }
}

void IntegratorConfig::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw InvalidArgument("integrator step must be positive and finite");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InvalidArgument("integrator horizon must be positive and finite");
    }
}

TimeGrid make_time_grid(double horizon, double step) {
    if (!(horizon > 0.0) || !std::isfinite(horizon) || !(step > 0.0) || !std::isfinite(step)) {
        throw InvalidArgument("time grid needs positive finite horizon and step");
    }
    if (step >= horizon) {
        return {1, horizon, horizon};
    }
    const double ratio = horizon / step;
    const double nearest = std::round(ratio);
    const double count = std::abs(ratio - nearest) <= 1e-9 * ratio ? nearest : std::ceil(ratio);
    if (count > 1e12) {
        throw InvalidArgument("time grid has too many steps");
    }
    return {static_cast<std::size_t>(count), step, horizon};
}

EulerStepper::EulerStepper(const SdeModel& model)
    : model_(&model), drift_(model.dim()), sigma_(model.dim() * model.dim()) {}

void EulerStepper::step(std::span<double> x, double dt, Stream& rng, std::span<double> dw, double time) {
    const std::size_t d = model_->dim();
    model_->drift(x, drift_);
    model_->diffusion(x, sigma_);
    if (!all_finite(drift_) || !all_finite(sigma_)) {
        throw NumericalBlowup("non-finite coefficient at t=" + std::to_string(time) + " x=" + format_state(x),
                              Point(x.begin(), x.end()), time);
    }
    const double scale = std::sqrt(dt);
    for (std::size_t j = 0; j < d; ++j) {
        dw[j] = scale * rng.normal();
    }
    for (std::size_t i = 0; i < d; ++i) {
        double acc = drift_[i] * dt;
        const double* row = sigma_.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) {
            acc += row[j] * dw[j];
        }
        x[i] += acc;
    }
    if (!all_finite(x)) {
        throw NumericalBlowup("state overflow at t=" + std::to_string(time + dt), Point(x.begin(), x.end()),
                              time + dt);
    }
}

namespace {

void require_start(const SdeModel& model, std::span<const double> x0) {
    if (x0.size() != model.dim()) {
        throw InvalidArgument("initial point has dimension " + std::to_string(x0.size()) + ", model expects " +
                              std::to_string(model.dim()));
    }
    if (!all_finite(x0)) {
        throw InvalidArgument("initial point must be finite");
    }
}

} // namespace

Path simulate_path(const SdeModel& model, std::span<const double> x0, const IntegratorConfig& cfg,
                   std::uint32_t path_id) {
    cfg.validate();
    require_start(model, x0);
    check_declared_bounds(model, x0);

    const std::size_t d = model.dim();
    const TimeGrid grid = make_time_grid(cfg.horizon, cfg.step);
    Path path;
    path.dim = d;
    path.provenance = {cfg.seed, cfg.substream, path_id};
    path.times.resize(grid.steps + 1);
    path.states.resize((grid.steps + 1) * d);
    path.increments.resize(grid.steps * d);

    Stream rng(cfg.seed, cfg.substream, path_id);
    EulerStepper stepper(model);
    Point x(x0.begin(), x0.end());
    std::copy(x.begin(), x.end(), path.states.begin());
    path.times[0] = 0.0;
    for (std::size_t k = 0; k < grid.steps; ++k) {
        stepper.step(x, grid.dt(k), rng, {path.increments.data() + k * d, d}, grid.time(k));
        path.times[k + 1] = grid.time(k + 1);
        std::copy(x.begin(), x.end(), path.states.begin() + static_cast<std::ptrdiff_t>((k + 1) * d));
    }
    check_declared_bounds(model, x);
    return path;
}

Point simulate_terminal(const SdeModel& model, std::span<const double> x0, double horizon,
                        const IntegratorConfig& cfg, std::uint32_t path_id) {
    require_start(model, x0);
    const TimeGrid grid = make_time_grid(horizon, cfg.step);
    Stream rng(cfg.seed, cfg.substream, path_id);
    EulerStepper stepper(model);
    Point x(x0.begin(), x0.end());
    std::vector<double> dw(model.dim());
    for (std::size_t k = 0; k < grid.steps; ++k) {
        stepper.step(x, grid.dt(k), rng, dw, grid.time(k));
    }
    return x;
}

EmpiricalMeasure sample_transition(const SdeModel& model, std::span<const double> x0, double horizon,
                                   std::size_t n, const IntegratorConfig& cfg) {
    if (n == 0) {
        throw InvalidArgument("sample_transition needs n >= 1");
    }
    if (n > std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidArgument("sample_transition: n exceeds the per-substream path limit");
    }
    require_start(model, x0);
    check_declared_bounds(model, x0);
    const std::size_t d = model.dim();
    EmpiricalMeasure out;
    out.dim = d;
    out.provenance = {cfg.seed, cfg.substream, 0};
    out.points.resize(n * d);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        const Point x = simulate_terminal(model, x0, horizon, cfg, static_cast<std::uint32_t>(i));
        check_declared_bounds(model, x);
        std::copy(x.begin(), x.end(), out.points.begin() + static_cast<std::ptrdiff_t>(i * d));
    });
    return out;
}

std::vector<EmpiricalMeasure> sample_at_times(const SdeModel& model, std::span<const double> x0,
                                              std::span<const double> times, std::size_t n,
                                              const IntegratorConfig& cfg) {
    if (n == 0) {
        throw InvalidArgument("sample_at_times needs n >= 1");
    }
    require_start(model, x0);
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0) || (i > 0 && times[i] <= times[i - 1])) {
            throw InvalidArgument("sample_at_times: times must be nonnegative and strictly increasing");
        }
    }
    const std::size_t d = model.dim();
    std::vector<EmpiricalMeasure> out(times.size());
    for (auto& m : out) {
        m.dim = d;
        m.provenance = {cfg.seed, cfg.substream, 0};
        m.points.resize(n * d);
    }
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        Stream rng(cfg.seed, cfg.substream, static_cast<std::uint32_t>(i));
        EulerStepper stepper(model);
        Point x(x0.begin(), x0.end());
        std::vector<double> dw(d);
        double now = 0.0;
        for (std::size_t j = 0; j < times.size(); ++j) {
            if (times[j] > now) {
                const TimeGrid grid = make_time_grid(times[j] - now, cfg.step);
                for (std::size_t k = 0; k < grid.steps; ++k) {
                    stepper.step(x, grid.dt(k), rng, dw, now + grid.time(k));
                }
                now = times[j];
            }
            std::copy(x.begin(), x.end(), out[j].points.begin() + static_cast<std::ptrdiff_t>(i * d));
        }
    });
    return out;
}

std::optional<double> exit_overshoot_tolerance(const SdeModel& model, double step) {
    const auto& b = model.bounds();
    if (!b.diffusion_sup || !b.drift_sup) {
        return std::nullopt;
    }
    return *b.diffusion_sup * 3.0 * std::sqrt(step) + *b.drift_sup * step;
}

ExitRecord simulate_exit(const SdeModel& model, std::span<const double> x0, double radius,
                         std::optional<double> time_cap, const IntegratorConfig& cfg, std::uint32_t path_id,
                         ExitOptions options) {
    require_start(model, x0);
    if (!(radius > 0.0)) {
        throw InvalidArgument("simulate_exit: radius must be positive");
    }
    if (norm(x0) >= radius) {
        throw InvalidArgument("simulate_exit: start point " + format_state(x0) + " is not inside the ball");
    }
    if (time_cap && !(*time_cap > 0.0)) {
        throw InvalidArgument("simulate_exit: time cap must be positive");
    }
    if (!(cfg.step > 0.0)) {
        throw InvalidArgument("simulate_exit: step must be positive");
    }

    const std::size_t d = model.dim();
    Stream rng(cfg.seed, cfg.substream, path_id);
    EulerStepper stepper(model);
    Point x(x0.begin(), x0.end());
    std::vector<double> dw(d);
    ExitRecord rec;
    rec.radius = radius;
    rec.time_cap = time_cap;

    if (time_cap) {
        const TimeGrid grid = make_time_grid(*time_cap, cfg.step);
        for (std::size_t k = 0; k < grid.steps; ++k) {
            stepper.step(x, grid.dt(k), rng, dw, grid.time(k));
            if (norm(x) >= radius) {
                rec.time = grid.time(k + 1);
                rec.exited = true;
                rec.state = std::move(x);
                return rec;
            }
        }
        rec.time = *time_cap;
        rec.exited = false;
        rec.state = std::move(x);
        return rec;
    }

    for (std::size_t k = 0; k < options.max_steps; ++k) {
        const double t = static_cast<double>(k) * cfg.step;
        stepper.step(x, cfg.step, rng, dw, t);
        if (norm(x) >= radius) {
            rec.time = static_cast<double>(k + 1) * cfg.step;
            rec.exited = true;
            rec.state = std::move(x);
            return rec;
        }
    }
    throw ExitBudgetExceeded("no exit from the ball of radius " + std::to_string(radius) + " within " +
                             std::to_string(options.max_steps) + " steps from " + format_state(x0));
}

std::vector<ExitRecord> sample_exits(const SdeModel& model, std::span<const double> x0, double radius,
                                     std::optional<double> time_cap, std::size_t n, const IntegratorConfig& cfg,
                                     ExitOptions options) {
    if (n > std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidArgument("sample_exits: n exceeds the per-substream path limit");
    }
    std::vector<ExitRecord> out(n);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        out[i] = simulate_exit(model, x0, radius, time_cap, cfg, static_cast<std::uint32_t>(i), options);
    });
    return out;
}

namespace detail {

bool solve_small(std::span<const double> a, std::span<const double> b, std::span<double> x) {
    const std::size_t d = b.size();
    if (d == 1) {
        if (a[0] == 0.0) {
            return false;
        }
        x[0] = b[0] / a[0];
        return true;
    }
    if (d == 2) {
        const double det = a[0] * a[3] - a[1] * a[2];
        if (det == 0.0) {
            return false;
        }
        x[0] = (a[3] * b[0] - a[1] * b[1]) / det;
        x[1] = (a[0] * b[1] - a[2] * b[0]) / det;
        return true;
    }
    const auto n = static_cast<Eigen::Index>(d);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(a.data(), n, n);
    Eigen::Map<const Eigen::VectorXd> rhs(b.data(), n);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible()) {
        return false;
    }
    Eigen::Map<Eigen::VectorXd>(x.data(), n) = lu.solve(rhs);
    return true;
}

} // namespace detail

} // namespace couplex
