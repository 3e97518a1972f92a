#include "couplex/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "couplex/error.hpp"

namespace couplex {

namespace {

constexpr double kRowSumTolerance = 1e-12;
constexpr double kQuadratureTolerance = 1e-10;

template <typename F>
double integrate(F f, double a, double b) {
    if (!(b > a)) {
        return 0.0;
    }
    double error = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, kQuadratureTolerance, &error);
}

/// Integral over [a, b] split at the sorted interior `breaks`.
template <typename F>
double integrate_pieces(F f, double a, double b, std::vector<double> breaks) {
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    double lo = a;
    for (double x : breaks) {
        if (x > lo && x < b) {
            total += integrate(f, lo, x);
            lo = x;
        }
    }
    return total + integrate(f, lo, b);
}

double gauss_pdf(double x, double m, double s) { return normal_pdf((x - m) / s) / s; }

/// Real roots of N(m1, s1^2) = N(m2, s2^2) densities.
std::vector<double> density_crossings(double m1, double s1, double m2, double s2) {
    // log f1 - log f2 = A x^2 + B x + C
    const double a = 0.5 / (s2 * s2) - 0.5 / (s1 * s1);
    const double b = m1 / (s1 * s1) - m2 / (s2 * s2);
    const double c = 0.5 * m2 * m2 / (s2 * s2) - 0.5 * m1 * m1 / (s1 * s1) + std::log(s2 / s1);
    if (std::abs(a) < 1e-14) {
        if (std::abs(b) < 1e-14) {
            return {};
        }
        return {-c / b};
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) {
        return {};
    }
    const double r = std::sqrt(disc);
    return {(-b - r) / (2.0 * a), (-b + r) / (2.0 * a)};
}

void validate_rows(std::size_t n, const std::vector<double>& p) {
    if (n == 0 || p.size() != n * n) {
        throw InvalidKernel("finite chain needs an n x n matrix with n >= 1");
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = p[i * n + j];
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw InvalidKernel("row " + std::to_string(i) + " has a negative or non-finite entry");
            }
            s += v;
        }
        if (std::abs(s - 1.0) > kRowSumTolerance) {
            throw InvalidKernel("row " + std::to_string(i) + " sums to " + std::to_string(s));
        }
    }
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += (x[i] - y[i]) * (x[i] - y[i]);
    }
    return s;
}

} // namespace

FiniteChain::FiniteChain(std::size_t states, std::vector<double> rows, std::vector<std::string> labels)
    : n_(states), p_(std::move(rows)), labels_(std::move(labels)) {
    validate_rows(n_, p_);
    if (labels_.empty()) {
        for (std::size_t i = 0; i < n_; ++i) {
            labels_.push_back(std::to_string(i));
        }
    } else if (labels_.size() != n_) {
        throw InvalidKernel("finite chain: label count differs from state count");
    }
}

FiniteChain FiniteChain::from_rows(const std::vector<std::vector<double>>& rows) {
    std::vector<double> flat;
    for (const auto& r : rows) {
        if (r.size() != rows.size()) {
            throw InvalidKernel("finite chain: matrix is not square");
        }
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return FiniteChain(rows.size(), std::move(flat));
}

FiniteChain FiniteChain::random(std::size_t states, Stream& rng) {
    std::vector<double> p(states * states);
    for (std::size_t i = 0; i < states; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < states; ++j) {
            p[i * states + j] = -std::log(rng.uniform());
            s += p[i * states + j];
        }
        double acc = 0.0;
        for (std::size_t j = 0; j + 1 < states; ++j) {
            p[i * states + j] /= s;
            acc += p[i * states + j];
        }
        // Put the rounding remainder on the last entry so the row sums to 1.
        p[i * states + states - 1] = std::max(0.0, 1.0 - acc);
    }
    return FiniteChain(states, std::move(p));
}

FiniteChain FiniteChain::identity(std::size_t states) {
    std::vector<double> p(states * states, 0.0);
    for (std::size_t i = 0; i < states; ++i) {
        p[i * states + i] = 1.0;
    }
    return FiniteChain(states, std::move(p));
}

std::vector<double> chain_step(const FiniteChain& chain, std::span<const double> mu) {
    const std::size_t n = chain.size();
    if (mu.size() != n) {
        throw InvalidArgument("chain_step: initial law has the wrong number of states");
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (mu[i] == 0.0) {
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
            out[j] += mu[i] * chain(i, j);
        }
    }
    return out;
}

std::vector<double> chain_marginal(const FiniteChain& chain, std::span<const double> initial, std::size_t t) {
    std::vector<double> mu(initial.begin(), initial.end());
    if (mu.size() != chain.size()) {
        throw InvalidArgument("chain_marginal: initial law has the wrong number of states");
    }
    for (std::size_t k = 0; k < t; ++k) {
        mu = chain_step(chain, mu);
    }
    return mu;
}

std::vector<double> chain_stationary(const FiniteChain& chain) {
    const auto n = static_cast<Eigen::Index>(chain.size());
    Eigen::MatrixXd a(n + 1, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            a(j, i) = chain(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) - (i == j ? 1.0 : 0.0);
        }
    }
    a.row(n).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
    b(n) = 1.0;
    const Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);
    return {pi.data(), pi.data() + n};
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) noexcept { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

GaussianKernel GaussianKernel::brownian(std::size_t dim, double sigma) {
    if (dim == 0 || !(sigma > 0.0)) {
        throw InvalidArgument("Gaussian kernel needs d >= 1 and sigma > 0");
    }
    return GaussianKernel(dim, 0.0, sigma);
}

GaussianKernel GaussianKernel::ornstein_uhlenbeck(std::size_t dim, double theta, double sigma) {
    if (dim == 0 || !(sigma > 0.0) || !(theta > 0.0)) {
        throw InvalidArgument("OU kernel needs d >= 1, theta > 0 and sigma > 0");
    }
    return GaussianKernel(dim, theta, sigma);
}

double GaussianKernel::mean(double x, double t) const noexcept {
    return theta_ == 0.0 ? x : x * std::exp(-theta_ * t);
}

double GaussianKernel::variance(double t) const noexcept {
    if (theta_ == 0.0) {
        return sigma_ * sigma_ * t;
    }
    return sigma_ * sigma_ * -std::expm1(-2.0 * theta_ * t) / (2.0 * theta_);
}

std::optional<double> GaussianKernel::stationary_variance() const noexcept {
    if (theta_ == 0.0) {
        return std::nullopt;
    }
    return sigma_ * sigma_ / (2.0 * theta_);
}

double GaussianKernel::density(std::span<const double> x, std::span<const double> y, double t) const {
    if (x.size() != dim_ || y.size() != dim_) {
        throw InvalidArgument("GaussianKernel::density: dimension mismatch");
    }
    const double v = variance(t);
    double r2 = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        const double d = y[i] - mean(x[i], t);
        r2 += d * d;
    }
    return std::pow(2.0 * std::numbers::pi * v, -0.5 * static_cast<double>(dim_)) * std::exp(-0.5 * r2 / v);
}

DiscreteDistribution GaussianKernel::bin_masses(std::span<const double> x0, double t, const BinSpec& bins) const {
    if (x0.size() != dim_ || bins.grid.dim() != dim_) {
        throw InvalidArgument("GaussianKernel::bin_masses: dimension mismatch");
    }
    if (bins.region.kind() == Region::Kind::ball) {
        throw InvalidArgument("GaussianKernel::bin_masses: ball regions are not product sets");
    }
    const double sd = std::sqrt(variance(t));
    std::vector<std::vector<double>> axis_masses(dim_);
    for (std::size_t k = 0; k < dim_; ++k) {
        Axis a = bins.grid.axis(k);
        std::vector<double> m(a.cells);
        for (std::size_t c = 0; c < a.cells; ++c) {
            double lo = a.edge(c);
            double hi = a.edge(c + 1);
            if (bins.region.kind() == Region::Kind::box) {
                lo = std::max(lo, bins.region.lo()[k]);
                hi = std::min(hi, bins.region.hi()[k]);
            }
            const double mu = mean(x0[k], t);
            m[c] = hi > lo ? normal_cdf((hi - mu) / sd) - normal_cdf((lo - mu) / sd) : 0.0;
        }
        axis_masses[k] = std::move(m);
    }
    std::vector<double> masses(bins.size());
    double inside = 0.0;
    for (std::size_t c = 0; c < bins.size(); ++c) {
        const auto idx = bins.grid.unflatten(c);
        double p = 1.0;
        for (std::size_t k = 0; k < dim_; ++k) {
            p *= axis_masses[k][idx[k]];
        }
        masses[c] = p;
        inside += p;
    }
    std::vector<double> lambda(bins.size(), bins.grid.cell_volume());
    return DiscreteDistribution::from_masses(std::move(lambda), masses, std::max(0.0, 1.0 - inside));
}

DiscreteDistribution GaussianKernel::stationary_bin_masses(const BinSpec& bins) const {
    if (theta_ == 0.0) {
        throw InvalidArgument("GaussianKernel::stationary_bin_masses: Brownian motion has no stationary law");
    }
    // t = inf gives mean 0 and the stationary variance through exp and expm1.
    const Point origin(dim_, 0.0);
    return bin_masses(origin, std::numeric_limits<double>::infinity(), bins);
}

double gaussian_overlap(double m1, double m2, double s) {
    if (!(s > 0.0)) {
        throw InvalidArgument("gaussian_overlap: s must be positive");
    }
    return 2.0 * normal_cdf(-std::abs(m1 - m2) / (2.0 * s));
}

double gaussian_overlap_truncated(double m1, double m2, double s, double a, double b) {
    if (!(s > 0.0)) {
        throw InvalidArgument("gaussian_overlap_truncated: s must be positive");
    }
    auto f = [&](double x) { return std::min(gauss_pdf(x, m1, s), gauss_pdf(x, m2, s)); };
    return integrate_pieces(f, a, b, {0.5 * (m1 + m2), m1, m2});
}

double gaussian_tv(double m1, double s1, double m2, double s2) {
    if (!(s1 > 0.0) || !(s2 > 0.0)) {
        throw InvalidArgument("gaussian_tv: standard deviations must be positive");
    }
    // The sign of f1 - f2 is constant between density crossings, so TV is
    // half the sum of |P1(I) - P2(I)| over those intervals.
    auto edges = density_crossings(m1, s1, m2, s2);
    std::sort(edges.begin(), edges.end());
    double tv = 0.0;
    double prev1 = 0.0;
    double prev2 = 0.0;
    for (std::size_t k = 0; k <= edges.size(); ++k) {
        const double c1 = k < edges.size() ? normal_cdf((edges[k] - m1) / s1) : 1.0;
        const double c2 = k < edges.size() ? normal_cdf((edges[k] - m2) / s2) : 1.0;
        tv += std::abs((c1 - prev1) - (c2 - prev2));
        prev1 = c1;
        prev2 = c2;
    }
    return std::clamp(0.5 * tv, 0.0, 1.0);
}

std::vector<double> gaussian_axis_masses(double mean, double sd, const Axis& axis) {
    std::vector<double> out(axis.cells);
    for (std::size_t c = 0; c < axis.cells; ++c) {
        out[c] = normal_cdf((axis.edge(c + 1) - mean) / sd) - normal_cdf((axis.edge(c) - mean) / sd);
    }
    return out;
}

double reflection_meeting_probability(double distance, double horizon, double sigma) {
    if (!(horizon > 0.0) || !(sigma > 0.0)) {
        throw InvalidArgument("reflection_meeting_probability: horizon and sigma must be positive");
    }
    return 2.0 * (1.0 - normal_cdf(std::abs(distance) / (sigma * std::sqrt(2.0 * horizon))));
}

double brownian_mean_exit_time(std::span<const double> x, double radius) {
    double r2 = 0.0;
    for (double v : x) {
        r2 += v * v;
    }
    return (radius * radius - r2) / static_cast<double>(x.size());
}

double poisson_kernel_disk(std::span<const double> x, double angle, double radius) {
    if (x.size() != 2) {
        throw InvalidArgument("poisson_kernel_disk is defined for d = 2");
    }
    const double r2 = x[0] * x[0] + x[1] * x[1];
    if (!(r2 < radius * radius)) {
        throw InvalidArgument("poisson_kernel_disk: x must lie inside the disk");
    }
    const double y0 = radius * std::cos(angle);
    const double y1 = radius * std::sin(angle);
    const double d2 = (x[0] - y0) * (x[0] - y0) + (x[1] - y1) * (x[1] - y1);
    return (radius * radius - r2) / (2.0 * std::numbers::pi * radius * d2);
}

double poisson_arc_mass(std::span<const double> x, double a0, double a1, double radius) {
    auto f = [&](double a) { return radius * poisson_kernel_disk(x, a, radius); };
    return integrate(f, a0, a1);
}

double poisson_ratio_bound(std::span<const Point> grid, double radius) {
    constexpr std::size_t kAngles = 1 << 16;
    double worst = 1.0;
    for (std::size_t k = 0; k < kAngles; ++k) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(kAngles);
        double hi = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& x : grid) {
            const double p = poisson_kernel_disk(x, a, radius);
            hi = std::max(hi, p);
            lo = std::min(lo, p);
        }
        worst = std::max(worst, hi / lo);
    }
    return worst;
}

double poisson_min_overlap(std::span<const Point> grid, double radius) {
    constexpr int kPieces = 64;
    double best = 1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
            auto f = [&](double a) {
                return radius * std::min(poisson_kernel_disk(grid[i], a, radius), poisson_kernel_disk(grid[j], a, radius));
            };
            double s = 0.0;
            for (int k = 0; k < kPieces; ++k) {
                s += integrate(f, 2.0 * std::numbers::pi * k / kPieces, 2.0 * std::numbers::pi * (k + 1) / kPieces);
            }
            best = std::min(best, s);
        }
    }
    return best;
}

std::vector<std::vector<double>> poisson_arc_masses(std::span<const Point> grid, double radius, std::size_t arcs) {
    if (arcs == 0) {
        throw InvalidArgument("poisson_arc_masses: need at least one arc");
    }
    std::vector<std::vector<double>> out;
    for (const auto& x : grid) {
        std::vector<double> m(arcs);
        for (std::size_t k = 0; k < arcs; ++k) {
            const double a0 = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(arcs);
            const double a1 = 2.0 * std::numbers::pi * static_cast<double>(k + 1) / static_cast<double>(arcs);
            m[k] = poisson_arc_mass(x, a0, a1, radius);
        }
        out.push_back(std::move(m));
    }
    return out;
}

double poisson_arc_ratio_bound(std::span<const Point> grid, double radius, std::size_t arcs) {
    const auto masses = poisson_arc_masses(grid, radius, arcs);
    double worst = 1.0;
    for (std::size_t k = 0; k < arcs; ++k) {
        double hi = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& m : masses) {
            hi = std::max(hi, m[k]);
            lo = std::min(lo, m[k]);
        }
        worst = std::max(worst, hi / lo);
    }
    return worst;
}

double poisson_arc_min_overlap(std::span<const Point> grid, double radius, std::size_t arcs) {
    const auto masses = poisson_arc_masses(grid, radius, arcs);
    double best = 1.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        for (std::size_t j = i + 1; j < masses.size(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < arcs; ++k) {
                s += std::min(masses[i][k], masses[j][k]);
            }
            best = std::min(best, s);
        }
    }
    return best;
}

EnvelopeVerdict gaussian_envelope_check(const GaussianKernel& kernel, std::span<const double> times,
                                        const EnvelopeConstants& constants, std::span<const Point> points) {
    if (!(constants.lower_scale > 0.0) || !(constants.lower_width > 0.0) || !(constants.upper_scale > 0.0) ||
        !(constants.upper_width > 0.0)) {
        throw InvalidArgument("envelope constants must be positive");
    }
    const double d = static_cast<double>(kernel.dim());
    EnvelopeVerdict verdict;
    for (double t : times) {
        if (!(t > 0.0)) {
            throw InvalidArgument("envelope check needs t > 0");
        }
        const double scale = std::pow(t, -0.5 * d);
        for (const auto& x : points) {
            for (const auto& y : points) {
                const double r2 = squared_distance(x, y);
                const double f = kernel.density(x, y, t);
                const double lower = constants.lower_scale * scale * std::exp(-r2 / (constants.lower_width * t));
                const double upper = constants.upper_scale * scale * std::exp(-r2 / (constants.upper_width * t));
                ++verdict.points_checked;
                if (verdict.violation) {
                    continue;
                }
                // Relative slack absorbs rounding when constants are matched exactly.
                if (f < lower * (1.0 - 1e-12)) {
                    verdict.holds = false;
                    verdict.violation = EnvelopeViolation{x, y, t, f, lower, false};
                } else if (f > upper * (1.0 + 1e-12)) {
                    verdict.holds = false;
                    verdict.violation = EnvelopeViolation{x, y, t, f, upper, true};
                }
            }
        }
    }
    return verdict;
}

} // namespace couplex
