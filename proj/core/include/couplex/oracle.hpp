#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "couplex/distribution.hpp"
#include "couplex/rng.hpp"

namespace couplex {

/// Row-stochastic matrix on states 0..n-1.
class FiniteChain {
public:
    FiniteChain(std::size_t states, std::vector<double> rows, std::vector<std::string> labels = {});
    static FiniteChain from_rows(const std::vector<std::vector<double>>& rows);
    /// Rows drawn from a flat Dirichlet; used for randomized checks.
    static FiniteChain random(std::size_t states, Stream& rng);
    static FiniteChain identity(std::size_t states);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return p_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const { return {p_.data() + i * n_, n_}; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

private:
    std::size_t n_;
    std::vector<double> p_;
    std::vector<std::string> labels_;
};

/// mu P.
std::vector<double> chain_step(const FiniteChain& chain, std::span<const double> mu);
/// mu P^t by repeated multiplication.
std::vector<double> chain_marginal(const FiniteChain& chain, std::span<const double> initial, std::size_t t);
/// Solution of pi P = pi, sum pi = 1 (least squares; unique for irreducible chains).
std::vector<double> chain_stationary(const FiniteChain& chain);

double normal_cdf(double x) noexcept;
double normal_pdf(double x) noexcept;

/// Isotropic Gaussian transition kernel with closed-form mean and variance.
/// Brownian: m = x, s^2 = sigma^2 t. OU: m = x e^{-theta t}, s^2 = sigma^2 (1 - e^{-2 theta t}) / (2 theta).
class GaussianKernel {
public:
    static GaussianKernel brownian(std::size_t dim, double sigma = 1.0);
    static GaussianKernel ornstein_uhlenbeck(std::size_t dim, double theta, double sigma = 1.0);

    std::size_t dim() const noexcept { return dim_; }
    double mean(double x, double t) const noexcept;
    double variance(double t) const noexcept;
    /// Stationary variance; empty for Brownian motion.
    std::optional<double> stationary_variance() const noexcept;
    double density(std::span<const double> x, std::span<const double> y, double t) const;

    /// Exact cell masses of N(mean(x0, t), variance(t) I) on a product grid;
    /// the region must be whole space or a box aligned with the grid.
    DiscreteDistribution bin_masses(std::span<const double> x0, double t, const BinSpec& bins) const;
    /// Cell masses of the stationary law N(0, stationary_variance I); OU only.
    DiscreteDistribution stationary_bin_masses(const BinSpec& bins) const;

private:
    GaussianKernel(std::size_t dim, double theta, double sigma) : dim_(dim), theta_(theta), sigma_(sigma) {}
    std::size_t dim_;
    double theta_;  // 0 for Brownian motion
    double sigma_;
};

/// Overlap integral of N(m1, s^2) and N(m2, s^2): 2 Phi(-|m1 - m2| / (2 s)).
double gaussian_overlap(double m1, double m2, double s);
/// Same overlap restricted to [a, b], by adaptive Gauss-Kronrod quadrature.
double gaussian_overlap_truncated(double m1, double m2, double s, double a, double b);
/// Total variation (in [0, 1]) between N(m1, s1^2) and N(m2, s2^2), exact from the density crossings.
double gaussian_tv(double m1, double s1, double m2, double s2);
/// Cell masses of N(mean, sd^2) on a 1-D axis.
std::vector<double> gaussian_axis_masses(double mean, double sd, const Axis& axis);

/// P(two independent Brownian motions with diffusion sigma started `distance`
/// apart meet before `horizon`) = 2 (1 - Phi(distance / (sigma sqrt(2 horizon)))).
double reflection_meeting_probability(double distance, double horizon, double sigma = 1.0);

/// E tau_R for Brownian motion from x in R^d: (R^2 - |x|^2) / d.
double brownian_mean_exit_time(std::span<const double> x, double radius);

/// Harmonic measure density of Brownian motion in the disk of radius R,
/// w.r.t. arc length at angle `angle`: (R^2 - |x|^2) / (2 pi R |x - y|^2).
double poisson_kernel_disk(std::span<const double> x, double angle, double radius);
/// Harmonic measure of the arc [a0, a1].
double poisson_arc_mass(std::span<const double> x, double a0, double a1, double radius);
/// max over grid pairs and boundary angles of P(x1, y) / P(x2, y).
double poisson_ratio_bound(std::span<const Point> grid, double radius);
/// min over grid pairs of the integral of min(P(x1, .), P(x2, .)) on the circle.
double poisson_min_overlap(std::span<const Point> grid, double radius);
/// Harmonic measures of `arcs` equal arcs starting at angle 0, one vector per grid point.
std::vector<std::vector<double>> poisson_arc_masses(std::span<const Point> grid, double radius, std::size_t arcs);
/// max over arcs of (max over the grid of the arc mass) / (min over the grid).
double poisson_arc_ratio_bound(std::span<const Point> grid, double radius, std::size_t arcs);
/// min over grid pairs of the sum over arcs of min(arc masses).
double poisson_arc_min_overlap(std::span<const Point> grid, double radius, std::size_t arcs);

/// Envelope C' t^{-d/2} exp(-|x-y|^2 / (c' t)) <= f_t(x, y) <= C t^{-d/2} exp(-|x-y|^2 / (c t)).
struct EnvelopeConstants {
    double lower_scale = 0.0;   ///< C'
    double lower_width = 0.0;   ///< c'
    double upper_scale = 0.0;   ///< C
    double upper_width = 0.0;   ///< c
};

struct EnvelopeViolation {
    Point x;
    Point y;
    double t = 0.0;
    double density = 0.0;
    double bound = 0.0;
    bool upper = false;
};

struct EnvelopeVerdict {
    bool holds = true;
    std::size_t points_checked = 0;
    std::optional<EnvelopeViolation> violation;  ///< first violating point
};

/// Evaluates the envelope on all pairs of `points` at every t in `times`.
EnvelopeVerdict gaussian_envelope_check(const GaussianKernel& kernel, std::span<const double> times,
                                        const EnvelopeConstants& constants, std::span<const Point> points);

} // namespace couplex
