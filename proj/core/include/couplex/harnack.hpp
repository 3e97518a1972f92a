#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "couplex/distribution.hpp"
#include "couplex/md.hpp"
#include "couplex/sde.hpp"

namespace couplex {

/// Equal-measure cells on the unit sphere in R^d.
/// d = 1: the two points {-1, +1}. d = 2: `angular` equal arcs starting at
/// angle 0. d = 3: `bands` equal-area bands in the z coordinate times
/// `angular` equal sectors in azimuth.
class SpherePartition {
public:
    SpherePartition(std::size_t dim, std::size_t angular, std::size_t bands = 1);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return size_; }
    std::size_t angular() const noexcept { return angular_; }
    std::size_t bands() const noexcept { return bands_; }

    /// Cell of the direction x / |x|; x must be nonzero.
    std::size_t locate(std::span<const double> x) const;
    /// Angular range [a0, a1) of cell i for d = 2.
    std::pair<double, double> arc(std::size_t i) const;

private:
    std::size_t dim_;
    std::size_t angular_;
    std::size_t bands_;
    std::size_t size_;
};

/// Cells on the parabolic boundary of {|x| <= 1, eps <= t <= 1}:
/// lateral cells (time bin over [eps, 1]) x (sphere cell), flattened with the
/// sphere index fastest, followed by top cells of a box grid on [-1, 1]^d
/// (cells outside the unit ball simply stay empty).
struct CylinderCells {
    double epsilon = 0.1;
    std::size_t time_cells = 4;
    SpherePartition sphere{2, 8};
    BoxGrid top = BoxGrid::cube(2, -1.0, 1.0, 4);

    static CylinderCells make(std::size_t dim, double epsilon, std::size_t time_cells, std::size_t angular,
                              std::size_t top_cells_per_axis, std::size_t bands = 1);

    std::size_t lateral_size() const noexcept { return time_cells * sphere.size(); }
    std::size_t size() const noexcept { return lateral_size() + top.size(); }
    bool is_lateral(std::size_t cell) const noexcept { return cell < lateral_size(); }

    /// Cell of the boundary event at absolute time t; empty for a lateral
    /// exit before epsilon.
    std::optional<std::size_t> locate(double t, std::span<const double> x, bool exited) const;
};

/// Empirical law of the boundary hit on a partition.
struct BoundaryMeasure {
    std::vector<double> masses;
    std::vector<double> std_errors;  ///< binomial, per cell
    double captured = 0.0;           ///< sum of masses
    double uncaptured = 0.0;         ///< 1 - captured
    double lateral = 0.0;            ///< parabolic only
    double top = 0.0;                ///< parabolic only
    double exited_before_one = 0.0;  ///< parabolic only: P(tau < 1) on the absolute clock
    std::size_t samples = 0;
};

/// Boundary law of (tau, X_tau) on the cylinder with unit radius; a path
/// started at `start_time` runs for duration 1 - start_time with the
/// convention inf(empty) = 1. Exits before epsilon are uncaptured.
BoundaryMeasure sample_parabolic_boundary(const SdeModel& model, std::span<const double> x0, double start_time,
                                          const CylinderCells& cells, std::size_t n, const IntegratorConfig& cfg);

/// Which cells enter the empirical sup of a ratio.
enum class NoiseFloorRule {
    both_below,    ///< drop a cell when both masses are below 5 / n
    either_below,  ///< drop a cell when either mass is below 5 / n
};

struct CellRatio {
    double numerator = 0.0;
    double denominator = 0.0;
    double ratio = 0.0;  ///< 0 when excluded
    bool excluded = false;
};

struct HarnackPair {
    std::size_t first = 0;   ///< index into the first grid
    std::size_t second = 0;  ///< index into the second grid
    double n_hat = 1.0;
    std::size_t argmax_cell = 0;
    std::size_t excluded_cells = 0;
    double excluded_mass = 0.0;  ///< first-measure mass on excluded cells
    double md_integral = 0.0;    ///< sum over cells of min(first, second)
    double md_std_error = 0.0;   ///< sqrt(sum over cells of max(se_first, se_second)^2)
    double adequate_mass = 0.0;  ///< first-measure mass on adequately sampled cells
    /// sum over adequate cells of min >= adequate_mass / n_hat (exact on data up to rounding)
    bool inequality_holds = true;
};

struct HarnackReport {
    std::string kind;  ///< "parabolic" or "elliptic"
    double n_hat = 1.0;
    std::vector<CellRatio> cells;  ///< parabolic: argmax pair; elliptic: per-cell sup / inf over the grid
    std::vector<HarnackPair> pairs;
    std::vector<double> captured_first;
    std::vector<double> captured_second;
    double q_hat = 0.0;        ///< min over the first grid of captured mass
    double md_integral = 0.0;  ///< min over pairs
    double md_std_error = 0.0;
    std::pair<std::size_t, std::size_t> argmin{0, 0};
    bool inequality_holds = true;
    /// q_hat / n_hat with the full captured mass; may exceed md_integral
    /// when mass sits in excluded cells (reported, not asserted).
    double q_over_n = 0.0;
    std::optional<double> proof_kappa;  ///< inf over the first grid of P(tau < 1)
    double epsilon = 0.0;
    double radius = 1.0;
    std::vector<Point> first_grid;
    std::vector<Point> second_grid;
    std::size_t samples = 0;
    std::size_t excluded_cells = 0;
    double excluded_mass = 0.0;
    NoiseFloorRule rule = NoiseFloorRule::both_below;
    std::vector<BoundaryMeasure> first_measures;
    std::vector<BoundaryMeasure> second_measures;
    std::vector<std::string> diagnostics;
};

/// Ratio mu^{x1} / mu^{eps, x2} on cylinder cells for every grid pair;
/// x1 point i uses substream derive(derive(s, 0), i), x2 point j uses derive(derive(s, 1), j).
HarnackReport parabolic_harnack_check(const SdeModel& model, std::span<const Point> first_grid,
                                      std::span<const Point> second_grid, const CylinderCells& cells, std::size_t n,
                                      const IntegratorConfig& cfg, NoiseFloorRule rule = NoiseFloorRule::both_below);

/// Ratio statistics of two boundary measures on shared cells.
HarnackPair compare_boundary_measures(const BoundaryMeasure& first, const BoundaryMeasure& second, std::size_t n,
                                      NoiseFloorRule rule, std::vector<CellRatio>* table = nullptr);

struct CorollaryReport {
    MdReport overlap;            ///< time-1 kernels on the covering grid
    HarnackReport parabolic;     ///< grid against itself
    double q_hat = 0.0;
    double p_eps = 0.0;          ///< min over the grid of P(|X_eps| <= 1/4)
    double p_eps_std_error = 0.0;
    std::size_t p_eps_argmin = 0;
    double q_prime = 0.0;        ///< q_hat * p_eps
    double q_prime_std_error = 0.0;
    double q_prime_direct = 0.0;  ///< joint-event frequency from independent pairs
    double q_prime_direct_std_error = 0.0;
    bool q_prime_consistent = false;  ///< |direct - product| <= 3 sqrt(se^2 + se^2)
    double bound = 0.0;               ///< q_prime / n_hat
    bool inequality_holds = false;    ///< overlap kappa >= bound
};

/// Time-1 overlap over R^d (binned on `bins`) for a grid in B_{1/8}, with
/// the q' diagnostic. Substreams: overlap derive(s, 0), parabolic derive(s, 1),
/// P(|X_eps| <= 1/4) derive(s, 2), direct q' derive(s, 3).
CorollaryReport md_via_parabolic_corollary(const SdeModel& model, std::span<const Point> grid,
                                           const CylinderCells& cells, const BinSpec& bins, std::size_t n,
                                           const IntegratorConfig& cfg,
                                           NoiseFloorRule rule = NoiseFloorRule::both_below);

/// Exit-place law on sphere cells of radius R from each grid point, simulated
/// to exit without a cap. Point k uses substream derive(cfg.substream, k).
std::vector<BoundaryMeasure> sample_exit_places(const SdeModel& model, double radius, std::span<const Point> grid,
                                                const SpherePartition& cells, std::size_t n,
                                                const IntegratorConfig& cfg);

/// Per-cell sup / inf over the grid of the exit-place masses; cells where
/// some grid point has zero mass are excluded.
HarnackReport elliptic_harnack_check(const SdeModel& model, double radius, std::span<const Point> grid,
                                     const SpherePartition& cells, std::size_t n, const IntegratorConfig& cfg);

HarnackReport elliptic_ratio_from_measures(std::span<const BoundaryMeasure> measures);

struct ExhaustionRung {
    double horizon = 0.0;
    MdReport overlap;         ///< pairwise sum over cells with reference mass > 0 of min(nu_{R,T})
    double tail_sup = 0.0;    ///< sup over the grid of P(tau_R >= T)
    std::size_t tail_argmax = 0;
};

struct EllipticMdReport {
    std::vector<ExhaustionRung> ladder;
    BoundaryMeasure reference;  ///< nu^0_R
    double radius = 1.0;
    std::vector<Point> grid;
    std::size_t samples = 0;
    bool monotone = true;  ///< every pairwise overlap nondecreasing along the ladder
    std::vector<std::string> diagnostics;
};

/// Overlaps of nu^{x}_{R,T} = P_x(X_tau in ., tau_R < T) against the reference
/// nu^0_R for each T in `horizons`. Every path is simulated once to exit, so the
/// ladder shares paths. Grid point k uses derive(derive(s, 0), k); the reference
/// uses derive(s, 1).
EllipticMdReport md_via_elliptic(const SdeModel& model, double radius, std::span<const double> horizons,
                                 std::span<const Point> grid, const SpherePartition& cells, std::size_t n,
                                 const IntegratorConfig& cfg);

} // namespace couplex
