#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "couplex/distribution.hpp"
#include "couplex/oracle.hpp"
#include "couplex/sde.hpp"

namespace couplex {

inline constexpr const char* kTvConvention =
    "TV in [0,1] (sup_A |mu(A) - nu(A)|); the doubled norm ||mu - nu||_TV equals 2x this value";

/// Start grid over D, binning of D', horizon T. A whole-space region in
/// `bins` gives the global coefficient on the covering grid.
struct MdQuery {
    std::vector<Point> start_grid;
    BinSpec bins;
    double horizon = 1.0;

    void validate(std::size_t dim) const;
};

/// kappa = min over start pairs of sum over D' cells of min(mu_a, mu_b).
struct MdReport {
    double kappa = 0.0;
    std::vector<Point> start_grid;
    std::vector<double> matrix;     ///< m x m pairwise overlaps, row-major
    std::vector<double> std_error;  ///< m x m: sqrt(sum over cells of max(se_a, se_b)^2); an upper proxy, not a CI
    std::vector<double> outside_mass;  ///< per start point, mass outside the D' cells
    std::pair<std::size_t, std::size_t> argmin{0, 0};
    std::size_t samples = 0;
    std::size_t bins = 0;
    double horizon = 0.0;
    std::string convention = kTvConvention;
    std::vector<std::string> diagnostics;

    /// Number of laws compared; start_grid may be empty for reports built from distributions.
    std::size_t points() const noexcept { return outside_mass.size(); }
    double pair(std::size_t i, std::size_t j) const { return matrix.at(i * points() + j); }
    double pair_std_error(std::size_t i, std::size_t j) const { return std_error.at(i * points() + j); }
    double kappa_std_error() const { return pair_std_error(argmin.first, argmin.second); }
};

/// Pairwise overlaps of already-binned laws. `std_errors` may be empty.
MdReport kappa_from_distributions(std::span<const DiscreteDistribution> laws,
                                  std::span<const std::vector<double>> std_errors);

MdReport kappa_from_histograms(std::span<const KernelHistogram> histograms, std::vector<Point> start_grid,
                               double horizon);

/// Histogram of X_T from x0 on `bins`; mass outside is kept as the defect.
KernelHistogram estimate_kernel_histogram(const SdeModel& model, std::span<const double> x0, double horizon,
                                          std::size_t n, const BinSpec& bins, const IntegratorConfig& cfg);

/// Histograms for every start point; point k uses substream derive_substream(cfg.substream, k).
std::vector<KernelHistogram> start_grid_histograms(const SdeModel& model, const MdQuery& query, std::size_t n,
                                                   const IntegratorConfig& cfg);

MdReport estimate_md(const SdeModel& model, const MdQuery& query, std::size_t n, const IntegratorConfig& cfg);

struct MinorizationReport {
    DiscreteDistribution nu;
    double c = 0.0;
    double horizon = 0.0;
    double nu_covered_mass = 0.0;  ///< nu mass on the D' cells
    std::optional<std::pair<std::size_t, std::size_t>> argmin;  ///< (start point, cell) attaining c
    std::vector<std::string> diagnostics;
};

/// Normalized Lebesgue measure on the D' cells.
DiscreteDistribution uniform_reference(const BinSpec& bins);

/// c = min over start points and cells with nu > 0 of mu(cell) / nu(cell).
MinorizationReport minorization_from_histograms(std::span<const KernelHistogram> histograms,
                                                const DiscreteDistribution& nu, double horizon);

MinorizationReport check_minorization(const SdeModel& model, const MdQuery& query, std::size_t n,
                                      const IntegratorConfig& cfg,
                                      const std::optional<DiscreteDistribution>& nu = std::nullopt);

/// min over i, k in D of sum over j in D' of min(Q(i, j), Q(k, j)).
double exact_md_finite_chain(const FiniteChain& chain, std::span<const std::size_t> from,
                             std::span<const std::size_t> to);

} // namespace couplex
