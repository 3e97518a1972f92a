#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "couplex/coupling.hpp"
#include "couplex/distribution.hpp"
#include "couplex/md.hpp"
#include "couplex/oracle.hpp"
#include "couplex/sde.hpp"

namespace couplex {

/// 1/2 sum over shared cells |p - q| lambda; equals 1 - overlap for laws without outside mass.
double tv_exact(const DiscreteDistribution& p, const DiscreteDistribution& q);

/// TV over time against a stationary law.
struct TvCurve {
    std::vector<double> times;
    std::vector<double> tv;
    std::vector<double> std_error;  ///< 0 for exact curves
    bool exact = false;
    std::string convention = kTvConvention;
    std::string resolution;  ///< empty for exact curves
};

/// TV(mu P^t, pi) for t = 0..max_t by matrix powers; pi defaults to the stationary law.
TvCurve tv_curve_chain(const FiniteChain& chain, std::span<const double> initial, std::size_t max_t,
                       std::optional<std::vector<double>> stationary = std::nullopt);

/// TV between the binned law of X_t (n paths from x0, shared across times)
/// and `stationary` on the same bins. Underestimates the continuous TV by
/// the binning and overestimates it by sampling noise.
TvCurve tv_curve_model(const SdeModel& model, std::span<const double> x0, const DiscreteDistribution& stationary,
                       std::span<const double> times, std::size_t n, const BinSpec& bins,
                       const IntegratorConfig& cfg);

struct MonotonicityVerdict {
    bool holds = true;
    std::size_t violations = 0;
    double max_violation = 0.0;  ///< largest psi(t_l) - psi(t_k) over k < l, before slack
    std::optional<std::pair<std::size_t, std::size_t>> worst;
};

/// psi(t_l) <= psi(t_k) for all k < l. Exact curves use a 1e-12 slack;
/// Monte Carlo curves allow sigmas * sqrt(se_k^2 + se_l^2).
MonotonicityVerdict check_tv_monotonicity(const TvCurve& curve, double sigmas = 3.0);

struct CouplingBoundVerdict {
    bool holds = false;
    double mismatch = 0.0;
    double std_error = 0.0;
    double tv = 0.0;
    bool maximal = false;
};

/// Maximal couplings: |mismatch - tv| <= 3 SE. Other couplings: tv <= mismatch + 3 SE.
CouplingBoundVerdict coupling_bound_check(std::span<const CouplingResult> ensemble, double tv, bool maximal);

} // namespace couplex
