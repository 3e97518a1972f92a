#include "couplex/tv.hpp"

#include <algorithm>
#include <cmath>

#include "couplex/error.hpp"

namespace couplex {

double tv_exact(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    require_compatible(p, q);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        s += std::abs(p.density(i) - q.density(i)) * p.lambda(i);
    }
    return 0.5 * s;
}

TvCurve tv_curve_chain(const FiniteChain& chain, std::span<const double> initial, std::size_t max_t,
                       std::optional<std::vector<double>> stationary) {
    const std::vector<double> pi = stationary ? *stationary : chain_stationary(chain);
    if (pi.size() != chain.size() || initial.size() != chain.size()) {
        throw InvalidArgument("tv_curve_chain: laws must have one entry per state");
    }
    const auto target = DiscreteDistribution::from_probabilities(pi);
    TvCurve c;
    c.exact = true;
    std::vector<double> mu(initial.begin(), initial.end());
    for (std::size_t t = 0; t <= max_t; ++t) {
        c.times.push_back(static_cast<double>(t));
        c.tv.push_back(tv_exact(DiscreteDistribution::from_probabilities(mu), target));
        c.std_error.push_back(0.0);
        if (t < max_t) {
            mu = chain_step(chain, mu);
        }
    }
    return c;
}

TvCurve tv_curve_model(const SdeModel& model, std::span<const double> x0, const DiscreteDistribution& stationary,
                       std::span<const double> times, std::size_t n, const BinSpec& bins,
                       const IntegratorConfig& cfg) {
    if (stationary.size() != bins.size()) {
        throw IncompatibleSupport("tv_curve_model: stationary law and bins differ in cell count");
    }
    const auto clouds = sample_at_times(model, x0, times, n, cfg);
    TvCurve c;
    c.exact = false;
    c.resolution = "TV at resolution: " + std::to_string(bins.size()) + " cells of volume " +
                   std::to_string(bins.grid.cell_volume()) + ", n=" + std::to_string(n);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const KernelHistogram h = bin_measure(clouds[k], bins);
        c.times.push_back(times[k]);
        c.tv.push_back(std::clamp(tv_exact(h.distribution, stationary), 0.0, 1.0));
        double se = 0.0;
        for (double v : h.mass_stderr) {
            se += v;
        }
        c.std_error.push_back(0.5 * se);
    }
    return c;
}

MonotonicityVerdict check_tv_monotonicity(const TvCurve& curve, double sigmas) {
    if (curve.tv.size() != curve.times.size() || curve.std_error.size() != curve.tv.size()) {
        throw InvalidArgument("check_tv_monotonicity: ragged curve");
    }
    MonotonicityVerdict v;
    for (std::size_t k = 0; k < curve.tv.size(); ++k) {
        for (std::size_t l = k + 1; l < curve.tv.size(); ++l) {
            const double rise = curve.tv[l] - curve.tv[k];
            const double slack =
                curve.exact ? 1e-12
                            : sigmas * std::sqrt(curve.std_error[k] * curve.std_error[k] +
                                                 curve.std_error[l] * curve.std_error[l]);
            if (rise > v.max_violation) {
                v.max_violation = rise;
                v.worst = std::pair{k, l};
            }
            if (rise > slack) {
                ++v.violations;
                v.holds = false;
            }
        }
    }
    return v;
}

CouplingBoundVerdict coupling_bound_check(std::span<const CouplingResult> ensemble, double tv, bool maximal) {
    if (ensemble.empty()) {
        throw InvalidArgument("coupling_bound_check: empty ensemble");
    }
    std::size_t miss = 0;
    for (const auto& r : ensemble) {
        miss += r.coalesced ? 0 : 1;
    }
    CouplingBoundVerdict v;
    const double n = static_cast<double>(ensemble.size());
    v.mismatch = static_cast<double>(miss) / n;
    v.std_error = std::sqrt(v.mismatch * (1.0 - v.mismatch) / n);
    v.tv = tv;
    v.maximal = maximal;
    // A zero binomial SE (all or none coalesced) still leaves one-sample resolution.
    const double slack = 3.0 * std::max(v.std_error, 1.0 / n);
    v.holds = maximal ? std::abs(v.mismatch - tv) <= slack : tv <= v.mismatch + slack;
    return v;
}

} // namespace couplex
