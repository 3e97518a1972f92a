#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "couplex/distribution.hpp"
#include "couplex/md.hpp"
#include "couplex/sde.hpp"

namespace couplex {

/// Which measure change the weight performs.
///   add_drift:    samples of the b1 equation -> expectations under b1 + b2:
///                 rho = exp(+sum b~2(X_k) dW_k - 1/2 sum |b~2(X_k)|^2 h_k)
///   remove_drift: samples of the b1 + b2 equation -> expectations under b1:
///                 rho = exp(-sum b~2(X_k) dW_k - 1/2 sum |b~2(X_k)|^2 h_k)
/// with b~2 = sigma^{-1} b2 evaluated at the left endpoint of each step.
enum class WeightDirection { add_drift, remove_drift };

std::string_view to_string(WeightDirection d) noexcept;
WeightDirection parse_weight_direction(std::string_view text);

/// b = b1 + b2 with b1 the drift of `base` and b2 bounded.
class DriftSplitModel {
public:
    DriftSplitModel(SdeModel base, VectorField extra, std::optional<double> extra_sup, std::string extra_name);

    /// Extra drift from "zero", "constant{c=...}" or "sign{a=...}"
    /// (b2_i = -a sgn(x_i)).
    static DriftSplitModel from_spec(SdeModel base, std::string_view extra_spec);

    const SdeModel& base() const noexcept { return base_; }
    std::size_t dim() const noexcept { return base_.dim(); }
    const std::string& extra_name() const noexcept { return extra_name_; }
    std::optional<double> extra_sup() const noexcept { return extra_sup_; }
    /// sup |b2| * sup ||sigma^{-1}||, when both are declared.
    std::optional<double> tilde_sup() const noexcept;
    bool extra_is_zero() const noexcept { return extra_is_zero_; }

    void extra_drift(std::span<const double> x, std::span<double> out) const { extra_(x, out); }
    /// sigma(x)^{-1} b2(x); throws NumericalBlowup when sigma(x) is singular.
    void tilde_extra(std::span<const double> x, std::span<double> out) const;

    /// The full equation with drift b1 + b2.
    SdeModel full_model() const;

private:
    SdeModel base_;
    VectorField extra_;
    std::optional<double> extra_sup_;
    std::string extra_name_;
    bool extra_is_zero_ = false;
};

struct WeightedSample {
    Point terminal;
    double log_weight = 0.0;
    double weight = 1.0;
    bool overflow = false;  ///< exp(log_weight) not representable; `weight` is then clamped
};

/// Sum over grid steps [k0, k1) of the log-weight integrand along `path`.
double log_weight_segment(const DriftSplitModel& split, const Path& path, std::size_t k0, std::size_t k1,
                          WeightDirection direction);

/// rho_T along a path that carries its Brownian increments.
WeightedSample stochastic_exponential(const DriftSplitModel& split, const Path& path, WeightDirection direction);

/// sup|b~2| * sum_k |dW_k| + 1/2 sup|b~2|^2 T; empty if sup|b~2| is unknown.
std::optional<double> log_weight_bound(const DriftSplitModel& split, const Path& path);

struct WeightedEnsemble {
    EmpiricalMeasure measure;  ///< terminal states with weights rho
    std::vector<double> log_weights;
    std::size_t overflowed = 0;
    double effective_samples = 0.0;
};

/// n paths of the b1 equation from x0 weighted by rho. Path i uses
/// Stream(seed, substream, i), so terminal states coincide with sample_transition(base, ...).
WeightedEnsemble simulate_weighted(const DriftSplitModel& split, std::span<const double> x0, double horizon,
                                   std::size_t n, const IntegratorConfig& cfg,
                                   WeightDirection direction = WeightDirection::add_drift);

inline constexpr double kLowEffectiveSample = 100.0;

/// Weighted histogram estimating the b1 + b2 kernel. Warns "LowEffectiveSample"
/// when (sum w)^2 / sum w^2 < 100.
KernelHistogram reweighted_kernel(const DriftSplitModel& split, std::span<const double> x0, double horizon,
                                  std::size_t n, const BinSpec& bins, const IntegratorConfig& cfg,
                                  bool self_normalize = false);

/// estimate_md on reweighted kernels; start point k uses derive_substream(cfg.substream, k).
MdReport estimate_md_girsanov(const DriftSplitModel& split, const MdQuery& query, std::size_t n,
                              const IntegratorConfig& cfg, bool self_normalize = false);

struct GirsanovCheck {
    double mean_rho = 0.0;
    double std_error = 0.0;
    double n_eff = 0.0;
    /// 1/2 sum over cells |weighted - direct| at the binning resolution.
    double kernel_tv_vs_direct = 0.0;
    /// sqrt(sum over cells of se_w^2 + se_d^2): scale of the noise in the TV estimate.
    double tv_noise_scale = 0.0;
    std::size_t samples = 0;
    std::size_t overflowed = 0;
    std::vector<std::string> warnings;
};

/// Weighted ensemble (substream derive(cfg.substream, 0)) against direct
/// simulation of the full equation (substream derive(cfg.substream, 1)).
GirsanovCheck girsanov_check(const DriftSplitModel& split, std::span<const double> x0, double horizon,
                             std::size_t n, const BinSpec& bins, const IntegratorConfig& cfg);

/// 1/2 sum over cells |a - b| masses; outside mass is ignored.
double histogram_tv(const DiscreteDistribution& a, const DiscreteDistribution& b);

} // namespace couplex
