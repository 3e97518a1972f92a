#include "couplex/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "couplex/error.hpp"
#include "couplex/models.hpp"
#include "couplex/parallel.hpp"
#include "couplex/stats.hpp"

namespace couplex {

namespace {

// exp() overflows just above this.
constexpr double kMaxLogWeight = 709.0;

double sign_of(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double direction_sign(WeightDirection d) noexcept { return d == WeightDirection::add_drift ? 1.0 : -1.0; }

WeightedSample finish(Point terminal, double log_weight) {
    WeightedSample s;
    s.terminal = std::move(terminal);
    s.log_weight = log_weight;
    if (log_weight > kMaxLogWeight) {
        s.overflow = true;
        s.weight = std::numeric_limits<double>::max();
    } else {
        s.weight = std::exp(log_weight);
    }
    return s;
}

/// Per-worker scratch for b~2 and sigma.
struct TildeScratch {
    explicit TildeScratch(std::size_t d) : b2(d), sigma(d * d), tilde(d) {}
    std::vector<double> b2;
    std::vector<double> sigma;
    std::vector<double> tilde;
};

void tilde_into(const DriftSplitModel& split, std::span<const double> x, TildeScratch& s) {
    split.extra_drift(x, s.b2);
    split.base().diffusion(x, s.sigma);
    if (!detail::solve_small(s.sigma, s.b2, s.tilde)) {
        throw NumericalBlowup("sigma is singular; b~2 = sigma^{-1} b2 undefined", Point(x.begin(), x.end()), 0.0);
    }
    for (double v : s.tilde) {
        if (!std::isfinite(v)) {
            throw NumericalBlowup("b~2 = sigma^{-1} b2 is not finite", Point(x.begin(), x.end()), 0.0);
        }
    }
}

} // namespace

std::string_view to_string(WeightDirection d) noexcept {
    return d == WeightDirection::add_drift ? "add-drift" : "remove-drift";
}

WeightDirection parse_weight_direction(std::string_view text) {
    if (text == "add-drift") {
        return WeightDirection::add_drift;
    }
    if (text == "remove-drift") {
        return WeightDirection::remove_drift;
    }
    throw InvalidArgument("weight direction must be 'add-drift' or 'remove-drift', got '" + std::string(text) + "'");
}

DriftSplitModel::DriftSplitModel(SdeModel base, VectorField extra, std::optional<double> extra_sup,
                                 std::string extra_name)
    : base_(std::move(base)), extra_(std::move(extra)), extra_sup_(extra_sup), extra_name_(std::move(extra_name)) {
    if (!extra_) {
        throw InvalidArgument("DriftSplitModel: extra drift must be callable");
    }
    extra_is_zero_ = extra_sup_ && *extra_sup_ == 0.0;
}

DriftSplitModel DriftSplitModel::from_spec(SdeModel base, std::string_view extra_spec) {
    const ModelSpec spec = ModelSpec::parse(extra_spec);
    const auto d = static_cast<double>(base.dim());
    if (spec.name == "zero") {
        spec.expect_only({});
        return DriftSplitModel(
            std::move(base), [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); },
            0.0, spec.str());
    }
    if (spec.name == "constant") {
        spec.expect_only({"c"});
        const double c = spec.get("c", 0.0);
        return DriftSplitModel(
            std::move(base), [c](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), c); },
            std::abs(c) * std::sqrt(d), spec.str());
    }
    if (spec.name == "sign") {
        spec.expect_only({"a"});
        const double a = spec.get("a", 1.0);
        return DriftSplitModel(
            std::move(base),
            [a](std::span<const double> x, std::span<double> out) {
                for (std::size_t i = 0; i < x.size(); ++i) {
                    out[i] = -a * sign_of(x[i]);
                }
            },
            std::abs(a) * std::sqrt(d), spec.str());
    }
    throw InvalidArgument("unknown extra drift '" + spec.name + "' (expected zero, constant{c}, sign{a})");
}

std::optional<double> DriftSplitModel::tilde_sup() const noexcept {
    if (!extra_sup_ || !base_.bounds().inverse_diffusion_sup) {
        return std::nullopt;
    }
    return *extra_sup_ * *base_.bounds().inverse_diffusion_sup;
}

void DriftSplitModel::tilde_extra(std::span<const double> x, std::span<double> out) const {
    TildeScratch s(dim());
    tilde_into(*this, x, s);
    std::copy(s.tilde.begin(), s.tilde.end(), out.begin());
}

SdeModel DriftSplitModel::full_model() const {
    CoefficientBounds bounds = base_.bounds();
    if (bounds.drift_sup && extra_sup_) {
        bounds.drift_sup = *bounds.drift_sup + *extra_sup_;
    } else {
        bounds.drift_sup.reset();
    }
    auto drift = [b1 = base_.drift_field(), b2 = extra_](std::span<const double> x, std::span<double> out) {
        b1(x, out);
        std::vector<double> extra(out.size());
        b2(x, extra);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] += extra[i];
        }
    };
    return SdeModel(dim(), drift, base_.diffusion_field(), bounds, base_.name() + "+" + extra_name_);
}

double log_weight_segment(const DriftSplitModel& split, const Path& path, std::size_t k0, std::size_t k1,
                          WeightDirection direction) {
    if (path.dim != split.dim()) {
        throw InvalidArgument("log_weight_segment: path dimension differs from the model");
    }
    if (path.increments.size() != (path.size() - 1) * path.dim) {
        throw InvalidArgument("log_weight_segment: path carries no Brownian increments");
    }
    if (k0 > k1 || k1 + 1 > path.size()) {
        throw InvalidArgument("log_weight_segment: step range out of bounds");
    }
    if (split.extra_is_zero()) {
        return 0.0;
    }
    const double sign = direction_sign(direction);
    TildeScratch s(split.dim());
    double stoch = 0.0;
    double quad = 0.0;
    for (std::size_t k = k0; k < k1; ++k) {
        tilde_into(split, path.state(k), s);
        const auto dw = path.increment(k);
        const double h = path.times[k + 1] - path.times[k];
        double dot = 0.0;
        double sq = 0.0;
        for (std::size_t i = 0; i < split.dim(); ++i) {
            dot += s.tilde[i] * dw[i];
            sq += s.tilde[i] * s.tilde[i];
        }
        stoch += dot;
        quad += sq * h;
    }
    return sign * stoch - 0.5 * quad;
}

WeightedSample stochastic_exponential(const DriftSplitModel& split, const Path& path, WeightDirection direction) {
    const double lw = log_weight_segment(split, path, 0, path.size() - 1, direction);
    const auto last = path.state(path.size() - 1);
    return finish(Point(last.begin(), last.end()), lw);
}

std::optional<double> log_weight_bound(const DriftSplitModel& split, const Path& path) {
    const auto sup = split.tilde_sup();
    if (!sup) {
        return std::nullopt;
    }
    double abs_dw = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        double sq = 0.0;
        for (double v : path.increment(k)) {
            sq += v * v;
        }
        abs_dw += std::sqrt(sq);
    }
    const double horizon = path.times.back() - path.times.front();
    return *sup * abs_dw + 0.5 * *sup * *sup * horizon;
}

WeightedEnsemble simulate_weighted(const DriftSplitModel& split, std::span<const double> x0, double horizon,
                                   std::size_t n, const IntegratorConfig& cfg, WeightDirection direction) {
    if (n == 0) {
        throw InvalidArgument("simulate_weighted needs n >= 1");
    }
    split.base().require_non_degenerate("simulate_weighted");
    if (x0.size() != split.dim()) {
        throw InvalidArgument("simulate_weighted: start point of wrong dimension");
    }
    const std::size_t d = split.dim();
    const TimeGrid grid = make_time_grid(horizon, cfg.step);
    const double sign = direction_sign(direction);
    WeightedEnsemble out;
    out.measure.dim = d;
    out.measure.provenance = {cfg.seed, cfg.substream, 0};
    out.measure.points.resize(n * d);
    out.measure.weights.resize(n);
    out.log_weights.resize(n);
    std::vector<unsigned char> overflow(n, 0);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        Stream rng(cfg.seed, cfg.substream, static_cast<std::uint32_t>(i));
        EulerStepper stepper(split.base());
        TildeScratch s(d);
        Point x(x0.begin(), x0.end());
        std::vector<double> dw(d);
        double stoch = 0.0;
        double quad = 0.0;
        for (std::size_t k = 0; k < grid.steps; ++k) {
            const double h = grid.dt(k);
            if (!split.extra_is_zero()) {
                tilde_into(split, x, s);
            }
            stepper.step(x, h, rng, dw, grid.time(k));
            if (!split.extra_is_zero()) {
                double dot = 0.0;
                double sq = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    dot += s.tilde[j] * dw[j];
                    sq += s.tilde[j] * s.tilde[j];
                }
                stoch += dot;
                quad += sq * h;
            }
        }
        const WeightedSample ws = finish(x, sign * stoch - 0.5 * quad);
        std::copy(x.begin(), x.end(), out.measure.points.begin() + static_cast<std::ptrdiff_t>(i * d));
        out.measure.weights[i] = ws.weight;
        out.log_weights[i] = ws.log_weight;
        overflow[i] = ws.overflow;
    });
    out.overflowed = static_cast<std::size_t>(std::count(overflow.begin(), overflow.end(), 1));
    double sw = 0.0;
    double sw2 = 0.0;
    for (double w : out.measure.weights) {
        sw += w;
        sw2 += w * w;
    }
    out.effective_samples = sw2 > 0.0 ? sw * sw / sw2 : 0.0;
    return out;
}

KernelHistogram reweighted_kernel(const DriftSplitModel& split, std::span<const double> x0, double horizon,
                                  std::size_t n, const BinSpec& bins, const IntegratorConfig& cfg,
                                  bool self_normalize) {
    const WeightedEnsemble ens = simulate_weighted(split, x0, horizon, n, cfg, WeightDirection::add_drift);
    KernelHistogram h = bin_measure(ens.measure, bins, self_normalize);
    if (h.effective_samples < kLowEffectiveSample) {
        h.warnings.push_back("LowEffectiveSample: n_eff=" + std::to_string(h.effective_samples) + " < 100");
    }
    if (ens.overflowed > 0) {
        h.warnings.push_back("weight overflow on " + std::to_string(ens.overflowed) + " paths");
    }
    return h;
}

MdReport estimate_md_girsanov(const DriftSplitModel& split, const MdQuery& query, std::size_t n,
                              const IntegratorConfig& cfg, bool self_normalize) {
    split.base().require_non_degenerate("estimate_md_girsanov");
    query.validate(split.dim());
    std::vector<KernelHistogram> hists;
    for (std::size_t k = 0; k < query.start_grid.size(); ++k) {
        IntegratorConfig sub = cfg;
        sub.substream = derive_substream(cfg.substream, k);
        hists.push_back(reweighted_kernel(split, query.start_grid[k], query.horizon, n, query.bins, sub, self_normalize));
    }
    return kappa_from_histograms(hists, query.start_grid, query.horizon);
}

double histogram_tv(const DiscreteDistribution& a, const DiscreteDistribution& b) {
    require_compatible(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::abs(a.mass(i) - b.mass(i));
    }
    return 0.5 * s;
}

GirsanovCheck girsanov_check(const DriftSplitModel& split, std::span<const double> x0, double horizon,
                             std::size_t n, const BinSpec& bins, const IntegratorConfig& cfg) {
    IntegratorConfig weighted_cfg = cfg;
    weighted_cfg.substream = derive_substream(cfg.substream, 0);
    IntegratorConfig direct_cfg = cfg;
    direct_cfg.substream = derive_substream(cfg.substream, 1);

    const WeightedEnsemble ens = simulate_weighted(split, x0, horizon, n, weighted_cfg, WeightDirection::add_drift);
    const auto rho = stats::mean_estimate(ens.measure.weights);
    const KernelHistogram weighted = bin_measure(ens.measure, bins);
    const KernelHistogram direct = bin_measure(sample_transition(split.full_model(), x0, horizon, n, direct_cfg), bins);

    GirsanovCheck r;
    r.mean_rho = rho.mean;
    r.std_error = rho.std_error;
    r.n_eff = ens.effective_samples;
    r.samples = n;
    r.overflowed = ens.overflowed;
    r.kernel_tv_vs_direct = histogram_tv(weighted.distribution, direct.distribution);
    double var = 0.0;
    for (std::size_t c = 0; c < bins.size(); ++c) {
        var += weighted.mass_stderr[c] * weighted.mass_stderr[c] + direct.mass_stderr[c] * direct.mass_stderr[c];
    }
    r.tv_noise_scale = std::sqrt(var);
    if (r.n_eff < kLowEffectiveSample) {
        r.warnings.push_back("LowEffectiveSample: n_eff=" + std::to_string(r.n_eff) + " < 100");
    }
    for (const auto& w : direct.warnings) {
        r.warnings.push_back(w);
    }
    return r;
}

} // namespace couplex
