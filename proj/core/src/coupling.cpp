#include "couplex/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "couplex/error.hpp"
#include "couplex/parallel.hpp"

namespace couplex {

namespace {

// Below this, 1 - q is treated as zero and the residual branch is dropped.
constexpr double kFullOverlapSlack = 1e-12;

std::vector<double> cumulative(const DiscreteDistribution& d) {
    std::vector<double> cdf(d.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        acc += d.mass(i);
        cdf[i] = acc;
    }
    return cdf;
}

void require_law(const DiscreteDistribution& p, const char* which) {
    if (std::abs(p.defect()) > 1e-9) {
        throw InvalidArgument(std::string("maximal coupling: ") + which + " has mass outside its cells");
    }
    p.require_probability();
}

} // namespace

MaximalCouplingSampler MaximalCouplingSampler::build(const DiscreteDistribution& p1, const DiscreteDistribution& p2) {
    require_compatible(p1, p2);
    require_law(p1, "first law");
    require_law(p2, "second law");

    const std::size_t m = p1.size();
    std::vector<double> common(m);
    std::vector<double> res1(m);
    std::vector<double> res2(m);
    double q = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double lo = std::min(p1.density(i), p2.density(i));
        common[i] = lo;
        res1[i] = p1.density(i) - lo;
        res2[i] = p2.density(i) - lo;
        q += lo * p1.lambda(i);
    }

    MaximalCouplingSampler s;
    if (1.0 - q <= kFullOverlapSlack) {
        q = 1.0;
    }
    s.q_ = q;
    if (q > 0.0) {
        for (auto& v : common) {
            v /= q;
        }
        s.common_ = DiscreteDistribution(p1.lambdas(), std::move(common));
        s.common_cdf_ = cumulative(*s.common_);
    }
    if (q < 1.0) {
        const double scale = 1.0 / (1.0 - q);
        for (std::size_t i = 0; i < m; ++i) {
            res1[i] *= scale;
            res2[i] *= scale;
        }
        s.residual_[0] = DiscreteDistribution(p1.lambdas(), std::move(res1));
        s.residual_[1] = DiscreteDistribution(p1.lambdas(), std::move(res2));
        s.residual_cdf_[0] = cumulative(*s.residual_[0]);
        s.residual_cdf_[1] = cumulative(*s.residual_[1]);
    }
    return s;
}

std::size_t MaximalCouplingSampler::sample_cell(const std::vector<double>& cdf, double u) noexcept {
    const double target = u * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    if (it == cdf.end()) {
        // Rounding at the top: fall back to the last cell carrying mass.
        auto last = cdf.size() - 1;
        while (last > 0 && cdf[last] == cdf[last - 1]) {
            --last;
        }
        return last;
    }
    return static_cast<std::size_t>(it - cdf.begin());
}

CouplingResult MaximalCouplingSampler::draw(Stream& rng) const {
    const double zeta = rng.uniform();
    if (q_ >= 1.0 || (q_ > 0.0 && zeta < q_)) {
        const auto c = static_cast<double>(sample_cell(common_cdf_, rng.uniform()));
        return {c, c, true, std::nullopt};
    }
    const auto a = static_cast<double>(sample_cell(residual_cdf_[0], rng.uniform()));
    const auto b = static_cast<double>(sample_cell(residual_cdf_[1], rng.uniform()));
    return {a, b, a == b, std::nullopt};
}

double MaximalCouplingSampler::mixture_residual(const DiscreteDistribution& p1, const DiscreteDistribution& p2) const {
    require_compatible(p1, p2);
    double worst = 0.0;
    for (std::size_t i = 0; i < p1.size(); ++i) {
        const double xi = common_ ? common_->density(i) : 0.0;
        for (int j = 0; j < 2; ++j) {
            const double eta = residual_[j] ? residual_[j]->density(i) : 0.0;
            const double target = j == 0 ? p1.density(i) : p2.density(i);
            worst = std::max(worst, std::abs((1.0 - q_) * eta + q_ * xi - target));
        }
    }
    return worst;
}

MaximalCouplingSampler build_maximal_coupling(const DiscreteDistribution& p1, const DiscreteDistribution& p2) {
    return MaximalCouplingSampler::build(p1, p2);
}

CouplingResult draw_coupled_pair(const MaximalCouplingSampler& sampler, Stream& rng) { return sampler.draw(rng); }

std::vector<CouplingResult> draw_coupled_pairs(const MaximalCouplingSampler& sampler, std::size_t n,
                                               std::uint64_t seed, std::uint64_t substream, unsigned threads) {
    std::vector<CouplingResult> out(n);
    parallel_for(n, threads, [&](std::size_t i) {
        Stream rng(seed, substream, static_cast<std::uint32_t>(i));
        out[i] = sampler.draw(rng);
    });
    return out;
}

namespace {

void require_bounded_1d(const SdeModel& model) {
    if (model.dim() != 1) {
        throw InvalidArgument("intersection coupling is defined for d = 1 only");
    }
    const auto& b = model.bounds();
    if (!b.drift_sup || !b.diffusion_sup || !b.inverse_diffusion_sup) {
        throw InvalidArgument("intersection coupling needs declared sup|b|, sup|sigma| and sup|sigma^-1| (model '" +
                              model.name() + "')");
    }
}

struct CoupleOptions {
    bool stop_on_meet = false;
    Path* first = nullptr;
    Path* second = nullptr;
};

CouplingResult couple(const SdeModel& model, double x1, double x2, double horizon, const IntegratorConfig& cfg,
                      std::uint32_t pair_id, CoupleOptions opts) {
    require_bounded_1d(model);
    const TimeGrid grid = make_time_grid(horizon, cfg.step);
    Stream rng1(cfg.seed, derive_substream(cfg.substream, 1), pair_id);
    Stream rng2(cfg.seed, derive_substream(cfg.substream, 2), pair_id);
    EulerStepper step1(model);
    EulerStepper step2(model);
    double x = x1;
    double y = x2;
    double dw1 = 0.0;
    double dw2 = 0.0;

    auto record = [&](std::size_t k) {
        if (opts.first) {
            opts.first->times[k] = grid.time(k);
            opts.first->states[k] = x;
            opts.second->times[k] = grid.time(k);
            opts.second->states[k] = y;
        }
    };
    if (opts.first) {
        for (Path* p : {opts.first, opts.second}) {
            p->dim = 1;
            p->times.assign(grid.steps + 1, 0.0);
            p->states.assign(grid.steps + 1, 0.0);
            p->increments.assign(grid.steps, 0.0);
        }
        opts.first->provenance = {cfg.seed, derive_substream(cfg.substream, 1), pair_id};
        opts.second->provenance = {cfg.seed, derive_substream(cfg.substream, 2), pair_id};
    }

    std::optional<double> tau;
    if (std::abs(x - y) <= kMeetingTolerance) {
        tau = 0.0;
        y = x;
    }
    record(0);
    if (tau && opts.stop_on_meet) {
        return {x, y, true, tau};
    }
    for (std::size_t k = 0; k < grid.steps; ++k) {
        const double dt = grid.dt(k);
        const double before = x - y;
        step1.step({&x, 1}, dt, rng1, {&dw1, 1}, grid.time(k));
        if (tau) {
            y = x;
            dw2 = dw1;
        } else {
            step2.step({&y, 1}, dt, rng2, {&dw2, 1}, grid.time(k));
            const double after = x - y;
            if (after * before < 0.0 || std::abs(after) <= kMeetingTolerance) {
                tau = grid.time(k + 1);
                y = x;
            }
        }
        if (opts.first) {
            opts.first->increments[k] = dw1;
            opts.second->increments[k] = dw2;
        }
        record(k + 1);
        if (tau && opts.stop_on_meet) {
            return {x, y, true, tau};
        }
    }
    return {x, y, tau.has_value(), tau};
}

} // namespace

CouplingResult intersection_couple_1d(const SdeModel& model, double x1, double x2, double horizon,
                                      const IntegratorConfig& cfg, std::uint32_t pair_id) {
    return couple(model, x1, x2, horizon, cfg, pair_id, {});
}

GluedPaths intersection_couple_paths_1d(const SdeModel& model, double x1, double x2, double horizon,
                                        const IntegratorConfig& cfg, std::uint32_t pair_id) {
    GluedPaths out;
    out.result = couple(model, x1, x2, horizon, cfg, pair_id, {false, &out.first, &out.second});
    return out;
}

MeetingTable estimate_meeting_probability(const SdeModel& model, std::span<const std::pair<double, double>> pairs,
                                          double horizon, std::size_t n, const IntegratorConfig& cfg) {
    require_bounded_1d(model);
    if (n == 0 || pairs.empty()) {
        throw InvalidArgument("estimate_meeting_probability needs n >= 1 and a nonempty grid");
    }
    MeetingTable table;
    table.horizon = horizon;
    std::vector<unsigned char> met(n);
    for (std::size_t g = 0; g < pairs.size(); ++g) {
        IntegratorConfig sub = cfg;
        sub.substream = derive_substream(cfg.substream, g);
        const auto [x1, x2] = pairs[g];
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            met[i] = couple(model, x1, x2, horizon, sub, static_cast<std::uint32_t>(i), {true, nullptr, nullptr})
                         .coalesced;
        });
        const auto hits = static_cast<double>(std::count(met.begin(), met.end(), 1));
        const double p = hits / static_cast<double>(n);
        table.rows.push_back({x1, x2, p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n});
    }
    for (std::size_t g = 1; g < table.rows.size(); ++g) {
        if (table.rows[g].probability < table.rows[table.argmin].probability) {
            table.argmin = g;
        }
    }
    return table;
}

std::vector<std::pair<double, double>> pair_grid(std::span<const double> points) {
    std::vector<std::pair<double, double>> out;
    for (double a : points) {
        for (double b : points) {
            out.emplace_back(a, b);
        }
    }
    return out;
}

} // namespace couplex
