#include "couplex/app/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "couplex/app/json_io.hpp"
#include "couplex/coupling.hpp"
#include "couplex/error.hpp"
#include "couplex/girsanov.hpp"
#include "couplex/harnack.hpp"
#include "couplex/md.hpp"
#include "couplex/models.hpp"
#include "couplex/oracle.hpp"
#include "couplex/stats.hpp"
#include "couplex/tv.hpp"

namespace couplex::app {
namespace {

// Reference values computed by independent quadrature and closed forms.
constexpr double kOuTruncatedOverlap = 0.5383312333750137;  // OU theta=1, T=1, grid {-1,0,1}, D' = [-1,1]
constexpr double kPoissonCellRatio = 1.4287286022947308;    // 36 arcs, grid {0, (1/8,0), (0,1/8)}, R = 1

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c, d);
    return buf;
}

/// Widening factor for fixed tolerances at reduced sample sizes.
double tolerance_factor(const SuiteOptions& o) {
    return o.scale < 1.0 ? 1.0 / std::sqrt(o.scale) : 1.0;
}

std::size_t scaled(std::size_t n, const SuiteOptions& o) {
    return scaled_count(n, o.scale, 200);
}

IntegratorConfig make_cfg(const SuiteOptions& o, int criterion, double step, double horizon) {
    IntegratorConfig cfg;
    cfg.step = step;
    cfg.horizon = horizon;
    cfg.seed = o.seed;
    cfg.substream = derive_substream(0xC0FFEE, static_cast<std::uint64_t>(criterion));
    cfg.threads = o.threads;
    return cfg;
}

std::vector<double> dirichlet(std::size_t k, Stream& rng) {
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& v : w) {
        v = -std::log(rng.uniform());
        total += v;
    }
    for (auto& v : w) {
        v /= total;
    }
    return w;
}

// 1. Maximal coupling on Bernoulli(0.3) / Bernoulli(0.5).
CriterionResult c1(const SuiteOptions& o) {
    CriterionResult r;
    const auto p1 = DiscreteDistribution::from_probabilities({0.7, 0.3});
    const auto p2 = DiscreteDistribution::from_probabilities({0.5, 0.5});
    const auto sampler = build_maximal_coupling(p1, p2);
    const std::size_t n = scaled(100000, o);
    const auto draws = draw_coupled_pairs(sampler, n, o.seed, make_cfg(o, 1, 1.0, 1.0).substream, o.threads);
    std::vector<double> first(2, 0.0);
    std::vector<double> second(2, 0.0);
    std::size_t miss = 0;
    for (const auto& d : draws) {
        first[static_cast<std::size_t>(d.first)] += 1.0;
        second[static_cast<std::size_t>(d.second)] += 1.0;
        miss += d.coalesced ? 0 : 1;
    }
    const double q = sampler.overlap();
    const double mismatch = static_cast<double>(miss) / static_cast<double>(n);
    const double se = stats::binomial_std_error(0.2, n);
    const auto chi1 = stats::chi_square_test(first, p1.masses(), 0.01);
    const auto chi2 = stats::chi_square_test(second, p2.masses(), 0.01);
    const bool q_exact = std::abs(q - 0.8) <= 2.0 * std::numeric_limits<double>::epsilon();
    const bool mismatch_ok = std::abs(mismatch - 0.2) <= 3.0 * se;
    r.passed = q_exact && mismatch_ok && chi1.passed && chi2.passed;
    r.metrics = Json{{"q", q},
                     {"n", n},
                     {"mismatch", mismatch},
                     {"mismatch_stderr", se},
                     {"chi_square_first", to_json(chi1)},
                     {"chi_square_second", to_json(chi2)}};
    r.summary = fmt("q=%.17g, mismatch=%.5f (|dev|/se=%.2f), ", q, mismatch, std::abs(mismatch - 0.2) / se) +
                fmt("chi2 %.2f / %.2f vs crit %.2f", chi1.statistic, chi2.statistic, chi1.critical);
    return r;
}

// 2. Mixture identity on random pairs of discrete laws.
CriterionResult c2(const SuiteOptions& o) {
    CriterionResult r;
    Stream rng(o.seed, make_cfg(o, 2, 1.0, 1.0).substream);
    double worst_residual = 0.0;
    double worst_tv_gap = 0.0;
    constexpr int kPairs = 100;
    for (int t = 0; t < kPairs; ++t) {
        const std::size_t k = 2 + static_cast<std::size_t>(rng.uniform() * 19.0);
        auto a = dirichlet(k, rng);
        auto b = dirichlet(k, rng);
        // Edge cases: disjoint supports, identical laws, and sparse laws.
        if (t % 10 == 0) {
            for (std::size_t i = 0; i < k; ++i) {
                (i % 2 == 0 ? b : a)[i] = 0.0;
            }
        } else if (t % 10 == 1) {
            b = a;
        } else if (t % 10 == 2) {
            a[0] = 0.0;
            b[k - 1] = 0.0;
        }
        auto normalize = [](std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) {
                s += x;
            }
            for (double& x : v) {
                x /= s;
            }
        };
        normalize(a);
        normalize(b);
        const auto p = DiscreteDistribution::from_probabilities(a);
        const auto q = DiscreteDistribution::from_probabilities(b);
        const auto s = build_maximal_coupling(p, q);
        worst_residual = std::max(worst_residual, s.mixture_residual(p, q));
        worst_tv_gap = std::max(worst_tv_gap, std::abs(s.mismatch_probability() - tv_exact(p, q)));
    }
    r.passed = worst_residual <= 1e-9 && worst_tv_gap <= 1e-12;
    r.metrics = Json{{"pairs", kPairs}, {"max_mixture_residual", worst_residual}, {"max_tv_gap", worst_tv_gap}};
    r.summary = fmt("%g pairs, max residual %.3g, max |1-q - TV| %.3g", kPairs, worst_residual, worst_tv_gap);
    return r;
}

// 3. TV monotonicity: exact on random chains, within noise for an OU curve.
CriterionResult c3(const SuiteOptions& o) {
    CriterionResult r;
    Stream rng(o.seed, derive_substream(make_cfg(o, 3, 1.0, 1.0).substream, 99));
    std::size_t chain_violations = 0;
    double chain_max_rise = 0.0;
    constexpr int kChains = 50;
    for (int c = 0; c < kChains; ++c) {
        const std::size_t states = 2 + static_cast<std::size_t>(rng.uniform() * 9.0);
        const FiniteChain chain = FiniteChain::random(states, rng);
        std::vector<double> init(states, 0.0);
        if (c % 2 == 0) {
            init[static_cast<std::size_t>(rng.uniform() * static_cast<double>(states))] = 1.0;
        } else {
            init = dirichlet(states, rng);
        }
        const auto v = check_tv_monotonicity(tv_curve_chain(chain, init, 50));
        chain_violations += v.violations;
        chain_max_rise = std::max(chain_max_rise, v.max_violation);
    }

    const SdeModel ou = models::ornstein_uhlenbeck(1, 1.0);
    const auto kernel = GaussianKernel::ornstein_uhlenbeck(1, 1.0);
    const BinSpec bins = BinSpec::whole_space(1, 4.0, 80);
    const std::vector<double> times{0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
    const Point x0{1.0};
    const std::size_t n = scaled(100000, o);
    const auto stationary = kernel.stationary_bin_masses(bins);
    const TvCurve curve = tv_curve_model(ou, x0, stationary, times, n, bins, make_cfg(o, 3, 1e-3, 4.0));
    const auto mc = check_tv_monotonicity(curve, 3.0);
    double max_gap = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        max_gap = std::max(max_gap, std::abs(curve.tv[k] - tv_exact(kernel.bin_masses(x0, times[k], bins), stationary)));
    }
    r.passed = chain_violations == 0 && mc.holds;
    r.metrics = Json{{"chains", kChains},
                     {"chain_violations", chain_violations},
                     {"chain_max_rise", chain_max_rise},
                     {"ou_curve", to_json(curve)},
                     {"ou_monotonicity", to_json(mc)},
                     {"ou_max_gap_to_binned_oracle", max_gap}};
    r.summary = fmt("%g chain violations (max rise %.2g); OU violations beyond 3 sigma: %g; max |TV - oracle| %.4f",
                    static_cast<double>(chain_violations), chain_max_rise, static_cast<double>(mc.violations), max_gap);
    return r;
}

// 4. MD estimator against the truncated Gaussian overlap.
CriterionResult c4(const SuiteOptions& o) {
    CriterionResult r;
    const SdeModel ou = models::ornstein_uhlenbeck(1, 1.0);
    MdQuery q{{{-1.0}, {0.0}, {1.0}}, BinSpec::over_box({-1.0}, {1.0}, 50), 1.0};
    const MdReport rep = estimate_md(ou, q, scaled(100000, o), make_cfg(o, 4, 1e-3, 1.0));
    const auto k = GaussianKernel::ornstein_uhlenbeck(1, 1.0);
    double live = 1.0;
    for (double a : {-1.0, 0.0, 1.0}) {
        for (double b : {-1.0, 0.0, 1.0}) {
            live = std::min(live, gaussian_overlap_truncated(k.mean(a, 1.0), k.mean(b, 1.0), std::sqrt(k.variance(1.0)),
                                                             -1.0, 1.0));
        }
    }
    const double tol = 0.05 * tolerance_factor(o);
    r.passed = std::abs(rep.kappa - kOuTruncatedOverlap) <= tol && std::abs(live - kOuTruncatedOverlap) <= 1e-9;
    r.metrics = Json{{"kappa", rep.kappa},
                     {"kappa_stderr", rep.kappa_std_error()},
                     {"oracle", kOuTruncatedOverlap},
                     {"oracle_recomputed", live},
                     {"tolerance", tol},
                     {"report", to_json(rep)}};
    r.summary = fmt("kappa=%.4f oracle=%.4f |diff|=%.4f tol=%.3f", rep.kappa, kOuTruncatedOverlap,
                    std::abs(rep.kappa - kOuTruncatedOverlap), tol);
    return r;
}

// 5. Intersection coupling: reflection oracle and a positive grid minimum.
CriterionResult c5(const SuiteOptions& o) {
    CriterionResult r;
    const double oracle = reflection_meeting_probability(1.0, 1.0);
    const std::vector<std::pair<double, double>> bm_pair{{-0.5, 0.5}};
    const auto bm = estimate_meeting_probability(models::brownian(1), bm_pair, 1.0, scaled(20000, o),
                                                 make_cfg(o, 5, 2.5e-4, 1.0));
    const double p = bm.rows[0].probability;
    const double tol = 0.02 * tolerance_factor(o);

    const SdeModel bounded = models::bounded_drift_1d(1.0, 1.0, 0.5);
    std::vector<std::pair<double, double>> grid;
    const std::vector<double> pts{-1.0, -0.5, 0.0, 0.5, 1.0};
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            grid.emplace_back(pts[i], pts[j]);
        }
    }
    IntegratorConfig gcfg = make_cfg(o, 5, 1e-3, 1.0);
    gcfg.substream = derive_substream(gcfg.substream, 1);
    const auto table = estimate_meeting_probability(bounded, grid, 1.0, scaled(10000, o), gcfg);
    const auto& m = table.minimum();
    r.passed = std::abs(p - oracle) <= tol && m.probability - 3.0 * m.std_error > 0.0;
    r.metrics = Json{{"bm_probability", p},
                     {"bm_stderr", bm.rows[0].std_error},
                     {"oracle", oracle},
                     {"tolerance", tol},
                     {"grid", to_json(table)}};
    r.summary = fmt("BM meet %.4f vs %.4f (|diff| %.4f, tol %.3f); ", p, oracle, std::abs(p - oracle), tol) +
                fmt("grid min %.4f - 3*%.4f > 0 at (%g, %g)", m.probability, m.std_error, m.x1, m.x2);
    return r;
}

// 6. Girsanov weights: martingale mean, kernel agreement, closed form, kappa.
CriterionResult c6(const SuiteOptions& o) {
    CriterionResult r;
    const auto split1 = DriftSplitModel::from_spec(models::brownian(1), "sign{a=1}");
    const BinSpec bins = BinSpec::over_box({-4.0}, {4.0}, 50);
    const auto chk = girsanov_check(split1, Point{0.0}, 1.0, scaled(100000, o), bins, make_cfg(o, 6, 0.005, 1.0));
    const bool mean_ok = std::abs(chk.mean_rho - 1.0) <= 3.0 * chk.std_error;
    const double tv_tol = 0.05 * tolerance_factor(o);
    const bool tv_ok = chk.kernel_tv_vs_direct <= tv_tol;

    // Constant b2 = c: the log-weight is +-c W_T - c^2 T / 2 on the grid sums.
    constexpr double c = 0.7;
    const auto split_c = DriftSplitModel::from_spec(models::brownian(1), "constant{c=0.7}");
    IntegratorConfig ccfg = make_cfg(o, 6, 0.01, 1.0);
    ccfg.substream = derive_substream(ccfg.substream, 7);
    const std::size_t paths = scaled(1000, o);
    double worst = 0.0;
    for (std::size_t i = 0; i < paths; ++i) {
        const Path path = simulate_path(split_c.base(), Point{0.0}, ccfg, static_cast<std::uint32_t>(i));
        double w = 0.0;
        for (double dw : path.increments) {
            w += dw;
        }
        const double add = c * w - 0.5 * c * c * 1.0;
        const double remove = -c * w - 0.5 * c * c * 1.0;
        const std::size_t steps = path.size() - 1;
        const double got_add = log_weight_segment(split_c, path, 0, steps, WeightDirection::add_drift);
        const double got_remove = log_weight_segment(split_c, path, 0, steps, WeightDirection::remove_drift);
        worst = std::max({worst, std::abs(got_add - add) / (1.0 + std::abs(add)),
                          std::abs(got_remove - remove) / (1.0 + std::abs(remove))});
    }
    const bool closed_ok = worst <= 1e-12;

    const auto split2 = DriftSplitModel::from_spec(models::brownian(2), "sign{a=1}");
    MdQuery q{{{0.0, 0.0}, {0.5, 0.0}, {-0.5, 0.0}, {0.0, 0.5}, {0.0, -0.5}}, BinSpec::over_ball(2, 1.0, 8), 1.0};
    IntegratorConfig kcfg = make_cfg(o, 6, 0.005, 1.0);
    kcfg.substream = derive_substream(kcfg.substream, 8);
    const MdReport kappa = estimate_md_girsanov(split2, q, scaled(20000, o), kcfg);
    const bool kappa_ok = kappa.kappa - 3.0 * kappa.kappa_std_error() > 0.0;

    r.passed = mean_ok && tv_ok && closed_ok && kappa_ok;
    r.metrics = Json{{"check", to_json(chk)},
                     {"tv_tolerance", tv_tol},
                     {"closed_form_paths", paths},
                     {"closed_form_max_relative_error", worst},
                     {"kappa", to_json(kappa)}};
    r.summary = fmt("mean rho %.4f +- %.4f; TV %.4f (tol %.3f); ", chk.mean_rho, chk.std_error,
                    chk.kernel_tv_vs_direct, tv_tol) +
                fmt("closed form err %.2g; kappa %.4f - 3*%.4f", worst, kappa.kappa, kappa.kappa_std_error());
    return r;
}

// 7. Elliptic Harnack ratio for planar Brownian motion against the Poisson kernel.
CriterionResult c7(const SuiteOptions& o) {
    CriterionResult r;
    const std::vector<Point> grid{{0.0, 0.0}, {0.125, 0.0}, {0.0, 0.125}};
    const SpherePartition cells(2, 36);
    const auto measures =
        sample_exit_places(models::brownian(2), 1.0, grid, cells, scaled(100000, o), make_cfg(o, 7, 1e-3, 1.0));
    const HarnackReport rep = elliptic_ratio_from_measures(measures);
    const double oracle = poisson_arc_ratio_bound(grid, 1.0, 36);
    const double tol = 0.10 * tolerance_factor(o);
    const double rel = std::abs(rep.n_hat - kPoissonCellRatio) / kPoissonCellRatio;

    std::vector<double> counts;
    for (double m : measures[0].masses) {
        counts.push_back(std::round(m * static_cast<double>(measures[0].samples)));
    }
    const std::vector<double> uniform(36, 1.0 / 36.0);
    const auto chi = stats::chi_square_test(counts, uniform, 0.01);
    r.passed = rel <= tol && chi.passed && std::abs(oracle - kPoissonCellRatio) <= 1e-9;
    r.metrics = Json{{"n_hat", rep.n_hat},
                     {"oracle", kPoissonCellRatio},
                     {"oracle_recomputed", oracle},
                     {"oracle_pointwise", poisson_ratio_bound(grid, 1.0)},
                     {"relative_error", rel},
                     {"tolerance", tol},
                     {"uniformity", to_json(chi)},
                     {"excluded_cells", rep.excluded_cells}};
    r.summary = fmt("N=%.4f oracle=%.4f (rel err %.3f, tol %.2f); ", rep.n_hat, kPoissonCellRatio, rel, tol) +
                fmt("uniformity chi2 %.2f vs %.2f", chi.statistic, chi.critical);
    return r;
}

// 8. Parabolic Harnack ratios and the time-1 overlap bound for a discontinuous drift.
CriterionResult c8(const SuiteOptions& o) {
    CriterionResult r;
    const SdeModel model = models::sign_drift(2, 1.0);
    const CylinderCells cells = CylinderCells::make(2, 0.1, 3, 8, 4);
    const std::size_t n = scaled(20000, o);
    const std::vector<Point> g1{{0.0, 0.0}, {0.25, 0.0}, {0.0, -0.25}};
    const std::vector<Point> g2{{0.0, 0.0}, {-0.25, 0.0}, {0.0, 0.25}};
    IntegratorConfig cfg = make_cfg(o, 8, 1e-3, 1.0);
    const HarnackReport par = parabolic_harnack_check(model, g1, g2, cells, n, cfg);
    const bool par_ok = par.md_integral - 3.0 * par.md_std_error > 0.0 && par.inequality_holds;

    const std::vector<Point> small{{0.0, 0.0}, {0.125, 0.0}, {0.0, 0.125}};
    cfg.substream = derive_substream(cfg.substream, 1);
    const CorollaryReport cor =
        md_via_parabolic_corollary(model, small, cells, BinSpec::whole_space(2, 4.0, 16), n, cfg);
    const bool cor_ok = cor.overlap.kappa - 3.0 * cor.overlap.kappa_std_error() > 0.0 &&
                        cor.parabolic.md_integral - 3.0 * cor.parabolic.md_std_error > 0.0 &&
                        cor.parabolic.inequality_holds && cor.q_prime_consistent;
    r.passed = par_ok && cor_ok;
    r.metrics = Json{{"parabolic_n_hat", par.n_hat},
                     {"parabolic_md", par.md_integral},
                     {"parabolic_md_stderr", par.md_std_error},
                     {"parabolic_q_hat", par.q_hat},
                     {"parabolic_inequality", par.inequality_holds},
                     {"parabolic_excluded_cells", par.excluded_cells},
                     {"corollary", to_json(cor)}};
    r.summary = fmt("MD %.4f - 3*%.4f, N=%.3f; ", par.md_integral, par.md_std_error, par.n_hat) +
                fmt("overlap %.4f - 3*%.4f; q' %.4f vs direct %.4f", cor.overlap.kappa, cor.overlap.kappa_std_error(),
                    cor.q_prime, cor.q_prime_direct);
    return r;
}

// 9. Exhaustion in T for exit places of planar Brownian motion.
CriterionResult c9(const SuiteOptions& o) {
    CriterionResult r;
    const std::vector<Point> grid{{0.0, 0.0}, {0.125, 0.0}, {0.0, 0.125}};
    const std::vector<double> horizons{1.0, 2.0, 4.0};
    const EllipticMdReport rep = md_via_elliptic(models::brownian(2), 1.0, horizons, grid, SpherePartition(2, 36),
                                                 scaled(50000, o), make_cfg(o, 9, 1e-3, 1.0));
    const double tail = rep.ladder.back().tail_sup;
    r.passed = rep.monotone && tail < 0.02;
    Json overlaps = Json::array();
    for (const auto& rung : rep.ladder) {
        overlaps.push_back(rung.overlap.kappa);
    }
    r.metrics = Json{{"overlaps", overlaps},
                     {"monotone", rep.monotone},
                     {"tail_sup_at_4", tail},
                     {"poisson_min_overlap_cells", poisson_arc_min_overlap(grid, 1.0, 36)},
                     {"report", to_json(rep)}};
    r.summary = fmt("overlaps %.4f <= %.4f <= %.4f; ", overlaps[0].get<double>(), overlaps[1].get<double>(),
                    overlaps[2].get<double>()) +
                fmt("sup P(tau >= 4) = %.2g", tail);
    return r;
}

// 10. Two consecutive runs of criteria 1-9 at reduced scale serialize identically.
CriterionResult c10(const SuiteOptions& o) {
    CriterionResult r;
    SuiteOptions small = o;
    small.scale = std::min(o.scale, 1.0) * 0.02;
    std::size_t identical = 0;
    std::size_t bytes = 0;
    for (int id = 1; id <= 9; ++id) {
        const std::string a = criterion_json(run_criterion(id, small)).dump();
        const std::string b = criterion_json(run_criterion(id, small)).dump();
        identical += a == b ? 1 : 0;
        bytes += a.size();
    }
    r.passed = identical == 9;
    r.metrics = Json{{"scale", small.scale}, {"identical", identical}, {"compared", 9}, {"bytes", bytes}};
    r.summary = fmt("%g of 9 criteria byte-identical across two runs (%g bytes, scale %.3g)",
                    static_cast<double>(identical), static_cast<double>(bytes), small.scale);
    return r;
}

} // namespace

std::string criterion_title(int id) {
    switch (id) {
    case 1: return "maximal coupling exactness";
    case 2: return "mixture identity";
    case 3: return "TV monotonicity";
    case 4: return "MD estimator vs Gaussian oracle";
    case 5: return "intersection coupling";
    case 6: return "Girsanov weights";
    case 7: return "elliptic Harnack ratio";
    case 8: return "parabolic Harnack and time-1 overlap";
    case 9: return "exhaustion in T";
    case 10: return "determinism";
    default: throw InvalidArgument("unknown criterion " + std::to_string(id));
    }
}

CriterionResult run_criterion(int id, const SuiteOptions& options) {
    using Fn = CriterionResult (*)(const SuiteOptions&);
    static constexpr Fn table[] = {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10};
    const std::string title = criterion_title(id);
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        r = table[id - 1](options);
    } catch (const std::exception& e) {
        r.passed = false;
        r.summary = std::string("error: ") + e.what();
    }
    r.id = id;
    r.title = title;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<CriterionResult> run_suite(std::span<const int> ids, const SuiteOptions& options) {
    std::vector<CriterionResult> out;
    for (int id : ids) {
        out.push_back(run_criterion(id, options));
    }
    return out;
}

std::string format_criterion_line(const CriterionResult& r) {
    char secs[32];
    std::snprintf(secs, sizeof(secs), "%.1f", r.seconds);
    return std::string(r.passed ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.title + ": " + r.summary +
           " (" + secs + " s)";
}

Json criterion_json(const CriterionResult& r) {
    return Json{{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"summary", r.summary}, {"metrics", r.metrics}};
}

} // namespace couplex::app
