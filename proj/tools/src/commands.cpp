#include "couplex/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "couplex/app/json_io.hpp"
#include "couplex/app/suite.hpp"
#include "couplex/coupling.hpp"
#include "couplex/error.hpp"
#include "couplex/export.hpp"
#include "couplex/girsanov.hpp"
#include "couplex/harnack.hpp"
#include "couplex/md.hpp"
#include "couplex/oracle.hpp"
#include "couplex/stats.hpp"
#include "couplex/tv.hpp"

namespace couplex::app {
namespace {

Json bins_defaults(const char* region, double lo, double hi, std::size_t cells) {
    return Json{{"region", region},
                {"lo", Json::array({lo})},
                {"hi", Json::array({hi})},
                {"radius", 1.0},
                {"half_width", 4.0},
                {"cells", cells}};
}

Json grid_json(std::initializer_list<std::initializer_list<double>> points) {
    Json out = Json::array();
    for (const auto& p : points) {
        out.push_back(Json(std::vector<double>(p)));
    }
    return out;
}

template <typename Writer>
std::string to_text(Writer&& writer) {
    std::ostringstream out;
    writer(out);
    return out.str();
}

IntegratorConfig integrator(const ConfigView& c, const RunContext& ctx, double horizon) {
    IntegratorConfig cfg;
    cfg.step = c.number("step");
    cfg.horizon = horizon;
    cfg.seed = ctx.seed;
    cfg.substream = c.count("substream");
    cfg.threads = ctx.threads;
    cfg.validate();
    return cfg;
}

IntegratorConfig with_substream(IntegratorConfig cfg, std::uint64_t substream) {
    cfg.substream = substream;
    return cfg;
}

Point point_of(const ConfigView& c, std::string_view key, std::size_t dim) {
    auto p = c.numbers(key);
    if (p.size() != dim) {
        throw ConfigError("key '" + c.where(key) + "' must have " + std::to_string(dim) + " coordinates");
    }
    return p;
}

std::vector<Point> grid_of(const ConfigView& c, std::string_view key, std::size_t dim) {
    auto g = c.points(key);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i].size() != dim) {
            throw ConfigError("key '" + c.where(key) + "[" + std::to_string(i) + "]' must have " +
                              std::to_string(dim) + " coordinates");
        }
    }
    return g;
}

NoiseFloorRule parse_rule(const ConfigView& c, std::string_view key) {
    const std::string s = c.text(key);
    if (s == "both-below") {
        return NoiseFloorRule::both_below;
    }
    if (s == "either-below") {
        return NoiseFloorRule::either_below;
    }
    throw ConfigError("key '" + c.where(key) + "' must be \"both-below\" or \"either-below\"");
}

bool positive_at_3sigma(double value, double std_error) {
    return value - 3.0 * std_error > 0.0;
}

// ---------------------------------------------------------------- simulate

CommandOutput run_simulate(const ConfigView& c, const RunContext& ctx) {
    const SdeModel model = ctx.registry->make(c.text("model"));
    const std::size_t d = model.dim();
    const Point x0 = point_of(c, "x0", d);
    const double horizon = c.number("horizon");
    const std::size_t n = c.count("n");
    const IntegratorConfig cfg = integrator(c, ctx, horizon);
    const EmpiricalMeasure cloud = sample_transition(model, x0, horizon, n, cfg);

    Json mean = Json::array();
    Json se = Json::array();
    Json var = Json::array();
    std::vector<double> column(n);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            column[i] = cloud.point(i)[k];
        }
        const auto est = stats::mean_estimate(column);
        mean.push_back(est.mean);
        se.push_back(est.std_error);
        var.push_back(n > 1 ? stats::sample_variance(column) : 0.0);
    }

    CommandOutput out;
    const std::size_t keep = std::min(c.count("write_paths"), n);
    if (keep > 0) {
        std::vector<Path> paths;
        for (std::size_t i = 0; i < keep; ++i) {
            paths.push_back(simulate_path(model, x0, cfg, static_cast<std::uint32_t>(i)));
        }
        out.files.emplace_back("paths.csv", to_text([&](std::ostream& o) { write_paths_csv(o, paths); }));
    }
    out.result = Json{{"model", model.name()},
                      {"dim", d},
                      {"n", n},
                      {"horizon", horizon},
                      {"steps", make_time_grid(horizon, cfg.step).steps},
                      {"terminal", Json{{"mean", mean}, {"stderr", se}, {"variance", var}}},
                      {"paths_written", keep}};
    return out;
}

// ---------------------------------------------------------------- estimate-md

/// Exact binned kappa for Gaussian models on product bins; empty otherwise.
std::optional<double> gaussian_binned_kappa(const ModelSpec& spec, std::span<const Point> grid, const BinSpec& bins,
                                            double horizon) {
    if ((spec.name != "ou" && spec.name != "bm") || bins.region.kind() == Region::Kind::ball) {
        return std::nullopt;
    }
    const std::size_t d = spec.get_dim(1);
    const GaussianKernel k = spec.name == "ou"
                                 ? GaussianKernel::ornstein_uhlenbeck(d, spec.get("theta", 1.0), spec.get("sigma", 1.0))
                                 : GaussianKernel::brownian(d, spec.get("sigma", 1.0));
    std::vector<DiscreteDistribution> laws;
    for (const auto& x : grid) {
        laws.push_back(k.bin_masses(x, horizon, bins));
    }
    return kappa_from_distributions(laws, {}).kappa;
}

CommandOutput run_estimate_md(const ConfigView& c, const RunContext& ctx) {
    const std::string spec_text = c.text("model");
    const SdeModel model = ctx.registry->make(spec_text);
    model.require_non_degenerate("estimate-md");
    const double horizon = c.number("horizon");
    MdQuery q{grid_of(c, "start_grid", model.dim()), bins_from_config(c.table("bins"), model.dim()), horizon};
    q.validate(model.dim());
    const std::size_t n = c.count("n");
    const IntegratorConfig cfg = integrator(c, ctx, horizon);

    const auto hists = start_grid_histograms(model, q, n, cfg);
    const MdReport report = kappa_from_histograms(hists, q.start_grid, horizon);

    CommandOutput out;
    out.result = to_json(report);
    if (const auto exact = gaussian_binned_kappa(ModelSpec::parse(spec_text), q.start_grid, q.bins, horizon)) {
        out.result["oracle_binned_kappa"] = *exact;
    }
    if (c.flag("minorization")) {
        out.result["minorization"] = to_json(minorization_from_histograms(hists, uniform_reference(q.bins), horizon));
    }
    if (c.flag("require_positive")) {
        out.checks["kappa_positive_3sigma"] = positive_at_3sigma(report.kappa, report.kappa_std_error());
    }
    out.files.emplace_back("md_matrix.csv", to_text([&](std::ostream& o) { write_md_matrix_csv(o, report); }));
    return out;
}

// ---------------------------------------------------------------- couple

CommandOutput run_couple(const ConfigView& c, const RunContext& ctx) {
    const auto p1 = DiscreteDistribution::from_probabilities(c.numbers("p1"));
    const auto p2 = DiscreteDistribution::from_probabilities(c.numbers("p2"));
    p1.require_probability();
    p2.require_probability();
    const auto sampler = build_maximal_coupling(p1, p2);
    const std::size_t n = c.count("n");
    if (n == 0) {
        throw ConfigError("key 'n' must be positive");
    }
    const auto draws = draw_coupled_pairs(sampler, n, ctx.seed, c.count("substream"), ctx.threads);

    std::vector<double> first(p1.size(), 0.0);
    std::vector<double> second(p2.size(), 0.0);
    for (const auto& r : draws) {
        first[static_cast<std::size_t>(r.first)] += 1.0;
        second[static_cast<std::size_t>(r.second)] += 1.0;
    }
    const double alpha = c.number("alpha");
    const auto chi1 = stats::chi_square_test(first, p1.masses(), alpha);
    const auto chi2 = stats::chi_square_test(second, p2.masses(), alpha);
    const auto bound = coupling_bound_check(draws, sampler.mismatch_probability(), true);
    const double residual = sampler.mixture_residual(p1, p2);

    CommandOutput out;
    out.result = Json{{"overlap", sampler.overlap()},
                      {"tv", sampler.mismatch_probability()},
                      {"mixture_residual", residual},
                      {"n", n},
                      {"mismatch", to_json(bound)},
                      {"chi_square_first", to_json(chi1)},
                      {"chi_square_second", to_json(chi2)},
                      {"convention", kTvConvention}};
    out.checks["mixture_identity"] = residual <= 1e-9;
    out.checks["mismatch_within_3se"] = bound.holds;
    out.checks["marginal_first"] = chi1.passed;
    out.checks["marginal_second"] = chi2.passed;
    const std::size_t keep = std::min(c.count("export"), n);
    if (keep > 0) {
        out.files.emplace_back("coupling.csv", to_text([&](std::ostream& o) {
                                   write_coupling_csv(o, std::span(draws).first(keep));
                               }));
    }
    return out;
}

// ---------------------------------------------------------------- meet-1d

CommandOutput run_meet_1d(const ConfigView& c, const RunContext& ctx) {
    const std::string spec_text = c.text("model");
    const SdeModel model = ctx.registry->make(spec_text);
    if (model.dim() != 1) {
        throw ConfigError("meet-1d needs a one-dimensional model");
    }
    const double horizon = c.number("horizon");
    const std::size_t n = c.count("n");
    const IntegratorConfig cfg = integrator(c, ctx, horizon);

    std::vector<std::pair<double, double>> pairs;
    for (const auto& p : c.points("pairs")) {
        if (p.size() != 2) {
            throw ConfigError("every entry of 'pairs' must be [x1, x2]");
        }
        pairs.emplace_back(p[0], p[1]);
    }
    if (pairs.empty()) {
        const auto points = c.numbers("points");
        for (std::size_t i = 0; i < points.size(); ++i) {
            for (std::size_t j = i + 1; j < points.size(); ++j) {
                pairs.emplace_back(points[i], points[j]);
            }
        }
    }
    const MeetingTable table = estimate_meeting_probability(model, pairs, horizon, n, cfg);

    CommandOutput out;
    out.result = to_json(table);
    const ModelSpec spec = ModelSpec::parse(spec_text);
    if (spec.name == "bm") {
        Json oracle = Json::array();
        for (const auto& r : table.rows) {
            oracle.push_back(reflection_meeting_probability(std::abs(r.x1 - r.x2), horizon, spec.get("sigma", 1.0)));
        }
        out.result["reflection_oracle"] = std::move(oracle);
    }
    if (c.flag("require_positive")) {
        out.checks["minimum_positive_3sigma"] =
            positive_at_3sigma(table.minimum().probability, table.minimum().std_error);
    }
    const std::size_t keep = std::min(c.count("export"), n);
    if (keep > 0) {
        // Same substream and pair ids as the table row, so the exported draws are a prefix of its ensemble.
        const std::size_t g = table.argmin;
        const IntegratorConfig sub = with_substream(cfg, derive_substream(cfg.substream, g));
        std::vector<CouplingResult> draws;
        for (std::size_t i = 0; i < keep; ++i) {
            draws.push_back(intersection_couple_1d(model, pairs[g].first, pairs[g].second, horizon, sub,
                                                   static_cast<std::uint32_t>(i)));
        }
        out.files.emplace_back("coupling.csv", to_text([&](std::ostream& o) { write_coupling_csv(o, draws); }));
    }
    return out;
}

// ---------------------------------------------------------------- girsanov-check

CommandOutput run_girsanov(const ConfigView& c, const RunContext& ctx) {
    SdeModel base = ctx.registry->make(c.text("model"));
    const std::size_t d = base.dim();
    const DriftSplitModel split = DriftSplitModel::from_spec(std::move(base), c.text("extra"));
    const Point x0 = point_of(c, "x0", d);
    const double horizon = c.number("horizon");
    const IntegratorConfig cfg = integrator(c, ctx, horizon);
    const BinSpec bins = bins_from_config(c.table("bins"), d);
    const GirsanovCheck chk = girsanov_check(split, x0, horizon, c.count("n"), bins, cfg);

    CommandOutput out;
    out.result = to_json(chk);
    out.checks["mean_rho_within_3se"] = std::abs(chk.mean_rho - 1.0) <= 3.0 * chk.std_error;
    out.checks["kernel_tv_within_tolerance"] = chk.kernel_tv_vs_direct <= c.number("tv_tolerance");

    const ConfigView k = c.table("kappa");
    if (k.flag("enabled")) {
        MdQuery q{grid_of(k, "start_grid", d), bins_from_config(k.table("bins"), d), horizon};
        q.validate(d);
        const MdReport r =
            estimate_md_girsanov(split, q, k.count("n"), with_substream(cfg, derive_substream(cfg.substream, 2)));
        out.result["kappa"] = to_json(r);
        out.checks["kappa_positive_3sigma"] = positive_at_3sigma(r.kappa, r.kappa_std_error());
        out.files.emplace_back("md_matrix.csv", to_text([&](std::ostream& o) { write_md_matrix_csv(o, r); }));
    }
    return out;
}

// ---------------------------------------------------------------- harnack-parabolic

CommandOutput run_harnack_parabolic(const ConfigView& c, const RunContext& ctx) {
    const SdeModel model = ctx.registry->make(c.text("model"));
    const std::size_t d = model.dim();
    const CylinderCells cells = CylinderCells::make(d, c.number("epsilon"), c.count("time_cells"),
                                                    c.count("angular_cells"), c.count("top_cells"), c.count("bands"));
    const std::size_t n = c.count("n");
    const NoiseFloorRule rule = parse_rule(c, "noise_floor");
    const IntegratorConfig cfg = integrator(c, ctx, 1.0);
    const auto g1 = grid_of(c, "first_grid", d);
    const auto g2 = grid_of(c, "second_grid", d);

    const HarnackReport rep = parabolic_harnack_check(model, g1, g2, cells, n, cfg, rule);
    CommandOutput out;
    out.result = to_json(rep);
    out.checks["md_positive_3sigma"] = positive_at_3sigma(rep.md_integral, rep.md_std_error);
    out.checks["data_inequality"] = rep.inequality_holds;
    out.files.emplace_back("ratio_table.csv", to_text([&](std::ostream& o) { write_ratio_table_csv(o, rep); }));

    const ConfigView cor = c.table("corollary");
    if (cor.flag("enabled")) {
        const auto grid = grid_of(cor, "grid", d);
        const BinSpec bins = BinSpec::whole_space(d, cor.number("half_width"), cor.count("cells"));
        const CorollaryReport r = md_via_parabolic_corollary(
            model, grid, cells, bins, n, with_substream(cfg, derive_substream(cfg.substream, 2)), rule);
        out.result["corollary"] = to_json(r);
        out.checks["corollary_overlap_positive_3sigma"] =
            positive_at_3sigma(r.overlap.kappa, r.overlap.kappa_std_error());
        out.checks["corollary_q_prime_consistent"] = r.q_prime_consistent;
    }
    return out;
}

// ---------------------------------------------------------------- harnack-elliptic

bool is_planar_brownian(const std::string& spec_text) {
    const ModelSpec spec = ModelSpec::parse(spec_text);
    return spec.name == "bm" && spec.get_dim(1) == 2;
}

CommandOutput run_harnack_elliptic(const ConfigView& c, const RunContext& ctx) {
    const std::string spec_text = c.text("model");
    const SdeModel model = ctx.registry->make(spec_text);
    const std::size_t d = model.dim();
    const double radius = c.number("radius");
    const SpherePartition cells(d, c.count("angular_cells"), c.count("bands"));
    const auto grid = grid_of(c, "grid", d);
    const IntegratorConfig cfg = integrator(c, ctx, 1.0);

    const HarnackReport rep = elliptic_harnack_check(model, radius, grid, cells, c.count("n"), cfg);
    CommandOutput out;
    out.result = to_json(rep);
    out.files.emplace_back("ratio_table.csv", to_text([&](std::ostream& o) { write_ratio_table_csv(o, rep); }));
    if (is_planar_brownian(spec_text)) {
        const double cell_bound = poisson_arc_ratio_bound(grid, radius, cells.size());
        out.result["poisson_oracle"] = Json{{"ratio_pointwise", poisson_ratio_bound(grid, radius)},
                                            {"ratio_cells", cell_bound},
                                            {"min_overlap", poisson_min_overlap(grid, radius)},
                                            {"min_overlap_cells", poisson_arc_min_overlap(grid, radius, cells.size())},
                                            {"relative_error", std::abs(rep.n_hat - cell_bound) / cell_bound}};
        const double tol = c.number("oracle_tolerance");
        if (tol > 0.0) {
            out.checks["n_hat_matches_poisson"] = std::abs(rep.n_hat - cell_bound) <= tol * cell_bound;
        }
    }
    return out;
}

// ---------------------------------------------------------------- md-elliptic

CommandOutput run_md_elliptic(const ConfigView& c, const RunContext& ctx) {
    const std::string spec_text = c.text("model");
    const SdeModel model = ctx.registry->make(spec_text);
    const std::size_t d = model.dim();
    const double radius = c.number("radius");
    const SpherePartition cells(d, c.count("angular_cells"), c.count("bands"));
    const auto grid = grid_of(c, "grid", d);
    const auto horizons = c.numbers("horizons");
    const IntegratorConfig cfg = integrator(c, ctx, 1.0);

    const EllipticMdReport rep = md_via_elliptic(model, radius, horizons, grid, cells, c.count("n"), cfg);
    CommandOutput out;
    out.result = to_json(rep);
    if (is_planar_brownian(spec_text)) {
        out.result["poisson_min_overlap_cells"] = poisson_arc_min_overlap(grid, radius, cells.size());
    }
    out.checks["overlap_monotone_in_horizon"] = rep.monotone;
    const double tol = c.number("tail_tolerance");
    if (tol > 0.0) {
        out.checks["tail_below_tolerance"] = rep.ladder.back().tail_sup < tol;
    }
    return out;
}

// ---------------------------------------------------------------- tv-curve

CommandOutput run_tv_curve(const ConfigView& c, const RunContext& ctx) {
    const std::string source = c.text("source");
    CommandOutput out;
    TvCurve curve;
    if (source == "chain") {
        const ConfigView ch = c.table("chain");
        const FiniteChain chain = FiniteChain::from_rows(ch.matrix("rows"));
        curve = tv_curve_chain(chain, ch.numbers("initial"), ch.count("max_t"));
    } else if (source == "model") {
        const std::string spec_text = c.text("model");
        const SdeModel model = ctx.registry->make(spec_text);
        const std::size_t d = model.dim();
        const Point x0 = point_of(c, "x0", d);
        const auto times = c.numbers("times");
        const std::size_t n = c.count("n");
        const BinSpec bins = bins_from_config(c.table("bins"), d);
        const IntegratorConfig cfg = integrator(c, ctx, times.empty() ? 1.0 : times.back());
        const ModelSpec spec = ModelSpec::parse(spec_text);
        const std::string stationary_kind = c.text("stationary");
        DiscreteDistribution stationary;
        std::optional<GaussianKernel> kernel;
        if (spec.name == "ou") {
            kernel = GaussianKernel::ornstein_uhlenbeck(d, spec.get("theta", 1.0), spec.get("sigma", 1.0));
        }
        if (stationary_kind == "gaussian") {
            if (!kernel || bins.region.kind() == Region::Kind::ball) {
                throw ConfigError("stationary = \"gaussian\" needs an ou model and box or whole-space bins");
            }
            stationary = kernel->stationary_bin_masses(bins);
        } else if (stationary_kind == "long-run") {
            const double t_long = c.number("stationary_horizon");
            stationary = estimate_kernel_histogram(model, x0, t_long, n, bins,
                                                   with_substream(cfg, derive_substream(cfg.substream, 1)))
                             .distribution;
        } else {
            throw ConfigError("key 'stationary' must be \"gaussian\" or \"long-run\"");
        }
        curve = tv_curve_model(model, x0, stationary, times, n, bins, cfg);
        if (kernel && stationary_kind == "gaussian") {
            Json binned = Json::array();
            Json continuous = Json::array();
            const double s_inf = std::sqrt(*kernel->stationary_variance());
            for (double t : times) {
                binned.push_back(tv_exact(kernel->bin_masses(x0, t, bins), stationary));
                if (d == 1) {
                    continuous.push_back(gaussian_tv(kernel->mean(x0[0], t), std::sqrt(kernel->variance(t)), 0.0, s_inf));
                }
            }
            out.result["oracle_binned_tv"] = std::move(binned);
            if (d == 1) {
                out.result["oracle_tv"] = std::move(continuous);
            }
        }
    } else {
        throw ConfigError("key 'source' must be \"model\" or \"chain\"");
    }
    const MonotonicityVerdict v = check_tv_monotonicity(curve, c.number("sigmas"));
    out.result["curve"] = to_json(curve);
    out.result["monotonicity"] = to_json(v);
    out.checks["tv_nonincreasing"] = v.holds;
    out.files.emplace_back("tv.csv", to_text([&](std::ostream& o) { write_tv_csv(o, curve); }));
    out.files.emplace_back("tv.dat", to_text([&](std::ostream& o) { write_tv_gnuplot(o, curve); }));
    return out;
}

// ---------------------------------------------------------------- oracle

CommandOutput run_oracle(const ConfigView& c, const RunContext&) {
    const std::string query = c.text("query");
    Json r = Json::object();
    r["query"] = query;
    if (query == "reflection") {
        r["value"] = reflection_meeting_probability(c.number("distance"), c.number("horizon"), c.number("sigma"));
    } else if (query == "gaussian-overlap") {
        r["value"] = c.flag("truncate")
                         ? gaussian_overlap_truncated(c.number("m1"), c.number("m2"), c.number("s"), c.number("lo"),
                                                      c.number("hi"))
                         : gaussian_overlap(c.number("m1"), c.number("m2"), c.number("s"));
    } else if (query == "gaussian-tv") {
        r["value"] = gaussian_tv(c.number("m1"), c.number("s1"), c.number("m2"), c.number("s2"));
    } else if (query == "ou-overlap") {
        const auto k = GaussianKernel::ornstein_uhlenbeck(1, c.number("theta"), c.number("sigma"));
        const auto points = c.numbers("points");
        const double t = c.number("horizon");
        const double s = std::sqrt(k.variance(t));
        Json matrix = Json::array();
        double best = 1.0;
        for (double a : points) {
            Json row = Json::array();
            for (double b : points) {
                const double v = gaussian_overlap_truncated(k.mean(a, t), k.mean(b, t), s, c.number("lo"), c.number("hi"));
                row.push_back(v);
                best = std::min(best, v);
            }
            matrix.push_back(std::move(row));
        }
        r["value"] = best;
        r["matrix"] = std::move(matrix);
    } else if (query == "poisson") {
        const auto grid = grid_of(c, "grid", 2);
        const double radius = c.number("radius");
        const std::size_t cells = c.count("cells");
        r["ratio_pointwise"] = poisson_ratio_bound(grid, radius);
        r["ratio_cells"] = poisson_arc_ratio_bound(grid, radius, cells);
        r["min_overlap"] = poisson_min_overlap(grid, radius);
        r["min_overlap_cells"] = poisson_arc_min_overlap(grid, radius, cells);
    } else if (query == "chain-md" || query == "chain-stationary") {
        const FiniteChain chain = FiniteChain::from_rows(c.matrix("rows"));
        if (query == "chain-stationary") {
            r["value"] = chain_stationary(chain);
        } else {
            auto indices = [&](std::string_view key) {
                std::vector<std::size_t> out;
                for (double v : c.numbers(key)) {
                    if (v < 0.0 || std::floor(v) != v || v >= static_cast<double>(chain.size())) {
                        throw ConfigError("key '" + std::string(key) + "' must list state indices");
                    }
                    out.push_back(static_cast<std::size_t>(v));
                }
                return out;
            };
            r["value"] = exact_md_finite_chain(chain, indices("from"), indices("to"));
        }
    } else if (query == "exit-time") {
        r["value"] = brownian_mean_exit_time(c.numbers("x"), c.number("radius"));
    } else {
        throw ConfigError("unknown oracle query '" + query +
                          "' (reflection, gaussian-overlap, gaussian-tv, ou-overlap, poisson, chain-md, "
                          "chain-stationary, exit-time)");
    }
    CommandOutput out;
    out.result = std::move(r);
    return out;
}

// ---------------------------------------------------------------- suite

CommandOutput run_suite_command(const ConfigView& c, const RunContext& ctx) {
    SuiteOptions opts;
    opts.seed = ctx.seed;
    opts.scale = c.number("scale");
    opts.threads = ctx.threads;
    if (!(opts.scale > 0.0)) {
        throw ConfigError("key 'scale' must be positive");
    }
    std::vector<int> ids;
    for (double v : c.numbers("criteria")) {
        if (std::floor(v) != v || v < 1 || v > kCriterionCount) {
            throw ConfigError("key 'criteria' must list ids in 1.." + std::to_string(kCriterionCount));
        }
        ids.push_back(static_cast<int>(v));
    }
    const auto results = run_suite(ids, opts);
    CommandOutput out;
    Json rows = Json::array();
    std::string table = "criterion,title,status\n";
    std::size_t passed = 0;
    for (const auto& r : results) {
        rows.push_back(criterion_json(r));
        out.checks["criterion_" + std::to_string(r.id)] = r.passed;
        out.timing["criterion_" + std::to_string(r.id) + "_seconds"] = r.seconds;
        table += std::to_string(r.id) + ",\"" + r.title + "\"," + (r.passed ? "pass" : "fail") + "\n";
        passed += r.passed ? 1 : 0;
    }
    out.result = Json{{"scale", opts.scale}, {"passed", passed}, {"failed", results.size() - passed}, {"criteria", rows}};
    out.files.emplace_back("suite_table.csv", table);
    return out;
}

std::vector<Command> build_table() {
    std::vector<Command> t;
    t.push_back({"simulate", "Euler-Maruyama ensemble: terminal moments and a path dump",
                 Json{{"seed", nullptr},
                      {"substream", 0},
                      {"model", "ou{theta=1}"},
                      {"x0", Json::array({1.0})},
                      {"horizon", 1.0},
                      {"step", 1e-3},
                      {"n", 1000},
                      {"write_paths", 10}},
                 run_simulate});
    t.push_back({"estimate-md", "Markov-Dobrushin coefficient of the time-T kernel on a start grid",
                 Json{{"seed", nullptr},
                      {"substream", 0},
                      {"model", "ou{theta=1}"},
                      {"horizon", 1.0},
                      {"step", 1e-3},
                      {"n", 100000},
                      {"start_grid", Json::array({-1.0, 0.0, 1.0})},
                      {"bins", bins_defaults("box", -1.0, 1.0, 50)},
                      {"minorization", false},
                      {"require_positive", false}},
                 run_estimate_md});
    t.push_back({"couple", "Maximal coupling of two discrete laws",
                 Json{{"seed", nullptr},
                      {"substream", 0},
                      {"p1", Json::array({0.7, 0.3})},
                      {"p2", Json::array({0.5, 0.5})},
                      {"n", 100000},
                      {"alpha", 0.01},
                      {"export", 1000}},
                 run_couple});
    t.push_back({"meet-1d", "Meeting probabilities of the one-dimensional intersection coupling",
                 Json{{"seed", nullptr},
                      {"substream", 0},
                      {"model", "bounded_drift_1d{a=1,s0=1,s1=0.5}"},
                      {"points", Json::array({-1.0, -0.5, 0.0, 0.5, 1.0})},
                      {"pairs", Json::array()},
                      {"horizon", 1.0},
                      {"step", 1e-3},
                      {"n", 10000},
                      {"require_positive", true},
                      {"export", 1000}},
                 run_meet_1d});
    t.push_back({"girsanov-check", "Stochastic-exponential weights against direct simulation",
                 Json{{"seed", nullptr},
                      {"substream", 0},
                      {"model", "bm{d=1}"},
                      {"extra", "sign{a=1}"},
                      {"x0", Json::array({0.0})},
                      {"horizon", 1.0},
                      {"step", 0.005},
                      {"n", 100000},
                      {"bins", bins_defaults("box", -4.0, 4.0, 50)},
                      {"tv_tolerance", 0.05},
                      {"kappa",
                       Json{{"enabled", false},
                            {"start_grid", Json::array()},
                            {"bins", bins_defaults("ball", -1.0, 1.0, 8)},
                            {"n", 20000}}}},
                 run_girsanov});
    t.push_back({"harnack-parabolic", "Exit-place ratios on the parabolic cylinder boundary",
                 Json{{"seed", nullptr},
                      {"substream", 0},
                      {"model", "sign_drift{d=2,a=1}"},
                      {"first_grid", grid_json({{0.0, 0.0}, {0.25, 0.0}, {0.0, -0.25}})},
                      {"second_grid", grid_json({{0.0, 0.0}, {-0.25, 0.0}, {0.0, 0.25}})},
                      {"epsilon", 0.1},
                      {"time_cells", 3},
                      {"angular_cells", 8},
                      {"bands", 1},
                      {"top_cells", 4},
                      {"n", 20000},
                      {"step", 1e-3},
                      {"noise_floor", "both-below"},
                      {"corollary",
                       Json{{"enabled", false},
                            {"grid", grid_json({{0.0, 0.0}, {0.125, 0.0}, {0.0, 0.125}})},
                            {"half_width", 4.0},
                            {"cells", 16}}}},
                 run_harnack_parabolic});
    t.push_back({"harnack-elliptic", "Exit-place ratios on the sphere of radius R",
                 Json{{"seed", nullptr},
                      {"substream", 0},
                      {"model", "bm{d=2}"},
                      {"radius", 1.0},
                      {"grid", grid_json({{0.0, 0.0}, {0.125, 0.0}, {0.0, 0.125}})},
                      {"angular_cells", 36},
                      {"bands", 1},
                      {"n", 100000},
                      {"step", 1e-3},
                      {"oracle_tolerance", 0.1}},
                 run_harnack_elliptic});
    t.push_back({"md-elliptic", "Exit-place overlaps along a ladder of time caps",
                 Json{{"seed", nullptr},
                      {"substream", 0},
                      {"model", "bm{d=2}"},
                      {"radius", 1.0},
                      {"horizons", Json::array({1.0, 2.0, 4.0})},
                      {"grid", grid_json({{0.0, 0.0}, {0.125, 0.0}, {0.0, 0.125}})},
                      {"angular_cells", 36},
                      {"bands", 1},
                      {"n", 50000},
                      {"step", 1e-3},
                      {"tail_tolerance", 0.02}},
                 run_md_elliptic});
    t.push_back({"tv-curve", "Total variation to the stationary law over time",
                 Json{{"seed", nullptr},
                      {"substream", 0},
                      {"source", "model"},
                      {"model", "ou{theta=1}"},
                      {"x0", Json::array({1.0})},
                      {"times", Json::array({0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0})},
                      {"n", 100000},
                      {"step", 1e-3},
                      {"bins", bins_defaults("whole", -4.0, 4.0, 80)},
                      {"stationary", "gaussian"},
                      {"stationary_horizon", 20.0},
                      {"sigmas", 3.0},
                      {"chain",
                       Json{{"rows", grid_json({{0.9, 0.1}, {0.2, 0.8}})},
                            {"initial", Json::array({1.0, 0.0})},
                            {"max_t", 50}}}},
                 run_tv_curve});
    t.push_back({"oracle", "Closed-form and quadrature reference values",
                 Json{{"seed", nullptr},
                      {"query", "reflection"},
                      {"distance", 1.0},
                      {"horizon", 1.0},
                      {"sigma", 1.0},
                      {"theta", 1.0},
                      {"m1", -0.5},
                      {"m2", 0.5},
                      {"s", 1.0},
                      {"s1", 1.0},
                      {"s2", 1.0},
                      {"truncate", false},
                      {"lo", -1.0},
                      {"hi", 1.0},
                      {"points", Json::array({-1.0, 0.0, 1.0})},
                      {"grid", grid_json({{0.0, 0.0}, {0.125, 0.0}, {0.0, 0.125}})},
                      {"radius", 1.0},
                      {"cells", 36},
                      {"rows", grid_json({{0.5, 0.5, 0.0}, {0.25, 0.5, 0.25}, {0.0, 0.5, 0.5}})},
                      {"from", Json::array({0, 1, 2})},
                      {"to", Json::array({0, 1, 2})},
                      {"x", Json::array({0.0, 0.0})}},
                 run_oracle});
    t.push_back({"suite", "Acceptance suite: one pass/fail verdict per criterion",
                 Json{{"seed", nullptr},
                      {"scale", 1.0},
                      {"criteria", Json::array({1, 2, 3, 4, 5, 6, 7, 8, 9, 10})}},
                 run_suite_command});
    return t;
}

} // namespace

const std::vector<Command>& command_table() {
    static const std::vector<Command> table = build_table();
    return table;
}

const Command* find_command(std::string_view name) {
    for (const auto& c : command_table()) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

Execution execute(const Command& command, const Json& user_config, std::optional<std::uint64_t> seed_override,
                  unsigned threads, const ModelRegistry& registry) {
    Execution e;
    e.resolved = resolve_config(command.defaults, user_config);
    if (seed_override) {
        e.resolved["seed"] = *seed_override;
    }
    e.seed = parse_seed(e.resolved["seed"]);
    e.resolved["seed"] = e.seed;
    RunContext ctx{e.seed, std::max(1u, threads), &registry};
    e.output = command.run(ConfigView(e.resolved), ctx);
    e.report = make_report(command.name, e.seed, e.resolved, e.output);
    return e;
}

} // namespace couplex::app
