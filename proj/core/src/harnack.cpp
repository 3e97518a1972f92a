#include "couplex/harnack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "couplex/error.hpp"
#include "couplex/parallel.hpp"

namespace couplex {

namespace {

constexpr double kNoiseFloorCount = 5.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) {
        s += v * v;
    }
    return std::sqrt(s);
}

std::size_t bin_of(double u, std::size_t cells) {
    const auto k = static_cast<std::size_t>(std::max(0.0, u) * static_cast<double>(cells));
    return std::min(k, cells - 1);
}

IntegratorConfig with_substream(const IntegratorConfig& cfg, std::uint64_t substream) {
    IntegratorConfig c = cfg;
    c.substream = substream;
    return c;
}

void require_grid(std::span<const Point> grid, std::size_t dim, double max_norm, const char* what) {
    if (grid.empty()) {
        throw InvalidArgument(std::string(what) + ": grid is empty");
    }
    for (const auto& x : grid) {
        if (x.size() != dim) {
            throw InvalidArgument(std::string(what) + ": grid point of wrong dimension");
        }
        if (norm(x) > max_norm * (1.0 + 1e-12)) {
            throw InvalidArgument(std::string(what) + ": grid point outside |x| <= " + std::to_string(max_norm));
        }
    }
}

void fill_std_errors(BoundaryMeasure& m) {
    const double n = static_cast<double>(m.samples);
    m.std_errors.resize(m.masses.size());
    for (std::size_t c = 0; c < m.masses.size(); ++c) {
        const double p = m.masses[c];
        m.std_errors[c] = std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
    }
}

BoundaryMeasure places_from_records(const std::vector<ExitRecord>& recs, const SpherePartition& cells,
                                    double horizon = std::numeric_limits<double>::infinity()) {
    BoundaryMeasure m;
    m.samples = recs.size();
    m.masses.assign(cells.size(), 0.0);
    const double w = 1.0 / static_cast<double>(recs.size());
    for (const auto& r : recs) {
        if (r.exited && r.time < horizon) {
            m.masses[cells.locate(r.state)] += w;
        }
    }
    for (double v : m.masses) {
        m.captured += v;
    }
    m.uncaptured = std::max(0.0, 1.0 - m.captured);
    fill_std_errors(m);
    return m;
}

std::vector<ExitRecord> uncapped_exits(const SdeModel& model, double radius, std::span<const double> x,
                                       std::size_t n, const IntegratorConfig& cfg) {
    return sample_exits(model, x, radius, std::nullopt, n, cfg);
}

} // namespace

SpherePartition::SpherePartition(std::size_t dim, std::size_t angular, std::size_t bands)
    : dim_(dim), angular_(angular), bands_(bands) {
    if (dim == 0 || dim > 3) {
        throw InvalidArgument("SpherePartition supports d = 1, 2, 3");
    }
    if (dim == 1) {
        angular_ = 2;
        bands_ = 1;
        size_ = 2;
        return;
    }
    if (angular == 0 || bands == 0) {
        throw InvalidArgument("SpherePartition needs at least one cell per direction");
    }
    if (dim == 2) {
        bands_ = 1;
    }
    size_ = angular_ * bands_;
}

std::size_t SpherePartition::locate(std::span<const double> x) const {
    if (x.size() != dim_) {
        throw InvalidArgument("SpherePartition::locate: dimension mismatch");
    }
    if (dim_ == 1) {
        return x[0] > 0.0 ? 1 : 0;
    }
    double a = std::atan2(x[1], x[0]);
    if (a < 0.0) {
        a += kTwoPi;
    }
    const std::size_t sector = bin_of(a / kTwoPi, angular_);
    if (dim_ == 2) {
        return sector;
    }
    const double r = norm(x);
    const double z = r > 0.0 ? x[2] / r : 0.0;
    return bin_of(0.5 * (z + 1.0), bands_) * angular_ + sector;
}

std::pair<double, double> SpherePartition::arc(std::size_t i) const {
    if (dim_ != 2) {
        throw InvalidArgument("SpherePartition::arc is defined for d = 2");
    }
    const double w = kTwoPi / static_cast<double>(angular_);
    return {w * static_cast<double>(i), w * static_cast<double>(i + 1)};
}

CylinderCells CylinderCells::make(std::size_t dim, double epsilon, std::size_t time_cells, std::size_t angular,
                                  std::size_t top_cells_per_axis, std::size_t bands) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw InvalidArgument("cylinder cells need 0 < epsilon < 1");
    }
    if (time_cells == 0 || top_cells_per_axis == 0) {
        throw InvalidArgument("cylinder cells need at least one time and one top cell");
    }
    return CylinderCells{epsilon, time_cells, SpherePartition(dim, angular, bands),
                         BoxGrid::cube(dim, -1.0, 1.0, top_cells_per_axis)};
}

std::optional<std::size_t> CylinderCells::locate(double t, std::span<const double> x, bool exited) const {
    if (!exited) {
        const auto c = top.locate(x);
        if (!c) {
            return std::nullopt;
        }
        return lateral_size() + *c;
    }
    if (t < epsilon - 1e-9) {
        return std::nullopt;
    }
    const std::size_t tb = bin_of((t - epsilon) / (1.0 - epsilon), time_cells);
    return tb * sphere.size() + sphere.locate(x);
}

BoundaryMeasure sample_parabolic_boundary(const SdeModel& model, std::span<const double> x0, double start_time,
                                          const CylinderCells& cells, std::size_t n, const IntegratorConfig& cfg) {
    if (n == 0) {
        throw InvalidArgument("sample_parabolic_boundary needs n >= 1");
    }
    if (x0.size() != model.dim() || cells.sphere.dim() != model.dim()) {
        throw InvalidArgument("sample_parabolic_boundary: dimension mismatch");
    }
    if (norm(x0) > 0.25 * (1.0 + 1e-12)) {
        throw InvalidArgument("sample_parabolic_boundary: start point must satisfy |x0| <= 1/4");
    }
    if (!(start_time >= 0.0 && start_time < 1.0)) {
        throw InvalidArgument("sample_parabolic_boundary: start time must lie in [0, 1)");
    }
    const auto recs = sample_exits(model, x0, 1.0, 1.0 - start_time, n, cfg);
    BoundaryMeasure m;
    m.samples = n;
    m.masses.assign(cells.size(), 0.0);
    const double w = 1.0 / static_cast<double>(n);
    for (const auto& r : recs) {
        if (r.exited) {
            m.exited_before_one += w;
        }
        const auto c = cells.locate(start_time + r.time, r.state, r.exited);
        if (!c) {
            continue;
        }
        m.masses[*c] += w;
        (cells.is_lateral(*c) ? m.lateral : m.top) += w;
    }
    for (double v : m.masses) {
        m.captured += v;
    }
    m.uncaptured = std::max(0.0, 1.0 - m.captured);
    fill_std_errors(m);
    return m;
}

HarnackPair compare_boundary_measures(const BoundaryMeasure& first, const BoundaryMeasure& second, std::size_t n,
                                      NoiseFloorRule rule, std::vector<CellRatio>* table) {
    if (first.masses.size() != second.masses.size()) {
        throw IncompatibleSupport("boundary measures live on different partitions");
    }
    const double floor = kNoiseFloorCount / static_cast<double>(n);
    HarnackPair p;
    double adequate_min = 0.0;
    if (table) {
        table->assign(first.masses.size(), CellRatio{});
    }
    for (std::size_t c = 0; c < first.masses.size(); ++c) {
        const double a = first.masses[c];
        const double b = second.masses[c];
        const double lo = std::min(a, b);
        p.md_integral += lo;
        const double s = std::max(first.std_errors[c], second.std_errors[c]);
        p.md_std_error += s * s;
        if (a == 0.0 && b == 0.0) {
            if (table) {
                (*table)[c] = {a, b, 0.0, true};
            }
            continue;
        }
        const bool below = rule == NoiseFloorRule::both_below ? (a < floor && b < floor) : (a < floor || b < floor);
        // A ratio needs a positive denominator whatever the rule.
        const bool excluded = below || b == 0.0;
        CellRatio cr{a, b, 0.0, excluded};
        if (excluded) {
            ++p.excluded_cells;
            p.excluded_mass += a;
        } else {
            cr.ratio = a / b;
            adequate_min += lo;
            p.adequate_mass += a;
            if (cr.ratio > p.n_hat) {
                p.n_hat = cr.ratio;
                p.argmax_cell = c;
            }
        }
        if (table) {
            (*table)[c] = cr;
        }
    }
    p.md_std_error = std::sqrt(p.md_std_error);
    p.inequality_holds = adequate_min >= p.adequate_mass / p.n_hat * (1.0 - 1e-12) - 1e-15;
    return p;
}

HarnackReport parabolic_harnack_check(const SdeModel& model, std::span<const Point> first_grid,
                                      std::span<const Point> second_grid, const CylinderCells& cells, std::size_t n,
                                      const IntegratorConfig& cfg, NoiseFloorRule rule) {
    model.require_non_degenerate("parabolic_harnack_check");
    require_grid(first_grid, model.dim(), 0.25, "parabolic_harnack_check");
    require_grid(second_grid, model.dim(), 0.25, "parabolic_harnack_check");

    HarnackReport r;
    r.kind = "parabolic";
    r.epsilon = cells.epsilon;
    r.radius = 1.0;
    r.first_grid.assign(first_grid.begin(), first_grid.end());
    r.second_grid.assign(second_grid.begin(), second_grid.end());
    r.samples = n;
    r.rule = rule;
    const std::uint64_t s0 = derive_substream(cfg.substream, 0);
    const std::uint64_t s1 = derive_substream(cfg.substream, 1);
    for (std::size_t i = 0; i < first_grid.size(); ++i) {
        r.first_measures.push_back(sample_parabolic_boundary(model, first_grid[i], 0.0, cells, n,
                                                             with_substream(cfg, derive_substream(s0, i))));
        r.captured_first.push_back(r.first_measures.back().captured);
    }
    for (std::size_t j = 0; j < second_grid.size(); ++j) {
        r.second_measures.push_back(sample_parabolic_boundary(model, second_grid[j], cells.epsilon, cells, n,
                                                              with_substream(cfg, derive_substream(s1, j))));
        r.captured_second.push_back(r.second_measures.back().captured);
    }

    r.md_integral = std::numeric_limits<double>::infinity();
    std::size_t worst = 0;
    for (std::size_t i = 0; i < first_grid.size(); ++i) {
        for (std::size_t j = 0; j < second_grid.size(); ++j) {
            HarnackPair p = compare_boundary_measures(r.first_measures[i], r.second_measures[j], n, rule);
            p.first = i;
            p.second = j;
            r.inequality_holds = r.inequality_holds && p.inequality_holds;
            if (p.md_integral < r.md_integral) {
                r.md_integral = p.md_integral;
                r.md_std_error = p.md_std_error;
                r.argmin = {i, j};
            }
            if (p.n_hat > r.n_hat || r.pairs.empty()) {
                worst = r.pairs.size();
                r.n_hat = std::max(r.n_hat, p.n_hat);
            }
            r.pairs.push_back(p);
        }
    }
    const HarnackPair& w = r.pairs[worst];
    compare_boundary_measures(r.first_measures[w.first], r.second_measures[w.second], n, rule, &r.cells);
    r.excluded_cells = w.excluded_cells;
    r.excluded_mass = w.excluded_mass;
    r.q_hat = *std::min_element(r.captured_first.begin(), r.captured_first.end());
    r.q_over_n = r.q_hat / r.n_hat;
    double kappa = 1.0;
    for (const auto& m : r.first_measures) {
        kappa = std::min(kappa, m.exited_before_one);
    }
    r.proof_kappa = kappa;
    if (r.md_integral < r.q_over_n) {
        r.diagnostics.push_back("MD integral " + std::to_string(r.md_integral) + " is below q/N = " +
                                std::to_string(r.q_over_n) + " with the full captured mass; the gap is mass on "
                                "excluded cells (resolution)");
    }
    if (!r.inequality_holds) {
        r.diagnostics.push_back("data-level inequality failed on adequately sampled cells");
    }
    return r;
}

CorollaryReport md_via_parabolic_corollary(const SdeModel& model, std::span<const Point> grid,
                                           const CylinderCells& cells, const BinSpec& bins, std::size_t n,
                                           const IntegratorConfig& cfg, NoiseFloorRule rule) {
    model.require_non_degenerate("md_via_parabolic_corollary");
    require_grid(grid, model.dim(), 0.125, "md_via_parabolic_corollary");

    CorollaryReport r;
    MdQuery q{std::vector<Point>(grid.begin(), grid.end()), bins, 1.0};
    r.overlap = estimate_md(model, q, n, with_substream(cfg, derive_substream(cfg.substream, 0)));
    r.parabolic =
        parabolic_harnack_check(model, grid, grid, cells, n, with_substream(cfg, derive_substream(cfg.substream, 1)), rule);

    const std::uint64_t s2 = derive_substream(cfg.substream, 2);
    r.p_eps = 2.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto m = sample_transition(model, grid[k], cells.epsilon, n, with_substream(cfg, derive_substream(s2, k)));
        std::size_t inside = 0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            inside += norm(m.point(i)) <= 0.25 ? 1 : 0;
        }
        const double p = static_cast<double>(inside) / static_cast<double>(n);
        if (p < r.p_eps) {
            r.p_eps = p;
            r.p_eps_argmin = k;
        }
    }
    const double nd = static_cast<double>(n);
    r.p_eps_std_error = std::sqrt(r.p_eps * (1.0 - r.p_eps) / nd);

    const auto& captured = r.parabolic.captured_first;
    const auto q_arg = static_cast<std::size_t>(std::min_element(captured.begin(), captured.end()) - captured.begin());
    r.q_hat = captured[q_arg];
    const double q_se = std::sqrt(r.q_hat * (1.0 - r.q_hat) / nd);
    r.q_prime = r.q_hat * r.p_eps;
    r.q_prime_std_error = std::sqrt(r.p_eps * r.p_eps * q_se * q_se + r.q_hat * r.q_hat * r.p_eps_std_error * r.p_eps_std_error);

    // Joint event on independent pairs: cylinder path from the q argmin is
    // captured, and an eps-path from the p argmin ends in B_{1/4}.
    const std::uint64_t s3 = derive_substream(cfg.substream, 3);
    const IntegratorConfig cyl_cfg = with_substream(cfg, derive_substream(s3, 0));
    const IntegratorConfig eps_cfg = with_substream(cfg, derive_substream(s3, 1));
    std::vector<unsigned char> joint(n, 0);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        const auto id = static_cast<std::uint32_t>(i);
        const ExitRecord e = simulate_exit(model, grid[q_arg], 1.0, 1.0, cyl_cfg, id);
        const bool captured_hit = cells.locate(e.time, e.state, e.exited).has_value();
        if (!captured_hit) {
            return;
        }
        const Point z = simulate_terminal(model, grid[r.p_eps_argmin], cells.epsilon, eps_cfg, id);
        joint[i] = norm(z) <= 0.25 ? 1 : 0;
    });
    r.q_prime_direct = static_cast<double>(std::count(joint.begin(), joint.end(), 1)) / nd;
    r.q_prime_direct_std_error = std::sqrt(r.q_prime_direct * (1.0 - r.q_prime_direct) / nd);
    r.q_prime_consistent = std::abs(r.q_prime_direct - r.q_prime) <=
                           3.0 * std::sqrt(r.q_prime_std_error * r.q_prime_std_error +
                                           r.q_prime_direct_std_error * r.q_prime_direct_std_error);
    r.bound = r.q_prime / r.parabolic.n_hat;
    r.inequality_holds = r.overlap.kappa >= r.bound;
    return r;
}

std::vector<BoundaryMeasure> sample_exit_places(const SdeModel& model, double radius, std::span<const Point> grid,
                                                const SpherePartition& cells, std::size_t n,
                                                const IntegratorConfig& cfg) {
    if (n == 0) {
        throw InvalidArgument("sample_exit_places needs n >= 1");
    }
    if (cells.dim() != model.dim()) {
        throw InvalidArgument("sample_exit_places: partition dimension differs from the model");
    }
    std::vector<BoundaryMeasure> out;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto recs = uncapped_exits(model, radius, grid[k], n,
                                         with_substream(cfg, derive_substream(cfg.substream, k)));
        out.push_back(places_from_records(recs, cells));
    }
    return out;
}

HarnackReport elliptic_ratio_from_measures(std::span<const BoundaryMeasure> measures) {
    if (measures.empty()) {
        throw InvalidArgument("elliptic ratio: no measures");
    }
    HarnackReport r;
    r.kind = "elliptic";
    r.samples = measures[0].samples;
    const std::size_t m = measures[0].masses.size();
    r.cells.assign(m, CellRatio{});
    for (const auto& mu : measures) {
        if (mu.masses.size() != m) {
            throw IncompatibleSupport("exit-place measures live on different partitions");
        }
        r.captured_first.push_back(mu.captured);
    }
    for (std::size_t c = 0; c < m; ++c) {
        double hi = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& mu : measures) {
            hi = std::max(hi, mu.masses[c]);
            lo = std::min(lo, mu.masses[c]);
        }
        CellRatio cr{hi, lo, 0.0, lo <= 0.0};
        if (cr.excluded) {
            ++r.excluded_cells;
            r.excluded_mass += hi;
        } else {
            cr.ratio = hi / lo;
            r.n_hat = std::max(r.n_hat, cr.ratio);
        }
        r.cells[c] = cr;
    }
    r.q_hat = *std::min_element(r.captured_first.begin(), r.captured_first.end());
    if (r.excluded_cells > 0) {
        r.diagnostics.push_back(std::to_string(r.excluded_cells) + " cells with zero mass for some grid point excluded");
    }
    return r;
}

HarnackReport elliptic_harnack_check(const SdeModel& model, double radius, std::span<const Point> grid,
                                     const SpherePartition& cells, std::size_t n, const IntegratorConfig& cfg) {
    model.require_non_degenerate("elliptic_harnack_check");
    if (!(radius > 0.0 && radius <= 1.0)) {
        throw InvalidArgument("elliptic_harnack_check needs 0 < R <= 1");
    }
    require_grid(grid, model.dim(), radius / 8.0, "elliptic_harnack_check");
    const auto measures = sample_exit_places(model, radius, grid, cells, n, cfg);
    HarnackReport r = elliptic_ratio_from_measures(measures);
    r.radius = radius;
    r.first_grid.assign(grid.begin(), grid.end());
    r.first_measures = measures;
    return r;
}

EllipticMdReport md_via_elliptic(const SdeModel& model, double radius, std::span<const double> horizons,
                                 std::span<const Point> grid, const SpherePartition& cells, std::size_t n,
                                 const IntegratorConfig& cfg) {
    model.require_non_degenerate("md_via_elliptic");
    if (!(radius > 0.0 && radius <= 1.0)) {
        throw InvalidArgument("md_via_elliptic needs 0 < R <= 1");
    }
    if (horizons.empty()) {
        throw InvalidArgument("md_via_elliptic needs at least one horizon");
    }
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (!(horizons[i] > 0.0) || (i > 0 && horizons[i] <= horizons[i - 1])) {
            throw InvalidArgument("md_via_elliptic: horizons must be positive and strictly increasing");
        }
    }
    require_grid(grid, model.dim(), radius, "md_via_elliptic");
    for (const auto& x : grid) {
        if (norm(x) >= radius) {
            throw InvalidArgument("md_via_elliptic: grid points must lie in the open ball");
        }
    }

    EllipticMdReport r;
    r.radius = radius;
    r.grid.assign(grid.begin(), grid.end());
    r.samples = n;
    const Point origin(model.dim(), 0.0);
    r.reference = places_from_records(
        uncapped_exits(model, radius, origin, n, with_substream(cfg, derive_substream(cfg.substream, 1))), cells);

    const std::uint64_t s0 = derive_substream(cfg.substream, 0);
    std::vector<std::vector<ExitRecord>> recs;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        recs.push_back(uncapped_exits(model, radius, grid[k], n, with_substream(cfg, derive_substream(s0, k))));
    }

    const std::vector<double> lambda(cells.size(), 1.0);
    for (double T : horizons) {
        ExhaustionRung rung;
        rung.horizon = T;
        std::vector<DiscreteDistribution> laws;
        std::vector<std::vector<double>> errors;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            BoundaryMeasure m = places_from_records(recs[k], cells, T);
            double dropped = 0.0;
            for (std::size_t c = 0; c < cells.size(); ++c) {
                // Densities w.r.t. nu^0_R only exist where the reference charges the cell.
                if (r.reference.masses[c] <= 0.0) {
                    dropped += m.masses[c];
                    m.masses[c] = 0.0;
                    m.std_errors[c] = 0.0;
                }
            }
            laws.push_back(DiscreteDistribution::from_masses(lambda, m.masses, m.uncaptured + dropped));
            errors.push_back(m.std_errors);
            std::size_t tail = 0;
            for (const auto& e : recs[k]) {
                tail += e.time >= T ? 1 : 0;
            }
            const double p = static_cast<double>(tail) / static_cast<double>(n);
            if (p > rung.tail_sup) {
                rung.tail_sup = p;
                rung.tail_argmax = k;
            }
        }
        rung.overlap = kappa_from_distributions(laws, errors);
        rung.overlap.start_grid = r.grid;
        rung.overlap.horizon = T;
        rung.overlap.samples = n;
        if (rung.overlap.kappa < 0.5 * (1.0 - rung.tail_sup)) {
            rung.overlap.diagnostics.push_back("overlap dominated by uncaptured mass at T=" + std::to_string(T));
        }
        r.ladder.push_back(std::move(rung));
    }
    for (std::size_t i = 1; i < r.ladder.size(); ++i) {
        const auto& prev = r.ladder[i - 1].overlap.matrix;
        const auto& cur = r.ladder[i].overlap.matrix;
        for (std::size_t e = 0; e < cur.size(); ++e) {
            if (cur[e] < prev[e]) {
                r.monotone = false;
            }
        }
    }
    if (!r.monotone) {
        r.diagnostics.push_back("overlap decreased along the horizon ladder");
    }
    return r;
}

} // namespace couplex
