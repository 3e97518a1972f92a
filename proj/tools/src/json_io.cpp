#include "couplex/app/json_io.hpp"

#include <cmath>

namespace couplex::app {
namespace {

Json num(double v) {
    return std::isfinite(v) ? Json(v) : Json(nullptr);
}

Json nums(std::span<const double> v) {
    Json out = Json::array();
    for (double x : v) {
        out.push_back(num(x));
    }
    return out;
}

Json strings(const std::vector<std::string>& v) {
    Json out = Json::array();
    for (const auto& s : v) {
        out.push_back(s);
    }
    return out;
}

const char* rule_name(NoiseFloorRule r) {
    return r == NoiseFloorRule::both_below ? "both-below" : "either-below";
}

} // namespace

Json to_json(std::span<const Point> points) {
    Json out = Json::array();
    for (const auto& p : points) {
        out.push_back(nums(p));
    }
    return out;
}

Json to_json(const stats::TestResult& r) {
    return Json{{"statistic", num(r.statistic)}, {"critical", num(r.critical)}, {"passed", r.passed}};
}

Json to_json(const MdReport& r) {
    Json pairs = Json::array();
    const std::size_t m = r.points();
    const bool located = r.start_grid.size() == m;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            pairs.push_back(Json{{"i", i},
                                 {"j", j},
                                 {"x_i", located ? nums(r.start_grid[i]) : Json(nullptr)},
                                 {"x_j", located ? nums(r.start_grid[j]) : Json(nullptr)},
                                 {"overlap", num(r.pair(i, j))},
                                 {"stderr", num(r.pair_std_error(i, j))}});
        }
    }
    Json out = Json::object();
    out["kappa"] = num(r.kappa);
    out["kappa_stderr"] = m == 0 ? Json(nullptr) : num(r.kappa_std_error());
    out["pairs"] = std::move(pairs);
    out["argmin"] = Json{{"i", r.argmin.first}, {"j", r.argmin.second}};
    out["n"] = r.samples;
    out["bins"] = r.bins;
    out["horizon"] = num(r.horizon);
    out["convention"] = r.convention;
    out["start_grid"] = to_json(r.start_grid);
    out["outside_mass"] = nums(r.outside_mass);
    out["diagnostics"] = strings(r.diagnostics);
    return out;
}

Json to_json(const MinorizationReport& r) {
    Json out = Json::object();
    out["c"] = num(r.c);
    out["horizon"] = num(r.horizon);
    out["nu_covered_mass"] = num(r.nu_covered_mass);
    out["argmin"] = r.argmin ? Json{{"start", r.argmin->first}, {"cell", r.argmin->second}} : Json(nullptr);
    out["nu_masses"] = nums(r.nu.masses());
    out["diagnostics"] = strings(r.diagnostics);
    return out;
}

Json to_json(const MeetingTable& t) {
    Json rows = Json::array();
    for (const auto& r : t.rows) {
        rows.push_back(Json{{"x1", num(r.x1)},
                            {"x2", num(r.x2)},
                            {"probability", num(r.probability)},
                            {"stderr", num(r.std_error)},
                            {"n", r.samples}});
    }
    Json out = Json::object();
    out["horizon"] = num(t.horizon);
    out["rows"] = std::move(rows);
    out["argmin"] = t.argmin;
    if (!t.rows.empty()) {
        out["minimum"] = num(t.minimum().probability);
        out["minimum_stderr"] = num(t.minimum().std_error);
    }
    return out;
}

Json to_json(const GirsanovCheck& c) {
    Json out = Json::object();
    out["mean_rho"] = num(c.mean_rho);
    out["stderr"] = num(c.std_error);
    out["n_eff"] = num(c.n_eff);
    out["kernel_tv_vs_direct"] = num(c.kernel_tv_vs_direct);
    out["tv_noise_scale"] = num(c.tv_noise_scale);
    out["samples"] = c.samples;
    out["overflowed"] = c.overflowed;
    out["warnings"] = strings(c.warnings);
    return out;
}

Json to_json(const BoundaryMeasure& m) {
    Json out = Json::object();
    out["masses"] = nums(m.masses);
    out["stderr"] = nums(m.std_errors);
    out["captured"] = num(m.captured);
    out["uncaptured"] = num(m.uncaptured);
    out["lateral"] = num(m.lateral);
    out["top"] = num(m.top);
    out["exited_before_one"] = num(m.exited_before_one);
    out["samples"] = m.samples;
    return out;
}

Json to_json(const HarnackReport& r) {
    Json cells = Json::array();
    for (std::size_t c = 0; c < r.cells.size(); ++c) {
        const auto& cell = r.cells[c];
        cells.push_back(Json{{"cell", c},
                             {"numerator", num(cell.numerator)},
                             {"denominator", num(cell.denominator)},
                             {"ratio", num(cell.ratio)},
                             {"excluded", cell.excluded}});
    }
    Json pairs = Json::array();
    for (const auto& p : r.pairs) {
        pairs.push_back(Json{{"first", p.first},
                             {"second", p.second},
                             {"n_hat", num(p.n_hat)},
                             {"argmax_cell", p.argmax_cell},
                             {"excluded_cells", p.excluded_cells},
                             {"excluded_mass", num(p.excluded_mass)},
                             {"md_integral", num(p.md_integral)},
                             {"md_stderr", num(p.md_std_error)},
                             {"adequate_mass", num(p.adequate_mass)},
                             {"inequality_holds", p.inequality_holds}});
    }
    Json firsts = Json::array();
    for (const auto& m : r.first_measures) {
        firsts.push_back(to_json(m));
    }
    Json seconds = Json::array();
    for (const auto& m : r.second_measures) {
        seconds.push_back(to_json(m));
    }
    Json out = Json::object();
    out["kind"] = r.kind;
    out["n_hat"] = num(r.n_hat);
    out["q_hat"] = num(r.q_hat);
    out["q_over_n"] = num(r.q_over_n);
    out["md_integral"] = num(r.md_integral);
    out["md_stderr"] = num(r.md_std_error);
    out["argmin"] = Json{{"first", r.argmin.first}, {"second", r.argmin.second}};
    out["inequality_holds"] = r.inequality_holds;
    out["proof_kappa"] = r.proof_kappa ? num(*r.proof_kappa) : Json(nullptr);
    out["epsilon"] = num(r.epsilon);
    out["radius"] = num(r.radius);
    out["samples"] = r.samples;
    out["noise_floor"] = rule_name(r.rule);
    out["excluded_cells"] = r.excluded_cells;
    out["excluded_mass"] = num(r.excluded_mass);
    out["first_grid"] = to_json(r.first_grid);
    out["second_grid"] = to_json(r.second_grid);
    out["captured_first"] = nums(r.captured_first);
    out["captured_second"] = nums(r.captured_second);
    out["cells"] = std::move(cells);
    out["pairs"] = std::move(pairs);
    out["first_measures"] = std::move(firsts);
    out["second_measures"] = std::move(seconds);
    out["diagnostics"] = strings(r.diagnostics);
    return out;
}

Json to_json(const CorollaryReport& r) {
    Json out = Json::object();
    out["overlap"] = to_json(r.overlap);
    out["q_hat"] = num(r.q_hat);
    out["p_eps"] = num(r.p_eps);
    out["p_eps_stderr"] = num(r.p_eps_std_error);
    out["p_eps_argmin"] = r.p_eps_argmin;
    out["q_prime"] = num(r.q_prime);
    out["q_prime_stderr"] = num(r.q_prime_std_error);
    out["q_prime_direct"] = num(r.q_prime_direct);
    out["q_prime_direct_stderr"] = num(r.q_prime_direct_std_error);
    out["q_prime_consistent"] = r.q_prime_consistent;
    out["bound"] = num(r.bound);
    out["inequality_holds"] = r.inequality_holds;
    out["parabolic"] = to_json(r.parabolic);
    return out;
}

Json to_json(const EllipticMdReport& r) {
    Json ladder = Json::array();
    for (const auto& rung : r.ladder) {
        ladder.push_back(Json{{"horizon", num(rung.horizon)},
                              {"tail_sup", num(rung.tail_sup)},
                              {"tail_argmax", rung.tail_argmax},
                              {"overlap", to_json(rung.overlap)}});
    }
    Json out = Json::object();
    out["radius"] = num(r.radius);
    out["grid"] = to_json(r.grid);
    out["samples"] = r.samples;
    out["monotone"] = r.monotone;
    out["ladder"] = std::move(ladder);
    out["reference"] = to_json(r.reference);
    out["diagnostics"] = strings(r.diagnostics);
    return out;
}

Json to_json(const TvCurve& c) {
    Json out = Json::object();
    out["times"] = nums(c.times);
    out["tv"] = nums(c.tv);
    out["stderr"] = nums(c.std_error);
    out["exact"] = c.exact;
    out["convention"] = c.convention;
    out["resolution"] = c.resolution;
    return out;
}

Json to_json(const MonotonicityVerdict& v) {
    Json out = Json::object();
    out["holds"] = v.holds;
    out["violations"] = v.violations;
    out["max_violation"] = num(v.max_violation);
    out["worst"] = v.worst ? Json::array({v.worst->first, v.worst->second}) : Json(nullptr);
    return out;
}

Json to_json(const CouplingBoundVerdict& v) {
    return Json{{"holds", v.holds},
                {"mismatch", num(v.mismatch)},
                {"stderr", num(v.std_error)},
                {"tv", num(v.tv)},
                {"maximal", v.maximal}};
}

} // namespace couplex::app
