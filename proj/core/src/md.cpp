#include "couplex/md.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "couplex/error.hpp"

namespace couplex {

void MdQuery::validate(std::size_t dim) const {
    if (start_grid.empty()) {
        throw InvalidArgument("MD query: start grid is empty");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InvalidArgument("MD query: horizon must be positive and finite");
    }
    if (bins.grid.dim() != dim || bins.size() == 0) {
        throw InvalidArgument("MD query: bins must be a nonempty grid of dimension " + std::to_string(dim));
    }
    for (const auto& x : start_grid) {
        if (x.size() != dim) {
            throw InvalidArgument("MD query: start point of wrong dimension");
        }
    }
}

MdReport kappa_from_distributions(std::span<const DiscreteDistribution> laws,
                                  std::span<const std::vector<double>> std_errors) {
    const std::size_t m = laws.size();
    if (m == 0) {
        throw InvalidArgument("kappa: no laws");
    }
    if (!std_errors.empty() && std_errors.size() != m) {
        throw InvalidArgument("kappa: std_errors must be empty or one per law");
    }
    for (const auto& p : laws) {
        require_compatible(laws[0], p);
    }
    MdReport r;
    r.bins = laws[0].size();
    r.matrix.assign(m * m, 0.0);
    r.std_error.assign(m * m, 0.0);
    for (const auto& p : laws) {
        r.outside_mass.push_back(p.defect());
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            const double k = std::clamp(overlap(laws[i], laws[j]), 0.0, 1.0);
            double se = 0.0;
            if (!std_errors.empty()) {
                for (std::size_t c = 0; c < r.bins; ++c) {
                    const double s = std::max(std_errors[i][c], std_errors[j][c]);
                    se += s * s;
                }
            }
            se = std::sqrt(se);
            r.matrix[i * m + j] = r.matrix[j * m + i] = k;
            r.std_error[i * m + j] = r.std_error[j * m + i] = se;
        }
    }
    r.kappa = r.matrix[0];
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            if (r.matrix[i * m + j] < r.kappa) {
                r.kappa = r.matrix[i * m + j];
                r.argmin = {i, j};
            }
        }
    }
    double captured = 0.0;
    for (const auto& p : laws) {
        captured += p.cell_mass();
    }
    if (captured <= 0.0) {
        r.diagnostics.push_back("no mass in D' for any start point: kappa = 0");
    }
    return r;
}

MdReport kappa_from_histograms(std::span<const KernelHistogram> histograms, std::vector<Point> start_grid,
                               double horizon) {
    if (histograms.size() != start_grid.size()) {
        throw InvalidArgument("kappa: one histogram per start point required");
    }
    std::vector<DiscreteDistribution> laws;
    std::vector<std::vector<double>> errors;
    for (const auto& h : histograms) {
        laws.push_back(h.distribution);
        errors.push_back(h.mass_stderr);
    }
    MdReport r = kappa_from_distributions(laws, errors);
    r.start_grid = std::move(start_grid);
    r.horizon = horizon;
    r.samples = histograms.empty() ? 0 : histograms[0].samples;
    for (const auto& h : histograms) {
        for (const auto& w : h.warnings) {
            if (std::find(r.diagnostics.begin(), r.diagnostics.end(), w) == r.diagnostics.end()) {
                r.diagnostics.push_back(w);
            }
        }
    }
    return r;
}

KernelHistogram estimate_kernel_histogram(const SdeModel& model, std::span<const double> x0, double horizon,
                                          std::size_t n, const BinSpec& bins, const IntegratorConfig& cfg) {
    if (n == 0) {
        throw InvalidArgument("estimate_kernel_histogram: n must be positive");
    }
    return bin_measure(sample_transition(model, x0, horizon, n, cfg), bins);
}

std::vector<KernelHistogram> start_grid_histograms(const SdeModel& model, const MdQuery& query, std::size_t n,
                                                   const IntegratorConfig& cfg) {
    query.validate(model.dim());
    std::vector<KernelHistogram> out;
    out.reserve(query.start_grid.size());
    for (std::size_t k = 0; k < query.start_grid.size(); ++k) {
        IntegratorConfig sub = cfg;
        sub.substream = derive_substream(cfg.substream, k);
        out.push_back(estimate_kernel_histogram(model, query.start_grid[k], query.horizon, n, query.bins, sub));
    }
    return out;
}

MdReport estimate_md(const SdeModel& model, const MdQuery& query, std::size_t n, const IntegratorConfig& cfg) {
    model.require_non_degenerate("estimate_md");
    const auto hists = start_grid_histograms(model, query, n, cfg);
    return kappa_from_histograms(hists, query.start_grid, query.horizon);
}

DiscreteDistribution uniform_reference(const BinSpec& bins) {
    const auto volumes = bins.region_volumes();
    double total = 0.0;
    for (double v : volumes) {
        total += v;
    }
    if (!(total > 0.0)) {
        throw InvalidArgument("uniform_reference: D' has zero volume on the grid");
    }
    std::vector<double> masses(volumes.size());
    for (std::size_t c = 0; c < volumes.size(); ++c) {
        masses[c] = volumes[c] / total;
    }
    return DiscreteDistribution::from_masses(std::vector<double>(volumes.size(), bins.grid.cell_volume()), masses);
}

MinorizationReport minorization_from_histograms(std::span<const KernelHistogram> histograms,
                                                const DiscreteDistribution& nu, double horizon) {
    if (histograms.empty()) {
        throw InvalidArgument("minorization: no histograms");
    }
    MinorizationReport r;
    r.nu = nu;
    r.horizon = horizon;
    r.nu_covered_mass = nu.cell_mass();
    double c = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < histograms.size(); ++k) {
        const auto& mu = histograms[k].distribution;
        require_compatible(mu, nu);
        for (std::size_t cell = 0; cell < nu.size(); ++cell) {
            const double v = nu.mass(cell);
            if (v <= 0.0) {
                continue;
            }
            const double ratio = mu.mass(cell) / v;
            if (ratio < c) {
                c = ratio;
                r.argmin = std::pair{k, cell};
            }
        }
    }
    if (!std::isfinite(c)) {
        r.diagnostics.push_back("nu has no mass on the D' cells: c = 0");
        c = 0.0;
    } else if (c == 0.0) {
        r.diagnostics.push_back("some start point puts zero mass on cell " + std::to_string(r.argmin->second) +
                                " where nu is positive: c = 0");
    }
    r.c = c;
    return r;
}

MinorizationReport check_minorization(const SdeModel& model, const MdQuery& query, std::size_t n,
                                      const IntegratorConfig& cfg, const std::optional<DiscreteDistribution>& nu) {
    model.require_non_degenerate("check_minorization");
    const auto hists = start_grid_histograms(model, query, n, cfg);
    return minorization_from_histograms(hists, nu ? *nu : uniform_reference(query.bins), query.horizon);
}

double exact_md_finite_chain(const FiniteChain& chain, std::span<const std::size_t> from,
                             std::span<const std::size_t> to) {
    if (from.empty()) {
        throw InvalidArgument("exact_md_finite_chain: D is empty");
    }
    for (auto s : from) {
        if (s >= chain.size()) {
            throw InvalidArgument("exact_md_finite_chain: state out of range");
        }
    }
    for (auto s : to) {
        if (s >= chain.size()) {
            throw InvalidArgument("exact_md_finite_chain: state out of range");
        }
    }
    double best = 1.0;
    for (auto i : from) {
        for (auto k : from) {
            double s = 0.0;
            for (auto j : to) {
                s += std::min(chain(i, j), chain(k, j));
            }
            best = std::min(best, s);
        }
    }
    return best;
}

} // namespace couplex
