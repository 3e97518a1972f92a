#include "couplex/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "couplex/error.hpp"

namespace couplex {

DiscreteDistribution::DiscreteDistribution(std::vector<double> lambda, std::vector<double> density, double defect)
    : lambda_(std::move(lambda)), density_(std::move(density)), defect_(defect) {
    if (lambda_.size() != density_.size()) {
        throw InvalidArgument("DiscreteDistribution: lambda and density sizes differ");
    }
    for (std::size_t i = 0; i < lambda_.size(); ++i) {
        if (!(lambda_[i] > 0.0) || !std::isfinite(lambda_[i])) {
            throw InvalidArgument("DiscreteDistribution: reference masses must be positive and finite");
        }
        if (!(density_[i] >= 0.0) || !std::isfinite(density_[i])) {
            throw InvalidArgument("DiscreteDistribution: densities must be finite and nonnegative");
        }
    }
    if (!std::isfinite(defect_)) {
        throw InvalidArgument("DiscreteDistribution: defect must be finite");
    }
}

DiscreteDistribution DiscreteDistribution::from_masses(std::vector<double> lambda, std::span<const double> masses,
                                                       double defect) {
    if (lambda.size() != masses.size()) {
        throw InvalidArgument("DiscreteDistribution::from_masses: size mismatch");
    }
    std::vector<double> density(masses.size());
    for (std::size_t i = 0; i < masses.size(); ++i) {
        density[i] = masses[i] / lambda[i];
    }
    return DiscreteDistribution(std::move(lambda), std::move(density), defect);
}

DiscreteDistribution DiscreteDistribution::from_probabilities(std::vector<double> probabilities) {
    std::vector<double> lambda(probabilities.size(), 1.0);
    return DiscreteDistribution(std::move(lambda), std::move(probabilities), 0.0);
}

std::vector<double> DiscreteDistribution::masses() const {
    std::vector<double> m(size());
    for (std::size_t i = 0; i < size(); ++i) {
        m[i] = mass(i);
    }
    return m;
}

double DiscreteDistribution::cell_mass() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        s += mass(i);
    }
    return s;
}

bool DiscreteDistribution::compatible_with(const DiscreteDistribution& other) const noexcept {
    if (size() != other.size()) {
        return false;
    }
    for (std::size_t i = 0; i < size(); ++i) {
        const double a = lambda_[i];
        const double b = other.lambda_[i];
        if (std::abs(a - b) > 1e-12 * std::max(a, b)) {
            return false;
        }
    }
    return true;
}

void DiscreteDistribution::require_probability(double tolerance) const {
    if (defect_ < -tolerance) {
        throw InvalidArgument("distribution has negative outside mass");
    }
    const double total = total_mass();
    if (std::abs(total - 1.0) > tolerance) {
        throw InvalidArgument("distribution total mass " + std::to_string(total) + " differs from 1");
    }
}

void require_compatible(const DiscreteDistribution& a, const DiscreteDistribution& b) {
    if (!a.compatible_with(b)) {
        throw IncompatibleSupport("distributions are defined on different cells (" + std::to_string(a.size()) +
                                  " vs " + std::to_string(b.size()) + " cells or differing reference masses)");
    }
}

double overlap(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    require_compatible(p, q);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        s += std::min(p.density(i), q.density(i)) * p.lambda(i);
    }
    return s;
}

BoxGrid::BoxGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) {
        throw InvalidArgument("BoxGrid needs at least one axis");
    }
    size_ = 1;
    for (const auto& a : axes_) {
        if (a.cells == 0 || !(a.hi > a.lo) || !std::isfinite(a.lo) || !std::isfinite(a.hi)) {
            throw InvalidArgument("BoxGrid axis needs lo < hi and at least one cell");
        }
        size_ *= a.cells;
    }
}

BoxGrid BoxGrid::cube(std::size_t dim, double lo, double hi, std::size_t cells_per_axis) {
    return BoxGrid(std::vector<Axis>(dim, Axis{lo, hi, cells_per_axis}));
}

double BoxGrid::cell_volume() const noexcept {
    double v = 1.0;
    for (const auto& a : axes_) {
        v *= a.width();
    }
    return v;
}

std::optional<std::size_t> BoxGrid::locate(std::span<const double> x) const noexcept {
    std::size_t index = 0;
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        const Axis& a = axes_[k];
        if (!(x[k] >= a.lo) || !(x[k] <= a.hi)) {
            return std::nullopt;
        }
        auto c = static_cast<std::size_t>((x[k] - a.lo) / a.width());
        c = std::min(c, a.cells - 1);
        index = index * a.cells + c;
    }
    return index;
}

std::vector<std::size_t> BoxGrid::unflatten(std::size_t cell) const {
    std::vector<std::size_t> idx(axes_.size());
    for (std::size_t k = axes_.size(); k-- > 0;) {
        idx[k] = cell % axes_[k].cells;
        cell /= axes_[k].cells;
    }
    return idx;
}

Point BoxGrid::center(std::size_t cell) const {
    const auto idx = unflatten(cell);
    Point c(axes_.size());
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        c[k] = axes_[k].lo + (static_cast<double>(idx[k]) + 0.5) * axes_[k].width();
    }
    return c;
}

Region Region::box(Point lo, Point hi) {
    if (lo.size() != hi.size() || lo.empty()) {
        throw InvalidArgument("Region::box: corners must have equal nonzero dimension");
    }
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!(hi[i] > lo[i])) {
            throw InvalidArgument("Region::box: need lo < hi in every coordinate");
        }
    }
    return Region(Kind::box, std::move(lo), std::move(hi), 0.0);
}

Region Region::ball(double radius, Point center) {
    if (!(radius > 0.0)) {
        throw InvalidArgument("Region::ball: radius must be positive");
    }
    return Region(Kind::ball, std::move(center), {}, radius);
}

bool Region::contains(std::span<const double> x) const noexcept {
    switch (kind_) {
    case Kind::whole:
        return true;
    case Kind::box:
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < lo_[i] || x[i] > hi_[i]) {
                return false;
            }
        }
        return true;
    case Kind::ball: {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double c = lo_.empty() ? 0.0 : lo_[i];
            s += (x[i] - c) * (x[i] - c);
        }
        return s <= radius_ * radius_;
    }
    }
    return false;
}

BinSpec BinSpec::over_box(Point lo, Point hi, std::size_t cells_per_axis) {
    std::vector<Axis> axes;
    for (std::size_t i = 0; i < lo.size() && i < hi.size(); ++i) {
        axes.push_back({lo[i], hi[i], cells_per_axis});
    }
    BinSpec spec{BoxGrid(std::move(axes)), Region::box(std::move(lo), std::move(hi))};
    return spec;
}

BinSpec BinSpec::over_ball(std::size_t dim, double radius, std::size_t cells_per_axis) {
    return {BoxGrid::cube(dim, -radius, radius, cells_per_axis), Region::ball(radius)};
}

BinSpec BinSpec::whole_space(std::size_t dim, double half_width, std::size_t cells_per_axis) {
    return {BoxGrid::cube(dim, -half_width, half_width, cells_per_axis), Region::whole()};
}

std::vector<double> BinSpec::region_volumes() const {
    const double vol = grid.cell_volume();
    std::vector<double> out(grid.size(), vol);
    if (region.kind() == Region::Kind::whole) {
        return out;
    }
    if (region.kind() == Region::Kind::box) {
        for (std::size_t c = 0; c < grid.size(); ++c) {
            const auto idx = grid.unflatten(c);
            double v = 1.0;
            for (std::size_t k = 0; k < grid.dim(); ++k) {
                const Axis& a = grid.axis(k);
                const double lo = std::max(a.edge(idx[k]), region.lo()[k]);
                const double hi = std::min(a.edge(idx[k] + 1), region.hi()[k]);
                v *= std::max(0.0, hi - lo);
            }
            out[c] = v;
        }
        return out;
    }
    constexpr std::size_t kSub = 16;
    const std::size_t d = grid.dim();
    std::size_t sub_points = 1;
    for (std::size_t k = 0; k < d; ++k) {
        sub_points *= kSub;
    }
    Point p(d);
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const auto idx = grid.unflatten(c);
        std::size_t inside = 0;
        for (std::size_t s = 0; s < sub_points; ++s) {
            std::size_t rest = s;
            for (std::size_t k = 0; k < d; ++k) {
                const Axis& a = grid.axis(k);
                const double frac = (static_cast<double>(rest % kSub) + 0.5) / static_cast<double>(kSub);
                rest /= kSub;
                p[k] = a.edge(idx[k]) + frac * a.width();
            }
            inside += region.contains(p) ? 1 : 0;
        }
        out[c] = vol * static_cast<double>(inside) / static_cast<double>(sub_points);
    }
    return out;
}

KernelHistogram bin_measure(const EmpiricalMeasure& measure, const BinSpec& bins, bool self_normalize) {
    const std::size_t n = measure.size();
    if (n == 0) {
        throw InvalidArgument("bin_measure: empty measure");
    }
    if (measure.dim != bins.grid.dim()) {
        throw InvalidArgument("bin_measure: bins and samples differ in dimension");
    }
    const std::size_t m = bins.size();
    std::vector<double> sum(m, 0.0);
    std::vector<double> sum_sq(m, 0.0);
    double outside = 0.0;
    double w_sum = 0.0;
    double w_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = measure.point(i);
        const double w = measure.weight(i);
        w_sum += w;
        w_sq += w * w;
        std::optional<std::size_t> cell;
        if (bins.region.contains(x)) {
            cell = bins.grid.locate(x);
        }
        if (cell) {
            sum[*cell] += w;
            sum_sq[*cell] += w * w;
        } else {
            outside += w;
        }
    }

    const double denom = self_normalize ? w_sum : static_cast<double>(n);
    const double nd = static_cast<double>(n);
    KernelHistogram out;
    out.samples = n;
    out.effective_samples = w_sq > 0.0 ? w_sum * w_sum / w_sq : 0.0;
    out.mass_stderr.resize(m);
    std::vector<double> masses(m);
    for (std::size_t c = 0; c < m; ++c) {
        masses[c] = sum[c] / denom;
        // Variance of the per-sample contribution w 1(cell), divided by n.
        const double mean = sum[c] / nd;
        const double var = std::max(0.0, sum_sq[c] / nd - mean * mean);
        out.mass_stderr[c] = std::sqrt(var / nd) * (nd / denom);
    }
    std::vector<double> lambda(m, bins.grid.cell_volume());
    out.distribution = DiscreteDistribution::from_masses(std::move(lambda), masses, outside / denom);
    if (n < 20 * m) {
        out.warnings.push_back("undersampled: n=" + std::to_string(n) + " is below 20 samples per bin (" +
                               std::to_string(20 * m) + ")");
    }
    return out;
}

} // namespace couplex
