#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "couplex/sde.hpp"

namespace couplex {

/// Density w.r.t. a reference measure Lambda on finitely many cells, plus
/// the mass that fell outside those cells (`defect`). For probability laws
/// sum(density * lambda) + defect == 1; weighted estimates may carry a total
/// that differs from one by Monte Carlo noise.
class DiscreteDistribution {
public:
    DiscreteDistribution() = default;
    DiscreteDistribution(std::vector<double> lambda, std::vector<double> density, double defect = 0.0);

    /// Cells with the given masses (not densities).
    static DiscreteDistribution from_masses(std::vector<double> lambda, std::span<const double> masses,
                                            double defect = 0.0);
    /// Counting reference measure: lambda = 1 on every cell, density = probability.
    static DiscreteDistribution from_probabilities(std::vector<double> probabilities);

    std::size_t size() const noexcept { return density_.size(); }
    double lambda(std::size_t i) const noexcept { return lambda_[i]; }
    double density(std::size_t i) const noexcept { return density_[i]; }
    double mass(std::size_t i) const noexcept { return density_[i] * lambda_[i]; }
    double defect() const noexcept { return defect_; }

    const std::vector<double>& lambdas() const noexcept { return lambda_; }
    const std::vector<double>& densities() const noexcept { return density_; }
    std::vector<double> masses() const;

    /// sum over cells of density * lambda.
    double cell_mass() const noexcept;
    double total_mass() const noexcept { return cell_mass() + defect_; }

    /// Same number of cells with equal lambda masses.
    bool compatible_with(const DiscreteDistribution& other) const noexcept;

    /// Throws InvalidArgument unless this is a probability law within `tolerance`.
    void require_probability(double tolerance = 1e-9) const;

private:
    std::vector<double> lambda_;
    std::vector<double> density_;
    double defect_ = 0.0;
};

/// Throws IncompatibleSupport unless both distributions share cells.
void require_compatible(const DiscreteDistribution& a, const DiscreteDistribution& b);

/// sum over shared cells of min(p, q) * lambda. The defect never contributes.
double overlap(const DiscreteDistribution& p, const DiscreteDistribution& q);

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t cells = 1;

    double width() const noexcept { return (hi - lo) / static_cast<double>(cells); }
    double edge(std::size_t k) const noexcept {
        return k == cells ? hi : lo + static_cast<double>(k) * width();
    }
};

/// Product of uniform axes; cells are flattened with the last axis fastest.
class BoxGrid {
public:
    BoxGrid() = default;
    explicit BoxGrid(std::vector<Axis> axes);
    static BoxGrid cube(std::size_t dim, double lo, double hi, std::size_t cells_per_axis);

    std::size_t dim() const noexcept { return axes_.size(); }
    std::size_t size() const noexcept { return size_; }
    const Axis& axis(std::size_t k) const noexcept { return axes_[k]; }
    const std::vector<Axis>& axes() const noexcept { return axes_; }
    double cell_volume() const noexcept;

    /// Cell containing x, half-open on the right except the top edge.
    std::optional<std::size_t> locate(std::span<const double> x) const noexcept;
    Point center(std::size_t cell) const;
    std::vector<std::size_t> unflatten(std::size_t cell) const;

private:
    std::vector<Axis> axes_;
    std::size_t size_ = 0;
};

class Region {
public:
    enum class Kind { whole, box, ball };

    static Region whole() { return Region(Kind::whole, {}, {}, 0.0); }
    static Region box(Point lo, Point hi);
    /// Closed ball |x - center| <= radius; center defaults to the origin.
    static Region ball(double radius, Point center = {});

    Kind kind() const noexcept { return kind_; }
    const Point& lo() const noexcept { return lo_; }
    const Point& hi() const noexcept { return hi_; }
    double radius() const noexcept { return radius_; }
    const Point& center() const noexcept { return lo_; }

    bool contains(std::span<const double> x) const noexcept;

private:
    Region(Kind kind, Point lo, Point hi, double radius)
        : kind_(kind), lo_(std::move(lo)), hi_(std::move(hi)), radius_(radius) {}

    Kind kind_;
    Point lo_;  // box lower corner, or ball center
    Point hi_;
    double radius_;
};

/// Histogram layout for a target set D': samples count toward a cell only if
/// they lie in `region` and in a grid cell; everything else is outside mass.
struct BinSpec {
    BoxGrid grid;
    Region region = Region::whole();

    std::size_t size() const noexcept { return grid.size(); }

    /// Grid matching a box region, or covering a ball.
    static BinSpec over_box(Point lo, Point hi, std::size_t cells_per_axis);
    static BinSpec over_ball(std::size_t dim, double radius, std::size_t cells_per_axis);
    /// Whole-space target binned on the covering cube [-half_width, half_width]^d.
    static BinSpec whole_space(std::size_t dim, double half_width, std::size_t cells_per_axis);

    /// Lebesgue measure of region intersected with each cell (midpoint rule
    /// on a 16^d sub-grid for balls; exact for boxes and whole space).
    std::vector<double> region_volumes() const;
};

/// Histogram estimate of a law with per-cell standard errors.
struct KernelHistogram {
    DiscreteDistribution distribution;
    std::vector<double> mass_stderr;  ///< per-cell binomial (or weighted) standard error
    std::size_t samples = 0;
    double effective_samples = 0.0;   ///< (sum w)^2 / sum w^2; equals samples when unweighted
    std::vector<std::string> warnings;
};

/// Bins an empirical measure. Lambda = grid cell volume; weights are used
/// unnormalized (mass = sum w 1(cell) / n) unless `self_normalize`.
KernelHistogram bin_measure(const EmpiricalMeasure& measure, const BinSpec& bins, bool self_normalize = false);

} // namespace couplex
