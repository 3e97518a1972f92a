#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "couplex/distribution.hpp"
#include "couplex/rng.hpp"
#include "couplex/sde.hpp"

namespace couplex {

/// One draw of a coupled pair. For static couplings the values are cell
/// indices and `meeting_time` is empty; for path couplings they are the
/// terminal states of the two (glued) trajectories.
struct CouplingResult {
    double first = 0.0;
    double second = 0.0;
    bool coalesced = false;
    std::optional<double> meeting_time;
};

/// Maximal coupling of two laws on shared cells.
///
/// With q = sum min(p1, p2) Lambda, a draw flips zeta with P(zeta = 0) = q.
/// On zeta = 0 both coordinates take the same value xi ~ min(p1, p2) / q;
/// otherwise they are drawn independently from the residuals
/// eta_j ~ (p_j - min(p1, p2)) / (1 - q). Each coordinate keeps its law and
/// P(first != second) = 1 - q, the total variation distance.
class MaximalCouplingSampler {
public:
    static MaximalCouplingSampler build(const DiscreteDistribution& p1, const DiscreteDistribution& p2);

    double overlap() const noexcept { return q_; }
    double mismatch_probability() const noexcept { return 1.0 - q_; }

    /// Law of xi; absent when q = 0.
    const std::optional<DiscreteDistribution>& common() const noexcept { return common_; }
    /// Laws of eta_1, eta_2; absent when q = 1.
    const std::optional<DiscreteDistribution>& residual_first() const noexcept { return residual_[0]; }
    const std::optional<DiscreteDistribution>& residual_second() const noexcept { return residual_[1]; }

    CouplingResult draw(Stream& rng) const;

    /// max over cells of |(1 - q) eta_j + q xi - p_j|, j = 1, 2.
    double mixture_residual(const DiscreteDistribution& p1, const DiscreteDistribution& p2) const;

private:
    static std::size_t sample_cell(const std::vector<double>& cdf, double u) noexcept;

    double q_ = 0.0;
    std::optional<DiscreteDistribution> common_;
    std::optional<DiscreteDistribution> residual_[2];
    std::vector<double> common_cdf_;
    std::vector<double> residual_cdf_[2];
};

MaximalCouplingSampler build_maximal_coupling(const DiscreteDistribution& p1, const DiscreteDistribution& p2);

CouplingResult draw_coupled_pair(const MaximalCouplingSampler& sampler, Stream& rng);

/// n draws; draw i uses Stream(seed, substream, i).
std::vector<CouplingResult> draw_coupled_pairs(const MaximalCouplingSampler& sampler, std::size_t n,
                                               std::uint64_t seed, std::uint64_t substream, unsigned threads = 1);

/// Absolute tolerance below which |X - X'| counts as a meeting.
inline constexpr double kMeetingTolerance = 1e-12;

/// Two independent paths glued at their first meeting.
struct GluedPaths {
    CouplingResult result;
    Path first;
    Path second;  ///< equals `first` at and after the meeting time
};

/// Intersection coupling in d = 1: independent Euler paths from x1 and x2,
/// meeting when X - X' changes sign between grid nodes or |X - X'| <= 1e-12.
/// tau is the grid node at which the meeting is detected.
CouplingResult intersection_couple_1d(const SdeModel& model, double x1, double x2, double horizon,
                                      const IntegratorConfig& cfg, std::uint32_t pair_id = 0);

GluedPaths intersection_couple_paths_1d(const SdeModel& model, double x1, double x2, double horizon,
                                        const IntegratorConfig& cfg, std::uint32_t pair_id = 0);

struct MeetingEstimate {
    double x1 = 0.0;
    double x2 = 0.0;
    double probability = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

struct MeetingTable {
    std::vector<MeetingEstimate> rows;
    std::size_t argmin = 0;
    double horizon = 0.0;

    const MeetingEstimate& minimum() const { return rows.at(argmin); }
};

/// P(paths from x1 and x2 meet before the horizon) for every grid pair.
MeetingTable estimate_meeting_probability(const SdeModel& model, std::span<const std::pair<double, double>> pairs,
                                          double horizon, std::size_t n, const IntegratorConfig& cfg);

/// All ordered pairs of `points`.
std::vector<std::pair<double, double>> pair_grid(std::span<const double> points);

} // namespace couplex
