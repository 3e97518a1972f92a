#pragma once

#include <span>
#include <vector>

#include "couplex/app/config.hpp"
#include "couplex/coupling.hpp"
#include "couplex/girsanov.hpp"
#include "couplex/harnack.hpp"
#include "couplex/md.hpp"
#include "couplex/stats.hpp"
#include "couplex/tv.hpp"

// Report encodings of library results. Non-finite numbers encode as null.
namespace couplex::app {

Json to_json(std::span<const Point> points);
Json to_json(const stats::TestResult& r);
/// {kappa, kappa_stderr, pairs[], argmin, n, bins, convention, ...}.
Json to_json(const MdReport& r);
Json to_json(const MinorizationReport& r);
Json to_json(const MeetingTable& t);
/// {mean_rho, stderr, n_eff, kernel_tv_vs_direct, ...}.
Json to_json(const GirsanovCheck& c);
Json to_json(const BoundaryMeasure& m);
Json to_json(const HarnackReport& r);
Json to_json(const CorollaryReport& r);
Json to_json(const EllipticMdReport& r);
Json to_json(const TvCurve& c);
Json to_json(const MonotonicityVerdict& v);
Json to_json(const CouplingBoundVerdict& v);

} // namespace couplex::app
