#pragma once

#include <ostream>
#include <span>
#include <string>

#include "couplex/coupling.hpp"
#include "couplex/harnack.hpp"
#include "couplex/md.hpp"
#include "couplex/sde.hpp"
#include "couplex/tv.hpp"

namespace couplex {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// "t,x1,...,xd,path_id"; path_id is the path's provenance index.
void write_paths_csv(std::ostream& out, std::span<const Path> paths);

/// "pair_id,x1,x2,coalesced,tau"; tau is empty when the pair never met.
void write_coupling_csv(std::ostream& out, std::span<const CouplingResult> pairs);

/// "t,tv,stderr".
void write_tv_csv(std::ostream& out, const TvCurve& curve);

/// Two whitespace-separated columns "t tv" with a '#' comment header.
void write_tv_gnuplot(std::ostream& out, const TvCurve& curve);

/// "point,x1,...,xd,k0,...,k{m-1}": one row per start point.
void write_md_matrix_csv(std::ostream& out, const MdReport& report);

/// "cell,numerator,denominator,ratio,excluded".
void write_ratio_table_csv(std::ostream& out, const HarnackReport& report);

} // namespace couplex
