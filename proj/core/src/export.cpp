#include "couplex/export.hpp"

#include <charconv>
#include <cmath>

namespace couplex {

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_paths_csv(std::ostream& out, std::span<const Path> paths) {
    const std::size_t d = paths.empty() ? 1 : paths[0].dim;
    out << "t";
    for (std::size_t i = 1; i <= d; ++i) {
        out << ",x" << i;
    }
    out << ",path_id\n";
    for (const auto& p : paths) {
        for (std::size_t k = 0; k < p.size(); ++k) {
            out << format_double(p.times[k]);
            for (double v : p.state(k)) {
                out << ',' << format_double(v);
            }
            out << ',' << p.provenance.path << '\n';
        }
    }
}

void write_coupling_csv(std::ostream& out, std::span<const CouplingResult> pairs) {
    out << "pair_id,x1,x2,coalesced,tau\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& r = pairs[i];
        out << i << ',' << format_double(r.first) << ',' << format_double(r.second) << ',' << (r.coalesced ? 1 : 0)
            << ',';
        if (r.meeting_time) {
            out << format_double(*r.meeting_time);
        }
        out << '\n';
    }
}

void write_tv_csv(std::ostream& out, const TvCurve& curve) {
    out << "t,tv,stderr\n";
    for (std::size_t k = 0; k < curve.times.size(); ++k) {
        out << format_double(curve.times[k]) << ',' << format_double(curve.tv[k]) << ','
            << format_double(curve.std_error[k]) << '\n';
    }
}

void write_tv_gnuplot(std::ostream& out, const TvCurve& curve) {
    out << "# t tv\n";
    for (std::size_t k = 0; k < curve.times.size(); ++k) {
        out << format_double(curve.times[k]) << ' ' << format_double(curve.tv[k]) << '\n';
    }
}

void write_md_matrix_csv(std::ostream& out, const MdReport& report) {
    const std::size_t m = report.points();
    const bool located = report.start_grid.size() == m && m > 0;
    const std::size_t d = located ? report.start_grid[0].size() : 0;
    out << "point";
    for (std::size_t i = 1; i <= d; ++i) {
        out << ",x" << i;
    }
    for (std::size_t j = 0; j < m; ++j) {
        out << ",k" << j;
    }
    out << '\n';
    for (std::size_t i = 0; i < m; ++i) {
        out << i;
        if (located) {
            for (double v : report.start_grid[i]) {
                out << ',' << format_double(v);
            }
        }
        for (std::size_t j = 0; j < m; ++j) {
            out << ',' << format_double(report.pair(i, j));
        }
        out << '\n';
    }
}

void write_ratio_table_csv(std::ostream& out, const HarnackReport& report) {
    out << "cell,numerator,denominator,ratio,excluded\n";
    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        const auto& r = report.cells[c];
        out << c << ',' << format_double(r.numerator) << ',' << format_double(r.denominator) << ','
            << format_double(r.ratio) << ',' << (r.excluded ? 1 : 0) << '\n';
    }
}

} // namespace couplex
