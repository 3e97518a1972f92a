#include "couplex/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>

#include "couplex/error.hpp"

namespace couplex::stats {

MeanEstimate mean_estimate(std::span<const double> values) {
    if (values.empty()) {
        throw InvalidArgument("mean_estimate: empty sample");
    }
    double s = 0.0;
    for (double v : values) {
        s += v;
    }
    const double n = static_cast<double>(values.size());
    const double mean = s / n;
    const double se = values.size() > 1 ? std::sqrt(sample_variance(values) / n) : 0.0;
    return {mean, se, values.size()};
}

double sample_variance(std::span<const double> values) {
    if (values.size() < 2) {
        return 0.0;
    }
    double mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return ss / static_cast<double>(values.size() - 1);
}

double binomial_std_error(double p, std::size_t n) {
    if (n == 0) {
        throw InvalidArgument("binomial_std_error: n must be positive");
    }
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

double chi_square_statistic(std::span<const double> observed, std::span<const double> expected) {
    if (observed.size() != expected.size()) {
        throw InvalidArgument("chi_square_statistic: size mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) {
            if (observed[i] > 0.0) {
                return std::numeric_limits<double>::infinity();
            }
            continue;
        }
        const double d = observed[i] - expected[i];
        s += d * d / expected[i];
    }
    return s;
}

double chi_square_critical(std::size_t degrees_of_freedom, double alpha) {
    if (degrees_of_freedom == 0 || !(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("chi_square_critical: need df >= 1 and 0 < alpha < 1");
    }
    boost::math::chi_squared_distribution<double> law(static_cast<double>(degrees_of_freedom));
    return boost::math::quantile(boost::math::complement(law, alpha));
}

TestResult chi_square_test(std::span<const double> counts, std::span<const double> probabilities, double alpha) {
    if (counts.size() != probabilities.size() || counts.size() < 2) {
        throw InvalidArgument("chi_square_test: need matching sizes and at least two cells");
    }
    double n = 0.0;
    for (double c : counts) {
        n += c;
    }
    std::vector<double> expected(probabilities.size());
    std::size_t live = 0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        expected[i] = n * probabilities[i];
        live += probabilities[i] > 0.0 ? 1 : 0;
    }
    TestResult r;
    r.statistic = chi_square_statistic(counts, expected);
    r.critical = chi_square_critical(std::max<std::size_t>(live, 2) - 1, alpha);
    r.passed = r.statistic <= r.critical;
    return r;
}

double ks_constant(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("ks_constant: need 0 < alpha < 1");
    }
    return std::sqrt(-0.5 * std::log(0.5 * alpha));
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha) {
    if (a.empty() || b.empty()) {
        throw InvalidArgument("ks_two_sample: empty sample");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double n = static_cast<double>(a.size());
    const double m = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) {
            ++i;
        }
        while (j < b.size() && b[j] == x) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    const double critical = ks_constant(alpha) * std::sqrt((n + m) / (n * m));
    return {d, critical, d <= critical};
}

} // namespace couplex::stats
