#pragma once

#include <algorithm>
#include <cmath>

#include "couplex/error.hpp"

namespace couplex::stats {

template <typename Cdf>
TestResult ks_one_sample(std::vector<double> sample, Cdf cdf, double alpha) {
    if (sample.empty()) {
        throw InvalidArgument("ks_one_sample: empty sample");
    }
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    const double critical = ks_constant(alpha) / std::sqrt(n);
    return {d, critical, d <= critical};
}

} // namespace couplex::stats
