#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace couplex::stats {

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Sample mean with standard error s / sqrt(n) (unbiased s).
MeanEstimate mean_estimate(std::span<const double> values);

/// Unbiased sample variance.
double sample_variance(std::span<const double> values);

/// sqrt(p (1 - p) / n).
double binomial_std_error(double p, std::size_t n);

/// Pearson statistic sum (O - E)^2 / E; cells with E = 0 must have O = 0.
double chi_square_statistic(std::span<const double> observed, std::span<const double> expected);

/// Upper quantile of the chi-square law: P(X > x) = alpha.
double chi_square_critical(std::size_t degrees_of_freedom, double alpha);

struct TestResult {
    double statistic = 0.0;
    double critical = 0.0;
    bool passed = false;
};

/// Goodness of fit of cell counts against probabilities at level alpha.
TestResult chi_square_test(std::span<const double> counts, std::span<const double> probabilities, double alpha);

/// Asymptotic Kolmogorov critical constant c(alpha) = sqrt(-ln(alpha / 2) / 2).
double ks_constant(double alpha);

/// One-sample KS against a continuous CDF; critical value c(alpha) / sqrt(n).
template <typename Cdf>
TestResult ks_one_sample(std::vector<double> sample, Cdf cdf, double alpha);

/// Two-sample KS; critical value c(alpha) sqrt((n + m) / (n m)).
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha);

} // namespace couplex::stats

#include "couplex/stats_impl.hpp"
