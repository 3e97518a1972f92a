#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "couplex/app/config.hpp"

namespace couplex::app {

inline constexpr int kCriterionCount = 10;

struct SuiteOptions {
    std::uint64_t seed = 20240611;
    /// Multiplies every sample size. Fixed Monte Carlo tolerances widen by
    /// 1 / sqrt(scale) when scale < 1; standard-error based ones scale by themselves.
    double scale = 1.0;
    unsigned threads = 1;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string summary;
    Json metrics = Json::object();
    double seconds = 0.0;  ///< wall clock; never part of a report
};

std::string criterion_title(int id);

/// Throws InvalidArgument for ids outside 1..kCriterionCount.
CriterionResult run_criterion(int id, const SuiteOptions& options);

std::vector<CriterionResult> run_suite(std::span<const int> ids, const SuiteOptions& options);

/// "[PASS] 4 <title>: <summary> (<seconds> s)".
std::string format_criterion_line(const CriterionResult& r);

/// Report payload of a criterion: everything except the timing.
Json criterion_json(const CriterionResult& r);

} // namespace couplex::app
