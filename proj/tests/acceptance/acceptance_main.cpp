#include <cstdlib>
#include <iostream>

#include "couplex/app/main_entry.hpp"
#include "couplex/app/suite.hpp"

// Runs every acceptance criterion at full scale and prints one verdict line each.
int main() {
    couplex::app::SuiteOptions options;
    options.threads = couplex::app::resolve_threads(std::nullopt, std::getenv("COUPLEX_THREADS"));
    int failed = 0;
    for (int id = 1; id <= couplex::app::kCriterionCount; ++id) {
        const auto r = couplex::app::run_criterion(id, options);
        std::cout << couplex::app::format_criterion_line(r) << std::endl;
        failed += r.passed ? 0 : 1;
    }
    std::cout << (couplex::app::kCriterionCount - failed) << " of " << couplex::app::kCriterionCount
              << " criteria passed" << std::endl;
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
