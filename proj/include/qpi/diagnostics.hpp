// diagnostics.hpp: Statistical self-checks of a discretized bath

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpi/bath.hpp"
#include "qpi/csv.hpp"

namespace qpi {

struct DiagnosticsOptions {
    int n_samples = 100000;      // sampler moments, FDT and noise covariance
    int wick_samples = 1000000;
    int fdt_points = 20;
    std::uint64_t seed = 20240601;
    double sum_rule_tolerance = 0.01;  // relative
    double kernel_tolerance = 0.01;    // relative to the continuum K(0)
    double sigma_limit = 3.0;
};

struct CheckResult {
    std::string name;
    bool passed = true;
    bool skipped = false;
    std::string detail;
    CsvTable table;
};

// Runs every check on one bath. Each check draws from its own seeded stream.
std::vector<CheckResult> run_bath_diagnostics(const DiscretizedBath& bath, const DiagnosticsOptions& options,
                                              std::uint64_t stream_index = 0);

} // namespace qpi
