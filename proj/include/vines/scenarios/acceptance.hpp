// The acceptance criteria as executable checks. Tolerances and budgets are
// fixed here; the quick budget shrinks sample counts and GA sizes so the whole
// set runs in seconds (used by the determinism check and smoke runs).
#pragma once

#include "vines/core/dynamics.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace vines::scenarios {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;    ///< measured values, reproducible run to run
    double seconds = 0.0;  ///< wall time, kept out of reports that must be byte-stable
};

using ImpactMapFn = std::function<core::ImpactOutcome(double v1_pre, double v2_pre, const core::SystemParams&)>;

struct AcceptanceOptions {
    bool quick = false;
    unsigned threads = 1;
    std::uint64_t seed = 2024;
    std::vector<int> checks; ///< empty runs all
    ImpactMapFn impact_map;  ///< empty uses core::impact_map
    /// Thread count of the second run in the determinism check.
    unsigned alternate_threads = 4;
};

inline constexpr int kCriteriaCount = 13;

/// Short name of criterion `id` (1-based).
std::string criterion_name(int id);

/// Runs the selected checks in order, reporting each through `progress` as it finishes.
std::vector<CheckResult> run_acceptance(const AcceptanceOptions& opts,
                                        const std::function<void(const CheckResult&)>& progress = {});

} // namespace vines::scenarios
