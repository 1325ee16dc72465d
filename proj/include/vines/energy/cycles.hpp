// Impact counting per LO oscillation cycle.
#pragma once

#include "vines/core/state.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace vines::energy {

struct CycleCount {
    std::size_t cycle = 0;
    double tau_begin = 0.0;
    double tau_end = 0.0;
    std::size_t impacts = 0;
};

/// tau = 0 followed by the upward zero crossings of x1 on the sample grid.
/// Crossings closer than `min_cycle` to the previous boundary are merged into it.
std::vector<double> cycle_boundaries(const core::Trajectory& tr, double min_cycle = 0.5);

/// Bins impact instants into the half-open cycles [b_i, b_{i+1}). Impacts
/// after the last boundary fall in no complete cycle and are not counted.
std::vector<CycleCount> impacts_per_cycle(std::span<const double> boundaries,
                                          std::span<const double> impact_times);

std::vector<CycleCount> impacts_per_cycle(const core::Trajectory& tr);

} // namespace vines::energy
