#include "vines/energy/cycles.hpp"

#include <algorithm>

namespace vines::energy {

std::vector<double> cycle_boundaries(const core::Trajectory& tr, double min_cycle) {
    std::vector<double> bounds{0.0};
    for (std::size_t i = 1; i < tr.samples.size(); ++i) {
        const auto& a = tr.samples[i - 1].state;
        const auto& b = tr.samples[i].state;
        if (a.x1 < 0.0 && b.x1 >= 0.0 && b.tau > a.tau) {
            const double t = a.tau + (b.tau - a.tau) * (-a.x1) / (b.x1 - a.x1);
            if (t - bounds.back() >= min_cycle) {
                bounds.push_back(t);
            }
        }
    }
    return bounds;
}

std::vector<CycleCount> impacts_per_cycle(std::span<const double> boundaries,
                                          std::span<const double> impact_times) {
    std::vector<CycleCount> out;
    if (boundaries.size() < 2) {
        return out;
    }
    out.reserve(boundaries.size() - 1);
    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) {
        out.push_back({i, boundaries[i], boundaries[i + 1], 0});
    }
    for (const double t : impact_times) {
        const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), t);
        if (it == boundaries.begin() || it == boundaries.end()) {
            continue;
        }
        ++out[static_cast<std::size_t>(it - boundaries.begin()) - 1].impacts;
    }
    return out;
}

std::vector<CycleCount> impacts_per_cycle(const core::Trajectory& tr) {
    std::vector<double> times;
    times.reserve(tr.impacts.size());
    for (const auto& e : tr.impacts) {
        times.push_back(e.tau);
    }
    const auto bounds = cycle_boundaries(tr);
    return impacts_per_cycle(bounds, times);
}

} // namespace vines::energy
