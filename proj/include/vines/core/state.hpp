// State, event and trajectory records produced by the hybrid integrator.
#pragma once

#include "vines/core/params.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vines::core {

/// Instantaneous state plus the running dissipation integrals.
struct SimState {
    double tau = 0.0;
    double x1 = 0.0;
    double v1 = 0.0;
    double x2 = 0.0;
    double v2 = 0.0;
    double i_damp = 0.0; ///< integral of v1^2
    double i_coil = 0.0; ///< integral of (v1 - v2)^2
    double e_imp = 0.0;  ///< summed impact losses, drop in (v1^2 + eps*v2^2)

    [[nodiscard]] double relative_displacement() const { return x1 - x2; }
    [[nodiscard]] double relative_velocity() const { return v1 - v2; }

    friend bool operator==(const SimState&, const SimState&) = default;
};

struct InitialState {
    double x1 = 0.0;
    double v1 = 0.5;
    double x2 = 0.0;
    double v2 = 0.0;
};

struct ImpactEvent {
    double tau = 0.0;
    int wall = 0; ///< +1 when w = +L_c, -1 when w = -L_c
    double v1_pre = 0.0;
    double v2_pre = 0.0;
    double v1_post = 0.0;
    double v2_post = 0.0;
    double energy_loss = 0.0;
    bool grazing = false; ///< contact located at a tangency of the gap function

    friend bool operator==(const ImpactEvent&, const ImpactEvent&) = default;
};

/// Interval during which the ball rides on a wall with zero relative velocity.
struct StickingPhase {
    double tau_begin = 0.0;
    double tau_end = 0.0;
    int wall = 0;

    friend bool operator==(const StickingPhase&, const StickingPhase&) = default;
};

enum class SampleKind : std::uint8_t { grid, pre_impact, post_impact };

struct TrajectorySample {
    SimState state;
    SampleKind kind = SampleKind::grid;
};

/// Sampled history of one run. Samples are non-decreasing in tau; the only
/// repeated instants are the pre/post pair recorded at each impact.
struct Trajectory {
    SystemParams params;
    InitialState initial;
    double t_end = 0.0;
    std::vector<TrajectorySample> samples;
    std::vector<ImpactEvent> impacts;
    std::vector<StickingPhase> sticking;
    std::vector<std::string> warnings;

    [[nodiscard]] const SimState& final_state() const { return samples.back().state; }
};

} // namespace vines::core
