// Smooth flow, impact law and coordinate transforms.
#pragma once

#include "vines/core/params.hpp"
#include "vines/core/state.hpp"

namespace vines::core {

struct Derivative {
    double dx1 = 0.0;
    double dv1 = 0.0;
    double dx2 = 0.0;
    double dv2 = 0.0;
    double d_i_damp = 0.0;
    double d_i_coil = 0.0;
};

/// Right-hand side of the coupled equations between impacts (contact force zero).
[[nodiscard]] inline Derivative rhs(const SimState& s, const SystemParams& p) {
    const double rel = s.v1 - s.v2;
    const double coil = p.c_e * rel;
    return {
        s.v1,
        -p.eps * p.lambda * s.v1 - s.x1 - coil,
        s.v2,
        coil / p.eps,
        s.v1 * s.v1,
        rel * rel,
    };
}

struct ImpactOutcome {
    double v1_post = 0.0;
    double v2_post = 0.0;
    double energy_loss = 0.0; ///< drop in (v1^2 + eps*v2^2)
};

/// Momentum-conserving restitution map applied at the cavity walls.
[[nodiscard]] inline ImpactOutcome impact_map(double v1_pre, double v2_pre, const SystemParams& p) {
    const double momentum = v1_pre + p.eps * v2_pre;
    const double rel = v1_pre - v2_pre;
    const double total = 1.0 + p.eps;
    return {
        (momentum - p.eps * p.kappa * rel) / total,
        (momentum + p.kappa * rel) / total,
        p.eps * (1.0 - p.kappa * p.kappa) * rel * rel / total,
    };
}

/// Center-of-mass and relative coordinates.
struct ComCoordinates {
    double X = 0.0;
    double X_dot = 0.0;
    double w = 0.0;
    double w_dot = 0.0;
};

[[nodiscard]] inline ComCoordinates to_com_coordinates(const SimState& s, double eps) {
    return {s.x1 + eps * s.x2, s.v1 + eps * s.v2, s.x1 - s.x2, s.v1 - s.v2};
}

/// Inverse of to_com_coordinates; returns (x1, v1, x2, v2) with tau and the
/// accumulators zeroed.
[[nodiscard]] inline SimState from_com_coordinates(const ComCoordinates& c, double eps) {
    SimState s;
    const double total = 1.0 + eps;
    s.x1 = (c.X + eps * c.w) / total;
    s.x2 = (c.X - c.w) / total;
    s.v1 = (c.X_dot + eps * c.w_dot) / total;
    s.v2 = (c.X_dot - c.w_dot) / total;
    return s;
}

/// x1^2 + v1^2 + eps*v2^2, the un-halved mechanical energy.
[[nodiscard]] inline double mechanical_energy(const SimState& s, double eps) {
    return s.x1 * s.x1 + s.v1 * s.v1 + eps * s.v2 * s.v2;
}

} // namespace vines::core
