// Event-driven integration of the vibro-impact model.
//
// The smooth flow is advanced by an adaptive Dormand-Prince 5(4) scheme with
// dense output. Wall contacts are bracketed on the dense interpolant of the
// gap function g = |x1 - x2| - L_c and refined with a TOMS 748 root solve.
// Contacts whose relative velocity falls below graze_eps, or bursts of more
// than max_rapid_impacts impacts closer than rapid_impact_dt, switch the ball
// into a sticking phase: it rides on the wall with the LO as one mass until
// the contact force would have to pull.
#pragma once

#include "vines/core/params.hpp"
#include "vines/core/state.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace vines::core {

struct SimOptions {
    double rel_tol = 1e-11;
    double abs_tol = 1e-12;
    double gap_tol = 1e-10;         ///< |g| bound at a located contact
    double time_tol = 1e-10;        ///< contact time resolution
    double graze_eps = 1e-9;        ///< relative speed below which contact sticks
    std::size_t max_impacts = 1000000;
    double rapid_impact_dt = 1e-9;
    std::size_t max_rapid_impacts = 100;
    double sample_dt = 0.01;        ///< output grid spacing; 0 records only impacts and the end point
    double max_step = 0.25;         ///< cap on integrator steps, keeps the gap search unimodal per sub-interval
};

/// Raised when the integrator cannot make progress or cannot localize a contact.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, SimState at)
        : std::runtime_error(what), state_(at) {}
    [[nodiscard]] const SimState& state() const { return state_; }

private:
    SimState state_;
};

/// Raised when the impact count exceeds SimOptions::max_impacts.
class ZenoError : public std::runtime_error {
public:
    ZenoError(const std::string& what, SimState at, std::size_t impacts)
        : std::runtime_error(what), state_(at), impacts_(impacts) {}
    [[nodiscard]] const SimState& state() const { return state_; }
    [[nodiscard]] std::size_t impacts() const { return impacts_; }

private:
    SimState state_;
    std::size_t impacts_;
};

struct StepResult {
    SimState state;                   ///< state at the contact (pre-impact) or at tau + dt_max
    std::optional<ImpactEvent> event; ///< contact with the impact map already evaluated
};

/// Advances the free flight from `s` by at most `dt_max`, stopping at the
/// first wall contact. `s` must lie strictly inside the cavity or on a wall
/// it is leaving.
StepResult step_to_event(const SimState& s, const SystemParams& p, double dt_max,
                         const SimOptions& opts = {});

/// Integrates from `init` over [0, t_end]. An initial ball position outside the
/// cavity is projected onto the nearest wall (recorded in Trajectory::warnings).
Trajectory simulate(const SystemParams& p, const InitialState& init, double t_end,
                    const SimOptions& opts = {});

} // namespace vines::core
