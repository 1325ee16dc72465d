// Design and aleatory uncertainty: what a Monte Carlo sample is made of.
#pragma once

#include "vines/core/params.hpp"
#include "vines/core/state.hpp"

#include <array>
#include <cstdint>

namespace vines::stochastic {

/// Means of the random design variables. mu_ce is quoted in the convention
/// selected by UncertaintyModel::coil.
struct DesignPoint {
    double mu_kappa = 0.39;
    double mu_Lc = 0.68;
    double mu_ce = 0.013;

    friend bool operator==(const DesignPoint&, const DesignPoint&) = default;
};

/// Distribution of the LO initial velocity: uniform on [lo, hi], or a point
/// mass at lo when `point` is set.
struct AleatoryModel {
    double lo = 0.1;
    double hi = 1.0;
    bool point = false;

    static AleatoryModel uniform(double lo, double hi) { return {lo, hi, false}; }
    static AleatoryModel at(double v) { return {v, v, true}; }
};

struct UncertaintyModel {
    /// Normal standard deviations of kappa, L_c and c_e around their means.
    std::array<double, 3> design_sd{2.97e-3, 2.97e-3, 2.97e-3};
    AleatoryModel v1 = AleatoryModel::uniform(0.1, 1.0);
    double eps = 0.05;
    double lambda = 0.2;
    double x1_0 = 0.0;
    double x2_0 = 0.97;
    double v2_0 = 0.0;
    core::CoilConvention coil = core::CoilConvention::relative;
    /// Sampled design variables are clamped into [clamp_lo, clamp_hi].
    double clamp_lo = 0.001;
    double clamp_hi = 1.0;

    /// True when every sample is the same (all SDs zero and a point aleatory).
    [[nodiscard]] bool degenerate() const {
        return v1.point && design_sd[0] == 0.0 && design_sd[1] == 0.0 && design_sd[2] == 0.0;
    }
};

/// Throws std::domain_error on invalid models.
void validate(const UncertaintyModel& u);

struct SampledInputs {
    core::SystemParams params;
    core::InitialState init;
    double kappa = 0.0; ///< drawn values before any coil conversion
    double L_c = 0.0;
    double c_e = 0.0;
    double v1_0 = 0.0;
};

enum class Variable : std::uint64_t { kappa = 0, L_c = 1, c_e = 2, v1_0 = 3 };

/// Seed of the substream for one (sample, variable) pair.
std::uint64_t stream_seed(std::uint64_t root_seed, std::uint64_t sample_index, Variable var);

/// Draws sample `sample_index`. The draw is a pure function of
/// (root_seed, sample_index): the aleatory value does not depend on the design.
SampledInputs sample_inputs(const DesignPoint& d, const UncertaintyModel& u, std::uint64_t sample_index,
                            std::uint64_t root_seed);

} // namespace vines::stochastic
