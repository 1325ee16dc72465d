// Closed-form propagation of the linear flow between impacts, used as an
// independent check of the adaptive integrator.
#pragma once

#include "vines/core/params.hpp"
#include "vines/core/state.hpp"

#include <Eigen/Dense>

namespace vines::validation {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;

/// Generator of the free flight in (x1, v1, x2, v2).
Mat4 flow_matrix(const core::SystemParams& p);

/// exp(A * dt) applied to y.
Vec4 propagate(const core::SystemParams& p, const Vec4& y, double dt);

struct FlowDeviation {
    double max_error = 0.0; ///< largest state difference over compared samples
    std::size_t compared = 0;
    double worst_tau = 0.0;
};

/// Restarts the closed-form solution from every recorded post-impact state
/// and compares it with each later sample up to the next impact. Samples
/// whose interval since the restart overlaps a sticking phase are skipped.
FlowDeviation compare_with_exact_flow(const core::Trajectory& tr);

} // namespace vines::validation
