#include "vines/validation/exact_flow.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace vines::validation {

namespace {

Vec4 as_vec(const core::SimState& s) { return {s.x1, s.v1, s.x2, s.v2}; }

bool overlaps_sticking(const core::Trajectory& tr, double from, double to) {
    return std::any_of(tr.sticking.begin(), tr.sticking.end(),
                       [=](const core::StickingPhase& ph) { return ph.tau_begin <= to && ph.tau_end >= from; });
}

} // namespace

Mat4 flow_matrix(const core::SystemParams& p) {
    Mat4 a = Mat4::Zero();
    a(0, 1) = 1.0;
    a(1, 0) = -1.0;
    a(1, 1) = -p.eps * p.lambda - p.c_e;
    a(1, 3) = p.c_e;
    a(2, 3) = 1.0;
    a(3, 1) = p.c_e / p.eps;
    a(3, 3) = -p.c_e / p.eps;
    return a;
}

Vec4 propagate(const core::SystemParams& p, const Vec4& y, double dt) {
    const Mat4 step = (flow_matrix(p) * dt).exp();
    return step * y;
}

FlowDeviation compare_with_exact_flow(const core::Trajectory& tr) {
    FlowDeviation out;
    if (tr.samples.empty()) {
        return out;
    }
    const Mat4 a = flow_matrix(tr.params);
    const core::SimState* origin = &tr.samples.front().state;
    for (const auto& sample : tr.samples) {
        const auto& s = sample.state;
        if (sample.kind == core::SampleKind::post_impact) {
            origin = &s;
            continue;
        }
        if (overlaps_sticking(tr, origin->tau, s.tau)) {
            continue;
        }
        const Vec4 exact = (a * (s.tau - origin->tau)).exp() * as_vec(*origin);
        const double err = (exact - as_vec(s)).cwiseAbs().maxCoeff();
        ++out.compared;
        if (err > out.max_error) {
            out.max_error = err;
            out.worst_tau = s.tau;
        }
    }
    return out;
}

} // namespace vines::validation
