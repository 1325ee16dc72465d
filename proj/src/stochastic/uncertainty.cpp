#include "vines/stochastic/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace vines::stochastic {

namespace {

std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double draw_normal(double mean, double sd, std::uint64_t seed) {
    if (sd == 0.0) {
        return mean;
    }
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(mean, sd);
    return dist(gen);
}

} // namespace

void validate(const UncertaintyModel& u) {
    for (const double sd : u.design_sd) {
        if (!(sd >= 0.0) || !std::isfinite(sd)) {
            throw std::domain_error("design standard deviations must be finite and non-negative");
        }
    }
    if (u.v1.point ? !std::isfinite(u.v1.lo) : !(u.v1.lo < u.v1.hi)) {
        throw std::domain_error("aleatory bounds must satisfy lo < hi");
    }
    if (!(u.clamp_lo > 0.0) || !(u.clamp_lo < u.clamp_hi) || u.clamp_hi > 1.0) {
        throw std::domain_error("design clamp must satisfy 0 < lo < hi <= 1");
    }
    core::validate(core::SystemParams{u.eps, u.lambda, 0.0, 1.0, 1.0});
}

std::uint64_t stream_seed(std::uint64_t root_seed, std::uint64_t sample_index, Variable var) {
    return mix(mix(mix(root_seed) ^ sample_index) ^ static_cast<std::uint64_t>(var));
}

SampledInputs sample_inputs(const DesignPoint& d, const UncertaintyModel& u, std::uint64_t sample_index,
                            std::uint64_t root_seed) {
    const auto clamp = [&u](double v) { return std::clamp(v, u.clamp_lo, u.clamp_hi); };
    SampledInputs s;
    s.kappa = clamp(draw_normal(d.mu_kappa, u.design_sd[0], stream_seed(root_seed, sample_index, Variable::kappa)));
    s.L_c = clamp(draw_normal(d.mu_Lc, u.design_sd[1], stream_seed(root_seed, sample_index, Variable::L_c)));
    s.c_e = clamp(draw_normal(d.mu_ce, u.design_sd[2], stream_seed(root_seed, sample_index, Variable::c_e)));
    if (u.v1.point) {
        s.v1_0 = u.v1.lo;
    } else {
        std::mt19937_64 gen(stream_seed(root_seed, sample_index, Variable::v1_0));
        std::uniform_real_distribution<double> dist(u.v1.lo, u.v1.hi);
        s.v1_0 = dist(gen);
    }
    s.params = {u.eps, u.lambda, core::coil_coefficient(s.c_e, u.eps, u.coil), s.kappa, s.L_c};
    s.init = {u.x1_0, s.v1_0, u.x2_0, u.v2_0};
    return s;
}

} // namespace vines::stochastic
