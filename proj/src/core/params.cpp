#include "vines/core/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vines::core {

namespace {

void require(bool ok, const char* what) {
    if (!ok) {
        throw std::domain_error(what);
    }
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }
bool finite_non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

} // namespace

void validate(const DimensionalParams& p) {
    require(finite_positive(p.M), "primary mass M must be finite and positive");
    require(finite_positive(p.m), "ball mass m must be finite and positive");
    require(finite_positive(p.k), "stiffness k must be finite and positive");
    require(finite_non_negative(p.c), "damping c must be finite and non-negative");
    require(finite_non_negative(p.k_t), "transduction factor k_t must be finite and non-negative");
    require(std::isfinite(p.R_load) && std::isfinite(p.R_coil) && p.R_load + p.R_coil > 0.0,
            "R_load + R_coil must be positive");
}

void validate(const SystemParams& p) {
    require(finite_positive(p.eps), "eps must be finite and positive");
    require(finite_non_negative(p.lambda), "lambda must be finite and non-negative");
    require(finite_non_negative(p.c_e), "c_e must be finite and non-negative");
    require(std::isfinite(p.kappa) && p.kappa > 0.0 && p.kappa <= 1.0, "kappa must lie in (0, 1]");
    require(finite_positive(p.L_c), "L_c must be finite and positive");
}

double coil_from_relative(double c_relative, double eps) {
    return eps * c_relative / std::pow(1.0 + eps, 1.5);
}

double coil_to_relative(double c_e, double eps) { return c_e * std::pow(1.0 + eps, 1.5) / eps; }

double coil_coefficient(double quoted, double eps, CoilConvention convention) {
    return convention == CoilConvention::relative ? coil_from_relative(quoted, eps) : quoted;
}

Nondimensionalized nondimensionalize(const DimensionalParams& p) {
    validate(p);
    Nondimensionalized out;
    out.eps = p.m / p.M;
    out.omega = std::sqrt(p.k / p.M);
    out.lambda = p.c / (p.M * out.omega * out.eps);
    out.c_e = p.k_t * p.k_t / ((p.R_load + p.R_coil) * p.M * out.omega);
    return out;
}

} // namespace vines::core
