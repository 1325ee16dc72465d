// Model parameters for a linear oscillator carrying a vibro-impact energy sink
// with an electromagnetic harvesting coil.
#pragma once

namespace vines::core {

/// Physical (SI) description of the oscillator, ball and harvesting circuit.
struct DimensionalParams {
    double M = 1.0;       ///< primary mass [kg]
    double m = 0.05;      ///< ball mass [kg]
    double c = 0.01;      ///< LO damping [N s/m]
    double k = 1.0;       ///< LO stiffness [N/m]
    double k_t = 1.0;     ///< transduction factor [V s/m]
    double R_load = 10.0; ///< load resistance [Ohm]
    double R_coil = 10.0; ///< coil resistance [Ohm]
};

/// Dimensionless model parameters.
///
/// Between impacts the LO obeys
///   x1'' + eps*lambda*x1' + x1 + c_e*(x1' - x2') = 0
///   eps*x2'' - c_e*(x1' - x2') = 0
/// and impacts occur whenever |x1 - x2| reaches L_c.
struct SystemParams {
    double eps = 0.05;    ///< mass ratio m/M
    double lambda = 0.2;  ///< LO damping factor (enters as eps*lambda)
    double c_e = 0.05;    ///< coil coefficient
    double kappa = 0.54;  ///< restitution coefficient
    double L_c = 0.99;    ///< cavity half-gap
};

/// Result of scaling a DimensionalParams; kappa and L_c are geometric and are
/// supplied separately.
struct Nondimensionalized {
    double eps = 0.0;
    double lambda = 0.0;
    double c_e = 0.0;
    double omega = 0.0; ///< natural frequency sqrt(k/M) [rad/s]; tau = omega * t

    [[nodiscard]] SystemParams with(double kappa, double L_c) const {
        return {eps, lambda, c_e, kappa, L_c};
    }
};

/// How a quoted coil coefficient is to be read.
///
/// `relative` values are coefficients of the relative-coordinate form
/// w'' + ... + c * w' = f_c and map onto the equation-of-motion coefficient as
/// c_e = eps * c / (1 + eps)^{3/2}. `direct` values are used as c_e unchanged.
enum class CoilConvention { relative, direct };

[[nodiscard]] double coil_from_relative(double c_relative, double eps);
[[nodiscard]] double coil_to_relative(double c_e, double eps);
[[nodiscard]] double coil_coefficient(double quoted, double eps, CoilConvention convention);

/// Throws std::domain_error when the invariants of DimensionalParams fail.
void validate(const DimensionalParams& p);
/// Throws std::domain_error when the invariants of SystemParams fail.
void validate(const SystemParams& p);

Nondimensionalized nondimensionalize(const DimensionalParams& p);

} // namespace vines::core
