// Energy accounting along a trajectory.
//
// All channels are expressed in the un-halved units of x1^2 + v1^2 + eps*v2^2
// and normalized by the initial value E0 of that quantity. Because
//   d/dtau (x1^2 + v1^2 + eps*v2^2) = -2*eps*lambda*v1^2 - 2*c_e*(v1 - v2)^2,
// the damper and coil channels carry a factor 2 on their integrals; with that
// the four channels sum to one.
#pragma once

#include "vines/core/state.hpp"

#include <vector>

namespace vines::energy {

struct EnergyLedger {
    double E0 = 0.0;
    std::vector<double> tau;
    std::vector<double> e_mech;
    std::vector<double> e_damp;
    std::vector<double> e_coil;
    std::vector<double> e_imp;
    std::vector<double> e_r; ///< e_mech + e_damp + e_coil

    [[nodiscard]] std::size_t size() const { return tau.size(); }
};

/// Throws std::domain_error when the initial energy is zero.
EnergyLedger build_ledger(const core::Trajectory& tr);

/// Values of every channel at one instant.
struct LedgerPoint {
    double e_mech = 0.0;
    double e_damp = 0.0;
    double e_coil = 0.0;
    double e_imp = 0.0;
    double e_r = 0.0;
};

/// Channels at `tau`, linearly interpolated between samples. At an impact
/// instant the post-impact values are returned. Throws std::domain_error when
/// `tau` is outside the ledger.
LedgerPoint ledger_at(const EnergyLedger& ledger, double tau);

/// Relative energy E_r(tau): instantaneous mechanical energy plus what the
/// LO damper and the coil have dissipated, over the initial energy.
double relative_energy(const EnergyLedger& ledger, double tau);

enum class EfficiencyMode {
    dissipation_fraction, ///< share of E0 removed by impacts and the coil
    time_averaged_er,     ///< mean of E_r over [0, horizon]
};

struct EfficiencyReport {
    EfficiencyMode mode = EfficiencyMode::dissipation_fraction;
    double value = 0.0; ///< percent
    double horizon = 0.0;
    double impact_share = 0.0; ///< percent of E0 lost in impacts
    double coil_share = 0.0;   ///< percent of E0 dissipated in the coil circuit
};

EfficiencyReport efficiency(const core::Trajectory& tr, EfficiencyMode mode, double horizon);
EfficiencyReport efficiency(const EnergyLedger& ledger, EfficiencyMode mode, double horizon);

/// Fraction of E0 delivered to the load resistor by the end of the run.
double harvested_energy(const core::Trajectory& tr, double R_load, double R_coil);

} // namespace vines::energy
