#include "vines/energy/ledger.hpp"

#include "vines/core/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vines::energy {

EnergyLedger build_ledger(const core::Trajectory& tr) {
    if (tr.samples.empty()) {
        throw std::domain_error("trajectory has no samples");
    }
    const auto& p = tr.params;
    const double E0 = core::mechanical_energy(tr.samples.front().state, p.eps);
    if (!(E0 > 0.0)) {
        throw std::domain_error("initial energy is zero");
    }

    EnergyLedger ledger;
    ledger.E0 = E0;
    const std::size_t n = tr.samples.size();
    for (auto* v : {&ledger.tau, &ledger.e_mech, &ledger.e_damp, &ledger.e_coil, &ledger.e_imp, &ledger.e_r}) {
        v->reserve(n);
    }
    for (const auto& sample : tr.samples) {
        const auto& s = sample.state;
        const double mech = core::mechanical_energy(s, p.eps) / E0;
        const double damp = 2.0 * p.eps * p.lambda * s.i_damp / E0;
        const double coil = 2.0 * p.c_e * s.i_coil / E0;
        ledger.tau.push_back(s.tau);
        ledger.e_mech.push_back(mech);
        ledger.e_damp.push_back(damp);
        ledger.e_coil.push_back(coil);
        ledger.e_imp.push_back(s.e_imp / E0);
        ledger.e_r.push_back(mech + damp + coil);
    }
    return ledger;
}

LedgerPoint ledger_at(const EnergyLedger& ledger, double tau) {
    if (ledger.size() == 0 || !(tau >= ledger.tau.front()) || !(tau <= ledger.tau.back())) {
        throw std::domain_error("tau outside the ledger horizon");
    }
    // First sample strictly after tau; the one before it is the last sample at or before tau.
    const auto it = std::upper_bound(ledger.tau.begin(), ledger.tau.end(), tau);
    const std::size_t hi = static_cast<std::size_t>(it - ledger.tau.begin());
    const std::size_t lo = hi - 1;
    const auto point = [&ledger](std::size_t i) {
        return LedgerPoint{ledger.e_mech[i], ledger.e_damp[i], ledger.e_coil[i], ledger.e_imp[i], ledger.e_r[i]};
    };
    if (hi == ledger.size() || ledger.tau[lo] == tau) {
        return point(lo);
    }
    const double f = (tau - ledger.tau[lo]) / (ledger.tau[hi] - ledger.tau[lo]);
    const auto lerp = [f](double a, double b) { return a + f * (b - a); };
    const LedgerPoint a = point(lo);
    const LedgerPoint b = point(hi);
    return {lerp(a.e_mech, b.e_mech), lerp(a.e_damp, b.e_damp), lerp(a.e_coil, b.e_coil),
            lerp(a.e_imp, b.e_imp), lerp(a.e_r, b.e_r)};
}

double relative_energy(const EnergyLedger& ledger, double tau) { return ledger_at(ledger, tau).e_r; }

EfficiencyReport efficiency(const EnergyLedger& ledger, EfficiencyMode mode, double horizon) {
    if (!(horizon > 0.0)) {
        throw std::domain_error("efficiency horizon must be positive");
    }
    const LedgerPoint end = ledger_at(ledger, horizon);
    EfficiencyReport report;
    report.mode = mode;
    report.horizon = horizon;
    report.impact_share = 100.0 * end.e_imp;
    report.coil_share = 100.0 * end.e_coil;
    if (mode == EfficiencyMode::dissipation_fraction) {
        report.value = report.impact_share + report.coil_share;
        return report;
    }

    double area = 0.0;
    double prev_tau = ledger.tau.front();
    double prev_er = ledger.e_r.front();
    for (std::size_t i = 1; i < ledger.size() && ledger.tau[i] <= horizon; ++i) {
        area += 0.5 * (ledger.e_r[i] + prev_er) * (ledger.tau[i] - prev_tau);
        prev_tau = ledger.tau[i];
        prev_er = ledger.e_r[i];
    }
    area += 0.5 * (end.e_r + prev_er) * (horizon - prev_tau);
    report.value = 100.0 * area / horizon;
    return report;
}

EfficiencyReport efficiency(const core::Trajectory& tr, EfficiencyMode mode, double horizon) {
    if (horizon > tr.t_end) {
        throw std::domain_error("efficiency horizon exceeds the trajectory");
    }
    return efficiency(build_ledger(tr), mode, horizon);
}

double harvested_energy(const core::Trajectory& tr, double R_load, double R_coil) {
    if (R_load < 0.0 || R_coil < 0.0 || !(R_load + R_coil > 0.0)) {
        throw std::domain_error("resistances must be non-negative with a positive sum");
    }
    const auto& p = tr.params;
    const double E0 = core::mechanical_energy(tr.samples.front().state, p.eps);
    if (!(E0 > 0.0)) {
        throw std::domain_error("initial energy is zero");
    }
    const double coil = 2.0 * p.c_e * tr.final_state().i_coil / E0;
    return coil * R_load / (R_load + R_coil);
}

} // namespace vines::energy
