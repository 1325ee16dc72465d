#include "vines/scenarios/acceptance.hpp"

#include "vines/core/simulator.hpp"
#include "vines/energy/cycles.hpp"
#include "vines/energy/ledger.hpp"
#include "vines/optimizer/fitness.hpp"
#include "vines/scenarios/commands.hpp"
#include "vines/stochastic/monte_carlo.hpp"
#include "vines/validation/exact_flow.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iterator>
#include <numbers>
#include <optional>
#include <random>

namespace vines::scenarios {

namespace fs = std::filesystem;

namespace {

const std::array<const char*, kCriteriaCount> kNames{
    "impact_map_exactness",  "ledger_closure",       "conservative_drift",     "closed_form_event",
    "exact_flow_oracle",     "relative_energy_identity", "reference_confidence_intervals", "two_impacts_per_cycle",
    "coil_monotonicity",     "stochastic_dominance", "joint_vs_cavity_only",   "optimizer_sanity",
    "determinism",
};

struct Outcome {
    bool passed = false;
    std::string detail;
};

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Random model with a moderately damped LO and an initial state inside the cavity.
struct RandomCase {
    core::SystemParams p;
    core::InitialState init;
};

RandomCase random_case(std::mt19937_64& rng, bool rest_start) {
    RandomCase c;
    c.p.eps = uniform(rng, 0.01, 0.3);
    c.p.lambda = uniform(rng, 0.0, 0.5);
    c.p.c_e = uniform(rng, 0.0, 0.1);
    c.p.kappa = uniform(rng, 0.2, 1.0);
    c.p.L_c = uniform(rng, 0.1, 1.5);
    if (rest_start) {
        c.init = {0.0, uniform(rng, 0.2, 1.0), uniform(rng, -0.9, 0.9) * c.p.L_c, 0.0};
    } else {
        const double x1 = uniform(rng, -0.5, 0.5);
        c.init = {x1, uniform(rng, -1.0, 1.0), x1 + uniform(rng, -0.9, 0.9) * c.p.L_c, uniform(rng, -0.5, 0.5)};
    }
    return c;
}

// Default design-level model: eps 0.05, lambda 0.2, ball starting at 0.97.
stochastic::UncertaintyModel reference_model() { return {}; }

const stochastic::DesignPoint kReferenceStochastic{0.39, 0.68, 0.013};
const std::array<stochastic::DesignPoint, 3> kReferenceDeterministic{{{0.54, 0.27, 0.06}, {0.43, 0.98, 0.013}, {0.25, 1.0, 0.011}}};

class Runner {
public:
    explicit Runner(const AcceptanceOptions& opts) : opts_(opts) {}

    Outcome run(int id) {
        switch (id) {
        case 1:
            return impact_map_exactness();
        case 2:
            return ledger_closure();
        case 3:
            return conservative_drift();
        case 4:
            return closed_form_event();
        case 5:
            return exact_flow_oracle();
        case 6:
            return relative_energy_identity();
        case 7:
            return confidence_intervals();
        case 8:
            return two_impacts_per_cycle();
        case 9:
            return coil_monotonicity();
        case 10:
            return stochastic_dominance();
        case 11:
            return joint_vs_cavity_only();
        case 12:
            return optimizer_sanity();
        default:
            return determinism();
        }
    }

private:
    [[nodiscard]] std::size_t pick(std::size_t full, std::size_t quick) const { return opts_.quick ? quick : full; }

    std::mt19937_64 rng(std::uint64_t stream) const { return std::mt19937_64(opts_.seed * 0x9E3779B97F4A7C15ULL + stream); }

    Outcome impact_map_exactness() {
        const ImpactMapFn map = opts_.impact_map ? opts_.impact_map : ImpactMapFn(core::impact_map);
        auto gen = rng(1);
        const std::size_t draws = pick(100000, 2000);
        double momentum = 0.0;
        double restitution = 0.0;
        double loss = 0.0;
        const auto start = std::chrono::steady_clock::now();
        for (std::size_t i = 0; i < draws; ++i) {
            core::SystemParams p;
            p.eps = uniform(gen, 0.001, 1.0);
            p.kappa = uniform(gen, 0.001, 1.0);
            const double v1 = uniform(gen, -2.0, 2.0);
            const double v2 = uniform(gen, -2.0, 2.0);
            const auto o = map(v1, v2, p);
            const double r = v1 - v2;
            momentum = std::max(momentum, std::abs((o.v1_post + p.eps * o.v2_post) - (v1 + p.eps * v2)));
            restitution = std::max(restitution, std::abs((o.v1_post - o.v2_post) + p.kappa * r));
            const double closed = p.eps * (1.0 - p.kappa * p.kappa) * r * r / (1.0 + p.eps);
            const double drop = (v1 * v1 + p.eps * v2 * v2) - (o.v1_post * o.v1_post + p.eps * o.v2_post * o.v2_post);
            loss = std::max({loss, std::abs(o.energy_loss - closed), std::abs(drop - closed)});
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool ok = momentum < 1e-12 && restitution < 1e-12 && loss < 1e-12 && secs < 1.0;
        return {ok, fmt::format("{} draws: momentum {:.3g}, restitution {:.3g}, loss {:.3g} (limit 1e-12){}", draws,
                                momentum, restitution, loss, secs < 1.0 ? "" : ", slower than 1 s")};
    }

    Outcome ledger_closure() {
        auto gen = rng(2);
        const std::size_t sets = pick(100, 5);
        const double horizon = opts_.quick ? 20.0 : 100.0;
        double worst = 0.0;
        std::size_t samples = 0;
        const auto start = std::chrono::steady_clock::now();
        for (std::size_t k = 0; k < sets; ++k) {
            const auto c = random_case(gen, false);
            const auto ledger = energy::build_ledger(core::simulate(c.p, c.init, horizon));
            for (std::size_t i = 0; i < ledger.size(); ++i) {
                worst = std::max(worst, std::abs(ledger.e_mech[i] + ledger.e_damp[i] + ledger.e_coil[i] + ledger.e_imp[i] - 1.0));
            }
            samples += ledger.size();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool ok = worst < 1e-8 && secs < 60.0;
        return {ok, fmt::format("{} parameter sets, {} samples over [0, {}]: max closure error {:.3g} (limit 1e-8){}", sets,
                                samples, horizon, worst, secs < 60.0 ? "" : ", slower than 1 min")};
    }

    Outcome conservative_drift() {
        const core::SystemParams p{0.05, 0.0, 0.0, 1.0, 0.25};
        const auto tr = core::simulate(p, {0.0, 0.5, 0.0, 0.0}, 100.0);
        const double e0 = 0.25;
        double drift = 0.0;
        for (const auto& s : tr.samples) {
            drift = std::max(drift, std::abs(core::mechanical_energy(s.state, p.eps) - e0) / e0);
        }
        return {drift < 1e-8 && !tr.impacts.empty(),
                fmt::format("{} impacts over [0, 100]: max relative drift {:.3g} (limit 1e-8)", tr.impacts.size(), drift)};
    }

    Outcome closed_form_event() {
        const core::SystemParams p{0.05, 0.0, 0.0, 0.54, 0.25};
        const auto tr = core::simulate(p, {0.0, 0.5, 0.0, 0.0}, 1.0);
        if (tr.impacts.empty()) {
            return {false, "no impact before tau = 1"};
        }
        const auto& e = tr.impacts.front();
        // Ball at rest until the LO, moving as 0.5 sin(tau), reaches the wall.
        const double tau_star = std::asin(0.5);
        const double v_star = 0.5 * std::cos(tau_star);
        const double e_imp_star = p.eps * (1.0 - p.kappa * p.kappa) * v_star * v_star / ((1.0 + p.eps) * 0.25);
        const auto ledger = energy::build_ledger(tr);
        const double e_imp = energy::ledger_at(ledger, e.tau).e_imp;
        const bool ok = std::abs(e.tau - tau_star) < 1e-6 && std::abs(e.v1_pre - v_star) < 1e-6 &&
                        std::abs(e_imp - 0.025300) < 1e-5 && std::abs(e_imp - e_imp_star) < 1e-9;
        return {ok, fmt::format("tau {:.10f} (pi/6 {:.10f}), v1_pre {:.10f} (0.4330127), e_imp {:.7f} (0.025300)", e.tau,
                                tau_star, e.v1_pre, e_imp)};
    }

    Outcome exact_flow_oracle() {
        auto gen = rng(5);
        const std::size_t sets = pick(20, 3);
        double worst = 0.0;
        std::size_t compared = 0;
        std::size_t impacts = 0;
        for (std::size_t k = 0; k < sets; ++k) {
            const auto c = random_case(gen, false);
            const auto tr = core::simulate(c.p, c.init, 30.0);
            const auto dev = validation::compare_with_exact_flow(tr);
            worst = std::max(worst, dev.max_error);
            compared += dev.compared;
            impacts += tr.impacts.size();
        }
        return {worst < 1e-7 && compared > 0,
                fmt::format("{} parameter sets, {} impacts, {} samples: max state error {:.3g} (limit 1e-7)", sets, impacts,
                            compared, worst)};
    }

    Outcome relative_energy_identity() {
        auto gen = rng(6);
        const std::size_t sets = pick(20, 5);
        double worst = 0.0;
        for (std::size_t k = 0; k < sets; ++k) {
            const auto c = random_case(gen, true);
            const auto ledger = energy::build_ledger(core::simulate(c.p, c.init, 30.0));
            for (std::size_t i = 0; i < ledger.size(); ++i) {
                worst = std::max(worst, std::abs(ledger.e_r[i] - (1.0 - ledger.e_imp[i])));
            }
        }
        return {worst < 1e-6, fmt::format("{} trajectories: max |E_r - (1 - e_imp)| {:.3g} (limit 1e-6)", sets, worst)};
    }

    Outcome confidence_intervals() {
        struct Row {
            double mean, sigma, lo, hi, tol;
        };
        // Deterministic columns to two decimals (last bound within 0.01), stochastic column within 0.05.
        const std::array<Row, 4> rows{{{59.66, 11.22, 58.96, 60.36, 0.005},
                                       {69.74, 15.59, 68.77, 70.71, 0.005},
                                       {64.56, 16.17, 63.56, 65.57, 0.01},
                                       {71.04, 9.28, 70.43, 71.64, 0.05}}};
        bool ok = true;
        std::string detail;
        for (const auto& r : rows) {
            const double half = stochastic::ci95_half_width(r.sigma, 1000);
            const double lo = r.mean - half;
            const double hi = r.mean + half;
            ok = ok && std::abs(lo - r.lo) <= r.tol + 1e-12 && std::abs(hi - r.hi) <= r.tol + 1e-12;
            detail += fmt::format("{}({:.2f}, {:.2f}) -> ({:.4f}, {:.4f})", detail.empty() ? "" : "; ", r.mean, r.sigma, lo, hi);
        }
        return {ok, detail};
    }

    Outcome two_impacts_per_cycle() {
        core::SystemParams p{0.05, 0.2, core::coil_from_relative(0.05, 0.05), 0.54, 0.99};
        const auto tr = core::simulate(p, {0.0, 0.5, 0.97, 0.0}, 60.0);
        const auto cycles = energy::impacts_per_cycle(tr);
        std::size_t early_two = 0;
        std::string counts;
        for (std::size_t i = 0; i < cycles.size(); ++i) {
            counts += fmt::format("{}{}", i ? " " : "", cycles[i].impacts);
            if (i < 5 && cycles[i].impacts == 2) {
                ++early_two;
            }
        }
        const bool departs = std::any_of(cycles.begin() + std::min<std::ptrdiff_t>(5, std::ssize(cycles)), cycles.end(),
                                         [](const auto& c) { return c.impacts != 2; });
        const bool ok = cycles.size() > 5 && early_two >= 4 && departs;
        return {ok, fmt::format("impacts per cycle up to tau 60: [{}]; {} of the first 5 cycles have 2", counts, early_two)};
    }

    Outcome coil_monotonicity() {
        auto u = reference_model();
        u.design_sd = {0.0, 0.0, 0.0};
        stochastic::McOptions mc;
        mc.n = pick(200, 20);
        mc.root_seed = opts_.seed;
        mc.threads = opts_.threads;
        const std::array<double, 4> coils{0.05, 0.3, 0.6, 1.0};
        std::vector<double> means;
        const auto start = std::chrono::steady_clock::now();
        for (const double c : coils) {
            means.push_back(stochastic::mc_estimate({0.6, 1.0, c}, u, mc).mean);
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool ok = secs < 120.0;
        for (std::size_t i = 1; i < means.size(); ++i) {
            ok = ok && means[i] < means[i - 1];
        }
        return {ok, fmt::format("kappa 0.6, L_c 1, {} samples: mean efficiency {:.4f} / {:.4f} / {:.4f} / {:.4f} % at c_e "
                                "0.05 / 0.3 / 0.6 / 1{}",
                                mc.n, means[0], means[1], means[2], means[3], secs < 120.0 ? "" : ", slower than 2 min")};
    }

    optimizer::GaConfig ga_budget() const {
        optimizer::GaConfig cfg;
        cfg.root_seed = opts_.seed;
        cfg.threads = opts_.threads;
        if (opts_.quick) {
            cfg.population = 8;
            cfg.generations = 3;
            cfg.mc_samples = 10;
        }
        return cfg;
    }

    stochastic::McOptions final_budget() const {
        stochastic::McOptions mc;
        mc.n = pick(1000, 20);
        mc.root_seed = opts_.seed;
        mc.threads = opts_.threads;
        return mc;
    }

    const optimizer::DesignOptimum& joint_optimum() {
        if (!joint_) {
            joint_ = optimizer::optimize_design(optimizer::DesignSpace{}, reference_model(), ga_budget(), final_budget());
        }
        return *joint_;
    }

    Outcome stochastic_dominance() {
        const auto start = std::chrono::steady_clock::now();
        const auto& best = joint_optimum();
        const auto mc = final_budget();
        std::vector<stochastic::McEstimate> det;
        for (const auto& d : kReferenceDeterministic) {
            det.push_back(stochastic::mc_estimate(d, reference_model(), mc));
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool ok = best.estimate.sigma < det[2].sigma && secs < 1800.0;
        for (const auto& e : det) {
            ok = ok && best.estimate.mean >= e.mean;
        }
        return {ok, fmt::format("GA optimum (kappa {:.4f}, L_c {:.4f}, c_e {:.4f}): mean {:.4f}, sigma {:.4f}; reference "
                                "deterministic designs: {:.4f}/{:.4f}, {:.4f}/{:.4f}, {:.4f}/{:.4f} (n {}){}",
                                best.design.mu_kappa, best.design.mu_Lc, best.design.mu_ce, best.estimate.mean,
                                best.estimate.sigma, det[0].mean, det[0].sigma, det[1].mean, det[1].sigma, det[2].mean,
                                det[2].sigma, mc.n, secs < 1800.0 ? "" : ", slower than 30 min")};
    }

    Outcome joint_vs_cavity_only() {
        const auto& joint = joint_optimum();
        optimizer::DesignSpace cavity;
        cavity.fixed[0] = kReferenceStochastic.mu_kappa;
        cavity.fixed[2] = kReferenceStochastic.mu_ce;
        const auto single = optimizer::optimize_design(cavity, reference_model(), ga_budget(), final_budget());
        const double margin = joint.estimate.mean - single.estimate.mean;
        return {margin >= 0.0,
                fmt::format("joint optimum {:.4f} % vs cavity-only optimum {:.4f} % (L_c {:.4f}); margin {:.4f}",
                            joint.estimate.mean, single.estimate.mean, single.design.mu_Lc, margin)};
    }

    Outcome optimizer_sanity() {
        optimizer::GaConfig cfg;
        cfg.root_seed = opts_.seed;
        cfg.generations = 60;
        const std::array<optimizer::Interval, 1> unit{{{0.0, 1.0}}};
        const auto one = optimizer::ga_optimize(
            optimizer::pointwise([](const optimizer::Genome& g) { return -(g[0] - 0.5) * (g[0] - 0.5); }), unit, cfg);

        cfg.generations = 40;
        const std::array<optimizer::Interval, 3> cube{{{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}};
        const auto sphere = optimizer::ga_optimize(optimizer::pointwise([](const optimizer::Genome& g) {
                                                       double s = 0.0;
                                                       for (const double x : g) {
                                                           s -= (x - 0.3) * (x - 0.3);
                                                       }
                                                       return s;
                                                   }),
                                                   cube, cfg);
        double sphere_err = 0.0;
        for (const double x : sphere.best) {
            sphere_err = std::max(sphere_err, std::abs(x - 0.3));
        }

        // Raising the mean raises the spread one for one: a genuine trade-off.
        const auto front = optimizer::nsga2_optimize(
            [](std::span<const optimizer::Genome> gs, std::uint64_t) {
                std::vector<optimizer::Objectives> o;
                for (const auto& g : gs) {
                    o.push_back({g[0], g[0]});
                }
                return o;
            },
            unit, cfg);
        bool mutual = true;
        double lo = 1.0;
        double hi = 0.0;
        for (const auto& a : front.front) {
            lo = std::min(lo, a.genome[0]);
            hi = std::max(hi, a.genome[0]);
            for (const auto& b : front.front) {
                mutual = mutual && !optimizer::dominates(a.objectives, b.objectives);
            }
        }
        const bool ok = std::abs(one.best[0] - 0.5) <= 0.01 && sphere_err <= 0.02 && mutual && lo <= 0.01 && hi >= 0.99;
        return {ok, fmt::format("1-D optimum {:.5f} (0.5 +- 0.01); sphere max error {:.5f} (0.02); Pareto front of {} points, "
                                "{}mutually non-dominated, spanning [{:.4f}, {:.4f}]",
                                one.best[0], sphere_err, front.front.size(), mutual ? "" : "not ", lo, hi)};
    }

    Outcome determinism() {
        std::random_device rd;
        const fs::path root = fs::temp_directory_path() / fmt::format("vines-determinism-{:016x}", std::uint64_t{rd()} << 32 | rd());
        RunConfig cfg;
        cfg.seed = opts_.seed;
        cfg.validate.budget = "quick";
        for (int id = 1; id < kCriteriaCount; ++id) {
            cfg.validate.checks.push_back(id);
        }
        Hooks hooks;
        hooks.impact_map = opts_.impact_map;

        cfg.threads = 1;
        cmd_validate(cfg, root / "a", hooks);
        RunConfig again = load_config(root / "a" / "manifest.json");
        again.threads = 1;
        cmd_validate(again, root / "b", hooks);
        again.threads = std::max(2U, opts_.alternate_threads);
        cmd_validate(again, root / "c", hooks);

        const auto read = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            return std::string(std::istreambuf_iterator<char>(in), {});
        };
        std::size_t files = 0;
        std::vector<std::string> differing;
        for (const auto& entry : fs::directory_iterator(root / "a")) {
            const auto name = entry.path().filename();
            if (name == "timing.json") {
                continue;
            }
            ++files;
            const auto ref = read(entry.path());
            for (const char* other : {"b", "c"}) {
                if (!fs::exists(root / other / name) || read(root / other / name) != ref) {
                    differing.push_back(fmt::format("{}/{}", other, name.string()));
                }
            }
        }
        std::error_code ec;
        fs::remove_all(root, ec);
        const bool ok = files >= 3 && differing.empty();
        return {ok, fmt::format("validate bundle rerun from its manifest with 1, 1 and {} threads: {} files compared, {} differ{}",
                                std::max(2U, opts_.alternate_threads), files, differing.size(),
                                differing.empty() ? "" : fmt::format(" ({})", fmt::join(differing, ", ")))};
    }

    AcceptanceOptions opts_;
    std::optional<optimizer::DesignOptimum> joint_;
};

} // namespace

std::string criterion_name(int id) {
    if (id < 1 || id > kCriteriaCount) {
        throw std::out_of_range("criterion id");
    }
    return kNames[static_cast<std::size_t>(id - 1)];
}

std::vector<CheckResult> run_acceptance(const AcceptanceOptions& opts,
                                        const std::function<void(const CheckResult&)>& progress) {
    std::vector<int> ids = opts.checks;
    if (ids.empty()) {
        for (int id = 1; id <= kCriteriaCount; ++id) {
            ids.push_back(id);
        }
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    Runner runner(opts);
    std::vector<CheckResult> results;
    for (const int id : ids) {
        CheckResult r;
        r.id = id;
        r.name = criterion_name(id);
        const auto start = std::chrono::steady_clock::now();
        try {
            const auto o = runner.run(id);
            r.passed = o.passed;
            r.detail = o.detail;
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = fmt::format("error: {}", e.what());
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (progress) {
            progress(r);
        }
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace vines::scenarios
