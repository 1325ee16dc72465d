#include "vines/scenarios/commands.hpp"

#include "vines/core/dynamics.hpp"
#include "vines/energy/cycles.hpp"
#include "vines/energy/ledger.hpp"
#include "vines/energy/spectral.hpp"
#include "vines/scenarios/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace vines::scenarios {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json state_json(const core::SimState& s) {
    return {{"tau", s.tau}, {"x1", s.x1}, {"v1", s.v1}, {"x2", s.x2}, {"v2", s.v2},
            {"i_damp", s.i_damp}, {"i_coil", s.i_coil}, {"e_imp", s.e_imp}};
}

json system_json(const core::SystemParams& p) {
    return {{"eps", p.eps}, {"lambda", p.lambda}, {"c_e", p.c_e}, {"kappa", p.kappa}, {"L_c", p.L_c}};
}

json design_json(const stochastic::DesignPoint& d) {
    return {{"kappa", d.mu_kappa}, {"L_c", d.mu_Lc}, {"c_e", d.mu_ce}};
}

json estimate_json(const stochastic::McEstimate& e) {
    return {{"mean", e.mean},  {"sigma", e.sigma},       {"ci95", {e.ci_lo, e.ci_hi}}, {"n", e.n},
            {"failures", e.failures}, {"simulations", e.simulations}, {"seed", e.seed}};
}

json budget_json(const optimizer::Budget& b) {
    return {{"evaluations", b.evaluations}, {"cache_hits", b.cache_hits}, {"simulations", b.simulations}};
}

json log_json(const std::vector<optimizer::FitnessLogEntry>& log) {
    json out = json::array();
    for (const auto& e : log) {
        out.push_back({{"design", design_json(e.design)}, {"seed", e.seed}, {"message", e.message}});
    }
    return out;
}

json manifest(std::string_view command, const RunConfig& cfg) {
    json config = to_json(cfg);
    // Results do not depend on the thread count, so it stays out of the manifest.
    config.erase("threads");
    return {{"command", std::string(command)}, {"version", kVersion}, {"config", config}};
}

template <class Body>
CommandResult run_bundle(std::string_view command, const RunConfig& cfg, const fs::path& out, ExitCode failure,
                         Body&& body) {
    const auto start = std::chrono::steady_clock::now();
    CommandResult result;
    json error;
    json timing = json::object();
    try {
        validate(cfg);
        fs::create_directories(out);
        write_json(out / "manifest.json", manifest(command, cfg));
        result = body(timing);
    } catch (const ConfigError& e) {
        result = {ExitCode::config, e.what()};
    } catch (const optimizer::ConfigError& e) {
        result = {ExitCode::config, e.what()};
    } catch (const core::ZenoError& e) {
        result = {ExitCode::simulation, e.what()};
        error["state"] = state_json(e.state());
        error["impacts"] = e.impacts();
    } catch (const core::IntegrationError& e) {
        result = {ExitCode::simulation, e.what()};
        error["state"] = state_json(e.state());
    } catch (const IoError& e) {
        result = {ExitCode::io, e.what()};
    } catch (const fs::filesystem_error& e) {
        result = {ExitCode::io, e.what()};
    } catch (const std::exception& e) {
        result = {failure, e.what()};
    }
    try {
        if (result.code != ExitCode::ok) {
            error["command"] = std::string(command);
            error["exit_code"] = static_cast<int>(result.code);
            error["message"] = result.message;
            fs::create_directories(out);
            write_json(out / "error.json", error);
        }
        timing["command"] = std::string(command);
        timing["threads"] = cfg.threads;
        timing["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (fs::exists(out)) {
            write_json(out / "timing.json", timing);
        }
    } catch (const std::exception&) {
        if (result.code == ExitCode::ok) {
            result = {ExitCode::io, "cannot write timing.json"};
        }
    }
    return result;
}

const char* kind_name(core::SampleKind k) {
    switch (k) {
    case core::SampleKind::pre_impact:
        return "pre_impact";
    case core::SampleKind::post_impact:
        return "post_impact";
    default:
        return "grid";
    }
}

stochastic::DesignPoint model_design(const RunConfig& cfg) {
    return {cfg.model.kappa, cfg.model.L_c, cfg.model.c_e};
}

void set_variable(stochastic::DesignPoint& d, const std::string& var, double v) {
    if (var == "kappa") {
        d.mu_kappa = v;
    } else if (var == "L_c") {
        d.mu_Lc = v;
    } else {
        d.mu_ce = v;
    }
}

stochastic::UncertaintyModel point_model(const RunConfig& cfg, double v1_0) {
    auto u = cfg.uncertainty_model();
    u.design_sd = {0.0, 0.0, 0.0};
    u.v1 = stochastic::AleatoryModel::at(v1_0);
    return u;
}

std::int64_t as_i64(std::size_t v) { return static_cast<std::int64_t>(v); }

void write_history(const fs::path& path, const std::vector<optimizer::GenerationStats>& history) {
    CsvWriter csv(path, {{"generation", "i64"}, {"best", "f64"}, {"mean", "f64"}, {"best_ever", "f64"}});
    for (const auto& h : history) {
        csv.row({as_i64(h.generation), h.best, h.mean, h.best_ever});
    }
}

void write_designs(const fs::path& path, const std::vector<optimizer::ScoredDesign>& designs) {
    CsvWriter csv(path, {{"index", "i64"}, {"kappa", "f64"}, {"L_c", "f64"}, {"c_e", "f64"}, {"mean", "f64"}, {"sigma", "f64"}});
    for (std::size_t i = 0; i < designs.size(); ++i) {
        const auto& d = designs[i];
        csv.row({as_i64(i), d.design.mu_kappa, d.design.mu_Lc, d.design.mu_ce, d.objectives.mean, d.objectives.sigma});
    }
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

std::string junit(const std::vector<CheckResult>& results) {
    const auto failures = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
    std::string xml = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    xml += fmt::format("<testsuites name=\"vines-validate\" tests=\"{}\" failures=\"{}\">\n", results.size(), failures);
    xml += fmt::format("  <testsuite name=\"acceptance\" tests=\"{}\" failures=\"{}\">\n", results.size(), failures);
    for (const auto& r : results) {
        xml += fmt::format("    <testcase classname=\"acceptance\" name=\"{:02d}_{}\">\n", r.id, xml_escape(r.name));
        if (!r.passed) {
            xml += fmt::format("      <failure message=\"{}\"/>\n", xml_escape(r.detail));
        }
        xml += fmt::format("      <system-out>{}</system-out>\n", xml_escape(r.detail));
        xml += "    </testcase>\n";
    }
    xml += "  </testsuite>\n</testsuites>\n";
    return xml;
}

} // namespace

CommandResult cmd_simulate(const RunConfig& cfg, const fs::path& out) {
    return run_bundle("simulate", cfg, out, ExitCode::simulation, [&](json&) -> CommandResult {
        const auto p = cfg.model.system();
        const auto tr = core::simulate(p, cfg.initial, cfg.horizon, cfg.solver);

        {
            CsvWriter csv(out / "trajectory.csv",
                          {{"tau", "f64"}, {"kind", "str"}, {"x1", "f64"}, {"v1", "f64"}, {"x2", "f64"}, {"v2", "f64"},
                           {"X", "f64"}, {"X_dot", "f64"}, {"w", "f64"}, {"w_dot", "f64"}, {"i_damp", "f64"},
                           {"i_coil", "f64"}, {"e_imp", "f64"}});
            for (const auto& smp : tr.samples) {
                const auto& s = smp.state;
                const auto c = core::to_com_coordinates(s, p.eps);
                csv.row({s.tau, std::string(kind_name(smp.kind)), s.x1, s.v1, s.x2, s.v2, c.X, c.X_dot, c.w, c.w_dot,
                         s.i_damp, s.i_coil, s.e_imp});
            }
        }

        const auto ledger = energy::build_ledger(tr);
        {
            CsvWriter csv(out / "ledger.csv", {{"tau", "f64"}, {"e_mech", "f64"}, {"e_damp", "f64"}, {"e_coil", "f64"},
                                               {"e_imp", "f64"}, {"e_r", "f64"}});
            for (std::size_t i = 0; i < ledger.size(); ++i) {
                csv.row({ledger.tau[i], ledger.e_mech[i], ledger.e_damp[i], ledger.e_coil[i], ledger.e_imp[i], ledger.e_r[i]});
            }
        }
        {
            CsvWriter csv(out / "impacts.csv", {{"index", "i64"}, {"tau", "f64"}, {"wall", "i64"}, {"v1_pre", "f64"},
                                                {"v2_pre", "f64"}, {"v1_post", "f64"}, {"v2_post", "f64"},
                                                {"energy_loss", "f64"}, {"grazing", "i64"}});
            for (std::size_t i = 0; i < tr.impacts.size(); ++i) {
                const auto& e = tr.impacts[i];
                csv.row({as_i64(i), e.tau, std::int64_t{e.wall}, e.v1_pre, e.v2_pre, e.v1_post, e.v2_post, e.energy_loss,
                         std::int64_t{e.grazing ? 1 : 0}});
            }
        }
        {
            CsvWriter csv(out / "sticking.csv", {{"tau_begin", "f64"}, {"tau_end", "f64"}, {"wall", "i64"}});
            for (const auto& ph : tr.sticking) {
                csv.row({ph.tau_begin, ph.tau_end, std::int64_t{ph.wall}});
            }
        }
        {
            CsvWriter csv(out / "cycles.csv", {{"cycle", "i64"}, {"tau_begin", "f64"}, {"tau_end", "f64"}, {"impacts", "i64"}});
            for (const auto& c : energy::impacts_per_cycle(tr)) {
                csv.row({as_i64(c.cycle), c.tau_begin, c.tau_end, as_i64(c.impacts)});
            }
        }

        if (cfg.diagnostics.wavelet || cfg.diagnostics.spectrum) {
            const auto series = energy::uniform_series(tr);
            if (cfg.diagnostics.wavelet) {
                const auto scales = energy::morlet_scales(cfg.diagnostics.f_min, cfg.diagnostics.f_max, cfg.diagnostics.scales);
                const auto m = energy::cwt_morlet(series.tau, series.w, scales);
                CsvWriter csv(out / "wavelet.csv", {{"tau", "f64"}, {"frequency", "f64"}, {"scale", "f64"}, {"modulus", "f64"}});
                for (std::size_t r = 0; r < m.rows; ++r) {
                    const double f = energy::morlet_frequency(scales[r]);
                    for (std::size_t c = 0; c < m.cols; ++c) {
                        csv.row({series.tau[c], f, scales[r], m(r, c)});
                    }
                }
            }
            if (cfg.diagnostics.spectrum) {
                const auto sx = energy::amplitude_spectrum(series.tau, series.x1, cfg.diagnostics.window);
                const auto sw = energy::amplitude_spectrum(series.tau, series.w, cfg.diagnostics.window);
                CsvWriter csv(out / "spectrum.csv", {{"frequency", "f64"}, {"x1", "f64"}, {"w", "f64"}});
                for (std::size_t i = 0; i < sx.size(); ++i) {
                    csv.row({sx[i].frequency, sx[i].magnitude, sw[i].magnitude});
                }
            }
        }

        const auto diss = energy::efficiency(ledger, energy::EfficiencyMode::dissipation_fraction, cfg.horizon);
        const auto avg = energy::efficiency(ledger, energy::EfficiencyMode::time_averaged_er, cfg.horizon);
        const auto grazing = std::count_if(tr.impacts.begin(), tr.impacts.end(), [](const auto& e) { return e.grazing; });
        json summary = {
            {"system", system_json(p)},
            {"E0", ledger.E0},
            {"impacts", tr.impacts.size()},
            {"grazing_contacts", grazing},
            {"sticking_phases", tr.sticking.size()},
            {"warnings", tr.warnings},
            {"efficiency",
             {{"dissipation_fraction", {{"value", diss.value}, {"impact_share", diss.impact_share}, {"coil_share", diss.coil_share}}},
              {"time_averaged_er", {{"value", avg.value}}},
              {"horizon", cfg.horizon}}},
            {"harvested_fraction", energy::harvested_energy(tr, cfg.circuit.R_load, cfg.circuit.R_coil)},
            {"final_state", state_json(tr.final_state())},
        };
        write_json(out / "summary.json", summary);
        return {ExitCode::ok, fmt::format("{} impacts, dissipation fraction {:.4f}%", tr.impacts.size(), diss.value)};
    });
}

CommandResult cmd_sweep(const RunConfig& cfg, const fs::path& out, const Hooks& hooks) {
    return run_bundle("sweep", cfg, out, ExitCode::simulation, [&](json&) -> CommandResult {
        const auto& sw = cfg.sweep;
        const bool fixed = sw.objective == "fixed";
        const auto u = fixed ? point_model(cfg, sw.v1_0) : cfg.uncertainty_model();
        auto mc = cfg.mc_options();
        mc.n = fixed ? 2 : sw.samples;
        mc.evaluator = hooks.evaluator;

        std::size_t rejected = 0;
        CsvWriter csv(out / "sweep.csv", {{sw.x.variable, "f64"}, {sw.y.variable, "f64"}, {"value", "f64"},
                                          {"sigma", "f64"}, {"failures", "i64"}});
        for (const double xv : sw.x.values()) {
            for (const double yv : sw.y.values()) {
                auto d = model_design(cfg);
                set_variable(d, sw.x.variable, xv);
                set_variable(d, sw.y.variable, yv);
                try {
                    const auto est = stochastic::mc_estimate(d, u, mc);
                    csv.row({xv, yv, est.mean, est.sigma, as_i64(est.failures)});
                } catch (const stochastic::EstimateRejected& e) {
                    ++rejected;
                    csv.row({xv, yv, kNaN, kNaN, as_i64(e.failures())});
                }
            }
        }
        write_json(out / "sweep.json", {{"cells", csv.rows()}, {"rejected_cells", rejected}, {"objective", sw.objective},
                                        {"samples_per_cell", fixed ? 1 : sw.samples}});
        return {ExitCode::ok, fmt::format("{} cells", csv.rows())};
    });
}

CommandResult cmd_optimize(const RunConfig& cfg, const fs::path& out, const Hooks& hooks) {
    return run_bundle("optimize", cfg, out, ExitCode::optimization, [&](json&) -> CommandResult {
        const auto& o = cfg.optimize;
        const auto space = cfg.design_space();
        const auto ga = cfg.ga_config();
        auto mc = cfg.mc_options();
        mc.evaluator = hooks.evaluator;
        const auto u = o.mode == "deterministic" ? point_model(cfg, o.v1_0) : cfg.uncertainty_model();

        if (o.mode == "nsga2") {
            const auto front = optimizer::pareto_design(space, u, ga, mc);
            write_designs(out / "pareto.csv", front.front);
            CsvWriter csv(out / "pareto_history.csv",
                          {{"generation", "i64"}, {"front_size", "i64"}, {"best_mean", "f64"}, {"best_sigma", "f64"}});
            for (const auto& h : front.history) {
                csv.row({as_i64(h.generation), as_i64(h.front_size), h.best_mean, h.best_sigma});
            }
            json summary = {{"mode", o.mode}, {"front_size", front.front.size()}, {"budget", budget_json(front.budget)},
                            {"log", log_json(front.log)}};
            if (!front.front.empty()) {
                summary["max_mean"] = {{"design", design_json(front.front.front().design)},
                                       {"mean", front.front.front().objectives.mean},
                                       {"sigma", front.front.front().objectives.sigma}};
            }
            write_json(out / "pareto.json", summary);
            return {ExitCode::ok, fmt::format("front of {} designs", front.front.size())};
        }

        const auto best = optimizer::optimize_design(space, u, ga, mc);
        write_history(out / "ga_history.csv", best.history);
        write_designs(out / "candidates.csv", best.candidates);
        json report = {
            {"mode", o.mode},
            {"design", design_json(best.design)},
            {"system_c_e", core::coil_coefficient(best.design.mu_ce, cfg.model.eps, cfg.model.coil)},
            {"estimate", estimate_json(best.estimate)},
            {"search_fitness", best.search_fitness},
            {"budget", budget_json(best.budget)},
            {"log", log_json(best.log)},
        };
        if (o.mode == "deterministic") {
            report["v1_0"] = o.v1_0;
        }
        write_json(out / "optimum.json", report);
        return {ExitCode::ok, fmt::format("kappa {:.4f}, L_c {:.4f}, c_e {:.4f}: mean {:.3f}%", best.design.mu_kappa,
                                          best.design.mu_Lc, best.design.mu_ce, best.estimate.mean)};
    });
}

CommandResult cmd_compare(const RunConfig& cfg, const fs::path& out, const Hooks& hooks) {
    return run_bundle("compare", cfg, out, ExitCode::simulation, [&](json&) -> CommandResult {
        const auto& designs = cfg.compare.designs;
        std::vector<stochastic::DesignPoint> points;
        for (const auto& nd : designs) {
            points.push_back(nd.design);
        }
        auto mc = cfg.mc_options();
        mc.evaluator = hooks.evaluator;
        const auto u = cfg.uncertainty_model();
        const auto cmp = stochastic::compare_designs(points, u, mc);

        // Samples are grouped by thirds of the initial-velocity range.
        const double lo = cfg.uncertainty.v1_lo;
        const double hi = cfg.uncertainty.v1_hi;
        const double e1 = lo + (hi - lo) / 3.0;
        const double e2 = lo + 2.0 * (hi - lo) / 3.0;
        const auto cluster_of = [&](double v) { return v < e1 ? "low" : (v < e2 ? "mid" : "high"); };
        const std::vector<std::string> clusters{"all", "low", "mid", "high"};

        CsvWriter eff(out / "efficiency.csv",
                      {{"sample", "i64"}, {"v1_0", "f64"}, {"cluster", "str"}, {"design", "str"}, {"efficiency", "f64"}});
        for (std::size_t i = 0; i < cmp.v1_0.size(); ++i) {
            for (std::size_t d = 0; d < designs.size(); ++d) {
                eff.row({as_i64(i), cmp.v1_0[i], std::string(cluster_of(cmp.v1_0[i])), designs[d].name, cmp.efficiency[d][i]});
            }
        }

        const std::size_t bins = cfg.compare.bins;
        CsvWriter hist(out / "histogram.csv", {{"design", "str"}, {"cluster", "str"}, {"bin", "i64"}, {"lo", "f64"},
                                               {"hi", "f64"}, {"count", "i64"}, {"fraction", "f64"}});
        CsvWriter cdf(out / "cdf.csv", {{"design", "str"}, {"cluster", "str"}, {"efficiency", "f64"}, {"cdf", "f64"}});
        json summary = json::array();
        for (std::size_t d = 0; d < designs.size(); ++d) {
            for (const auto& cl : clusters) {
                std::vector<double> values;
                for (std::size_t i = 0; i < cmp.v1_0.size(); ++i) {
                    const double v = cmp.efficiency[d][i];
                    if (!std::isnan(v) && (cl == "all" || cl == cluster_of(cmp.v1_0[i]))) {
                        values.push_back(v);
                    }
                }
                std::vector<std::int64_t> counts(bins, 0);
                for (const double v : values) {
                    const auto b = static_cast<std::size_t>(std::clamp(v / 100.0 * static_cast<double>(bins), 0.0,
                                                                       static_cast<double>(bins - 1)));
                    ++counts[b];
                }
                for (std::size_t b = 0; b < bins; ++b) {
                    const double width = 100.0 / static_cast<double>(bins);
                    const double frac = values.empty() ? 0.0 : static_cast<double>(counts[b]) / static_cast<double>(values.size());
                    hist.row({designs[d].name, cl, as_i64(b), width * static_cast<double>(b), width * static_cast<double>(b + 1),
                              counts[b], frac});
                }
                std::sort(values.begin(), values.end());
                for (std::size_t k = 0; k < values.size(); ++k) {
                    cdf.row({designs[d].name, cl, values[k], static_cast<double>(k + 1) / static_cast<double>(values.size())});
                }
            }
            summary.push_back({{"name", designs[d].name}, {"design", design_json(designs[d].design)},
                               {"estimate", estimate_json(cmp.estimates[d])}});
        }
        write_json(out / "compare.json",
                   {{"designs", summary},
                    {"clusters", {{"rule", "thirds of the initial-velocity range"}, {"edges", {lo, e1, e2, hi}}}},
                    {"histogram", {{"bins", bins}, {"range", {0.0, 100.0}}}}});
        return {ExitCode::ok, fmt::format("{} designs on {} samples", designs.size(), cmp.v1_0.size())};
    });
}

CommandResult cmd_validate(const RunConfig& cfg, const fs::path& out, const Hooks& hooks) {
    return run_bundle("validate", cfg, out, ExitCode::validation, [&](json& timing) -> CommandResult {
        AcceptanceOptions opts;
        opts.quick = cfg.validate.budget == "quick";
        opts.threads = cfg.threads;
        opts.seed = cfg.seed;
        opts.checks = cfg.validate.checks;
        opts.impact_map = hooks.impact_map;
        const auto results = run_acceptance(opts);

        json checks = json::array();
        json seconds = json::object();
        std::size_t failed = 0;
        for (const auto& r : results) {
            checks.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
            seconds[fmt::format("{:02d}_{}", r.id, r.name)] = r.seconds;
            failed += r.passed ? 0 : 1;
        }
        timing["checks"] = seconds;
        write_json(out / "validation.json",
                   {{"budget", cfg.validate.budget}, {"passed", results.size() - failed}, {"failed", failed}, {"checks", checks}});
        write_text(out / "junit.xml", junit(results));
        if (failed > 0) {
            return {ExitCode::validation, fmt::format("{} of {} checks failed", failed, results.size())};
        }
        return {ExitCode::ok, fmt::format("{} checks passed", results.size())};
    });
}

CommandResult run_command(std::string_view command, const RunConfig& cfg, const fs::path& out, const Hooks& hooks) {
    if (command == "simulate") {
        return cmd_simulate(cfg, out);
    }
    if (command == "sweep") {
        return cmd_sweep(cfg, out, hooks);
    }
    if (command == "optimize") {
        return cmd_optimize(cfg, out, hooks);
    }
    if (command == "compare") {
        return cmd_compare(cfg, out, hooks);
    }
    if (command == "validate") {
        return cmd_validate(cfg, out, hooks);
    }
    return {ExitCode::usage, fmt::format("unknown command '{}'", command)};
}

} // namespace vines::scenarios
