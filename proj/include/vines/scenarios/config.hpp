// Run configuration shared by every command. A config file overrides any
// subset of the defaults below; the fully expanded configuration is written to
// each run's manifest.
#pragma once

#include "vines/core/params.hpp"
#include "vines/core/simulator.hpp"
#include "vines/energy/spectral.hpp"
#include "vines/optimizer/fitness.hpp"
#include "vines/stochastic/monte_carlo.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vines::scenarios {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Model block. c_e is quoted in the convention named by `coil`.
struct ModelConfig {
    double eps = 0.05;
    double lambda = 0.2;
    double c_e = 0.05;
    double kappa = 0.54;
    double L_c = 0.99;
    core::CoilConvention coil = core::CoilConvention::relative;

    [[nodiscard]] core::SystemParams system() const;
};

struct CircuitConfig {
    double R_load = 10.0;
    double R_coil = 10.0;
};

struct DiagnosticsConfig {
    bool wavelet = false;
    bool spectrum = false;
    double f_min = 0.01;
    double f_max = 2.0;
    std::size_t scales = 64;
    energy::Window window = energy::Window::hann;
};

/// Design variables drawn around the DesignPoint means, and the LO initial
/// velocity. Mass ratio and damping come from the model block.
struct UncertaintyConfig {
    std::array<double, 3> design_sd{2.97e-3, 2.97e-3, 2.97e-3};
    double v1_lo = 0.1;
    double v1_hi = 1.0;
    double x1_0 = 0.0;
    double x2_0 = 0.97;
    double v2_0 = 0.0;
    double clamp_lo = 0.001;
    double clamp_hi = 1.0;
};

struct MonteCarloConfig {
    std::size_t n = 1000;
    double max_failure_rate = 0.05;
    double rel_tol = 1e-9; ///< integrator tolerances of the sample runs
    double abs_tol = 1e-10;
};

struct Axis {
    std::string variable = "kappa"; ///< kappa, L_c or c_e
    double lo = 0.0;
    double hi = 1.0;
    std::size_t count = 2;

    [[nodiscard]] std::vector<double> values() const;
};

struct SweepConfig {
    Axis x{"kappa", 0.05, 1.0, 20};
    Axis y{"c_e", 0.05, 1.0, 20};
    /// "fixed": one run per cell at v1_0; "monte_carlo": mean over `samples` draws.
    std::string objective = "fixed";
    double v1_0 = 0.5;
    std::size_t samples = 200;
};

struct OptimizeConfig {
    std::string mode = "stochastic"; ///< stochastic, deterministic or nsga2
    double v1_0 = 0.55;              ///< aleatory point used by the deterministic mode
    std::array<optimizer::Interval, 3> bounds{{{0.001, 1.0}, {0.001, 1.0}, {0.001, 1.0}}};
    std::array<std::optional<double>, 3> fixed{};
};

struct NamedDesign {
    std::string name;
    stochastic::DesignPoint design;
};

struct CompareConfig {
    std::vector<NamedDesign> designs{
        {"stochastic", {0.39, 0.68, 0.013}},
        {"deterministic_v0.1", {0.54, 0.27, 0.06}},
        {"deterministic_v0.55", {0.43, 0.98, 0.013}},
        {"deterministic_v1", {0.25, 1.0, 0.011}},
    };
    std::size_t bins = 20;
};

struct ValidateConfig {
    std::string budget = "full"; ///< full or quick
    std::vector<int> checks;     ///< acceptance criteria to run; empty runs all
};

struct RunConfig {
    std::uint64_t seed = 2024;
    unsigned threads = 1;
    double horizon = 30.0;
    ModelConfig model;
    core::InitialState initial{0.0, 0.5, 0.97, 0.0};
    core::SimOptions solver;
    CircuitConfig circuit;
    DiagnosticsConfig diagnostics;
    UncertaintyConfig uncertainty;
    MonteCarloConfig monte_carlo;
    optimizer::GaConfig ga;
    SweepConfig sweep;
    OptimizeConfig optimize;
    CompareConfig compare;
    ValidateConfig validate;

    /// Monte Carlo uncertainty model assembled from the model and uncertainty blocks.
    [[nodiscard]] stochastic::UncertaintyModel uncertainty_model() const;
    /// Monte Carlo options (sample count, seed, horizon, threads).
    [[nodiscard]] stochastic::McOptions mc_options() const;
    /// GA settings with the run-wide seed, horizon and thread count filled in.
    [[nodiscard]] optimizer::GaConfig ga_config() const;
    [[nodiscard]] optimizer::DesignSpace design_space() const;
};

/// Throws ConfigError when any block violates its invariants.
void validate(const RunConfig& cfg);

/// Applies `j` on top of the defaults. Unknown keys and mistyped values throw ConfigError.
RunConfig from_json(const nlohmann::json& j);
/// Reads a config file, or the configuration recorded in a run manifest.
RunConfig load_config(const std::filesystem::path& path);

/// Every field, defaults included.
nlohmann::json to_json(const RunConfig& cfg);

} // namespace vines::scenarios
