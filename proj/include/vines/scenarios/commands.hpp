// Command implementations behind the CLI. Each command writes a report bundle
// into an output directory: manifest.json (command, version and the expanded
// configuration), the data files, and timing.json. Only timing.json varies
// between reruns of the same manifest.
#pragma once

#include "vines/scenarios/acceptance.hpp"
#include "vines/scenarios/config.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace vines::scenarios {

inline constexpr const char* kVersion = "1.0.0";

enum class ExitCode : int {
    ok = 0,
    usage = 1,
    config = 2,
    simulation = 3,
    optimization = 4,
    validation = 5,
    io = 6,
};

/// Injection points for tests.
struct Hooks {
    stochastic::SampleEvaluator evaluator; ///< replaces the simulator inside Monte Carlo runs
    ImpactMapFn impact_map;                ///< used by the validate command's impact-map check
};

struct CommandResult {
    ExitCode code = ExitCode::ok;
    std::string message;
};

CommandResult cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out, const Hooks& hooks = {});
CommandResult cmd_optimize(const RunConfig& cfg, const std::filesystem::path& out, const Hooks& hooks = {});
CommandResult cmd_compare(const RunConfig& cfg, const std::filesystem::path& out, const Hooks& hooks = {});
CommandResult cmd_validate(const RunConfig& cfg, const std::filesystem::path& out, const Hooks& hooks = {});

/// Dispatches on simulate, sweep, optimize, compare or validate.
CommandResult run_command(std::string_view command, const RunConfig& cfg, const std::filesystem::path& out,
                          const Hooks& hooks = {});

} // namespace vines::scenarios
