// vines: simulate, sweep, optimize, compare and validate the vibro-impact
// energy sink from the command line. Every command writes a report bundle.
#include "vines/scenarios/commands.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fmt/format.h>
#include <iostream>
#include <optional>

namespace sc = vines::scenarios;

namespace {

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> mode;
};

std::optional<unsigned> env_threads() {
    const char* raw = std::getenv("VINES_THREADS");
    if (raw == nullptr || *raw == '\0') {
        return std::nullopt;
    }
    char* end = nullptr;
    const unsigned long v = std::strtoul(raw, &end, 10);
    if (*end != '\0' || v == 0 || v > 1024) {
        throw sc::ConfigError(fmt::format("VINES_THREADS must be an integer in [1, 1024], got '{}'", raw));
    }
    return static_cast<unsigned>(v);
}

void apply_mode(const std::string& command, const std::string& mode, sc::RunConfig& cfg) {
    if (command == "optimize") {
        cfg.optimize.mode = mode;
    } else if (command == "sweep") {
        cfg.sweep.objective = mode;
    } else if (command == "validate") {
        cfg.validate.budget = mode;
    } else {
        throw sc::ConfigError(fmt::format("--mode is not used by '{}'", command));
    }
}

int execute(const std::string& command, const Options& o) {
    sc::RunConfig cfg;
    try {
        if (!o.config.empty()) {
            cfg = sc::load_config(o.config);
        }
        if (o.seed) {
            cfg.seed = *o.seed;
        }
        if (o.threads) {
            cfg.threads = *o.threads;
        }
        if (const auto t = env_threads()) {
            cfg.threads = *t;
        }
        if (o.mode) {
            apply_mode(command, *o.mode, cfg);
        }
        sc::validate(cfg);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return static_cast<int>(sc::ExitCode::config);
    }
    const auto result = sc::run_command(command, cfg, o.out);
    if (!result.message.empty()) {
        (result.code == sc::ExitCode::ok ? std::cout : std::cerr) << result.message << '\n';
    }
    return static_cast<int>(result.code);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vibro-impact nonlinear energy sink with electromagnetic harvesting"};
    app.set_version_flag("--version", std::string(sc::kVersion));
    app.require_subcommand(1);

    Options opts;
    const std::array<std::pair<const char*, const char*>, 5> commands{{
        {"simulate", "Integrate one trajectory and write the energy ledger, impacts and diagnostics"},
        {"sweep", "Efficiency over a two-parameter grid"},
        {"optimize", "Genetic search for the best design (stochastic, deterministic or nsga2)"},
        {"compare", "Efficiency distributions of several designs on common random numbers"},
        {"validate", "Run the acceptance checks"},
    }};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opts.config, "Config file or a previous run's manifest.json")->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out, "Output directory")->capture_default_str();
        sub->add_option("--seed", opts.seed, "Root random seed");
        sub->add_option("--threads", opts.threads, "Worker threads (VINES_THREADS overrides)")->check(CLI::Range(1U, 1024U));
        sub->add_option("--mode", opts.mode, "optimize: stochastic|deterministic|nsga2; sweep: fixed|monte_carlo; validate: full|quick");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(sc::ExitCode::usage);
    }
    return execute(app.get_subcommands().front()->get_name(), opts);
}
