#include "vines/scenarios/config.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <set>

namespace vines::scenarios {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 3> kDesignKeys{"kappa", "L_c", "c_e"};

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(fmt::format("{}: expected an object", label()));
        }
    }

    Reader child(const char* key) {
        seen_.insert(key);
        static const json empty = json::object();
        return Reader(j_.contains(key) ? j_.at(key) : empty, path_.empty() ? key : path_ + "." + key);
    }

    [[nodiscard]] const json* raw(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void number(const char* key, double& out) {
        if (const json* v = raw(key)) {
            if (!v->is_number()) {
                fail(key, "expected a number");
            }
            out = v->get<double>();
        }
    }

    template <class U>
    void count(const char* key, U& out) {
        if (const json* v = raw(key)) {
            if (!v->is_number_unsigned()) {
                fail(key, "expected a non-negative integer");
            }
            out = static_cast<U>(v->get<std::uint64_t>());
        }
    }

    void flag(const char* key, bool& out) {
        if (const json* v = raw(key)) {
            if (!v->is_boolean()) {
                fail(key, "expected true or false");
            }
            out = v->get<bool>();
        }
    }

    void text(const char* key, std::string& out) {
        if (const json* v = raw(key)) {
            if (!v->is_string()) {
                fail(key, "expected a string");
            }
            out = v->get<std::string>();
        }
    }

    void optional_number(const char* key, std::optional<double>& out) {
        if (const json* v = raw(key)) {
            if (v->is_null()) {
                out.reset();
            } else if (v->is_number()) {
                out = v->get<double>();
            } else {
                fail(key, "expected a number or null");
            }
        }
    }

    void interval(const char* key, optimizer::Interval& out) {
        if (const json* v = raw(key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
                fail(key, "expected [lo, hi]");
            }
            out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
        }
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.contains(item.key())) {
                throw ConfigError(fmt::format("unknown key '{}'", path_.empty() ? item.key() : path_ + "." + item.key()));
            }
        }
    }

    [[noreturn]] void fail(const char* key, const char* what) const {
        throw ConfigError(fmt::format("{}: {}", path_.empty() ? key : path_ + "." + key, what));
    }

private:
    [[nodiscard]] std::string label() const { return path_.empty() ? "config" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

const char* coil_name(core::CoilConvention c) { return c == core::CoilConvention::relative ? "relative" : "direct"; }

const char* window_name(energy::Window w) { return w == energy::Window::hann ? "hann" : "none"; }

void read_axis(Reader r, Axis& a) {
    r.text("variable", a.variable);
    r.number("lo", a.lo);
    r.number("hi", a.hi);
    r.count("count", a.count);
    r.finish();
}

json axis_json(const Axis& a) { return {{"variable", a.variable}, {"lo", a.lo}, {"hi", a.hi}, {"count", a.count}}; }

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw ConfigError(what);
    }
}

bool finite(double v) { return std::isfinite(v); }

} // namespace

core::SystemParams ModelConfig::system() const {
    return {eps, lambda, core::coil_coefficient(c_e, eps, coil), kappa, L_c};
}

std::vector<double> Axis::values() const {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return out;
}

stochastic::UncertaintyModel RunConfig::uncertainty_model() const {
    stochastic::UncertaintyModel u;
    u.design_sd = uncertainty.design_sd;
    u.v1 = uncertainty.v1_lo == uncertainty.v1_hi ? stochastic::AleatoryModel::at(uncertainty.v1_lo)
                                                  : stochastic::AleatoryModel::uniform(uncertainty.v1_lo, uncertainty.v1_hi);
    u.eps = model.eps;
    u.lambda = model.lambda;
    u.x1_0 = uncertainty.x1_0;
    u.x2_0 = uncertainty.x2_0;
    u.v2_0 = uncertainty.v2_0;
    u.coil = model.coil;
    u.clamp_lo = uncertainty.clamp_lo;
    u.clamp_hi = uncertainty.clamp_hi;
    return u;
}

stochastic::McOptions RunConfig::mc_options() const {
    stochastic::McOptions mc;
    mc.n = monte_carlo.n;
    mc.root_seed = seed;
    mc.horizon = horizon;
    mc.threads = threads;
    mc.max_failure_rate = monte_carlo.max_failure_rate;
    mc.sim = stochastic::mc_sim_options();
    mc.sim.rel_tol = monte_carlo.rel_tol;
    mc.sim.abs_tol = monte_carlo.abs_tol;
    return mc;
}

optimizer::GaConfig RunConfig::ga_config() const {
    optimizer::GaConfig g = ga;
    g.root_seed = seed;
    g.horizon = horizon;
    g.threads = threads;
    return g;
}

optimizer::DesignSpace RunConfig::design_space() const {
    optimizer::DesignSpace s;
    s.bounds = optimize.bounds;
    s.fixed = optimize.fixed;
    return s;
}

void validate(const RunConfig& cfg) {
    try {
        require(cfg.threads >= 1, "threads must be at least 1");
        require(finite(cfg.horizon) && cfg.horizon > 0.0, "horizon must be positive");
        core::validate(cfg.model.system());
        const auto& in = cfg.initial;
        require(finite(in.x1) && finite(in.v1) && finite(in.x2) && finite(in.v2), "initial state must be finite");

        const auto& s = cfg.solver;
        require(s.rel_tol > 0.0 && s.abs_tol > 0.0 && s.gap_tol > 0.0 && s.time_tol > 0.0 && s.graze_eps > 0.0,
                "solver tolerances must be positive");
        require(s.sample_dt >= 0.0 && s.max_step > 0.0, "solver.sample_dt must be >= 0 and solver.max_step > 0");
        require(s.max_impacts >= 1 && s.max_rapid_impacts >= 1 && s.rapid_impact_dt > 0.0,
                "solver impact guards must be positive");

        require(cfg.circuit.R_load >= 0.0 && cfg.circuit.R_coil >= 0.0 && cfg.circuit.R_load + cfg.circuit.R_coil > 0.0,
                "circuit resistances must be non-negative with a positive sum");

        const auto& d = cfg.diagnostics;
        require(d.f_min > 0.0 && d.f_min < d.f_max && d.scales >= 1, "diagnostics band or scale count invalid");
        require(!(d.wavelet || d.spectrum) || s.sample_dt > 0.0, "wavelet and spectrum output need solver.sample_dt > 0");

        stochastic::validate(cfg.uncertainty_model());
        require(cfg.monte_carlo.n >= 1, "monte_carlo.n must be at least 1");
        require(cfg.monte_carlo.max_failure_rate >= 0.0 && cfg.monte_carlo.max_failure_rate <= 1.0,
                "monte_carlo.max_failure_rate must lie in [0, 1]");
        require(cfg.monte_carlo.rel_tol > 0.0 && cfg.monte_carlo.abs_tol > 0.0,
                "monte_carlo tolerances must be positive");

        const auto space = cfg.design_space();
        optimizer::validate(space);
        optimizer::validate(cfg.ga_config(), space.free_bounds());
        require(cfg.ga.mc_samples >= 2, "ga.mc_samples must be at least 2");
        const std::set<std::string> modes{"stochastic", "deterministic", "nsga2"};
        require(modes.contains(cfg.optimize.mode), "optimize.mode must be stochastic, deterministic or nsga2");
        require(finite(cfg.optimize.v1_0) && cfg.optimize.v1_0 != 0.0, "optimize.v1_0 must be finite and non-zero");

        const std::set<std::string> vars{kDesignKeys.begin(), kDesignKeys.end()};
        const auto& sw = cfg.sweep;
        for (const Axis* a : {&sw.x, &sw.y}) {
            require(vars.contains(a->variable), "sweep axis variable must be kappa, L_c or c_e");
            require(a->count >= 2, "sweep axes need at least 2 points");
            require(finite(a->lo) && finite(a->hi) && a->lo <= a->hi, "sweep axis needs lo <= hi");
        }
        require(sw.x.variable != sw.y.variable, "sweep axes must differ");
        require(sw.objective == "fixed" || sw.objective == "monte_carlo", "sweep.objective must be fixed or monte_carlo");
        require(finite(sw.v1_0) && sw.v1_0 != 0.0, "sweep.v1_0 must be finite and non-zero");
        require(sw.samples >= 2, "sweep.samples must be at least 2");

        require(cfg.compare.designs.size() >= 2, "compare needs at least 2 designs");
        std::set<std::string> names;
        for (const auto& nd : cfg.compare.designs) {
            require(!nd.name.empty() && names.insert(nd.name).second, "compare design names must be unique and non-empty");
            require(space.contains(nd.design), fmt::format("compare design '{}' is outside the design bounds", nd.name));
        }
        require(cfg.compare.bins >= 1, "compare.bins must be at least 1");
        require(cfg.validate.budget == "full" || cfg.validate.budget == "quick", "validate.budget must be full or quick");
        for (const int c : cfg.validate.checks) {
            require(c >= 1 && c <= 13, "validate.checks entries must lie in 1..13");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

RunConfig from_json(const json& j) {
    RunConfig cfg;
    Reader root(j, "");
    root.count("seed", cfg.seed);
    root.count("threads", cfg.threads);
    root.number("horizon", cfg.horizon);

    {
        Reader r = root.child("model");
        r.number("eps", cfg.model.eps);
        r.number("lambda", cfg.model.lambda);
        r.number("c_e", cfg.model.c_e);
        r.number("kappa", cfg.model.kappa);
        r.number("L_c", cfg.model.L_c);
        std::string coil = coil_name(cfg.model.coil);
        r.text("coil_convention", coil);
        if (coil != "relative" && coil != "direct") {
            r.fail("coil_convention", "expected relative or direct");
        }
        cfg.model.coil = coil == "relative" ? core::CoilConvention::relative : core::CoilConvention::direct;
        r.finish();
    }
    {
        Reader r = root.child("initial");
        r.number("x1", cfg.initial.x1);
        r.number("v1", cfg.initial.v1);
        r.number("x2", cfg.initial.x2);
        r.number("v2", cfg.initial.v2);
        r.finish();
    }
    {
        Reader r = root.child("solver");
        auto& s = cfg.solver;
        r.number("rel_tol", s.rel_tol);
        r.number("abs_tol", s.abs_tol);
        r.number("gap_tol", s.gap_tol);
        r.number("time_tol", s.time_tol);
        r.number("graze_eps", s.graze_eps);
        r.count("max_impacts", s.max_impacts);
        r.number("rapid_impact_dt", s.rapid_impact_dt);
        r.count("max_rapid_impacts", s.max_rapid_impacts);
        r.number("sample_dt", s.sample_dt);
        r.number("max_step", s.max_step);
        r.finish();
    }
    {
        Reader r = root.child("circuit");
        r.number("R_load", cfg.circuit.R_load);
        r.number("R_coil", cfg.circuit.R_coil);
        r.finish();
    }
    {
        Reader r = root.child("diagnostics");
        auto& d = cfg.diagnostics;
        r.flag("wavelet", d.wavelet);
        r.flag("spectrum", d.spectrum);
        r.number("f_min", d.f_min);
        r.number("f_max", d.f_max);
        r.count("scales", d.scales);
        std::string window = window_name(d.window);
        r.text("window", window);
        if (window != "hann" && window != "none") {
            r.fail("window", "expected hann or none");
        }
        d.window = window == "hann" ? energy::Window::hann : energy::Window::none;
        r.finish();
    }
    {
        Reader r = root.child("uncertainty");
        auto& u = cfg.uncertainty;
        {
            Reader sd = r.child("design_sd");
            for (std::size_t i = 0; i < 3; ++i) {
                sd.number(kDesignKeys[i], u.design_sd[i]);
            }
            sd.finish();
        }
        r.number("v1_lo", u.v1_lo);
        r.number("v1_hi", u.v1_hi);
        r.number("x1_0", u.x1_0);
        r.number("x2_0", u.x2_0);
        r.number("v2_0", u.v2_0);
        r.number("clamp_lo", u.clamp_lo);
        r.number("clamp_hi", u.clamp_hi);
        r.finish();
    }
    {
        Reader r = root.child("monte_carlo");
        r.count("n", cfg.monte_carlo.n);
        r.number("max_failure_rate", cfg.monte_carlo.max_failure_rate);
        r.number("rel_tol", cfg.monte_carlo.rel_tol);
        r.number("abs_tol", cfg.monte_carlo.abs_tol);
        r.finish();
    }
    {
        Reader r = root.child("ga");
        auto& g = cfg.ga;
        r.count("population", g.population);
        r.count("generations", g.generations);
        r.count("tournament", g.tournament);
        r.number("crossover_rate", g.crossover_rate);
        r.number("sbx_eta", g.sbx_eta);
        r.number("mutation_rate", g.mutation_rate);
        r.number("mutation_sd_fraction", g.mutation_sd_fraction);
        r.count("elites", g.elites);
        r.count("mc_samples", g.mc_samples);
        r.finish();
    }
    {
        Reader r = root.child("sweep");
        auto& s = cfg.sweep;
        read_axis(r.child("x"), s.x);
        read_axis(r.child("y"), s.y);
        r.text("objective", s.objective);
        r.number("v1_0", s.v1_0);
        r.count("samples", s.samples);
        r.finish();
    }
    {
        Reader r = root.child("optimize");
        auto& o = cfg.optimize;
        r.text("mode", o.mode);
        r.number("v1_0", o.v1_0);
        {
            Reader b = r.child("bounds");
            for (std::size_t i = 0; i < 3; ++i) {
                b.interval(kDesignKeys[i], o.bounds[i]);
            }
            b.finish();
        }
        {
            Reader f = r.child("fixed");
            for (std::size_t i = 0; i < 3; ++i) {
                f.optional_number(kDesignKeys[i], o.fixed[i]);
            }
            f.finish();
        }
        r.finish();
    }
    {
        Reader r = root.child("compare");
        if (const json* designs = r.raw("designs")) {
            if (!designs->is_array()) {
                r.fail("designs", "expected an array");
            }
            cfg.compare.designs.clear();
            for (std::size_t i = 0; i < designs->size(); ++i) {
                Reader d((*designs)[i], fmt::format("compare.designs[{}]", i));
                NamedDesign nd{fmt::format("design_{}", i), {}};
                d.text("name", nd.name);
                d.number("kappa", nd.design.mu_kappa);
                d.number("L_c", nd.design.mu_Lc);
                d.number("c_e", nd.design.mu_ce);
                d.finish();
                cfg.compare.designs.push_back(nd);
            }
        }
        r.count("bins", cfg.compare.bins);
        r.finish();
    }
    {
        Reader r = root.child("validate");
        r.text("budget", cfg.validate.budget);
        if (const json* checks = r.raw("checks")) {
            if (!checks->is_array()) {
                r.fail("checks", "expected an array of criterion numbers");
            }
            cfg.validate.checks.clear();
            for (const auto& c : *checks) {
                if (!c.is_number_unsigned()) {
                    r.fail("checks", "expected an array of criterion numbers");
                }
                cfg.validate.checks.push_back(c.get<int>());
            }
        }
        r.finish();
    }
    root.finish();
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open config file {}", path.string()));
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    // A run manifest carries its configuration under "config".
    if (j.is_object() && j.contains("command") && j.contains("config")) {
        return from_json(j.at("config"));
    }
    return from_json(j);
}

json to_json(const RunConfig& cfg) {
    const auto& s = cfg.solver;
    const auto& u = cfg.uncertainty;
    const auto& g = cfg.ga;
    const auto& o = cfg.optimize;
    json designs = json::array();
    for (const auto& nd : cfg.compare.designs) {
        designs.push_back({{"name", nd.name}, {"kappa", nd.design.mu_kappa}, {"L_c", nd.design.mu_Lc}, {"c_e", nd.design.mu_ce}});
    }
    json bounds;
    json fixed;
    json design_sd;
    for (std::size_t i = 0; i < 3; ++i) {
        bounds[kDesignKeys[i]] = {o.bounds[i].lo, o.bounds[i].hi};
        fixed[kDesignKeys[i]] = optional_json(o.fixed[i]);
        design_sd[kDesignKeys[i]] = u.design_sd[i];
    }
    return {
        {"seed", cfg.seed},
        {"threads", cfg.threads},
        {"horizon", cfg.horizon},
        {"model",
         {{"eps", cfg.model.eps},
          {"lambda", cfg.model.lambda},
          {"c_e", cfg.model.c_e},
          {"kappa", cfg.model.kappa},
          {"L_c", cfg.model.L_c},
          {"coil_convention", coil_name(cfg.model.coil)}}},
        {"initial", {{"x1", cfg.initial.x1}, {"v1", cfg.initial.v1}, {"x2", cfg.initial.x2}, {"v2", cfg.initial.v2}}},
        {"solver",
         {{"rel_tol", s.rel_tol},
          {"abs_tol", s.abs_tol},
          {"gap_tol", s.gap_tol},
          {"time_tol", s.time_tol},
          {"graze_eps", s.graze_eps},
          {"max_impacts", s.max_impacts},
          {"rapid_impact_dt", s.rapid_impact_dt},
          {"max_rapid_impacts", s.max_rapid_impacts},
          {"sample_dt", s.sample_dt},
          {"max_step", s.max_step}}},
        {"circuit", {{"R_load", cfg.circuit.R_load}, {"R_coil", cfg.circuit.R_coil}}},
        {"diagnostics",
         {{"wavelet", cfg.diagnostics.wavelet},
          {"spectrum", cfg.diagnostics.spectrum},
          {"f_min", cfg.diagnostics.f_min},
          {"f_max", cfg.diagnostics.f_max},
          {"scales", cfg.diagnostics.scales},
          {"window", window_name(cfg.diagnostics.window)}}},
        {"uncertainty",
         {{"design_sd", design_sd},
          {"v1_lo", u.v1_lo},
          {"v1_hi", u.v1_hi},
          {"x1_0", u.x1_0},
          {"x2_0", u.x2_0},
          {"v2_0", u.v2_0},
          {"clamp_lo", u.clamp_lo},
          {"clamp_hi", u.clamp_hi}}},
        {"monte_carlo",
         {{"n", cfg.monte_carlo.n},
          {"max_failure_rate", cfg.monte_carlo.max_failure_rate},
          {"rel_tol", cfg.monte_carlo.rel_tol},
          {"abs_tol", cfg.monte_carlo.abs_tol}}},
        {"ga",
         {{"population", g.population},
          {"generations", g.generations},
          {"tournament", g.tournament},
          {"crossover_rate", g.crossover_rate},
          {"sbx_eta", g.sbx_eta},
          {"mutation_rate", g.mutation_rate},
          {"mutation_sd_fraction", g.mutation_sd_fraction},
          {"elites", g.elites},
          {"mc_samples", g.mc_samples}}},
        {"sweep",
         {{"x", axis_json(cfg.sweep.x)},
          {"y", axis_json(cfg.sweep.y)},
          {"objective", cfg.sweep.objective},
          {"v1_0", cfg.sweep.v1_0},
          {"samples", cfg.sweep.samples}}},
        {"optimize", {{"mode", o.mode}, {"v1_0", o.v1_0}, {"bounds", bounds}, {"fixed", fixed}}},
        {"compare", {{"designs", designs}, {"bins", cfg.compare.bins}}},
        {"validate", {{"budget", cfg.validate.budget}, {"checks", cfg.validate.checks}}},
    };
}

} // namespace vines::scenarios
