#include "vines/scenarios/acceptance.hpp"
#include "vines/scenarios/commands.hpp"
#include "vines/scenarios/config.hpp"
#include "vines/scenarios/report.hpp"

#include <cmath>
#include <doctest.h>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

using namespace vines::scenarios;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("vines-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        rows.push_back(cells);
    }
    return rows;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

} // namespace

TEST_CASE("configuration parsing") {
    SUBCASE("defaults describe the reference instance") {
        const RunConfig c;
        CHECK(c.model.eps == 0.05);
        CHECK(c.model.lambda == 0.2);
        CHECK(c.initial.x2 == 0.97);
        CHECK(c.monte_carlo.n == 1000);
        CHECK(c.horizon == 30.0);
        CHECK_NOTHROW(validate(c));
    }
    SUBCASE("round trip through JSON") {
        auto j = json::parse(R"({"seed": 7, "model": {"kappa": 0.3}, "optimize": {"fixed": {"kappa": 0.39}}})");
        const auto c = from_json(j);
        CHECK(c.seed == 7);
        CHECK(c.model.kappa == 0.3);
        CHECK(c.optimize.fixed[0] == 0.39);
        CHECK(to_json(from_json(to_json(c))) == to_json(c));
    }
    SUBCASE("unknown keys and bad values are rejected") {
        CHECK_THROWS_AS(from_json(json::parse(R"({"sed": 7})")), ConfigError);
        CHECK_THROWS_AS(from_json(json::parse(R"({"model": {"kapa": 0.3}})")), ConfigError);
        CHECK_THROWS_AS(from_json(json::parse(R"({"model": {"kappa": "high"}})")), ConfigError);
        CHECK_THROWS_AS(from_json(json::parse(R"({"model": {"kappa": 1.5}})")), ConfigError);
        CHECK_THROWS_AS(from_json(json::parse(R"({"monte_carlo": {"n": -3}})")), ConfigError);
        CHECK_THROWS_AS(from_json(json::parse(R"({"sweep": {"x": {"variable": "kappa", "lo": 0, "hi": 1, "count": 1}}})")),
                        ConfigError);
        CHECK_THROWS_AS(from_json(json::parse(R"({"compare": {"designs": [{"name": "a", "kappa": 0.3, "L_c": 0.5, "c_e": 0.1}]}})")),
                        ConfigError);
        CHECK_THROWS_AS(from_json(json::parse(R"({"validate": {"checks": [14]}})")), ConfigError);
    }
}

TEST_CASE("report writers") {
    TempDir tmp;
    {
        CsvWriter w(tmp.path / "t.csv", {{"a", "f64"}, {"b", "i64"}, {"c", "str"}});
        w.row({0.1, std::int64_t{3}, std::string("x")});
        CHECK_THROWS(w.row({0.1}));
    }
    CHECK(slurp(tmp.path / "t.csv") == "a:f64,b:i64,c:str\n0.10000000000000001,3,x\n");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-INFINITY) == "-inf");
}

TEST_CASE("simulate bundles") {
    TempDir tmp;
    SUBCASE("conservative configuration keeps e_mech at one") {
        auto cfg = from_json(json::parse(R"({"model": {"kappa": 1, "lambda": 0, "c_e": 0, "L_c": 0.25},
                                             "initial": {"x1": 0, "v1": 0.5, "x2": 0, "v2": 0}, "horizon": 20})"));
        REQUIRE(cmd_simulate(cfg, tmp.path).code == ExitCode::ok);
        const auto rows = read_csv(tmp.path / "ledger.csv");
        CHECK(rows.front()[1] == "e_mech:f64");
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(std::abs(std::stod(rows[i][1]) - 1.0) < 1e-8);
        }
        const auto impacts = read_csv(tmp.path / "impacts.csv");
        REQUIRE(impacts.size() > 1);
        CHECK(std::abs(std::stod(impacts[1][1]) - 0.5235988) < 1e-6);
    }
    SUBCASE("rerunning the manifest reproduces every file") {
        auto cfg = RunConfig{};
        cfg.diagnostics.wavelet = true;
        cfg.diagnostics.spectrum = true;
        cfg.diagnostics.scales = 8;
        REQUIRE(cmd_simulate(cfg, tmp.path / "a").code == ExitCode::ok);
        const auto again = load_config(tmp.path / "a" / "manifest.json");
        REQUIRE(cmd_simulate(again, tmp.path / "b").code == ExitCode::ok);
        std::size_t compared = 0;
        for (const auto& e : fs::directory_iterator(tmp.path / "a")) {
            if (e.path().filename() != "timing.json") {
                CHECK(slurp(e.path()) == slurp(tmp.path / "b" / e.path().filename()));
                ++compared;
            }
        }
        CHECK(compared >= 9);
        const auto cycles = read_csv(tmp.path / "a" / "cycles.csv");
        CHECK(cycles[1][3] == "2");
    }
    SUBCASE("simulation failures exit with a diagnostic") {
        auto cfg = RunConfig{};
        cfg.solver.max_impacts = 1;
        const auto r = cmd_simulate(cfg, tmp.path);
        CHECK(r.code == ExitCode::simulation);
        const auto err = read_json(tmp.path / "error.json");
        CHECK(err["exit_code"] == 3);
        CHECK(err.contains("state"));
    }
}

TEST_CASE("sweep bundles") {
    TempDir tmp;
    auto cfg = from_json(json::parse(R"({"sweep": {"x": {"variable": "kappa", "lo": 0.2, "hi": 0.8, "count": 2},
                                                    "y": {"variable": "L_c", "lo": 0.2, "hi": 0.8, "count": 2}}})"));
    Hooks hooks;
    hooks.evaluator = [](const vines::stochastic::SampledInputs& s, double) { return 100.0 * s.kappa * s.L_c + s.kappa + s.L_c; };
    REQUIRE(cmd_sweep(cfg, tmp.path, hooks).code == ExitCode::ok);
    const auto rows = read_csv(tmp.path / "sweep.csv");
    REQUIRE(rows.size() == 5);
    std::map<std::pair<std::string, std::string>, std::string> cell;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        cell[{rows[i][0], rows[i][1]}] = rows[i][2];
    }
    for (const auto& [k, v] : cell) {
        CHECK(cell.at({k.second, k.first}) == v);
    }
}

TEST_CASE("compare bundles") {
    TempDir tmp;
    auto cfg = from_json(json::parse(R"({"monte_carlo": {"n": 30}, "compare": {"designs": [
        {"name": "a", "kappa": 0.39, "L_c": 0.68, "c_e": 0.013},
        {"name": "b", "kappa": 0.39, "L_c": 0.68, "c_e": 0.013}]}})"));
    Hooks hooks;
    hooks.evaluator = [](const vines::stochastic::SampledInputs& s, double) { return 100.0 * s.v1_0; };
    REQUIRE(cmd_compare(cfg, tmp.path, hooks).code == ExitCode::ok);
    std::map<std::string, std::vector<std::string>> cdf;
    const auto rows = read_csv(tmp.path / "cdf.csv");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        cdf[rows[i][0] + "/" + rows[i][1]].push_back(rows[i][2] + ";" + rows[i][3]);
    }
    CHECK(cdf["a/all"].size() == 30);
    CHECK(cdf["a/all"] == cdf["b/all"]);
    CHECK(cdf["a/low"] == cdf["b/low"]);

    auto single = cfg;
    single.monte_carlo.n = 1;
    REQUIRE(cmd_compare(single, tmp.path / "one", hooks).code == ExitCode::ok);
    const auto one = read_csv(tmp.path / "one" / "cdf.csv");
    std::size_t all_rows = 0;
    for (std::size_t i = 1; i < one.size(); ++i) {
        if (one[i][0] == "a" && one[i][1] == "all") {
            ++all_rows;
            CHECK(one[i][3] == "1");
        }
    }
    CHECK(all_rows == 1);
}

TEST_CASE("optimize bundles with an injected objective") {
    TempDir tmp;
    auto cfg = from_json(json::parse(R"({"ga": {"population": 16, "generations": 25, "mc_samples": 4}, "monte_carlo": {"n": 8}})"));
    Hooks hooks;
    hooks.evaluator = [](const vines::stochastic::SampledInputs& s, double) {
        return 100.0 - 100.0 * ((s.kappa - 0.4) * (s.kappa - 0.4) + (s.L_c - 0.7) * (s.L_c - 0.7) + s.c_e * s.c_e);
    };
    REQUIRE(cmd_optimize(cfg, tmp.path, hooks).code == ExitCode::ok);
    const auto opt = read_json(tmp.path / "optimum.json");
    CHECK(std::abs(opt["design"]["kappa"].get<double>() - 0.4) < 0.05);
    CHECK(std::abs(opt["design"]["L_c"].get<double>() - 0.7) < 0.05);
    CHECK(read_csv(tmp.path / "ga_history.csv").size() == 26);
}

TEST_CASE("validate reports") {
    TempDir tmp;
    RunConfig cfg;
    cfg.validate.budget = "quick";
    cfg.validate.checks = {1, 3, 7};
    REQUIRE(cmd_validate(cfg, tmp.path / "ok").code == ExitCode::ok);
    const auto report = read_json(tmp.path / "ok" / "validation.json");
    CHECK(report["checks"].size() == 3);
    CHECK(slurp(tmp.path / "ok" / "junit.xml").find("<testsuite") != std::string::npos);

    Hooks tampered;
    tampered.impact_map = [](double v1, double v2, const vines::core::SystemParams& p) {
        auto q = p;
        q.kappa = std::min(1.0, p.kappa * 1.1);
        auto o = vines::core::impact_map(v1, v2, q);
        o.v1_post = (v1 + p.eps * v2 - p.kappa * p.eps * (v1 - v2)) / (1.0 + p.eps) + 1e-6 * (v1 - v2);
        return o;
    };
    cfg.validate.checks = {1};
    CHECK(cmd_validate(cfg, tmp.path / "bad", tampered).code == ExitCode::validation);
    const auto bad = read_json(tmp.path / "bad" / "validation.json");
    CHECK(bad["checks"][0]["passed"] == false);
}

TEST_CASE("criterion names") {
    CHECK(criterion_name(1) == "impact_map_exactness");
    CHECK(criterion_name(13) == "determinism");
    CHECK_THROWS(criterion_name(0));
    CHECK_THROWS(criterion_name(14));
}

TEST_CASE("command dispatch") {
    TempDir tmp;
    CHECK(run_command("bogus", RunConfig{}, tmp.path).code == ExitCode::usage);
    RunConfig bad;
    bad.model.kappa = 2.0;
    CHECK(run_command("simulate", bad, tmp.path).code == ExitCode::config);
}
