#include "vines/optimizer/fitness.hpp"
#include "vines/optimizer/genetic.hpp"

#include <cmath>
#include <doctest.h>
#include <limits>

using namespace vines::optimizer;
using vines::stochastic::DesignPoint;
using vines::stochastic::SampledInputs;

namespace {

const std::array<Interval, 1> kUnit{{{0.0, 1.0}}};
const std::array<Interval, 3> kCube{{{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}};

GaConfig config(std::size_t generations) {
    GaConfig c;
    c.generations = generations;
    c.root_seed = 99;
    return c;
}

BatchObjectives objectives(std::function<Objectives(double)> f) {
    return [f = std::move(f)](std::span<const Genome> gs, std::uint64_t) {
        std::vector<Objectives> out;
        for (const auto& g : gs) {
            out.push_back(f(g[0]));
        }
        return out;
    };
}

void check_mutually_nondominated(const ParetoResult& r) {
    for (const auto& a : r.front) {
        for (const auto& b : r.front) {
            CHECK_FALSE(dominates(a.objectives, b.objectives));
        }
    }
}

} // namespace

TEST_CASE("single-objective test functions") {
    SUBCASE("unimodal parabola") {
        const auto r = ga_optimize(pointwise([](const Genome& g) { return -(g[0] - 0.5) * (g[0] - 0.5); }), kUnit,
                                   config(60));
        CHECK(std::abs(r.best[0] - 0.5) <= 0.01);
        CHECK(r.history.size() == 60);
    }
    SUBCASE("3-D sphere") {
        const auto r = ga_optimize(pointwise([](const Genome& g) {
                                       double s = 0.0;
                                       for (const double x : g) {
                                           s -= (x - 0.3) * (x - 0.3);
                                       }
                                       return s;
                                   }),
                                   kCube, config(40));
        for (const double x : r.best) {
            CHECK(std::abs(x - 0.3) <= 0.02);
        }
    }
}

TEST_CASE("GA invariants") {
    bool feasible = true;
    const BatchFitness f = [&feasible](std::span<const Genome> gs, std::uint64_t seed) {
        std::vector<double> out;
        for (const auto& g : gs) {
            for (const double x : g) {
                feasible = feasible && x >= 0.0 && x <= 1.0;
            }
            // Noisy objective whose noise depends on the generation seed.
            out.push_back(-std::abs(g[0] - 0.9) - std::abs(g[1] - 0.05) + 1e-3 * static_cast<double>(seed % 7));
        }
        return out;
    };
    const auto cfg = config(30);
    const auto a = ga_optimize(f, std::span(kCube).first(2), cfg);
    CHECK(feasible);
    for (std::size_t i = 1; i < a.history.size(); ++i) {
        CHECK(a.history[i].best_ever >= a.history[i - 1].best_ever);
    }
    CHECK(a.evaluations == cfg.population * cfg.generations);
    CHECK(a.champions.size() == cfg.generations);

    const auto b = ga_optimize(f, std::span(kCube).first(2), cfg);
    CHECK(a.best == b.best);
    CHECK(a.best_fitness == b.best_fitness);
}

TEST_CASE("GA configuration is validated") {
    auto cfg = config(10);
    cfg.population = 3;
    CHECK_THROWS_AS(validate(cfg, kUnit), ConfigError);
    cfg = config(0);
    CHECK_THROWS_AS(validate(cfg, kUnit), ConfigError);
    cfg = config(10);
    cfg.crossover_rate = 1.5;
    CHECK_THROWS_AS(validate(cfg, kUnit), ConfigError);
    const std::array<Interval, 1> empty{{{0.5, 0.5}}};
    CHECK_THROWS_AS(validate(config(10), empty), ConfigError);
    CHECK_NOTHROW(validate(config(10), kCube));
}

TEST_CASE("non-dominated sorting") {
    const std::vector<Objectives> objs{{1.0, 1.0}, {2.0, 2.0}, {0.5, 0.5}, {1.0, 2.0}, {0.0, 3.0}};
    const auto fronts = nondominated_fronts(objs);
    REQUIRE(fronts.size() >= 2);
    CHECK(fronts[0] == std::vector<std::size_t>{0, 1, 2});
    CHECK(dominates({1.0, 1.0}, {1.0, 2.0}));
    CHECK_FALSE(dominates({1.0, 1.0}, {1.0, 1.0}));
}

TEST_CASE("NSGA-II fronts") {
    SUBCASE("mean and spread rising together form a full trade-off") {
        const auto r = nsga2_optimize(objectives([](double x) { return Objectives{x, x}; }), kUnit, config(40));
        check_mutually_nondominated(r);
        double lo = 1.0;
        double hi = 0.0;
        for (const auto& p : r.front) {
            lo = std::min(lo, p.genome[0]);
            hi = std::max(hi, p.genome[0]);
        }
        CHECK(lo <= 0.01);
        CHECK(hi >= 0.99);
        for (std::size_t i = 1; i < r.front.size(); ++i) {
            CHECK(r.front[i].objectives.mean <= r.front[i - 1].objectives.mean);
        }
    }
    SUBCASE("aligned objectives collapse to one point") {
        const auto r = nsga2_optimize(objectives([](double x) { return Objectives{x, 1.0 - x}; }), kUnit, config(40));
        check_mutually_nondominated(r);
        REQUIRE(r.front.size() == 1);
        CHECK(r.front.front().genome[0] >= 0.99);
    }
}

TEST_CASE("design space") {
    DesignSpace space;
    space.fixed[0] = 0.39;
    space.fixed[2] = 0.013;
    CHECK(space.dimension() == 1);
    const auto d = space.to_design({0.7});
    CHECK(d == DesignPoint{0.39, 0.7, 0.013});
    CHECK(space.to_genome(d) == Genome{0.7});
    CHECK(space.contains(d));
    space.fixed[1] = 0.5;
    CHECK_THROWS(validate(space));
}

TEST_CASE("fitness evaluation") {
    vines::stochastic::McOptions mc;
    mc.n = 16;
    mc.evaluator = [](const SampledInputs& s, double) { return 100.0 * s.kappa; };
    vines::stochastic::UncertaintyModel u;
    u.design_sd = {0.0, 0.0, 0.0};

    SUBCASE("stub statistics pass through and repeats hit the cache") {
        FitnessEvaluator f(u, mc);
        const std::vector<DesignPoint> ds{{0.4, 0.5, 0.5}, {0.4, 0.5, 0.5}, {0.2, 0.5, 0.5}};
        const auto o = f.evaluate(ds, 5);
        CHECK(o[0].mean == doctest::Approx(40.0));
        CHECK(o[0].sigma == 0.0);
        CHECK(o[0] == o[1]);
        CHECK(o[2].mean == doctest::Approx(20.0));
        CHECK(f.evaluations() == 3);
        CHECK(f.cache_hits() == 1);
        CHECK(f.simulations() == 2 * mc.n);
        f.evaluate(ds, 6);
        CHECK(f.simulations() == 4 * mc.n);
    }
    SUBCASE("rejected estimates score worst and are logged") {
        mc.evaluator = [](const SampledInputs&, double) -> double { throw std::runtime_error("stub"); };
        FitnessEvaluator f(u, mc);
        const std::vector<DesignPoint> ds{{0.4, 0.5, 0.5}};
        const auto o = f.evaluate(ds, 1);
        CHECK(o[0].mean == -std::numeric_limits<double>::infinity());
        CHECK(o[0].sigma == std::numeric_limits<double>::infinity());
        CHECK(f.log().size() == 1);
    }
    SUBCASE("trivial objective reaches its known optimum") {
        GaConfig cfg = config(30);
        cfg.mc_samples = 4;
        vines::stochastic::McOptions final_mc = mc;
        final_mc.n = 8;
        const auto best = optimize_design(DesignSpace{}, u, cfg, final_mc);
        CHECK(best.design.mu_kappa >= 0.99);
        CHECK(best.estimate.mean == doctest::Approx(100.0 * best.design.mu_kappa));
        CHECK(best.budget.simulations > 0);
    }
}
