#include "vines/stochastic/monte_carlo.hpp"
#include "vines/stochastic/uncertainty.hpp"

#include <cmath>
#include <doctest.h>
#include <stdexcept>

using namespace vines::stochastic;

namespace {

McOptions stub_options(std::size_t n, SampleEvaluator f) {
    McOptions o;
    o.n = n;
    o.evaluator = std::move(f);
    return o;
}

} // namespace

TEST_CASE("sampling") {
    UncertaintyModel u;
    SUBCASE("zero design spread returns the means") {
        u.design_sd = {0.0, 0.0, 0.0};
        const DesignPoint d{0.4, 0.7, 0.02};
        for (std::uint64_t i = 0; i < 20; ++i) {
            const auto s = sample_inputs(d, u, i, 2024);
            CHECK(s.kappa == 0.4);
            CHECK(s.L_c == 0.7);
            CHECK(s.c_e == 0.02);
        }
    }
    SUBCASE("common random numbers across designs") {
        for (std::uint64_t i = 0; i < 50; ++i) {
            CHECK(sample_inputs({0.39, 0.68, 0.013}, u, i, 7).v1_0 == sample_inputs({0.9, 0.1, 0.5}, u, i, 7).v1_0);
        }
    }
    SUBCASE("substreams differ by variable, index and seed") {
        CHECK(stream_seed(1, 0, Variable::kappa) != stream_seed(1, 0, Variable::L_c));
        CHECK(stream_seed(1, 0, Variable::kappa) != stream_seed(1, 1, Variable::kappa));
        CHECK(stream_seed(1, 0, Variable::kappa) != stream_seed(2, 0, Variable::kappa));
    }
    SUBCASE("uniform initial velocity has the right mean") {
        double sum = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const double v = sample_inputs({}, u, static_cast<std::uint64_t>(i), 11).v1_0;
            CHECK(v >= 0.1);
            CHECK(v <= 1.0);
            sum += v;
        }
        CHECK(std::abs(sum / n - 0.55) < 0.01);
    }
    SUBCASE("clamping keeps parameters inside the design box") {
        u.design_sd = {0.5, 0.5, 0.5};
        for (std::uint64_t i = 0; i < 2000; ++i) {
            const auto s = sample_inputs({0.002, 0.999, 0.5}, u, i, 3);
            for (const double v : {s.kappa, s.L_c, s.c_e}) {
                CHECK(v >= 0.001);
                CHECK(v <= 1.0);
            }
        }
    }
    SUBCASE("invalid models are rejected") {
        u.v1 = AleatoryModel::uniform(1.0, 0.1);
        CHECK_THROWS(validate(u));
    }
}

TEST_CASE("summary statistics") {
    const std::vector<double> v{0.2, 0.4, 0.6, 0.8};
    const auto e = summarize(v);
    CHECK(e.mean == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(e.sigma == doctest::Approx(0.2581988897).epsilon(1e-9));
    CHECK(ci95_half_width(15.59, 1000) == doctest::Approx(1.96 * 15.59 / std::sqrt(1000.0)).epsilon(1e-15));
    CHECK(std::round((69.74 - ci95_half_width(15.59, 1000)) * 100.0) / 100.0 == doctest::Approx(68.77));
    CHECK(std::round((69.74 + ci95_half_width(15.59, 1000)) * 100.0) / 100.0 == doctest::Approx(70.71));
}

TEST_CASE("Monte Carlo estimates with injected evaluators") {
    SUBCASE("constant objective") {
        const auto e = mc_estimate({}, {}, stub_options(64, [](const SampledInputs&, double) { return 50.0; }));
        CHECK(e.mean == 50.0);
        CHECK(e.sigma == 0.0);
        CHECK(e.n == 64);
    }
    SUBCASE("failed samples are excluded and counted") {
        auto o = stub_options(100, [](const SampledInputs& s, double) {
            if (s.v1_0 > 0.97) {
                throw std::runtime_error("stub failure");
            }
            return s.v1_0;
        });
        const auto e = mc_estimate({}, {}, o);
        CHECK(e.failures > 0);
        CHECK(e.n + e.failures == 100);
        o.max_failure_rate = 0.0;
        CHECK_THROWS_AS(mc_estimate({}, {}, o), EstimateRejected);
    }
    SUBCASE("thread count does not change the result") {
        auto o = stub_options(500, [](const SampledInputs& s, double) { return 100.0 * s.v1_0 * s.kappa; });
        const auto one = mc_estimate({}, {}, o);
        o.threads = 4;
        const auto four = mc_estimate({}, {}, o);
        CHECK(one.mean == four.mean);
        CHECK(one.sigma == four.sigma);
        CHECK(one.ci_lo == four.ci_lo);
    }
}

TEST_CASE("Monte Carlo with the simulator") {
    UncertaintyModel u;
    McOptions o;
    o.n = 40;
    SUBCASE("bit-identical across runs and thread counts") {
        const auto a = mc_estimate({}, u, o);
        o.threads = 3;
        const auto b = mc_estimate({}, u, o);
        CHECK(a.mean == b.mean);
        CHECK(a.sigma == b.sigma);
        CHECK(a.mean > 0.0);
        CHECK(a.mean < 100.0);
    }
    SUBCASE("comparison matches single estimates and duplicates agree") {
        const std::vector<DesignPoint> designs{{0.39, 0.68, 0.013}, {0.39, 0.68, 0.013}, {0.25, 1.0, 0.011}};
        const auto cmp = compare_designs(designs, u, o);
        REQUIRE(cmp.estimates.size() == 3);
        CHECK(cmp.efficiency[0] == cmp.efficiency[1]);
        CHECK(cmp.estimates[0].mean == mc_estimate(designs[0], u, o).mean);
        CHECK(cmp.estimates[2].mean == mc_estimate(designs[2], u, o).mean);
        CHECK(cmp.v1_0.size() == o.n);
    }
    SUBCASE("standard error shrinks as one over root n") {
        std::vector<double> se;
        for (const std::size_t n : {100, 400, 1600}) {
            o.n = n;
            const auto e = mc_estimate({}, u, o);
            se.push_back(e.sigma / std::sqrt(static_cast<double>(n)));
        }
        CHECK(se[0] / se[1] == doctest::Approx(2.0).epsilon(0.2));
        CHECK(se[1] / se[2] == doctest::Approx(2.0).epsilon(0.2));
    }
}
