#include "vines/core/params.hpp"
#include "vines/core/simulator.hpp"
#include "vines/energy/cycles.hpp"
#include "vines/energy/ledger.hpp"
#include "vines/energy/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <numbers>
#include <random>

using namespace vines;

namespace {

core::Trajectory closed_form_run(double kappa, double t_end = 1.0) {
    return core::simulate({0.05, 0.0, 0.0, kappa, 0.25}, {0.0, 0.5, 0.0, 0.0}, t_end);
}

std::vector<double> grid(std::size_t n, double dt) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = static_cast<double>(i) * dt;
    }
    return t;
}

std::size_t argmax_magnitude(const std::vector<energy::SpectrumBin>& bins) {
    return static_cast<std::size_t>(std::max_element(bins.begin(), bins.end(), [](const auto& a, const auto& b) {
                                        return a.magnitude < b.magnitude;
                                    }) -
                                    bins.begin());
}

} // namespace

TEST_CASE("ledger at the start and in the conservative case") {
    const auto ledger = energy::build_ledger(closed_form_run(1.0, 20.0));
    CHECK(ledger.e_r.front() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ledger.e_imp.front() == 0.0);
    for (std::size_t i = 0; i < ledger.size(); ++i) {
        CHECK(std::abs(ledger.e_mech[i] - 1.0) < 1e-8);
        CHECK(ledger.e_damp[i] == 0.0);
        CHECK(ledger.e_coil[i] == 0.0);
        CHECK(ledger.e_imp[i] == 0.0);
        CHECK(std::abs(ledger.e_r[i] - 1.0) < 1e-8);
    }
    CHECK(energy::relative_energy(ledger, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("single closed-form impact loss") {
    const auto tr = closed_form_run(0.54);
    const auto ledger = energy::build_ledger(tr);
    const double tau_star = tr.impacts.front().tau;
    const double v = 0.5 * std::cos(std::numbers::pi / 6.0);
    const double expected = 0.05 * (1.0 - 0.54 * 0.54) * v * v / (1.05 * 0.25);
    CHECK(std::abs(expected - 0.025300) < 1e-6);
    CHECK(std::abs(energy::ledger_at(ledger, tau_star).e_imp - 0.025300) < 1e-5);
    CHECK(std::abs(energy::relative_energy(ledger, tau_star + 1e-9) - 0.974700) < 1e-5);
}

TEST_CASE("ledger closure and the relative-energy identity on random runs") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        const core::SystemParams p{0.01 + 0.3 * u(rng), 0.5 * u(rng), 0.1 * u(rng), 0.2 + 0.8 * u(rng), 0.1 + u(rng)};
        const auto tr = core::simulate(p, {0.0, 0.2 + 0.8 * u(rng), (1.8 * u(rng) - 0.9) * p.L_c, 0.0}, 50.0);
        const auto ledger = energy::build_ledger(tr);
        for (std::size_t i = 0; i < ledger.size(); ++i) {
            CHECK(std::abs(ledger.e_mech[i] + ledger.e_damp[i] + ledger.e_coil[i] + ledger.e_imp[i] - 1.0) < 1e-8);
            CHECK(std::abs(ledger.e_r[i] - (1.0 - ledger.e_imp[i])) < 1e-6);
        }
    }
}

TEST_CASE("efficiency modes") {
    SUBCASE("no dissipation channel in the absorber") {
        const auto tr = core::simulate({0.05, 0.2, 0.0, 1.0, 0.3}, {0.0, 0.5, 0.0, 0.0}, 30.0);
        for (const double h : {5.0, 15.0, 30.0}) {
            CHECK(energy::efficiency(tr, energy::EfficiencyMode::dissipation_fraction, h).value ==
                  doctest::Approx(0.0).epsilon(1e-12));
        }
    }
    SUBCASE("lossless run averages to 100") {
        const auto tr = closed_form_run(1.0, 30.0);
        CHECK(energy::efficiency(tr, energy::EfficiencyMode::time_averaged_er, 30.0).value ==
              doctest::Approx(100.0).epsilon(1e-8));
    }
    SUBCASE("dissipation fraction grows with the horizon") {
        const core::SystemParams p{0.05, 0.2, core::coil_from_relative(0.05, 0.05), 0.54, 0.99};
        const auto tr = core::simulate(p, {0.0, 0.5, 0.97, 0.0}, 60.0);
        double prev = -1.0;
        for (double h = 1.0; h <= 60.0; h += 1.0) {
            const auto e = energy::efficiency(tr, energy::EfficiencyMode::dissipation_fraction, h);
            CHECK(e.value >= prev);
            CHECK(e.value == doctest::Approx(e.impact_share + e.coil_share));
            prev = e.value;
        }
    }
    SUBCASE("horizon beyond the trajectory is rejected") {
        CHECK_THROWS(energy::efficiency(closed_form_run(0.5, 10.0), energy::EfficiencyMode::dissipation_fraction, 20.0));
    }
}

TEST_CASE("harvested energy splits between load and coil") {
    const core::SystemParams p{0.05, 0.2, 0.05, 0.54, 0.99};
    const auto tr = core::simulate(p, {0.0, 0.5, 0.97, 0.0}, 30.0);
    const auto ledger = energy::build_ledger(tr);
    const double e_coil = ledger.e_coil.back();
    CHECK(e_coil > 0.0);
    CHECK(energy::harvested_energy(tr, 10.0, 0.0) == doctest::Approx(e_coil).epsilon(1e-12));
    CHECK(energy::harvested_energy(tr, 10.0, 10.0) == doctest::Approx(e_coil / 2.0).epsilon(1e-12));
    const auto no_coil = core::simulate({0.05, 0.2, 0.0, 0.54, 0.99}, {0.0, 0.5, 0.97, 0.0}, 30.0);
    CHECK(energy::harvested_energy(no_coil, 10.0, 10.0) == 0.0);
}

TEST_CASE("impacts per cycle") {
    SUBCASE("synthetic log") {
        const std::vector<double> bounds{0.0, 2.0 * std::numbers::pi, 4.0 * std::numbers::pi};
        const std::vector<double> times{1.0, 4.0, 7.3};
        const auto counts = energy::impacts_per_cycle(bounds, times);
        REQUIRE(counts.size() == 2);
        CHECK(counts[0].impacts == 2);
        CHECK(counts[1].impacts == 1);
    }
    SUBCASE("no impacts") {
        const auto tr = core::simulate({0.05, 0.2, 0.0, 0.5, 1e6}, {0.0, 0.5, 0.0, 0.0}, 30.0);
        const auto counts = energy::impacts_per_cycle(tr);
        CHECK(counts.size() >= 4);
        for (const auto& c : counts) {
            CHECK(c.impacts == 0);
        }
    }
    SUBCASE("reference parameters") {
        const core::SystemParams p{0.05, 0.2, core::coil_from_relative(0.05, 0.05), 0.54, 0.99};
        const auto tr = core::simulate(p, {0.0, 0.5, 0.97, 0.0}, 60.0);
        const auto counts = energy::impacts_per_cycle(tr);
        REQUIRE(counts.size() >= 5);
        const auto twos = std::count_if(counts.begin(), counts.begin() + 5, [](const auto& c) { return c.impacts == 2; });
        CHECK(twos >= 4);
        std::size_t total = 0;
        for (const auto& c : counts) {
            total += c.impacts;
        }
        const double covered_end = counts.back().tau_end;
        const auto covered = std::count_if(tr.impacts.begin(), tr.impacts.end(),
                                           [&](const auto& e) { return e.tau < covered_end; });
        CHECK(total == static_cast<std::size_t>(covered));
    }
}

TEST_CASE("Morlet wavelet transform") {
    const auto scales = energy::morlet_scales(0.01, 2.0, 64);
    CHECK(scales.size() == 64);
    CHECK(energy::morlet_frequency(energy::morlet_scale(0.3)) == doctest::Approx(0.3).epsilon(1e-14));

    const auto tau = grid(4096, 0.05);
    SUBCASE("zero signal") {
        const std::vector<double> zero(tau.size(), 0.0);
        const auto m = energy::cwt_morlet(tau, zero, scales);
        CHECK(std::all_of(m.data.begin(), m.data.end(), [](double v) { return v == 0.0; }));
    }
    SUBCASE("linearity") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> n(0.0, 1.0);
        std::vector<double> a(tau.size()), b(tau.size()), sum(tau.size()), twice(tau.size());
        for (std::size_t i = 0; i < tau.size(); ++i) {
            a[i] = n(rng);
            b[i] = n(rng);
            sum[i] = a[i] + b[i];
            twice[i] = 2.0 * a[i];
        }
        const auto ca = energy::cwt_morlet_complex(tau, a, scales);
        const auto cb = energy::cwt_morlet_complex(tau, b, scales);
        const auto cs = energy::cwt_morlet_complex(tau, sum, scales);
        const auto ma = energy::cwt_morlet(tau, a, scales);
        const auto m2 = energy::cwt_morlet(tau, twice, scales);
        double scale = 0.0;
        double err = 0.0;
        double err2 = 0.0;
        for (std::size_t k = 0; k < cs.data.size(); ++k) {
            scale = std::max(scale, std::abs(cs.data[k]));
            err = std::max(err, std::abs(cs.data[k] - ca.data[k] - cb.data[k]));
            err2 = std::max(err2, std::abs(m2.data[k] - 2.0 * ma.data[k]));
        }
        CHECK(err <= 1e-9 * scale);
        CHECK(err2 <= 1e-9 * scale);
    }
    SUBCASE("ridge of a pure tone") {
        std::vector<double> s(tau.size());
        for (std::size_t i = 0; i < tau.size(); ++i) {
            s[i] = std::sin(tau[i]);
        }
        const auto m = energy::cwt_morlet(tau, s, scales);
        const double target = energy::morlet_scale(1.0 / (2.0 * std::numbers::pi));
        for (std::size_t c = tau.size() / 4; c < 3 * tau.size() / 4; c += 97) {
            std::size_t best = 0;
            for (std::size_t r = 1; r < m.rows; ++r) {
                if (m(r, c) > m(best, c)) {
                    best = r;
                }
            }
            CHECK(std::abs(std::log(scales[best] / target)) <= std::abs(std::log(scales[1] / scales[0])));
        }
    }
}

TEST_CASE("amplitude spectrum") {
    const auto tau = grid(1000, 0.1);
    SUBCASE("zero signal") {
        const std::vector<double> zero(tau.size(), 0.0);
        for (const auto& b : energy::amplitude_spectrum(tau, zero)) {
            CHECK(b.magnitude == 0.0);
        }
    }
    SUBCASE("integer number of periods, no window") {
        std::vector<double> s(tau.size());
        const double f = 5.0 / 100.0;
        for (std::size_t i = 0; i < tau.size(); ++i) {
            s[i] = std::sin(2.0 * std::numbers::pi * f * tau[i]);
        }
        const auto bins = energy::amplitude_spectrum(tau, s, energy::Window::none);
        const auto k = argmax_magnitude(bins);
        CHECK(bins[k].frequency == doctest::Approx(f).epsilon(1e-12));
        for (std::size_t i = 0; i < bins.size(); ++i) {
            if (i != k) {
                CHECK(bins[i].magnitude < 1e-9 * bins[k].magnitude);
            }
        }
    }
    SUBCASE("linearity") {
        std::mt19937_64 rng(9);
        std::normal_distribution<double> n(0.0, 1.0);
        std::vector<double> a(tau.size()), b(tau.size()), sum(tau.size());
        for (std::size_t i = 0; i < tau.size(); ++i) {
            a[i] = n(rng);
            b[i] = n(rng);
            sum[i] = a[i] + b[i];
        }
        const auto fa = energy::one_sided_dft(tau, a);
        const auto fb = energy::one_sided_dft(tau, b);
        const auto fs = energy::one_sided_dft(tau, sum);
        double scale = 0.0;
        double err = 0.0;
        for (std::size_t k = 0; k < fs.size(); ++k) {
            scale = std::max(scale, std::abs(fs[k]));
            err = std::max(err, std::abs(fs[k] - fa[k] - fb[k]));
        }
        CHECK(err <= 1e-9 * scale);
    }
    SUBCASE("damped LO peak") {
        const auto tr = core::simulate({0.05, 0.2, 0.0, 0.5, 1e6}, {0.0, 0.5, 0.0, 0.0}, 400.0);
        const auto series = energy::uniform_series(tr);
        const auto bins = energy::amplitude_spectrum(series.tau, series.x1);
        const auto k = argmax_magnitude(bins);
        const double expected = std::sqrt(1.0 - 0.005 * 0.005) / (2.0 * std::numbers::pi);
        CHECK(std::abs(bins[k].frequency - expected) <= bins[1].frequency - bins[0].frequency);
    }
}
