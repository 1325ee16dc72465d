#include "vines/stochastic/monte_carlo.hpp"

#include "vines/energy/ledger.hpp"
#include "vines/util/parallel.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace vines::stochastic {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SampleRun {
    std::vector<double> values; ///< NaN marks a failed sample
    std::size_t simulations = 0;
};

SampleRun run_samples(const DesignPoint& d, const UncertaintyModel& u, const McOptions& opts) {
    const SampleEvaluator evaluate = opts.evaluator
                                         ? opts.evaluator
                                         : SampleEvaluator([&opts](const SampledInputs& s, double h) {
                                               return simulate_efficiency(s, h, opts.sim);
                                           });
    const auto one = [&](std::size_t i) {
        try {
            return evaluate(sample_inputs(d, u, i, opts.root_seed), opts.horizon);
        } catch (const std::exception&) {
            return kNaN;
        }
    };

    SampleRun run;
    if (u.degenerate()) {
        run.values.assign(opts.n, one(0));
        run.simulations = 1;
        return run;
    }
    run.values.resize(opts.n);
    util::parallel_for(opts.n, opts.threads, [&](std::size_t i) { run.values[i] = one(i); });
    run.simulations = opts.n;
    return run;
}

McEstimate finish(const SampleRun& run, const McOptions& opts) {
    std::vector<double> ok;
    ok.reserve(run.values.size());
    for (const double v : run.values) {
        if (!std::isnan(v)) {
            ok.push_back(v);
        }
    }
    const std::size_t failures = run.values.size() - ok.size();
    if (static_cast<double>(failures) > opts.max_failure_rate * static_cast<double>(run.values.size())) {
        throw EstimateRejected(fmt::format("{} of {} Monte Carlo samples failed", failures, run.values.size()),
                               failures, run.values.size());
    }
    McEstimate est;
    if (ok.size() >= 2) {
        est = summarize(ok, opts.root_seed);
    } else {
        // A single surviving sample has a mean but no spread.
        est.mean = ok.empty() ? kNaN : ok.front();
        est.sigma = est.ci_lo = est.ci_hi = kNaN;
        est.n = ok.size();
        est.seed = opts.root_seed;
    }
    est.failures = failures;
    est.simulations = run.simulations;
    return est;
}

} // namespace

core::SimOptions mc_sim_options() {
    core::SimOptions o;
    o.rel_tol = 1e-9;
    o.abs_tol = 1e-10;
    o.sample_dt = 0.0;
    return o;
}

double simulate_efficiency(const SampledInputs& s, double horizon, const core::SimOptions& opts) {
    const auto tr = core::simulate(s.params, s.init, horizon, opts);
    return energy::efficiency(tr, energy::EfficiencyMode::dissipation_fraction, horizon).value;
}

double ci95_half_width(double sigma, std::size_t n) { return 1.96 * sigma / std::sqrt(static_cast<double>(n)); }

McEstimate summarize(std::span<const double> values, std::uint64_t seed) {
    if (values.size() < 2) {
        throw std::domain_error("at least two samples are required");
    }
    const double n = static_cast<double>(values.size());
    const double mean = util::compensated_sum(values) / n;
    std::vector<double> sq;
    sq.reserve(values.size());
    for (const double v : values) {
        sq.push_back((v - mean) * (v - mean));
    }
    McEstimate est;
    est.mean = mean;
    est.sigma = std::sqrt(util::compensated_sum(sq) / (n - 1.0));
    const double half = ci95_half_width(est.sigma, values.size());
    est.ci_lo = mean - half;
    est.ci_hi = mean + half;
    est.n = values.size();
    est.simulations = values.size();
    est.seed = seed;
    return est;
}

McEstimate mc_estimate(const DesignPoint& d, const UncertaintyModel& u, const McOptions& opts) {
    if (opts.n < 2) {
        throw std::domain_error("Monte Carlo estimate needs n >= 2");
    }
    validate(u);
    return finish(run_samples(d, u, opts), opts);
}

DesignComparison compare_designs(std::span<const DesignPoint> designs, const UncertaintyModel& u,
                                 const McOptions& opts) {
    if (designs.empty()) {
        throw std::domain_error("no designs to compare");
    }
    if (opts.n < 1) {
        throw std::domain_error("comparison needs at least one sample");
    }
    validate(u);
    DesignComparison out;
    for (const auto& d : designs) {
        const SampleRun run = run_samples(d, u, opts);
        out.estimates.push_back(finish(run, opts));
        out.efficiency.push_back(run.values);
    }
    out.v1_0.reserve(opts.n);
    for (std::size_t i = 0; i < opts.n; ++i) {
        out.v1_0.push_back(sample_inputs(designs.front(), u, i, opts.root_seed).v1_0);
    }
    return out;
}

} // namespace vines::stochastic
