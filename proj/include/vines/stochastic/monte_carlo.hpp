// Monte Carlo estimation of the expected absorber efficiency.
#pragma once

#include "vines/core/simulator.hpp"
#include "vines/stochastic/uncertainty.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vines::stochastic {

struct McEstimate {
    double mean = 0.0;  ///< percent
    double sigma = 0.0; ///< sample standard deviation, percent
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t n = 0;        ///< samples that entered the statistics
    std::size_t failures = 0; ///< samples excluded after a simulation failure
    std::size_t simulations = 0;
    std::uint64_t seed = 0;
};

/// Efficiency (percent) of one sample over `horizon`. Throws on failure.
using SampleEvaluator = std::function<double(const SampledInputs&, double horizon)>;

/// Integrator settings used for Monte Carlo runs: no output grid, looser
/// tolerances than the single-trajectory default.
core::SimOptions mc_sim_options();

/// Dissipation-fraction efficiency of a simulated sample.
double simulate_efficiency(const SampledInputs& s, double horizon, const core::SimOptions& opts = mc_sim_options());

struct McOptions {
    std::size_t n = 1000;
    std::uint64_t root_seed = 2024;
    double horizon = 30.0;
    unsigned threads = 1;
    double max_failure_rate = 0.05;
    core::SimOptions sim = mc_sim_options();
    SampleEvaluator evaluator; ///< empty: simulate the model
};

/// Raised when more than McOptions::max_failure_rate of the samples failed.
class EstimateRejected : public std::runtime_error {
public:
    EstimateRejected(const std::string& what, std::size_t failures, std::size_t n)
        : std::runtime_error(what), failures_(failures), n_(n) {}
    [[nodiscard]] std::size_t failures() const { return failures_; }
    [[nodiscard]] std::size_t n() const { return n_; }

private:
    std::size_t failures_;
    std::size_t n_;
};

/// Half-width of the normal-theory 95% interval, 1.96 * sigma / sqrt(n).
double ci95_half_width(double sigma, std::size_t n);

/// Mean, (n-1) standard deviation and 95% interval of a sample set.
McEstimate summarize(std::span<const double> values, std::uint64_t seed = 0);

McEstimate mc_estimate(const DesignPoint& d, const UncertaintyModel& u, const McOptions& opts);

struct DesignComparison {
    std::vector<McEstimate> estimates;
    /// efficiency[design][sample], NaN where the sample failed
    std::vector<std::vector<double>> efficiency;
    /// aleatory draw of each sample, shared by every design
    std::vector<double> v1_0;
};

/// Evaluates every design on the same sample indices and seed. With a single
/// sample the estimates carry the value as mean and NaN spread.
DesignComparison compare_designs(std::span<const DesignPoint> designs, const UncertaintyModel& u,
                                 const McOptions& opts);

} // namespace vines::stochastic
