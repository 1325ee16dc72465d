// Real-coded genetic algorithms over box-bounded genomes.
//
// Both drivers evaluate a whole generation at once through a batch callback
// that receives a per-generation seed, so a noisy objective can use common
// random numbers within a generation and fresh ones across generations.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace vines::optimizer {

using Genome = std::vector<double>;

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

struct GaConfig {
    std::size_t population = 32;
    std::size_t generations = 40;
    std::size_t tournament = 2;
    double crossover_rate = 0.9;
    double sbx_eta = 15.0;
    double mutation_rate = -1.0; ///< negative: 1 / number of variables
    double mutation_sd_fraction = 0.05;
    std::size_t elites = 2;
    std::uint64_t root_seed = 1;
    std::size_t mc_samples = 200;
    double horizon = 30.0;
    unsigned threads = 1;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Throws ConfigError when the configuration or bounds are unusable.
void validate(const GaConfig& cfg, std::span<const Interval> bounds);

/// Seed handed to the fitness callback for generation `generation`.
std::uint64_t generation_seed(std::uint64_t root_seed, std::size_t generation);

using BatchFitness = std::function<std::vector<double>(std::span<const Genome>, std::uint64_t seed)>;

/// Adapts a deterministic scalar function to the batch interface.
BatchFitness pointwise(std::function<double(const Genome&)> f);

struct GenerationStats {
    std::size_t generation = 0;
    double best = 0.0;      ///< best fitness in this generation
    double mean = 0.0;      ///< mean over finite fitness values
    double best_ever = 0.0;
};

struct GaResult {
    Genome best;
    double best_fitness = 0.0;
    std::vector<GenerationStats> history;
    std::vector<Genome> champions; ///< best individual of each generation
    std::size_t evaluations = 0;
};

/// Maximizes `fitness`: tournament selection, simulated binary crossover,
/// Gaussian mutation and elitism. Returns the best individual ever evaluated.
GaResult ga_optimize(const BatchFitness& fitness, std::span<const Interval> bounds, const GaConfig& cfg);

/// (mean, sigma): the first is maximized, the second minimized.
struct Objectives {
    double mean = 0.0;
    double sigma = 0.0;

    friend bool operator==(const Objectives&, const Objectives&) = default;
};

[[nodiscard]] bool dominates(const Objectives& a, const Objectives& b);

using BatchObjectives = std::function<std::vector<Objectives>(std::span<const Genome>, std::uint64_t seed)>;

struct ParetoPoint {
    Genome genome;
    Objectives objectives;
};

struct ParetoHistory {
    std::size_t generation = 0;
    std::size_t front_size = 0;
    double best_mean = 0.0;
    double best_sigma = 0.0;
};

struct ParetoResult {
    std::vector<ParetoPoint> front; ///< mutually non-dominated, sorted by mean descending
    std::vector<ParetoHistory> history;
    std::size_t evaluations = 0;
};

/// Indices of `objs` grouped into successive non-dominated fronts.
std::vector<std::vector<std::size_t>> nondominated_fronts(std::span<const Objectives> objs);

/// NSGA-II with crowding-distance survival.
ParetoResult nsga2_optimize(const BatchObjectives& objectives, std::span<const Interval> bounds,
                            const GaConfig& cfg);

} // namespace vines::optimizer
