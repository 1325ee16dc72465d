// Monte Carlo fitness of absorber designs and the design-level optimizers
// built on it.
#pragma once

#include "vines/optimizer/genetic.hpp"
#include "vines/stochastic/monte_carlo.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace vines::optimizer {

/// Box for (mu_kappa, mu_Lc, mu_ce). Variables with a fixed value are left out
/// of the genome.
struct DesignSpace {
    std::array<Interval, 3> bounds{{{0.001, 1.0}, {0.001, 1.0}, {0.001, 1.0}}};
    std::array<std::optional<double>, 3> fixed{};

    [[nodiscard]] std::vector<Interval> free_bounds() const;
    [[nodiscard]] std::size_t dimension() const;
    [[nodiscard]] stochastic::DesignPoint to_design(const Genome& g) const;
    [[nodiscard]] Genome to_genome(const stochastic::DesignPoint& d) const;
    [[nodiscard]] bool contains(const stochastic::DesignPoint& d) const;
};

/// Throws ConfigError on empty boxes, fixed values outside their bounds or no free variable.
void validate(const DesignSpace& space);

struct FitnessLogEntry {
    stochastic::DesignPoint design;
    std::uint64_t seed = 0;
    std::string message;
};

/// Evaluates designs by Monte Carlo, caching by (design rounded to 1e-6, seed).
/// A rejected estimate scores mean -inf and sigma +inf and is logged.
class FitnessEvaluator {
public:
    /// `mc.root_seed` is ignored: every call supplies its own seed.
    FitnessEvaluator(stochastic::UncertaintyModel u, stochastic::McOptions mc);

    std::vector<Objectives> evaluate(std::span<const stochastic::DesignPoint> designs, std::uint64_t seed);

    [[nodiscard]] std::size_t evaluations() const { return evaluations_; }
    [[nodiscard]] std::size_t cache_hits() const { return cache_hits_; }
    [[nodiscard]] std::size_t simulations() const { return simulations_; }
    [[nodiscard]] const std::vector<FitnessLogEntry>& log() const { return log_; }

private:
    using Key = std::tuple<long long, long long, long long, std::uint64_t>;

    stochastic::UncertaintyModel u_;
    stochastic::McOptions mc_;
    std::map<Key, Objectives> cache_;
    std::size_t evaluations_ = 0;
    std::size_t cache_hits_ = 0;
    std::size_t simulations_ = 0;
    std::vector<FitnessLogEntry> log_;
};

struct Budget {
    std::size_t evaluations = 0;
    std::size_t cache_hits = 0;
    std::size_t simulations = 0; ///< including the final re-evaluation
};

struct ScoredDesign {
    stochastic::DesignPoint design;
    Objectives objectives;
};

struct DesignOptimum {
    stochastic::DesignPoint design;
    double search_fitness = 0.0;      ///< best mean seen during the search
    /// Generation champions re-scored with the final sample size on a seed
    /// unused by the search; the best of them is the reported design.
    std::vector<ScoredDesign> candidates;
    stochastic::McEstimate estimate;  ///< final re-evaluation on the reporting seed
    std::vector<GenerationStats> history;
    Budget budget;
    std::vector<FitnessLogEntry> log;
};

/// Maximizes the expected efficiency with `cfg.mc_samples` samples per
/// evaluation. Each generation's champion is then re-scored with `final_mc.n`
/// samples on a fresh seed, and the winner is reported with `final_mc` (its n
/// and seed). Re-scoring keeps a lucky search seed from picking the design.
DesignOptimum optimize_design(const DesignSpace& space, const stochastic::UncertaintyModel& u, const GaConfig& cfg,
                              const stochastic::McOptions& final_mc);

struct DesignFront {
    std::vector<ScoredDesign> front; ///< sorted by mean, descending
    std::vector<ParetoHistory> history;
    Budget budget;
    std::vector<FitnessLogEntry> log;
};

/// Bi-objective search: maximize the mean efficiency, minimize its spread.
DesignFront pareto_design(const DesignSpace& space, const stochastic::UncertaintyModel& u, const GaConfig& cfg,
                          const stochastic::McOptions& base_mc);

} // namespace vines::optimizer
