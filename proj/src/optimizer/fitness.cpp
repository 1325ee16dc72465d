#include "vines/optimizer/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace vines::optimizer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double component(const stochastic::DesignPoint& d, std::size_t i) {
    return i == 0 ? d.mu_kappa : (i == 1 ? d.mu_Lc : d.mu_ce);
}

long long quantize(double v) { return std::llround(v * 1e6); }

stochastic::McOptions search_options(const stochastic::McOptions& base, const GaConfig& cfg) {
    stochastic::McOptions mc = base;
    mc.n = cfg.mc_samples;
    mc.horizon = cfg.horizon;
    mc.threads = cfg.threads;
    return mc;
}

} // namespace

std::vector<Interval> DesignSpace::free_bounds() const {
    std::vector<Interval> out;
    for (std::size_t i = 0; i < 3; ++i) {
        if (!fixed[i]) {
            out.push_back(bounds[i]);
        }
    }
    return out;
}

std::size_t DesignSpace::dimension() const { return free_bounds().size(); }

stochastic::DesignPoint DesignSpace::to_design(const Genome& g) const {
    if (g.size() != dimension()) {
        throw ConfigError("genome length does not match the design space");
    }
    std::array<double, 3> v{};
    std::size_t k = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        v[i] = fixed[i] ? *fixed[i] : g[k++];
    }
    return {v[0], v[1], v[2]};
}

Genome DesignSpace::to_genome(const stochastic::DesignPoint& d) const {
    Genome g;
    for (std::size_t i = 0; i < 3; ++i) {
        if (!fixed[i]) {
            g.push_back(component(d, i));
        }
    }
    return g;
}

bool DesignSpace::contains(const stochastic::DesignPoint& d) const {
    for (std::size_t i = 0; i < 3; ++i) {
        const double v = component(d, i);
        if (!(v >= bounds[i].lo && v <= bounds[i].hi)) {
            return false;
        }
    }
    return true;
}

void validate(const DesignSpace& space) {
    for (std::size_t i = 0; i < 3; ++i) {
        if (!(space.bounds[i].lo < space.bounds[i].hi)) {
            throw ConfigError("design bounds must satisfy lo < hi");
        }
        if (space.fixed[i] && !(*space.fixed[i] >= space.bounds[i].lo && *space.fixed[i] <= space.bounds[i].hi)) {
            throw ConfigError("fixed design value lies outside its bounds");
        }
    }
    if (space.dimension() == 0) {
        throw ConfigError("every design variable is fixed");
    }
}

FitnessEvaluator::FitnessEvaluator(stochastic::UncertaintyModel u, stochastic::McOptions mc)
    : u_(u), mc_(std::move(mc)) {
    stochastic::validate(u_);
    if (mc_.n < 2) {
        throw ConfigError("Monte Carlo sample count must be at least 2");
    }
}

std::vector<Objectives> FitnessEvaluator::evaluate(std::span<const stochastic::DesignPoint> designs,
                                                   std::uint64_t seed) {
    std::vector<Objectives> out;
    out.reserve(designs.size());
    for (const auto& d : designs) {
        ++evaluations_;
        const Key key{quantize(d.mu_kappa), quantize(d.mu_Lc), quantize(d.mu_ce), seed};
        if (const auto it = cache_.find(key); it != cache_.end()) {
            ++cache_hits_;
            out.push_back(it->second);
            continue;
        }
        Objectives o{-kInf, kInf};
        stochastic::McOptions mc = mc_;
        mc.root_seed = seed;
        try {
            const auto est = stochastic::mc_estimate(d, u_, mc);
            o = {est.mean, est.sigma};
            simulations_ += est.simulations;
        } catch (const stochastic::EstimateRejected& e) {
            simulations_ += e.n();
            log_.push_back({d, seed, e.what()});
        }
        cache_.emplace(key, o);
        out.push_back(o);
    }
    return out;
}

DesignOptimum optimize_design(const DesignSpace& space, const stochastic::UncertaintyModel& u, const GaConfig& cfg,
                              const stochastic::McOptions& final_mc) {
    validate(space);
    FitnessEvaluator evaluator(u, search_options(final_mc, cfg));
    const BatchFitness fitness = [&](std::span<const Genome> genomes, std::uint64_t seed) {
        std::vector<stochastic::DesignPoint> designs;
        designs.reserve(genomes.size());
        for (const auto& g : genomes) {
            designs.push_back(space.to_design(g));
        }
        std::vector<double> values;
        for (const auto& o : evaluator.evaluate(designs, seed)) {
            values.push_back(o.mean);
        }
        return values;
    };
    const auto bounds = space.free_bounds();
    const GaResult ga = ga_optimize(fitness, bounds, cfg);

    DesignOptimum out;
    out.search_fitness = ga.best_fitness;
    out.history = ga.history;

    stochastic::McOptions mc = final_mc;
    mc.horizon = cfg.horizon;
    mc.threads = cfg.threads;

    std::vector<stochastic::DesignPoint> candidates;
    for (const auto& g : ga.champions) {
        const auto d = space.to_design(g);
        const bool seen = std::any_of(candidates.begin(), candidates.end(), [&d](const auto& c) {
            return quantize(c.mu_kappa) == quantize(d.mu_kappa) && quantize(c.mu_Lc) == quantize(d.mu_Lc) &&
                   quantize(c.mu_ce) == quantize(d.mu_ce);
        });
        if (!seen) {
            candidates.push_back(d);
        }
    }
    FitnessEvaluator selector(u, mc);
    const auto scores = selector.evaluate(candidates, generation_seed(cfg.root_seed, cfg.generations));
    std::size_t pick = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        out.candidates.push_back({candidates[i], scores[i]});
        if (scores[i].mean > scores[pick].mean) {
            pick = i;
        }
    }
    out.design = candidates[pick];
    out.estimate = stochastic::mc_estimate(out.design, u, mc);

    out.budget = {evaluator.evaluations() + selector.evaluations(), evaluator.cache_hits() + selector.cache_hits(),
                  evaluator.simulations() + selector.simulations() + out.estimate.simulations};
    out.log = evaluator.log();
    out.log.insert(out.log.end(), selector.log().begin(), selector.log().end());
    return out;
}

DesignFront pareto_design(const DesignSpace& space, const stochastic::UncertaintyModel& u, const GaConfig& cfg,
                          const stochastic::McOptions& base_mc) {
    validate(space);
    FitnessEvaluator evaluator(u, search_options(base_mc, cfg));
    const BatchObjectives objectives = [&](std::span<const Genome> genomes, std::uint64_t seed) {
        std::vector<stochastic::DesignPoint> designs;
        designs.reserve(genomes.size());
        for (const auto& g : genomes) {
            designs.push_back(space.to_design(g));
        }
        return evaluator.evaluate(designs, seed);
    };
    const auto bounds = space.free_bounds();
    const ParetoResult pr = nsga2_optimize(objectives, bounds, cfg);

    DesignFront out;
    for (const auto& p : pr.front) {
        out.front.push_back({space.to_design(p.genome), p.objectives});
    }
    out.history = pr.history;
    out.budget = {evaluator.evaluations(), evaluator.cache_hits(), evaluator.simulations()};
    out.log = evaluator.log();
    return out;
}

} // namespace vines::optimizer
