#include "vines/optimizer/genetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace vines::optimizer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Variation {
public:
    Variation(std::span<const Interval> bounds, const GaConfig& cfg)
        : bounds_(bounds.begin(), bounds.end()),
          cfg_(cfg),
          mutation_rate_(cfg.mutation_rate < 0.0 ? 1.0 / static_cast<double>(bounds.size()) : cfg.mutation_rate),
          rng_(mix(cfg.root_seed ^ 0x6761ULL)) {}

    Genome random_genome() {
        Genome g(bounds_.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] = std::uniform_real_distribution<double>(bounds_[i].lo, bounds_[i].hi)(rng_);
        }
        return g;
    }

    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

    /// Two children from two parents.
    std::pair<Genome, Genome> offspring(const Genome& a, const Genome& b) {
        Genome c1 = a;
        Genome c2 = b;
        if (unit() < cfg_.crossover_rate) {
            sbx(c1, c2);
        }
        mutate(c1);
        mutate(c2);
        return {std::move(c1), std::move(c2)};
    }

private:
    void sbx(Genome& c1, Genome& c2) {
        const double exponent = 1.0 / (cfg_.sbx_eta + 1.0);
        for (std::size_t i = 0; i < c1.size(); ++i) {
            // Each variable draws both numbers so the stream does not depend on the branch.
            const double swap_draw = unit();
            const double u = unit();
            if (swap_draw > 0.5 || std::abs(c1[i] - c2[i]) < 1e-14) {
                continue;
            }
            const double beta = u <= 0.5 ? std::pow(2.0 * u, exponent) : std::pow(1.0 / (2.0 * (1.0 - u)), exponent);
            const double p1 = c1[i];
            const double p2 = c2[i];
            c1[i] = clamp(i, 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2));
            c2[i] = clamp(i, 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2));
        }
    }

    void mutate(Genome& g) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double draw = unit();
            const double step = std::normal_distribution<double>(0.0, 1.0)(rng_);
            if (draw < mutation_rate_) {
                g[i] = clamp(i, g[i] + step * cfg_.mutation_sd_fraction * (bounds_[i].hi - bounds_[i].lo));
            }
        }
    }

    double clamp(std::size_t i, double v) const { return std::clamp(v, bounds_[i].lo, bounds_[i].hi); }

    std::vector<Interval> bounds_;
    GaConfig cfg_;
    double mutation_rate_;
    std::mt19937_64 rng_;
};

double finite_or_floor(double v) { return std::isnan(v) ? -kInf : v; }

std::vector<double> crowding_distance(std::span<const Objectives> objs, const std::vector<std::size_t>& front) {
    std::vector<double> dist(front.size(), 0.0);
    if (front.size() <= 2) {
        std::fill(dist.begin(), dist.end(), kInf);
        return dist;
    }
    for (const auto key : {&Objectives::mean, &Objectives::sigma}) {
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return objs[front[a]].*key < objs[front[b]].*key; });
        const double lo = objs[front[order.front()]].*key;
        const double hi = objs[front[order.back()]].*key;
        dist[order.front()] = kInf;
        dist[order.back()] = kInf;
        if (!(hi > lo)) {
            continue;
        }
        for (std::size_t k = 1; k + 1 < order.size(); ++k) {
            dist[order[k]] += (objs[front[order[k + 1]]].*key - objs[front[order[k - 1]]].*key) / (hi - lo);
        }
    }
    return dist;
}

} // namespace

void validate(const GaConfig& cfg, std::span<const Interval> bounds) {
    if (cfg.population < 4 || cfg.population % 2 != 0) {
        throw ConfigError("population must be even and at least 4");
    }
    if (cfg.generations < 1) {
        throw ConfigError("generations must be at least 1");
    }
    if (cfg.tournament < 1 || cfg.tournament > cfg.population) {
        throw ConfigError("tournament size must lie in [1, population]");
    }
    if (!(cfg.crossover_rate >= 0.0 && cfg.crossover_rate <= 1.0) || cfg.mutation_rate > 1.0) {
        throw ConfigError("rates must lie in [0, 1]");
    }
    if (!(cfg.sbx_eta >= 0.0) || !(cfg.mutation_sd_fraction >= 0.0)) {
        throw ConfigError("SBX index and mutation SD fraction must be non-negative");
    }
    if (cfg.elites >= cfg.population) {
        throw ConfigError("elite count must be below the population size");
    }
    if (bounds.empty()) {
        throw ConfigError("no free variables");
    }
    for (const auto& b : bounds) {
        if (!(b.lo < b.hi)) {
            throw ConfigError("every bound must satisfy lo < hi");
        }
    }
}

std::uint64_t generation_seed(std::uint64_t root_seed, std::size_t generation) {
    return mix(mix(root_seed ^ 0x5EEDULL) + generation);
}

BatchFitness pointwise(std::function<double(const Genome&)> f) {
    return [f = std::move(f)](std::span<const Genome> genomes, std::uint64_t) {
        std::vector<double> out;
        out.reserve(genomes.size());
        for (const auto& g : genomes) {
            out.push_back(f(g));
        }
        return out;
    };
}

GaResult ga_optimize(const BatchFitness& fitness, std::span<const Interval> bounds, const GaConfig& cfg) {
    validate(cfg, bounds);
    Variation variation(bounds, cfg);

    std::vector<Genome> population;
    population.reserve(cfg.population);
    for (std::size_t i = 0; i < cfg.population; ++i) {
        population.push_back(variation.random_genome());
    }

    GaResult result;
    result.best_fitness = -kInf;
    for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
        std::vector<double> fit = fitness(population, generation_seed(cfg.root_seed, gen));
        for (double& f : fit) {
            f = finite_or_floor(f);
        }
        result.evaluations += population.size();

        std::vector<std::size_t> order(population.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&fit](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });

        if (result.best.empty() || fit[order.front()] > result.best_fitness) {
            result.best = population[order.front()];
            result.best_fitness = fit[order.front()];
        }
        result.champions.push_back(population[order.front()]);
        double sum = 0.0;
        std::size_t finite = 0;
        for (const double f : fit) {
            if (std::isfinite(f)) {
                sum += f;
                ++finite;
            }
        }
        result.history.push_back({gen, fit[order.front()], finite ? sum / static_cast<double>(finite) : -kInf,
                                  result.best_fitness});
        if (gen + 1 == cfg.generations) {
            break;
        }

        const auto tournament = [&] {
            std::size_t winner = variation.pick(population.size());
            for (std::size_t k = 1; k < cfg.tournament; ++k) {
                const std::size_t challenger = variation.pick(population.size());
                if (fit[challenger] > fit[winner]) {
                    winner = challenger;
                }
            }
            return winner;
        };

        std::vector<Genome> next;
        next.reserve(cfg.population);
        for (std::size_t e = 0; e < cfg.elites; ++e) {
            next.push_back(population[order[e]]);
        }
        while (next.size() < cfg.population) {
            const std::size_t a = tournament();
            const std::size_t b = tournament();
            auto [c1, c2] = variation.offspring(population[a], population[b]);
            next.push_back(std::move(c1));
            if (next.size() < cfg.population) {
                next.push_back(std::move(c2));
            }
        }
        population = std::move(next);
    }
    return result;
}

bool dominates(const Objectives& a, const Objectives& b) {
    const bool no_worse = a.mean >= b.mean && a.sigma <= b.sigma;
    const bool better = a.mean > b.mean || a.sigma < b.sigma;
    return no_worse && better;
}

std::vector<std::vector<std::size_t>> nondominated_fronts(std::span<const Objectives> objs) {
    const std::size_t n = objs.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            if (dominates(objs[i], objs[j])) {
                dominated[i].push_back(j);
            } else if (dominates(objs[j], objs[i])) {
                ++count[i];
            }
        }
        if (count[i] == 0) {
            fronts[0].push_back(i);
        }
    }
    for (std::size_t f = 0; !fronts[f].empty(); ++f) {
        std::vector<std::size_t> next;
        for (const std::size_t i : fronts[f]) {
            for (const std::size_t j : dominated[i]) {
                if (--count[j] == 0) {
                    next.push_back(j);
                }
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
    }
    fronts.pop_back();
    return fronts;
}

ParetoResult nsga2_optimize(const BatchObjectives& objectives, std::span<const Interval> bounds,
                            const GaConfig& cfg) {
    validate(cfg, bounds);
    Variation variation(bounds, cfg);

    const auto sanitize = [](std::vector<Objectives> objs) {
        for (auto& o : objs) {
            if (!std::isfinite(o.mean) || !std::isfinite(o.sigma)) {
                o = {-kInf, kInf};
            }
        }
        return objs;
    };

    std::vector<Genome> population;
    for (std::size_t i = 0; i < cfg.population; ++i) {
        population.push_back(variation.random_genome());
    }
    std::vector<Objectives> objs = sanitize(objectives(population, generation_seed(cfg.root_seed, 0)));

    ParetoResult result;
    result.evaluations = population.size();

    const auto record = [&result](std::size_t gen, std::span<const Objectives> o, const std::vector<std::size_t>& front) {
        ParetoHistory h{gen, front.size(), -kInf, kInf};
        for (const std::size_t i : front) {
            h.best_mean = std::max(h.best_mean, o[i].mean);
            h.best_sigma = std::min(h.best_sigma, o[i].sigma);
        }
        result.history.push_back(h);
    };
    record(0, objs, nondominated_fronts(objs).front());

    for (std::size_t gen = 1; gen < cfg.generations; ++gen) {
        // Rank and crowding of the current parents drive mating selection.
        std::vector<std::size_t> rank(population.size());
        std::vector<double> crowd(population.size());
        const auto fronts = nondominated_fronts(objs);
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            const auto dist = crowding_distance(objs, fronts[f]);
            for (std::size_t k = 0; k < fronts[f].size(); ++k) {
                rank[fronts[f][k]] = f;
                crowd[fronts[f][k]] = dist[k];
            }
        }
        const auto better = [&](std::size_t a, std::size_t b) {
            return rank[a] < rank[b] || (rank[a] == rank[b] && crowd[a] > crowd[b]);
        };
        const auto tournament = [&] {
            std::size_t winner = variation.pick(population.size());
            for (std::size_t k = 1; k < cfg.tournament; ++k) {
                const std::size_t challenger = variation.pick(population.size());
                if (better(challenger, winner)) {
                    winner = challenger;
                }
            }
            return winner;
        };

        std::vector<Genome> combined = population;
        while (combined.size() < 2 * cfg.population) {
            auto [c1, c2] = variation.offspring(population[tournament()], population[tournament()]);
            combined.push_back(std::move(c1));
            if (combined.size() < 2 * cfg.population) {
                combined.push_back(std::move(c2));
            }
        }
        // Parents are re-evaluated with the new generation's seed.
        const auto combined_objs = sanitize(objectives(combined, generation_seed(cfg.root_seed, gen)));
        result.evaluations += combined.size();

        std::vector<std::size_t> survivors;
        for (const auto& front : nondominated_fronts(combined_objs)) {
            if (survivors.size() + front.size() <= cfg.population) {
                survivors.insert(survivors.end(), front.begin(), front.end());
                continue;
            }
            const auto dist = crowding_distance(combined_objs, front);
            std::vector<std::size_t> order(front.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&dist](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
            for (std::size_t k = 0; survivors.size() < cfg.population; ++k) {
                survivors.push_back(front[order[k]]);
            }
            break;
        }

        std::vector<Genome> next;
        std::vector<Objectives> next_objs;
        for (const std::size_t i : survivors) {
            next.push_back(combined[i]);
            next_objs.push_back(combined_objs[i]);
        }
        population = std::move(next);
        objs = std::move(next_objs);
        record(gen, objs, nondominated_fronts(objs).front());
    }

    const auto final_fronts = nondominated_fronts(objs);
    for (const std::size_t i : final_fronts.front()) {
        const bool duplicate = std::any_of(result.front.begin(), result.front.end(),
                                           [&](const ParetoPoint& p) { return p.genome == population[i]; });
        if (!duplicate && std::isfinite(objs[i].mean)) {
            result.front.push_back({population[i], objs[i]});
        }
    }
    std::stable_sort(result.front.begin(), result.front.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        return a.objectives.mean > b.objectives.mean;
    });
    return result;
}

} // namespace vines::optimizer
