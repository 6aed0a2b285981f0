#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "edgecast/hw_model.hpp"
#include "edgecast/rng.hpp"

namespace edgecast {

inline std::vector<int> default_batch_choices() {
    std::vector<int> v;
    for (int b = 16; b <= 256; b += 16) v.push_back(b);
    return v;
}

inline std::vector<int> default_width_choices() {
    std::vector<int> v;
    for (int w = 8; w <= 64; w += 8) v.push_back(w);
    return v;
}

struct SearchSpace {
    ArchKind arch = ArchKind::Lstm;
    int input_len = 12;
    std::vector<int> bit_choices = {4, 6, 8};
    std::vector<int> batch_choices = default_batch_choices();
    std::vector<int> width_choices = default_width_choices();
    double log_lr_lo = -5.0;  // lr log-uniform in [1e-5, 1e-3]
    double log_lr_hi = -3.0;

    void validate() const {
        if (bit_choices.empty() || batch_choices.empty() || width_choices.empty())
            throw std::invalid_argument("search space has an empty choice list");
        if (!(log_lr_lo < log_lr_hi))
            throw std::invalid_argument("learning-rate bounds are inverted");
    }
};

struct Genome {
    int bits_idx = 0;
    int batch_idx = 0;
    int width_idx = 0;
    double log10_lr = -4.0;
};

enum class TrialStatus { Complete, Failed };

struct Trial {
    int id = -1;
    ArchKind arch = ArchKind::Lstm;
    int input_len = 0;
    int bitwidth = 8;
    int batch_size = 32;
    int width = 16;
    double learning_rate = 1e-3;
    uint64_t seed = 0;
    TrialStatus status = TrialStatus::Failed;
    double val_mse = std::numeric_limits<double>::quiet_NaN();
    double energy_mj = std::numeric_limits<double>::quiet_NaN();
    TrialCost cost{};
    bool feasible = false;
    double total_violation = std::numeric_limits<double>::infinity();
    std::vector<std::string> violations;
    double wall_time_s = 0.0;  // informational only, never serialized

    bool complete() const { return status == TrialStatus::Complete; }
};

struct EvalResult {
    double val_mse = 0.0;
    TrialCost cost{};
};

using Evaluator = std::function<EvalResult(const Trial&)>;

// strict bi-objective dominance under minimization
inline bool dominates(double a_mse, double a_energy, double b_mse, double b_energy) {
    if (!std::isfinite(a_mse) || !std::isfinite(a_energy) || !std::isfinite(b_mse) ||
        !std::isfinite(b_energy))
        throw std::invalid_argument("dominates: non-finite objective");
    return a_mse <= b_mse && a_energy <= b_energy && (a_mse < b_mse || a_energy < b_energy);
}

inline bool dominates(const Trial& a, const Trial& b) {
    return dominates(a.val_mse, a.energy_mj, b.val_mse, b.energy_mj);
}

namespace detail {

// Deb's constrained-domination, extended so failed trials always lose
inline int trial_class(const Trial& t) {
    if (!t.complete()) return 2;
    return t.feasible ? 0 : 1;
}

inline bool constrained_dominates(const Trial& a, const Trial& b) {
    const int ca = trial_class(a), cb = trial_class(b);
    if (ca != cb) return ca < cb;
    if (ca == 2) return false;
    if (ca == 1) return a.total_violation < b.total_violation;
    return dominates(a, b);
}

}  // namespace detail

// feasible, non-dominated trials; indices ordered by ascending val_mse
inline std::vector<size_t> pareto_extract(const std::vector<Trial>& trials) {
    std::vector<size_t> feas;
    for (size_t i = 0; i < trials.size(); ++i)
        if (trials[i].complete() && trials[i].feasible) feas.push_back(i);
    std::vector<size_t> front;
    for (size_t i : feas) {
        bool dominated = false;
        for (size_t j : feas)
            if (j != i && dominates(trials[j], trials[i])) {
                dominated = true;
                break;
            }
        if (!dominated) front.push_back(i);
    }
    std::sort(front.begin(), front.end(), [&](size_t a, size_t b) {
        if (trials[a].val_mse != trials[b].val_mse)
            return trials[a].val_mse < trials[b].val_mse;
        if (trials[a].energy_mj != trials[b].energy_mj)
            return trials[a].energy_mj < trials[b].energy_mj;
        return trials[a].id < trials[b].id;
    });
    return front;
}

// fast non-dominated sort over the constrained relation
inline std::vector<std::vector<size_t>> non_dominated_sort(const std::vector<Trial>& trials) {
    const size_t n = trials.size();
    std::vector<std::vector<size_t>> dominated_by(n);
    std::vector<int> count(n, 0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (detail::constrained_dominates(trials[i], trials[j]))
                dominated_by[i].push_back(j);
            else if (detail::constrained_dominates(trials[j], trials[i]))
                ++count[i];
        }
    std::vector<std::vector<size_t>> fronts;
    std::vector<size_t> current;
    for (size_t i = 0; i < n; ++i)
        if (count[i] == 0) current.push_back(i);
    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<size_t> next;
        for (size_t i : current)
            for (size_t j : dominated_by[i])
                if (--count[j] == 0) next.push_back(j);
        current = std::move(next);
    }
    return fronts;
}

// normalized objective-span sum; boundaries and degenerate fronts get infinity
inline std::vector<double> crowding_distance(const std::vector<Trial>& trials,
                                             const std::vector<size_t>& front) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(front.size(), 0.0);
    if (front.size() < 3) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    for (size_t i : front)
        if (!std::isfinite(trials[i].val_mse) || !std::isfinite(trials[i].energy_mj)) {
            std::fill(dist.begin(), dist.end(), inf);
            return dist;
        }
    for (int obj = 0; obj < 2; ++obj) {
        auto value = [&](size_t k) {
            return obj == 0 ? trials[front[k]].val_mse : trials[front[k]].energy_mj;
        };
        std::vector<size_t> order(front.size(), 0);
        for (size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return value(a) < value(b); });
        const double span = value(order.back()) - value(order.front());
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        if (span <= 0.0) continue;
        for (size_t k = 1; k + 1 < order.size(); ++k)
            dist[order[k]] += (value(order[k + 1]) - value(order[k - 1])) / span;
    }
    return dist;
}

// exact staircase hypervolume for 2-objective minimization against an upper
// reference corner; points at or beyond the reference contribute nothing
inline double hypervolume_2d(std::vector<std::pair<double, double>> pts,
                             std::pair<double, double> ref) {
    std::sort(pts.begin(), pts.end());
    double hv = 0.0;
    double ceiling = ref.second;
    for (const auto& [mse, energy] : pts) {
        if (mse >= ref.first || energy >= ceiling) continue;
        hv += (ref.first - mse) * (ceiling - energy);
        ceiling = energy;
    }
    return hv;
}

struct Census {
    int feasible = 0;
    int infeasible = 0;
    int failed = 0;
};

inline Census deployability_census(const std::vector<Trial>& trials) {
    Census c;
    for (const auto& t : trials) {
        if (!t.complete())
            ++c.failed;
        else if (t.feasible)
            ++c.feasible;
        else
            ++c.infeasible;
    }
    return c;
}

struct SearchSettings {
    int population = 20;
    int generations = 5;
    uint64_t seed = 0;
    int jobs = 1;
    double crossover_rate = 0.9;
    double sbx_eta = 15.0;
    double mutation_eta = 20.0;
};

struct SearchResult {
    std::vector<Trial> archive;
    std::vector<size_t> front;  // indices into archive
};

namespace detail {

inline Genome random_genome(const SearchSpace& sp, Rng& rng) {
    Genome g;
    g.bits_idx = int(rng.randint(0, int64_t(sp.bit_choices.size()) - 1));
    g.batch_idx = int(rng.randint(0, int64_t(sp.batch_choices.size()) - 1));
    g.width_idx = int(rng.randint(0, int64_t(sp.width_choices.size()) - 1));
    g.log10_lr = rng.uniform(sp.log_lr_lo, sp.log_lr_hi);
    return g;
}

inline Trial decode(const SearchSpace& sp, const Genome& g, int id, uint64_t run_seed) {
    Trial t;
    t.id = id;
    t.arch = sp.arch;
    t.input_len = sp.input_len;
    t.bitwidth = sp.bit_choices[size_t(g.bits_idx)];
    t.batch_size = sp.batch_choices[size_t(g.batch_idx)];
    t.width = sp.width_choices[size_t(g.width_idx)];
    t.learning_rate = std::pow(10.0, g.log10_lr);
    t.seed = derive_seed(run_seed, uint64_t(id));
    return t;
}

inline double sbx_child(double p1, double p2, double lo, double hi, double eta, bool first,
                        double u) {
    const double beta = u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0))
                                 : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
    const double c = first ? 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2)
                           : 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2);
    return std::clamp(c, lo, hi);
}

inline double polynomial_mutate(double x, double lo, double hi, double eta, double u) {
    const double delta = u < 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0)) - 1.0
                                 : 1.0 - std::pow(2.0 * (1.0 - u), 1.0 / (eta + 1.0));
    return std::clamp(x + delta * (hi - lo), lo, hi);
}

inline void mutate(Genome& g, const SearchSpace& sp, double eta, Rng& rng) {
    const double p = 0.25;  // one expected flip across the four genes
    if (rng.uniform01() < p)
        g.bits_idx = int(rng.randint(0, int64_t(sp.bit_choices.size()) - 1));
    if (rng.uniform01() < p)
        g.batch_idx = int(rng.randint(0, int64_t(sp.batch_choices.size()) - 1));
    if (rng.uniform01() < p)
        g.width_idx = int(rng.randint(0, int64_t(sp.width_choices.size()) - 1));
    if (rng.uniform01() < p)
        g.log10_lr = polynomial_mutate(g.log10_lr, sp.log_lr_lo, sp.log_lr_hi, eta,
                                       rng.uniform01());
}

struct Member {
    Genome genome;
    size_t archive_idx = 0;
    int rank = 0;
    double crowding = 0.0;
};

}  // namespace detail

// NSGA-II with constrained-domination tournaments; trial evaluations within a
// generation may run on several threads, results commit in trial-index order
inline SearchResult nsga2_run(const SearchSpace& space, const Evaluator& evaluate,
                              int trials, const SearchSettings& st = {}) {
    space.validate();
    if (trials < 1) throw std::invalid_argument("trial budget must be >= 1");
    if (st.population < 2) throw std::invalid_argument("population must be >= 2");
    Rng rng(derive_seed(st.seed, 0x5ea9c4));
    SearchResult result;

    auto evaluate_batch = [&](const std::vector<Genome>& genomes) {
        const int base_id = int(result.archive.size());
        std::vector<Trial> batch(genomes.size());
        for (size_t i = 0; i < genomes.size(); ++i)
            batch[i] = detail::decode(space, genomes[i], base_id + int(i), st.seed);

        auto run_one = [&](Trial& t) {
            try {
                const EvalResult r = evaluate(t);
                if (!std::isfinite(r.val_mse) || !std::isfinite(r.cost.cost.energy_mj))
                    throw std::runtime_error("non-finite objectives");
                t.val_mse = r.val_mse;
                t.cost = r.cost;
                t.energy_mj = r.cost.cost.energy_mj;
                t.feasible = r.cost.feasibility.feasible;
                t.total_violation = r.cost.feasibility.total_violation;
                t.violations = r.cost.feasibility.violations;
                t.status = TrialStatus::Complete;
            } catch (...) {
                t.status = TrialStatus::Failed;
                t.feasible = false;
                t.total_violation = std::numeric_limits<double>::infinity();
            }
        };
        const int jobs = std::max(1, st.jobs);
        if (jobs == 1 || batch.size() <= 1) {
            for (auto& t : batch) run_one(t);
        } else {
            std::atomic<size_t> next{0};
            auto worker = [&]() {
                for (size_t i = next.fetch_add(1); i < batch.size(); i = next.fetch_add(1))
                    run_one(batch[i]);
            };
            std::vector<std::thread> pool;
            const int nthreads = std::min<int>(jobs, int(batch.size()));
            pool.reserve(size_t(nthreads));
            for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        std::vector<size_t> idx;
        for (auto& t : batch) {
            idx.push_back(result.archive.size());
            result.archive.push_back(std::move(t));
        }
        return idx;
    };

    int remaining = trials;
    std::vector<detail::Member> pop;
    {
        const int init = std::min(st.population, remaining);
        std::vector<Genome> genomes;
        for (int i = 0; i < init; ++i) genomes.push_back(detail::random_genome(space, rng));
        const auto idx = evaluate_batch(genomes);
        for (int i = 0; i < init; ++i) pop.push_back({genomes[size_t(i)], idx[size_t(i)], 0, 0.0});
        remaining -= init;
    }

    auto assign_rank_crowding = [&](std::vector<detail::Member>& members) {
        std::vector<Trial> view;
        view.reserve(members.size());
        for (const auto& m : members) view.push_back(result.archive[m.archive_idx]);
        const auto fronts = non_dominated_sort(view);
        for (size_t f = 0; f < fronts.size(); ++f) {
            const auto dist = crowding_distance(view, fronts[f]);
            for (size_t k = 0; k < fronts[f].size(); ++k) {
                members[fronts[f][k]].rank = int(f);
                members[fronts[f][k]].crowding = dist[k];
            }
        }
        return fronts;
    };

    while (remaining > 0 && pop.size() >= 2) {
        assign_rank_crowding(pop);
        auto better = [&](const detail::Member& a, const detail::Member& b) {
            if (a.rank != b.rank) return a.rank < b.rank;
            return a.crowding > b.crowding;
        };
        auto tournament = [&]() -> const detail::Member& {
            const auto& a = pop[size_t(rng.randint(0, int64_t(pop.size()) - 1))];
            const auto& b = pop[size_t(rng.randint(0, int64_t(pop.size()) - 1))];
            return better(a, b) ? a : b;
        };

        const int want = std::min(st.population, remaining);
        std::vector<Genome> offspring;
        while (int(offspring.size()) < want) {
            Genome c1 = tournament().genome;
            Genome c2 = tournament().genome;
            if (rng.uniform01() < st.crossover_rate) {
                if (rng.uniform01() < 0.5) std::swap(c1.bits_idx, c2.bits_idx);
                if (rng.uniform01() < 0.5) std::swap(c1.batch_idx, c2.batch_idx);
                if (rng.uniform01() < 0.5) std::swap(c1.width_idx, c2.width_idx);
                const double u = rng.uniform01();
                const double p1 = c1.log10_lr, p2 = c2.log10_lr;
                c1.log10_lr = detail::sbx_child(p1, p2, space.log_lr_lo, space.log_lr_hi,
                                                st.sbx_eta, true, u);
                c2.log10_lr = detail::sbx_child(p1, p2, space.log_lr_lo, space.log_lr_hi,
                                                st.sbx_eta, false, u);
            }
            detail::mutate(c1, space, st.mutation_eta, rng);
            detail::mutate(c2, space, st.mutation_eta, rng);
            offspring.push_back(c1);
            if (int(offspring.size()) < want) offspring.push_back(c2);
        }
        const auto idx = evaluate_batch(offspring);
        remaining -= int(offspring.size());

        std::vector<detail::Member> combined = pop;
        for (size_t i = 0; i < offspring.size(); ++i)
            combined.push_back({offspring[i], idx[i], 0, 0.0});
        const auto fronts = assign_rank_crowding(combined);

        std::vector<detail::Member> survivors;
        for (const auto& front : fronts) {
            if (int(survivors.size()) == st.population) break;
            if (int(survivors.size() + front.size()) <= st.population) {
                for (size_t k : front) survivors.push_back(combined[k]);
            } else {
                std::vector<size_t> order = front;
                std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                    if (combined[a].crowding != combined[b].crowding)
                        return combined[a].crowding > combined[b].crowding;
                    return result.archive[combined[a].archive_idx].id <
                           result.archive[combined[b].archive_idx].id;
                });
                for (size_t k : order) {
                    if (int(survivors.size()) == st.population) break;
                    survivors.push_back(combined[k]);
                }
            }
        }
        pop = std::move(survivors);
    }

    result.front = pareto_extract(result.archive);
    return result;
}

// ---------------------------------------------------------------------------
// analytic stand-in for real training: a smooth, enumerable accuracy model
// paired with the calibrated hardware cost model, used for fast searches

inline double surrogate_mse(int input_len, int bitwidth, int batch_size,
                            double learning_rate, int width) {
    const double nf = input_len <= 6 ? 1.45 : input_len <= 12 ? 1.30 : 1.15;
    const double qpen = bitwidth == 4 ? 0.35 : bitwidth == 6 ? 0.10 : 0.03;
    const int bin =
        std::clamp(int(std::floor((std::log10(learning_rate) + 5.0) * 4.0)), 0, 7);
    const double lr_pen = 0.08 * double((bin - 5) * (bin - 5)) / 25.0;
    const double bs_pen = 0.02 * std::abs(batch_size - 96) / 240.0;
    return 0.03 * nf *
           (1.0 + 0.6 / std::sqrt(double(width)) + qpen + lr_pen + bs_pen);
}

struct SurrogateEvaluator {
    CostModelParams params;
    HardwareBudget budget{};

    EvalResult operator()(const Trial& t) const {
        EvalResult r;
        NetConfig cfg{t.arch, t.input_len, t.width};
        r.cost = estimate_cost(cfg, t.bitwidth, params, budget);
        r.val_mse = surrogate_mse(t.input_len, t.bitwidth, t.batch_size, t.learning_rate,
                                  t.width);
        return r;
    }
};

}  // namespace edgecast
