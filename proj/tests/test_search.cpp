#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "edgecast/search.hpp"

using namespace edgecast;

namespace {

Trial stub_trial(int id, double mse, double energy, bool feasible = true,
                 double violation = 0.0, TrialStatus status = TrialStatus::Complete) {
    Trial t;
    t.id = id;
    t.status = status;
    t.val_mse = mse;
    t.energy_mj = energy;
    t.feasible = feasible && status == TrialStatus::Complete;
    t.total_violation = t.feasible ? 0.0 : violation;
    return t;
}

// plane-sweep front extraction: sort by (mse, energy) and keep points that
// lower the energy staircase, retaining exact duplicates of the staircase
// corner; independent of the pairwise scan in the library
std::vector<size_t> sweep_front_oracle(const std::vector<Trial>& trials) {
    std::vector<size_t> feas;
    for (size_t i = 0; i < trials.size(); ++i)
        if (trials[i].complete() && trials[i].feasible) feas.push_back(i);
    std::sort(feas.begin(), feas.end(), [&](size_t a, size_t b) {
        if (trials[a].val_mse != trials[b].val_mse)
            return trials[a].val_mse < trials[b].val_mse;
        if (trials[a].energy_mj != trials[b].energy_mj)
            return trials[a].energy_mj < trials[b].energy_mj;
        return trials[a].id < trials[b].id;
    });
    std::vector<size_t> front;
    double best_energy = std::numeric_limits<double>::infinity();
    double corner_mse = std::numeric_limits<double>::quiet_NaN();
    for (size_t i : feas) {
        const double m = trials[i].val_mse, e = trials[i].energy_mj;
        if (e < best_energy) {
            front.push_back(i);
            best_energy = e;
            corner_mse = m;
        } else if (e == best_energy && m == corner_mse) {
            front.push_back(i);
        }
    }
    return front;
}

// peel non-dominated layers one at a time with a direct quadratic scan
std::vector<std::vector<size_t>> peel_oracle(const std::vector<Trial>& trials) {
    std::vector<size_t> alive(trials.size());
    for (size_t i = 0; i < alive.size(); ++i) alive[i] = i;
    std::vector<std::vector<size_t>> fronts;
    while (!alive.empty()) {
        std::vector<size_t> layer, rest;
        for (size_t i : alive) {
            bool dominated = false;
            for (size_t j : alive)
                if (j != i &&
                    detail::constrained_dominates(trials[j], trials[i])) {
                    dominated = true;
                    break;
                }
            (dominated ? rest : layer).push_back(i);
        }
        REQUIRE(!layer.empty());
        fronts.push_back(layer);
        alive = rest;
    }
    return fronts;
}

// unit-cell counting: exact dominated area for integer coordinates
double cell_count_hv_oracle(const std::vector<std::pair<double, double>>& pts,
                            std::pair<double, double> ref) {
    double area = 0.0;
    for (int x = 0; x < int(ref.first); ++x)
        for (int y = 0; y < int(ref.second); ++y)
            for (const auto& p : pts)
                if (p.first <= x && p.second <= y) {
                    area += 1.0;
                    break;
                }
    return area;
}

std::set<size_t> as_set(const std::vector<size_t>& v) { return {v.begin(), v.end()}; }

std::vector<Trial> random_population(Rng& rng, size_t n, int grid = 0,
                                     double feasible_rate = 1.0) {
    std::vector<Trial> pop;
    for (size_t i = 0; i < n; ++i) {
        double mse, energy;
        if (grid > 0) {
            mse = double(rng.randint(0, grid - 1));
            energy = double(rng.randint(0, grid - 1));
        } else {
            mse = rng.uniform(0.0, 1.0);
            energy = rng.uniform(0.0, 1.0);
        }
        const bool feas = rng.uniform01() < feasible_rate;
        pop.push_back(stub_trial(int(i), mse, energy, feas,
                                 feas ? 0.0 : rng.uniform(0.1, 5.0)));
    }
    return pop;
}

SurrogateEvaluator calibrated_surrogate() {
    auto rows = load_reference_table(std::string(EDGECAST_DATA_DIR) +
                                     "/xc7s15_reference.csv");
    SurrogateEvaluator ev;
    ev.params = calibrate(rows);
    return ev;
}

// the surrogate's accuracy depends on the learning rate only through its
// bin, so evaluating each bin centre enumerates every reachable objective
std::vector<std::pair<double, double>> enumerate_surrogate(
    const SearchSpace& sp, const SurrogateEvaluator& ev) {
    std::vector<std::pair<double, double>> pts;
    for (int b : sp.bit_choices)
        for (int bs : sp.batch_choices)
            for (int w : sp.width_choices)
                for (int bin = 0; bin < 8; ++bin) {
                    Trial t;
                    t.arch = sp.arch;
                    t.input_len = sp.input_len;
                    t.bitwidth = b;
                    t.batch_size = bs;
                    t.width = w;
                    t.learning_rate = std::pow(10.0, -5.0 + (bin + 0.5) / 4.0);
                    const EvalResult r = ev(t);
                    if (r.cost.feasibility.feasible)
                        pts.push_back({r.val_mse, r.cost.cost.energy_mj});
                }
    return pts;
}

}  // namespace

TEST_CASE("dominance relation") {
    SECTION("hand-picked pairs") {
        REQUIRE(dominates(1.0, 2.0, 2.0, 3.0));
        REQUIRE(dominates(1.0, 2.0, 1.0, 3.0));
        REQUIRE(dominates(1.0, 2.0, 2.0, 2.0));
        REQUIRE_FALSE(dominates(1.0, 2.0, 1.0, 2.0));
        REQUIRE_FALSE(dominates(1.0, 3.0, 2.0, 2.0));
        REQUIRE_FALSE(dominates(2.0, 2.0, 1.0, 3.0));
    }

    SECTION("non-finite objectives are rejected") {
        const double inf = std::numeric_limits<double>::infinity();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        REQUIRE_THROWS_AS(dominates(inf, 1.0, 2.0, 2.0), std::invalid_argument);
        REQUIRE_THROWS_AS(dominates(1.0, 1.0, nan, 2.0), std::invalid_argument);
        REQUIRE_THROWS_AS(dominates(1.0, -inf, 2.0, 2.0), std::invalid_argument);
    }

    SECTION("strict partial order on random triples") {
        Rng rng(1811);
        for (int trial = 0; trial < 20000; ++trial) {
            // small grid forces frequent ties
            auto pick = [&]() {
                return std::pair<double, double>{double(rng.randint(0, 4)),
                                                 double(rng.randint(0, 4))};
            };
            const auto a = pick(), b = pick(), c = pick();
            REQUIRE_FALSE(dominates(a.first, a.second, a.first, a.second));
            if (dominates(a.first, a.second, b.first, b.second))
                REQUIRE_FALSE(dominates(b.first, b.second, a.first, a.second));
            if (dominates(a.first, a.second, b.first, b.second) &&
                dominates(b.first, b.second, c.first, c.second))
                REQUIRE(dominates(a.first, a.second, c.first, c.second));
        }
    }
}

TEST_CASE("pareto extraction") {
    SECTION("worked example") {
        std::vector<Trial> pop = {
            stub_trial(0, 0.10, 5.0),  stub_trial(1, 0.20, 3.0),
            stub_trial(2, 0.15, 4.0),  stub_trial(3, 0.30, 3.5),
            stub_trial(4, 0.10, 6.0),  stub_trial(5, 0.40, 1.0),
        };
        const auto front = pareto_extract(pop);
        REQUIRE(front == std::vector<size_t>{0, 2, 1, 5});
    }

    SECTION("infeasible and failed trials never enter the front") {
        std::vector<Trial> pop = {
            stub_trial(0, 0.5, 5.0),
            stub_trial(1, 0.1, 1.0, false, 2.0),
            stub_trial(2, 0.1, 1.0, true, 0.0, TrialStatus::Failed),
        };
        const auto front = pareto_extract(pop);
        REQUIRE(front == std::vector<size_t>{0});
    }

    SECTION("no feasible trials yields an empty front") {
        std::vector<Trial> pop = {stub_trial(0, 0.5, 5.0, false, 1.0),
                                  stub_trial(1, 0.1, 1.0, false, 2.0)};
        REQUIRE(pareto_extract(pop).empty());
    }

    SECTION("duplicates of a front point are all kept") {
        std::vector<Trial> pop = {stub_trial(0, 0.2, 2.0), stub_trial(1, 0.2, 2.0),
                                  stub_trial(2, 0.3, 2.0)};
        REQUIRE(pareto_extract(pop) == std::vector<size_t>{0, 1});
    }

    SECTION("matches the plane-sweep oracle on random populations") {
        Rng rng(2207);
        for (int rep = 0; rep < 60; ++rep) {
            const size_t n = size_t(rng.randint(1, 300));
            const int grid = rep % 2 == 0 ? 12 : 0;
            const auto pop = random_population(rng, n, grid, 0.8);
            REQUIRE(pareto_extract(pop) == sweep_front_oracle(pop));
        }
    }

    SECTION("matches the oracle on a thousand-trial population") {
        Rng rng(2219);
        const auto pop = random_population(rng, 1000, 40, 0.9);
        const auto front = pareto_extract(pop);
        REQUIRE(front == sweep_front_oracle(pop));
        for (size_t k = 1; k < front.size(); ++k)
            REQUIRE(pop[front[k - 1]].val_mse <= pop[front[k]].val_mse);
    }
}

TEST_CASE("non-dominated sorting") {
    SECTION("chain yields singleton ranks") {
        std::vector<Trial> pop = {stub_trial(0, 3.0, 3.0), stub_trial(1, 1.0, 1.0),
                                  stub_trial(2, 2.0, 2.0)};
        const auto fronts = non_dominated_sort(pop);
        REQUIRE(fronts.size() == 3);
        REQUIRE(fronts[0] == std::vector<size_t>{1});
        REQUIRE(fronts[1] == std::vector<size_t>{2});
        REQUIRE(fronts[2] == std::vector<size_t>{0});
    }

    SECTION("anti-chain collapses to one rank") {
        std::vector<Trial> pop;
        for (int i = 0; i < 8; ++i)
            pop.push_back(stub_trial(i, double(i), double(8 - i)));
        const auto fronts = non_dominated_sort(pop);
        REQUIRE(fronts.size() == 1);
        REQUIRE(fronts[0].size() == 8);
    }

    SECTION("feasibility classes stratify the ranks") {
        std::vector<Trial> pop = {
            stub_trial(0, 9.0, 9.0),
            stub_trial(1, 0.1, 0.1, false, 0.5),
            stub_trial(2, 0.1, 0.1, false, 2.5),
            stub_trial(3, 0.1, 0.1, true, 0.0, TrialStatus::Failed),
        };
        const auto fronts = non_dominated_sort(pop);
        REQUIRE(fronts.size() == 4);
        REQUIRE(fronts[0] == std::vector<size_t>{0});
        REQUIRE(fronts[1] == std::vector<size_t>{1});
        REQUIRE(fronts[2] == std::vector<size_t>{2});
        REQUIRE(fronts[3] == std::vector<size_t>{3});
    }

    SECTION("matches the peeling oracle on random populations") {
        Rng rng(3301);
        for (int rep = 0; rep < 40; ++rep) {
            const size_t n = size_t(rng.randint(1, 120));
            const auto pop = random_population(rng, n, rep % 2 ? 10 : 0, 0.75);
            const auto fast = non_dominated_sort(pop);
            const auto slow = peel_oracle(pop);
            REQUIRE(fast.size() == slow.size());
            size_t total = 0;
            for (size_t f = 0; f < fast.size(); ++f) {
                REQUIRE(as_set(fast[f]) == as_set(slow[f]));
                total += fast[f].size();
            }
            REQUIRE(total == n);
        }
    }

    SECTION("rank zero equals the extracted front when feasible trials exist") {
        Rng rng(3313);
        for (int rep = 0; rep < 20; ++rep) {
            auto pop = random_population(rng, 80, 8, 0.6);
            pop[0].feasible = true;
            pop[0].total_violation = 0.0;
            const auto fronts = non_dominated_sort(pop);
            REQUIRE(as_set(fronts[0]) == as_set(pareto_extract(pop)));
        }
    }
}

TEST_CASE("crowding distance") {
    const double inf = std::numeric_limits<double>::infinity();

    SECTION("boundaries are infinite, evenly spaced interior scores two") {
        std::vector<Trial> pop = {stub_trial(0, 1.0, 3.0), stub_trial(1, 2.0, 2.0),
                                  stub_trial(2, 3.0, 1.0)};
        const auto d = crowding_distance(pop, {0, 1, 2});
        REQUIRE(d[0] == inf);
        REQUIRE(d[2] == inf);
        REQUIRE(d[1] == Catch::Approx(2.0));
    }

    SECTION("tiny fronts are entirely infinite") {
        std::vector<Trial> pop = {stub_trial(0, 1.0, 1.0), stub_trial(1, 2.0, 0.5)};
        REQUIRE(crowding_distance(pop, {}).empty());
        REQUIRE(crowding_distance(pop, {0}) == std::vector<double>{inf});
        const auto d = crowding_distance(pop, {0, 1});
        REQUIRE((d[0] == inf && d[1] == inf));
    }

    SECTION("normalization makes the scores scale-free") {
        std::vector<Trial> a, b;
        Rng rng(4409);
        for (int i = 0; i < 9; ++i) {
            const double m = rng.uniform(0.0, 1.0), e = rng.uniform(0.0, 1.0);
            a.push_back(stub_trial(i, m, e));
            b.push_back(stub_trial(i, 1000.0 * m + 7.0, 0.001 * e - 2.0));
        }
        std::vector<size_t> front = {0, 1, 2, 3, 4, 5, 6, 7, 8};
        const auto da = crowding_distance(a, front);
        const auto db = crowding_distance(b, front);
        for (size_t i = 0; i < da.size(); ++i) {
            if (std::isinf(da[i]))
                REQUIRE(std::isinf(db[i]));
            else
                REQUIRE(da[i] == Catch::Approx(db[i]).margin(1e-12));
        }
    }

    SECTION("degenerate objective contributes nothing to interior points") {
        std::vector<Trial> pop = {stub_trial(0, 1.0, 5.0), stub_trial(1, 2.0, 5.0),
                                  stub_trial(2, 4.0, 5.0)};
        const auto d = crowding_distance(pop, {0, 1, 2});
        REQUIRE(d[1] == Catch::Approx(1.0));
    }
}

TEST_CASE("hypervolume") {
    SECTION("hand-computed cases") {
        REQUIRE(hypervolume_2d({}, {10.0, 10.0}) == 0.0);
        REQUIRE(hypervolume_2d({{2.0, 3.0}}, {10.0, 10.0}) == Catch::Approx(56.0));
        REQUIRE(hypervolume_2d({{1.0, 6.0}, {4.0, 2.0}}, {10.0, 10.0}) ==
                Catch::Approx(60.0));
        // dominated and out-of-reference points add nothing
        REQUIRE(hypervolume_2d({{1.0, 6.0}, {4.0, 2.0}, {5.0, 7.0}, {11.0, 1.0}},
                               {10.0, 10.0}) == Catch::Approx(60.0));
    }

    SECTION("matches the unit-cell-counting oracle on integer points") {
        Rng rng(5501);
        for (int rep = 0; rep < 40; ++rep) {
            std::vector<std::pair<double, double>> pts;
            const int n = int(rng.randint(1, 12));
            for (int i = 0; i < n; ++i)
                pts.push_back({double(rng.randint(0, 14)), double(rng.randint(0, 14))});
            const std::pair<double, double> ref{15.0, 15.0};
            REQUIRE(hypervolume_2d(pts, ref) ==
                    Catch::Approx(cell_count_hv_oracle(pts, ref)));
        }
    }

    SECTION("adding a dominated point never changes the volume") {
        Rng rng(5517);
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<std::pair<double, double>> pts;
            for (int i = 0; i < 6; ++i)
                pts.push_back({rng.uniform(0.0, 8.0), rng.uniform(0.0, 8.0)});
            const std::pair<double, double> ref{9.0, 9.0};
            const double base = hypervolume_2d(pts, ref);
            auto worse = pts[size_t(rng.randint(0, 5))];
            worse.first += rng.uniform(0.0, 0.5);
            worse.second += rng.uniform(0.0, 0.5);
            pts.push_back(worse);
            REQUIRE(hypervolume_2d(pts, ref) == Catch::Approx(base));
        }
    }
}

TEST_CASE("deployability census") {
    std::vector<Trial> pop = {
        stub_trial(0, 0.1, 1.0),
        stub_trial(1, 0.2, 2.0),
        stub_trial(2, 0.1, 1.0, false, 3.0),
        stub_trial(3, 0.1, 1.0, true, 0.0, TrialStatus::Failed),
    };
    const Census c = deployability_census(pop);
    REQUIRE(c.feasible == 2);
    REQUIRE(c.infeasible == 1);
    REQUIRE(c.failed == 1);
}

TEST_CASE("search run mechanics") {
    const SurrogateEvaluator ev = calibrated_surrogate();
    SearchSpace space;
    space.arch = ArchKind::Lstm;
    space.input_len = 12;

    SECTION("the budget bounds the archive and ids are sequential") {
        SearchSettings st;
        st.seed = 31;
        for (int budget : {10, 20, 45, 100}) {
            const auto res = nsga2_run(space, ev, budget, st);
            REQUIRE(int(res.archive.size()) == budget);
            for (int i = 0; i < budget; ++i) {
                const Trial& t = res.archive[size_t(i)];
                REQUIRE(t.id == i);
                REQUIRE(t.seed == derive_seed(st.seed, uint64_t(i)));
                REQUIRE((t.bitwidth == 4 || t.bitwidth == 6 || t.bitwidth == 8));
                REQUIRE(t.batch_size % 16 == 0);
                REQUIRE((t.batch_size >= 16 && t.batch_size <= 256));
                REQUIRE(t.width % 8 == 0);
                REQUIRE((t.width >= 8 && t.width <= 64));
                REQUIRE(t.learning_rate >= 1e-5);
                REQUIRE(t.learning_rate <= 1e-3);
            }
        }
    }

    SECTION("identical seeds give identical archives") {
        SearchSettings st;
        st.seed = 42;
        const auto a = nsga2_run(space, ev, 100, st);
        const auto b = nsga2_run(space, ev, 100, st);
        REQUIRE(a.archive.size() == b.archive.size());
        for (size_t i = 0; i < a.archive.size(); ++i) {
            const Trial &x = a.archive[i], &y = b.archive[i];
            REQUIRE(x.id == y.id);
            REQUIRE(x.bitwidth == y.bitwidth);
            REQUIRE(x.batch_size == y.batch_size);
            REQUIRE(x.width == y.width);
            REQUIRE(x.learning_rate == y.learning_rate);
            REQUIRE(x.seed == y.seed);
            REQUIRE(x.val_mse == y.val_mse);
            REQUIRE(x.energy_mj == y.energy_mj);
            REQUIRE(x.feasible == y.feasible);
        }
        REQUIRE(a.front == b.front);

        SearchSettings other = st;
        other.seed = 43;
        const auto c = nsga2_run(space, ev, 100, other);
        bool any_diff = false;
        for (size_t i = 0; i < a.archive.size(); ++i)
            any_diff = any_diff ||
                       a.archive[i].learning_rate != c.archive[i].learning_rate;
        REQUIRE(any_diff);
    }

    SECTION("parallel evaluation commits results in trial-index order") {
        SearchSettings st;
        st.seed = 7;
        st.jobs = 1;
        const auto serial = nsga2_run(space, ev, 60, st);
        st.jobs = 4;
        const auto parallel = nsga2_run(space, ev, 60, st);
        REQUIRE(serial.archive.size() == parallel.archive.size());
        for (size_t i = 0; i < serial.archive.size(); ++i) {
            REQUIRE(serial.archive[i].width == parallel.archive[i].width);
            REQUIRE(serial.archive[i].learning_rate ==
                    parallel.archive[i].learning_rate);
            REQUIRE(serial.archive[i].val_mse == parallel.archive[i].val_mse);
        }
        REQUIRE(serial.front == parallel.front);
    }

    SECTION("evaluator failures are recorded and the search continues") {
        auto flaky = [&](const Trial& t) -> EvalResult {
            if (t.width == 16) throw std::runtime_error("transient failure");
            return ev(t);
        };
        SearchSettings st;
        st.seed = 11;
        const auto res = nsga2_run(space, flaky, 100, st);
        REQUIRE(res.archive.size() == 100);
        const Census c = deployability_census(res.archive);
        int width16 = 0;
        for (const auto& t : res.archive) {
            if (t.width == 16) {
                ++width16;
                REQUIRE(t.status == TrialStatus::Failed);
            }
        }
        REQUIRE(c.failed == width16);
        REQUIRE(c.failed >= 1);
        REQUIRE(c.feasible + c.infeasible + c.failed == 100);
        for (size_t i : res.front) REQUIRE(res.archive[i].status == TrialStatus::Complete);
        REQUIRE(!res.front.empty());
    }

    SECTION("non-finite evaluator output marks the trial failed") {
        auto broken = [&](const Trial& t) -> EvalResult {
            EvalResult r = ev(t);
            if (t.bitwidth == 4) r.val_mse = std::numeric_limits<double>::quiet_NaN();
            return r;
        };
        SearchSettings st;
        st.seed = 13;
        const auto res = nsga2_run(space, broken, 40, st);
        for (const auto& t : res.archive)
            if (t.bitwidth == 4) REQUIRE(t.status == TrialStatus::Failed);
    }

    SECTION("constant objectives keep every feasible trial on the front") {
        auto flat = [&](const Trial& t) -> EvalResult {
            EvalResult r = ev(t);
            r.val_mse = 0.5;
            return r;
        };
        SearchSettings st;
        st.seed = 17;
        const auto res = nsga2_run(space, flat, 40, st);
        REQUIRE(!res.front.empty());
        std::set<double> energies;
        for (size_t i : res.front) energies.insert(res.archive[i].energy_mj);
        REQUIRE(energies.size() == 1);
        REQUIRE(res.archive[res.front[0]].energy_mj ==
                Catch::Approx(*energies.begin()));
    }

    SECTION("an all-infeasible problem yields an empty front but a full archive") {
        auto hopeless = [&](const Trial& t) -> EvalResult {
            EvalResult r = ev(t);
            r.cost.feasibility.feasible = false;
            r.cost.feasibility.total_violation = 1.0 + t.width;
            return r;
        };
        SearchSettings st;
        st.seed = 19;
        const auto res = nsga2_run(space, hopeless, 40, st);
        REQUIRE(res.archive.size() == 40);
        REQUIRE(res.front.empty());
        REQUIRE(deployability_census(res.archive).infeasible == 40);
    }

    SECTION("input validation") {
        REQUIRE_THROWS_AS(nsga2_run(space, ev, 0), std::invalid_argument);
        SearchSpace bad = space;
        bad.bit_choices.clear();
        REQUIRE_THROWS_AS(nsga2_run(bad, ev, 10), std::invalid_argument);
        SearchSettings st;
        st.population = 1;
        REQUIRE_THROWS_AS(nsga2_run(space, ev, 10, st), std::invalid_argument);
    }
}

TEST_CASE("surrogate search closes on the enumerated true front") {
    const SurrogateEvaluator ev = calibrated_surrogate();
    SearchSpace space;
    space.arch = ArchKind::Lstm;
    space.input_len = 12;

    const auto all_points = enumerate_surrogate(space, ev);
    REQUIRE(all_points.size() == 3072);
    std::pair<double, double> ref{0.0, 0.0};
    for (const auto& p : all_points) {
        ref.first = std::max(ref.first, p.first);
        ref.second = std::max(ref.second, p.second);
    }
    ref.first *= 1.05;
    ref.second *= 1.05;
    const double true_hv = hypervolume_2d(all_points, ref);
    REQUIRE(true_hv > 0.0);

    std::vector<double> ratios;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        SearchSettings st;
        st.seed = seed;
        const auto res = nsga2_run(space, ev, 100, st);
        std::vector<std::pair<double, double>> achieved;
        for (size_t i : res.front)
            achieved.push_back({res.archive[i].val_mse, res.archive[i].energy_mj});
        ratios.push_back(hypervolume_2d(achieved, ref) / true_hv);
    }
    std::sort(ratios.begin(), ratios.end());
    const double median = 0.5 * (ratios[4] + ratios[5]);
    INFO("median hypervolume ratio " << median);
    REQUIRE(median >= 0.95);
    REQUIRE(ratios.back() <= 1.0 + 1e-9);
}

TEST_CASE("deployability regimes across architectures") {
    const SurrogateEvaluator ev = calibrated_surrogate();

    SECTION("every LSTM trial fits the device") {
        SearchSpace space;
        space.arch = ArchKind::Lstm;
        space.input_len = 12;
        SearchSettings st;
        st.seed = 3;
        const auto res = nsga2_run(space, ev, 100, st);
        REQUIRE(deployability_census(res.archive).feasible == 100);
    }

    SECTION("transformer feasibility shrinks as the window grows") {
        std::vector<int> feasible_counts;
        for (int n : {6, 12, 24}) {
            SearchSpace space;
            space.arch = ArchKind::Transformer;
            space.input_len = n;
            SearchSettings st;
            st.seed = 3;
            const auto res = nsga2_run(space, ev, 100, st);
            const Census c = deployability_census(res.archive);
            REQUIRE(c.feasible + c.infeasible + c.failed == 100);
            feasible_counts.push_back(c.feasible);
        }
        REQUIRE(feasible_counts[0] > feasible_counts[1]);
        REQUIRE(feasible_counts[1] > feasible_counts[2]);
    }
}
