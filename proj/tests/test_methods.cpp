#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <set>

#include "biflp/methods.hpp"
#include "biflp/oracles.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/test_util.hpp"

using namespace biflp;

namespace {

/// Six demand nodes, three sites with sparse coverage, four scenarios.
std::pair<Instance, ScenarioSet> three_site_fixture() {
    Instance inst = testutil::make_instance(
        6, {{5000, 8}, {5000, 7}, {5000, 9}},
        testutil::near_pairs(6, {{0, 3}, {1, 4}, {2, 5}, {0, 4}, {1, 3}}), 6.0);
    const ScenarioSet scen({{4, 2, 6, 1, 3, 2},
                            {1, 7, 2, 5, 1, 4},
                            {3, 3, 3, 3, 3, 3},
                            {6, 1, 1, 2, 6, 2}});
    return {std::move(inst), scen};
}

/// Two isolated site/demand pairs whose frozen pool misses the worst subset:
/// the seeded scenario (largest total) is not the binding one at the cheaper
/// budget levels.
std::pair<Instance, ScenarioSet> freeze_gap_fixture() {
    Instance inst =
        testutil::make_instance(2, {{5000, 10}, {5000, 9}}, testutil::near_pairs(2, {}), 6.0);
    const ScenarioSet scen({{10, 0}, {0, 9}, {6, 5}});
    return {std::move(inst), scen};
}

std::vector<std::pair<long long, double>> image(const Frontier& f) {
    std::vector<std::pair<long long, double>> out;
    for (const FrontierPoint& p : f.points()) out.push_back({p.cost, p.risk});
    return out;
}

}  // namespace

TEST_CASE("frontier canonical form and json round-trip") {
    std::vector<FrontierPoint> pts;
    pts.push_back({5000, 3.0, {1, 0}, Provenance::Exact});
    pts.push_back({0, 9.0, {0, 0}, Provenance::Exact});
    pts.push_back({10000, 3.0, {1, 1}, Provenance::Approximate});  // dominated by (5000, 3)
    pts.push_back({5000, 4.0, {0, 1}, Provenance::Exact});         // dominated duplicate cost
    const Frontier f = Frontier::from_points(pts);
    REQUIRE(f.size() == 2);
    CHECK(f.points()[0].cost == 0);
    CHECK(f.points()[1].cost == 5000);
    for (std::size_t i = 1; i < f.size(); ++i) {
        CHECK(f.points()[i].cost > f.points()[i - 1].cost);
        CHECK(f.points()[i].risk < f.points()[i - 1].risk);
    }

    const Frontier back = Frontier::from_json(f.to_json());
    CHECK(image(back) == image(f));
    CHECK(back.points()[1].open == f.points()[1].open);
    CHECK_THROWS_AS(Frontier::from_json("{"), std::invalid_argument);
}

TEST_CASE("epsilon constraint frontier costs live on the opening-cost grid") {
    auto [inst, scen] = three_site_fixture();
    const FrontierRun run =
        epsilon_constraint(ModelFamily::Classical, inst, scen, RiskSpec::from_k(2, 4));
    REQUIRE(!run.frontier.empty());
    for (const FrontierPoint& p : run.frontier.points()) CHECK(p.cost % 5000 == 0);
    CHECK(cost_step(inst) == 5000);
}

TEST_CASE("single-site frontier has at most two points") {
    Instance inst = testutil::toy_two_nodes(5);
    const ScenarioSet scen({{3, 4}, {1, 1}});
    const FrontierRun run =
        epsilon_constraint(ModelFamily::Classical, inst, scen, RiskSpec::from_k(1, 2));
    CHECK(run.frontier.size() <= 2);
    CHECK(!run.stats.hit_time_limit);
}

TEST_CASE("exact drivers match the enumeration oracle on the three-site fixture") {
    auto [inst, scen] = three_site_fixture();
    const RiskSpec risk = RiskSpec::from_k(2, 4);
    const Frontier truth = oracle::exact_frontier(inst, scen, risk);

    for (ModelFamily family : {ModelFamily::Classical, ModelFamily::SubsetExact}) {
        const FrontierRun run = epsilon_constraint(family, inst, scen, risk);
        CHECK(image(run.frontier) == image(truth));
    }
}

TEST_CASE("balanced box equals epsilon constraint as a point set") {
    auto [inst, scen] = three_site_fixture();
    const RiskSpec risk = RiskSpec::from_k(2, 4);
    const FrontierRun eps = epsilon_constraint(ModelFamily::Classical, inst, scen, risk);
    const FrontierRun box = balanced_box(ModelFamily::Classical, inst, scen, risk);
    CHECK(image(box.frontier) == image(eps.frontier));

    const FrontierRun box_mb = balanced_box(ModelFamily::SubsetExact, inst, scen, risk);
    CHECK(image(box_mb.frontier) == image(eps.frontier));

    CHECK_THROWS_AS(balanced_box(ModelFamily::SubsetFrozen, inst, scen, risk),
                    std::invalid_argument);
}

TEST_CASE("balanced box on a single-point frontier") {
    // Zero demand everywhere: opening nothing is already risk-free.
    Instance inst = testutil::toy_two_nodes(5);
    const ScenarioSet scen({{0, 0}, {0, 0}});
    const FrontierRun run =
        balanced_box(ModelFamily::Classical, inst, scen, RiskSpec::from_k(1, 2));
    CHECK(run.frontier.size() == 1);
    CHECK(run.frontier.points()[0].cost == 0);
    CHECK(run.frontier.points()[0].risk == 0.0);
}

TEST_CASE("mb-bar separates only for the first point") {
    auto [inst, scen] = freeze_gap_fixture();
    const RiskSpec risk = RiskSpec::from_k(1, 3);
    const FrontierRun run = epsilon_constraint(ModelFamily::SubsetFrozen, inst, scen, risk);
    CHECK(run.stats.separator_calls_after_first_point == 0);
    REQUIRE(run.frontier.size() == 3);

    const Frontier re = reevaluate_frontier(run.frontier, inst, scen, risk);
    for (std::size_t i = 0; i < re.size(); ++i) {
        CHECK(re.points()[i].risk >= run.frontier.points()[i].risk - 1e-9);
        CHECK(re.points()[i].provenance == Provenance::Reevaluated);
    }
}

TEST_CASE("a frozen pool that misses the worst subset underestimates the risk") {
    // k = 1, pool pinned to scenario 2 (the largest total demand) while the
    // cheap budget level is actually bound by scenario 1.
    auto [inst, scen] = freeze_gap_fixture();
    const RiskSpec risk = RiskSpec::from_k(1, 3);
    FlpModel fm = build_mb(inst, scen, risk);
    const Cut seed = fm.cut_handle.make_cut(initial_cut(scen, 1));
    REQUIRE(seed.subset == std::vector<int>{2});
    fm.model.add_constraint(fm.cut_handle.cut_row(seed).row, RowSense::GreaterEqual,
                            seed.rhs_constant);

    fm.model.set_rhs(fm.budget_row, 5000.0);
    SolveResult r = solve_mip(fm.model);  // frozen: no separator
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(5.0));  // site A covers 6 of scenario 2's 11

    FirstStageSolution y = fm.extract_first_stage(inst, r.assignment);
    CHECK(y.open == std::vector<int>{1, 0});
    std::vector<FrontierPoint> pts{{y.cost, r.objective, y.open, Provenance::Approximate}};
    const Frontier re = reevaluate_frontier(Frontier::from_points(pts), inst, scen, risk);
    REQUIRE(re.size() == 1);
    CHECK(re.points()[0].risk == doctest::Approx(9.0));  // scenario 1 was the true worst
    CHECK(re.points()[0].risk > r.objective);
}

TEST_CASE("mb-bar risks never exceed the exact risks at equal cost") {
    auto [inst, scen] = three_site_fixture();
    for (int k : {1, 2, 4}) {
        const RiskSpec risk = RiskSpec::from_k(k, 4);
        const FrontierRun bar = epsilon_constraint(ModelFamily::SubsetFrozen, inst, scen, risk);
        const Frontier truth = oracle::exact_frontier(inst, scen, risk);
        for (const FrontierPoint& p : bar.frontier.points()) {
            for (const FrontierPoint& q : truth.points())
                if (q.cost == p.cost) CHECK(p.risk <= q.risk + 1e-9);
        }
    }
}

TEST_CASE("re-evaluation is idempotent on exact frontiers") {
    auto [inst, scen] = three_site_fixture();
    const RiskSpec risk = RiskSpec::from_k(2, 4);
    const FrontierRun exact = epsilon_constraint(ModelFamily::Classical, inst, scen, risk);
    const Frontier re = reevaluate_frontier(exact.frontier, inst, scen, risk);
    CHECK(image(re) == image(exact.frontier));
}

TEST_CASE("re-evaluating the closed-everything point gives the demand CVaR") {
    auto [inst, scen] = freeze_gap_fixture();
    std::vector<FrontierPoint> pts{{0, 0.0, {0, 0}, Provenance::Exact}};
    const Frontier re =
        reevaluate_frontier(Frontier::from_points(pts), inst, scen, RiskSpec::from_k(1, 3));
    REQUIRE(re.size() == 1);
    std::vector<double> totals;
    for (std::size_t s = 0; s < scen.n_scenarios(); ++s)
        totals.push_back(static_cast<double>(scen.total_demand(s)));
    CHECK(re.points()[0].risk == doctest::Approx(cvar_topk(totals, 1)));
}

TEST_CASE("matheuristic with an unlimited budget reproduces the exact frontier") {
    auto [inst, scen] = three_site_fixture();
    for (int k : {1, 2}) {
        const RiskSpec risk = RiskSpec::from_k(k, 4);
        const Frontier truth = oracle::exact_frontier(inst, scen, risk);
        MatheuristicOptions opts;
        opts.per_point_budget = kInfinity;
        const FrontierRun mat = matheuristic(ModelFamily::Classical, inst, scen, risk, opts);
        CHECK(image(mat.frontier) == image(truth));
        for (const FrontierPoint& p : mat.frontier.points())
            CHECK(p.provenance == Provenance::Exact);
    }
}

TEST_CASE("matheuristic points are never better than the exact frontier") {
    auto [inst, scen] = three_site_fixture();
    const RiskSpec risk = RiskSpec::from_k(2, 4);
    const Frontier truth = oracle::exact_frontier(inst, scen, risk);
    MatheuristicOptions opts;
    opts.per_point_budget = 0.2;  // starve the stages a little
    const FrontierRun mat = matheuristic(ModelFamily::Classical, inst, scen, risk, opts);
    for (const FrontierPoint& p : mat.frontier.points()) {
        // Feasible upper-bound set: some exact point weakly dominates it.
        bool covered = false;
        for (const FrontierPoint& q : truth.points())
            if (q.cost <= p.cost && q.risk <= p.risk + 1e-9) covered = true;
        CHECK(covered);
    }
    CHECK_THROWS_AS(matheuristic(ModelFamily::Classical, inst, scen, risk,
                                 MatheuristicOptions{0.0, 2, kInfinity}),
                    std::invalid_argument);
    CHECK_THROWS_AS(matheuristic(ModelFamily::Classical, inst, scen, risk,
                                 MatheuristicOptions{1.0, 0, kInfinity}),
                    std::invalid_argument);
}

TEST_CASE("matheuristic on the subset family tracks the epsilon sweep") {
    auto [inst, scen] = three_site_fixture();
    const RiskSpec risk = RiskSpec::from_k(2, 4);
    MatheuristicOptions opts;
    opts.per_point_budget = kInfinity;
    const FrontierRun mat = matheuristic(ModelFamily::SubsetExact, inst, scen, risk, opts);
    const FrontierRun eps = epsilon_constraint(ModelFamily::SubsetExact, inst, scen, risk);
    CHECK(image(mat.frontier) == image(eps.frontier));
}

TEST_CASE("k = N and k = 1 sweeps match the mean and worst-case constructions") {
    auto [inst, scen] = three_site_fixture();
    const Frontier mean_truth = oracle::exact_frontier(inst, scen, RiskSpec::from_k(4, 4));
    const FrontierRun mean_run =
        epsilon_constraint(ModelFamily::SubsetExact, inst, scen, RiskSpec::from_k(4, 4));
    CHECK(image(mean_run.frontier) == image(mean_truth));

    const Frontier worst_truth = oracle::exact_frontier(inst, scen, RiskSpec::from_k(1, 4));
    const FrontierRun worst_run =
        epsilon_constraint(ModelFamily::SubsetExact, inst, scen, RiskSpec::from_k(1, 4));
    CHECK(image(worst_run.frontier) == image(worst_truth));
}
