#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <map>
#include <set>

#include "biflp/cvar.hpp"
#include "biflp/formulations.hpp"
#include "biflp/oracles.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/test_util.hpp"

using namespace biflp;

namespace {

/// Random fully-specified small instance for property checks.
std::pair<Instance, ScenarioSet> random_fixture(std::uint64_t seed, std::size_t ni, std::size_t nj,
                                                std::size_t ns) {
    std::uint64_t state = seed;
    std::vector<testutil::SiteSpec> sites;
    for (std::size_t j = 0; j < nj; ++j)
        sites.push_back({5000, testutil::rand_int(state, 3, 15)});
    std::vector<std::pair<int, int>> near;
    for (std::size_t i = 0; i < ni; ++i)
        for (std::size_t j = 0; j < nj; ++j)
            if (testutil::rand_int(state, 0, 2) == 0)
                near.push_back({static_cast<int>(i), static_cast<int>(j)});
    Instance inst = testutil::make_instance(ni, sites, testutil::near_pairs(ni, near), 6.0);
    std::vector<std::vector<long long>> q(ns, std::vector<long long>(ni));
    for (auto& row : q)
        for (auto& v : row) v = testutil::rand_int(state, 0, 9);
    return {std::move(inst), ScenarioSet(std::move(q))};
}

}  // namespace

TEST_CASE("build_mb variable counts on the minimal fixture") {
    // |I| = 2, |J| = 1, N = 2, k = 1, full coverage.
    Instance inst = testutil::toy_two_nodes(5);
    const ScenarioSet scen({{3, 4}, {1, 1}});
    FlpModel fm = build_mb(inst, scen, RiskSpec::from_k(1, 2));

    int n_y = 0, n_x = 0, n_u = 0, n_rho = 0;
    for (int v = 0; v < fm.model.n_vars(); ++v) {
        const std::string& name = fm.model.var_name(v);
        if (name.rfind("y_", 0) == 0) ++n_y;
        if (name.rfind("x_", 0) == 0) ++n_x;
        if (name.rfind("u_", 0) == 0) ++n_u;
        if (name == "rho") ++n_rho;
    }
    CHECK(n_y == 1);
    CHECK(n_x == 4);
    CHECK(n_u == 2);
    CHECK(n_rho == 1);
    CHECK(fm.cut_handle.k == 1);
    CHECK(fm.cut_handle.n_scenarios() == 2);
    CHECK_THROWS_AS(build_mb(inst, scen, RiskSpec{3, 0.0}), std::invalid_argument);
}

TEST_CASE("subset family bounds") {
    // k = N leaves a single admissible subset; the loop can never add more.
    Instance inst = testutil::toy_two_nodes(5);
    const ScenarioSet scen({{3, 4}, {1, 1}});
    FlpModel fm = build_mb(inst, scen, RiskSpec::from_k(2, 2));
    CutPool pool;
    DelayedCutResult r = delayed_cut_loop(fm.model, fm.cut_handle, pool, kInfinity);
    REQUIRE(r.solve.status == SolveStatus::Optimal);
    CHECK(pool.size() <= 1);
    // C(10,3) = 120 is the family size the lazy channel may explore at most.
    long long binom = 1;
    for (int i = 0; i < 3; ++i) binom = binom * (10 - i) / (i + 1);
    CHECK(binom == 120);
}

TEST_CASE("fixing every first-stage variable decouples the scenarios") {
    auto [inst, scen] = random_fixture(5, 4, 2, 3);
    FlpModel fm = build_mb(inst, scen, RiskSpec::from_k(1, 3));
    std::vector<std::pair<int, double>> fixings;
    for (int col : fm.y_cols) fixings.push_back({col, 1.0});
    MilpModel fixed = fix_variables(fm.model, fixings);

    // Map every variable to its scenario tag; fixed y and rho are neutral.
    std::map<int, int> scenario_of;
    for (std::size_t s = 0; s < fm.x_cols.size(); ++s) {
        for (int col : fm.x_cols[s]) scenario_of[col] = static_cast<int>(s);
        for (int col : fm.u_cols[s]) scenario_of[col] = static_cast<int>(s);
    }
    for (int c = 0; c < fixed.n_constraints(); ++c) {
        std::set<int> touched;
        for (const Term& t : fixed.constraint(c).row) {
            auto it = scenario_of.find(t.var);
            if (it != scenario_of.end()) touched.insert(it->second);
        }
        CHECK(touched.size() <= 1);
    }
}

TEST_CASE("build_ma risk-neutral level reduces to the expectation") {
    Instance inst = testutil::toy_two_nodes(5);
    const ScenarioSet scen({{3, 4}, {1, 1}});
    FlpModel ma = build_ma(inst, scen, 0.0);
    // Open the single site: uncovered (2, 0), expectation 1.
    MilpModel fixed = fix_variables(ma.model, {{ma.y_cols[0], 1.0}});
    SolveResult r = solve_mip(fixed);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(build_ma(inst, scen, 1.0), std::invalid_argument);
}

TEST_CASE("build_ma matches the eta breakpoint scan on a fixed first stage") {
    // Uncovered values (2, 6) under the open site; alpha = 0.5 means k = 1.
    Instance inst = testutil::toy_two_nodes(5);
    const ScenarioSet scen({{5, 2}, {3, 6}});
    // Site covers node 1 only.
    auto d = testutil::near_pairs(2, {});
    Instance cover_one = testutil::make_instance(2, {{5000, 9}}, d, 6.0);

    FlpModel ma = build_ma(cover_one, scen, 0.5);
    MilpModel fixed = fix_variables(ma.model, {{ma.y_cols[0], 1.0}});
    SolveResult r = solve_mip(fixed);
    REQUIRE(r.status == SolveStatus::Optimal);
    // Scanning eta over the breakpoints {2, 6} gives CVaR = 6.
    CHECK(r.objective == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("build_ma at the worst-case level equals build_mb with k = 1") {
    auto [inst, scen] = random_fixture(13, 5, 3, 10);
    FlpModel ma = build_ma(inst, scen, 0.9);
    SolveResult ra = solve_mip(ma.model);
    REQUIRE(ra.status == SolveStatus::Optimal);

    FlpModel mb = build_mb(inst, scen, RiskSpec::from_alpha(0.9, 10));
    CutPool pool;
    pool.insert(mb.cut_handle.make_cut(initial_cut(scen, 1)));
    DelayedCutResult rb = delayed_cut_loop(mb.model, mb.cut_handle, pool, kInfinity);
    REQUIRE(rb.solve.status == SolveStatus::Optimal);
    CHECK(ra.objective == doctest::Approx(rb.solve.objective).epsilon(1e-6));
}

TEST_CASE("solve_second_stage on the capacity toy") {
    Instance inst = testutil::toy_two_nodes(5);
    const ScenarioSet scen({{3, 4}});

    const FirstStageSolution open1 = FirstStageSolution::make(inst, {1});
    CHECK(solve_second_stage(inst, scen, open1, 0).uncovered == 2);  // pool 7, capacity 5

    const FirstStageSolution closed = FirstStageSolution::make(inst, {0});
    CHECK(solve_second_stage(inst, scen, closed, 0).uncovered == 7);

    Instance roomy = testutil::toy_two_nodes(10);
    CHECK(solve_second_stage(roomy, scen, open1, 0).uncovered == 0);
}

TEST_CASE("scenario outcome invariants") {
    Instance inst = testutil::toy_two_nodes(5);
    const ScenarioSet scen({{3, 4}});
    const ScenarioOutcome out =
        solve_second_stage(inst, scen, FirstStageSolution::make(inst, {1}), 0);
    CHECK(out.uncovered >= 0);
    long long assigned_total = 0;
    for (std::size_t i = 0; i < 2; ++i) {
        int row_sum = 0;
        for (std::size_t j = 0; j < 1; ++j) row_sum += out.assigned[i][j];
        CHECK(row_sum <= 1);
        if (out.assigned[i][0]) assigned_total += scen.demand(i, 0);
    }
    CHECK(out.delivered[0] <= 5);
    CHECK(out.delivered[0] <= assigned_total);
}

TEST_CASE("evaluate_uncovered_vector") {
    Instance inst = testutil::toy_two_nodes(5);
    const ScenarioSet scen({{3, 4}, {1, 1}});

    const FirstStageSolution closed = FirstStageSolution::make(inst, {0});
    CHECK(evaluate_uncovered_vector(inst, scen, closed) ==
          std::vector<long long>{7, 2});  // nothing open: the total demands

    const FirstStageSolution open1 = FirstStageSolution::make(inst, {1});
    CHECK(evaluate_uncovered_vector(inst, scen, open1) == std::vector<long long>{2, 0});

    const ScenarioSet single({{3, 4}});
    CHECK(evaluate_uncovered_vector(inst, single, open1) ==
          std::vector<long long>{solve_second_stage(inst, single, open1, 0).uncovered});
}

TEST_CASE("second stage agrees with assignment enumeration") {
    std::uint64_t state = 555;
    for (int trial = 0; trial < 25; ++trial) {
        auto [inst, scen] = random_fixture(state, 5, 3, 2);
        testutil::next_u64(state);
        for (std::uint64_t mask = 0; mask < 8; ++mask) {
            std::vector<int> open(3, 0);
            for (int j = 0; j < 3; ++j) open[j] = (mask >> j) & 1;
            const FirstStageSolution y = FirstStageSolution::make(inst, open);
            for (std::size_t s = 0; s < scen.n_scenarios(); ++s)
                CHECK(solve_second_stage(inst, scen, y, s).uncovered ==
                      oracle::second_stage_enumerate(inst, scen, open, s));
        }
    }
}

TEST_CASE("opening more sites never increases any scenario's uncovered demand") {
    std::uint64_t state = 808;
    for (int trial = 0; trial < 10; ++trial) {
        auto [inst, scen] = random_fixture(state, 5, 3, 3);
        testutil::next_u64(state);
        const std::vector<int> base{1, 0, 0};
        const std::vector<int> larger{1, 1, 0};
        const auto u1 = evaluate_uncovered_vector(inst, scen, FirstStageSolution::make(inst, base));
        const auto u2 =
            evaluate_uncovered_vector(inst, scen, FirstStageSolution::make(inst, larger));
        for (std::size_t s = 0; s < scen.n_scenarios(); ++s) CHECK(u2[s] <= u1[s]);
    }
}

TEST_CASE("lazy solves equal the fully materialized subset family") {
    std::uint64_t state = 4242;
    for (int trial = 0; trial < 8; ++trial) {
        auto [inst, scen] = random_fixture(state, 4, 2, 4);
        testutil::next_u64(state);
        const RiskSpec risk = RiskSpec::from_k(2, 4);

        FlpModel lazy = build_mb(inst, scen, risk);
        CutPool pool;
        pool.insert(lazy.cut_handle.make_cut(initial_cut(scen, risk.k)));
        DelayedCutResult rl = delayed_cut_loop(lazy.model, lazy.cut_handle, pool, kInfinity);
        REQUIRE(rl.solve.status == SolveStatus::Optimal);

        FlpModel full = build_mb(inst, scen, risk);
        // Materialize every C(4,2) subset row.
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) {
                const Cut cut = full.cut_handle.make_cut({a, b});
                full.model.add_constraint(full.cut_handle.cut_row(cut).row,
                                          RowSense::GreaterEqual, cut.rhs_constant);
            }
        SolveResult rf = solve_mip(full.model);
        REQUIRE(rf.status == SolveStatus::Optimal);
        CHECK(rl.solve.objective == doctest::Approx(rf.objective).epsilon(1e-6));
    }
}
