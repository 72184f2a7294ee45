#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "biflp/instance.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace biflp;

TEST_CASE("coverage threshold is boundary inclusive") {
    auto d = testutil::near_pairs(2, {});
    SUBCASE("inside") { d[0][1] = d[1][0] = 5.0; }
    SUBCASE("boundary") { d[0][1] = d[1][0] = 6.0; }
    Instance inst = testutil::make_instance(2, {{5000, 10}}, d, 6.0);
    CHECK(coverage(inst, 2, 1) == 1);
}

TEST_CASE("coverage beyond the threshold is zero") {
    auto d = testutil::near_pairs(2, {});
    d[0][1] = d[1][0] = 7.0;
    Instance inst = testutil::make_instance(2, {{5000, 10}}, d, 6.0);
    CHECK(coverage(inst, 2, 1) == 0);
    CHECK(coverage(inst, 1, 1) == 1);  // distance zero to itself
    CHECK_THROWS_AS(coverage(inst, 9, 1), std::invalid_argument);
    CHECK_THROWS_AS(coverage(inst, 1, 2), std::invalid_argument);  // node 2 is not a site
}

TEST_CASE("parse: minimal valid document") {
    const std::string doc = R"({
      "d_max": 6.0,
      "nodes": [{"id": 1, "x": 0.0, "y": 0.0, "is_site": true,
                 "opening_cost": 5000, "capacity": 10}],
      "scenarios": [[7]]
    })";
    auto [inst, scen] = parse_instance(doc);
    CHECK(inst.n_demand_nodes() == 1);
    CHECK(inst.n_sites() == 1);
    CHECK(scen.n_scenarios() == 1);
    CHECK(scen.demand(0, 0) == 7);
}

TEST_CASE("parse: site outside the demand prefix is rejected") {
    const std::string doc = R"({
      "d_max": 6.0,
      "nodes": [{"id": 1, "x": 0.0, "y": 0.0, "is_site": false},
                {"id": 2, "x": 1.0, "y": 0.0, "is_site": true,
                 "opening_cost": 5000, "capacity": 10}],
      "scenarios": [[4]]
    })";
    CHECK_THROWS_WITH_AS(parse_instance(doc), "J must be a subset of I", ParseError);
}

TEST_CASE("parse: descriptive errors name the offending field") {
    CHECK_THROWS_AS(parse_instance("{not json"), ParseError);
    CHECK_THROWS_WITH_AS(parse_instance(R"({"nodes": [], "scenarios": [[1]]})"),
                         "missing field 'd_max'", ParseError);
    const std::string neg = R"({
      "d_max": 6.0,
      "nodes": [{"id": 1, "x": 0.0, "y": 0.0, "is_site": true,
                 "opening_cost": 5000, "capacity": 10}],
      "scenarios": [[-3]]
    })";
    CHECK_THROWS_WITH_AS(parse_instance(neg), "scenarios[0][0]: negative demand", ParseError);
    const std::string nosite = R"({
      "d_max": 6.0,
      "nodes": [{"id": 1, "x": 0.0, "y": 0.0, "is_site": true}],
      "scenarios": [[3]]
    })";
    CHECK_THROWS_AS(parse_instance(nosite), ParseError);
}

TEST_CASE("parse and serialize round-trip exactly") {
    auto [inst, scen] = generate_instance(3, 9, 4);
    const std::string text = serialize_instance(inst, scen);
    auto [inst2, scen2] = parse_instance(text);
    CHECK(inst == inst2);
    CHECK(scen == scen2);
    CHECK(serialize_instance(inst2, scen2) == text);
}

TEST_CASE("generated 21-node fixture carries the default opening cost") {
    auto [inst, scen] = generate_instance(1, 21, 10);
    CHECK(inst.n_demand_nodes() == 21);
    CHECK(inst.d_max() == 6.0);
    for (std::size_t j = 0; j < inst.n_sites(); ++j) CHECK(inst.opening_cost(j) == 5000);
    const std::string once = serialize_instance(inst, scen);
    auto [inst2, scen2] = generate_instance(1, 21, 10);
    CHECK(serialize_instance(inst2, scen2) == once);  // byte-identical regeneration
}

TEST_CASE("generator invariants hold") {
    auto [inst, scen] = generate_instance(11, 17, 6);
    CHECK(inst.n_sites() <= inst.n_demand_nodes());
    for (std::size_t s = 0; s < scen.n_scenarios(); ++s)
        for (std::size_t i = 0; i < scen.n_demand_nodes(); ++i) CHECK(scen.demand(i, s) >= 0);
    for (std::size_t j = 0; j < inst.n_sites(); ++j) CHECK(inst.capacity(j) >= 0);
    CHECK_THROWS_AS(generate_instance(1, 0, 5), std::invalid_argument);
    CHECK_THROWS_AS(generate_instance(1, 5, 0), std::invalid_argument);
}

TEST_CASE("scenario sample sizes extend the same network") {
    auto [a_inst, a_scen] = generate_instance(5, 21, 10);
    for (std::size_t n : {std::size_t(100), std::size_t(500), std::size_t(1000)}) {
        auto [b_inst, b_scen] = generate_instance(5, 21, n);
        CHECK(b_scen.n_scenarios() == n);
        CHECK(a_inst == b_inst);
        for (std::size_t s = 0; s < a_scen.n_scenarios(); ++s)
            CHECK(a_scen.scenario(s) == b_scen.scenario(s));  // prefix property
    }
}

TEST_CASE("subsample_scenarios modes") {
    auto [inst, scen] = generate_instance(2, 6, 10);
    CHECK(subsample_scenarios(scen, 10, 0) == scen);  // identity mode

    const ScenarioSet one = subsample_scenarios(scen, 1, 3);
    CHECK(one.n_scenarios() == 1);

    const ScenarioSet big = subsample_scenarios(scen, 100, 3);
    CHECK(big.n_scenarios() == 100);
    std::set<std::vector<long long>> originals;
    for (std::size_t s = 0; s < scen.n_scenarios(); ++s) originals.insert(scen.scenario(s));
    for (std::size_t s = 0; s < big.n_scenarios(); ++s)
        CHECK(originals.count(big.scenario(s)) == 1);  // resampled from the base set

    CHECK_THROWS_AS(subsample_scenarios(scen, 0, 1), std::invalid_argument);
}

TEST_CASE("risk spec derivations") {
    const RiskSpec r = RiskSpec::from_alpha(0.7, 10);
    CHECK(r.k == 3);
    const RiskSpec worst = RiskSpec::from_alpha(0.9, 10);
    CHECK(worst.k == 1);
    const RiskSpec neutral = RiskSpec::from_alpha(0.0, 10);
    CHECK(neutral.k == 10);
    CHECK(RiskSpec::from_k(3, 10).alpha == doctest::Approx(0.7));
    CHECK_THROWS_AS(RiskSpec::from_k(0, 10), std::invalid_argument);
    CHECK_THROWS_AS(RiskSpec::from_k(11, 10), std::invalid_argument);
    CHECK_THROWS_AS(RiskSpec::from_alpha(1.0, 10), std::invalid_argument);
}

TEST_CASE("coverage monotone in distance") {
    for (double dmax : {2.0, 6.0, 9.0}) {
        auto d = testutil::near_pairs(2, {});
        d[0][1] = d[1][0] = 5.0;
        Instance inst = testutil::make_instance(2, {{5000, 10}}, d, dmax);
        auto d2 = testutil::near_pairs(2, {});
        d2[0][1] = d2[1][0] = 3.0;
        Instance closer = testutil::make_instance(2, {{5000, 10}}, d2, dmax);
        if (coverage(inst, 2, 1) == 1) CHECK(coverage(closer, 2, 1) == 1);
    }
}
