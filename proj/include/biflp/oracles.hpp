#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "biflp/frontier.hpp"
#include "biflp/instance.hpp"

namespace biflp::oracle {

/// Brute-force references used by the test suites. They share data types with
/// the library but reimplement all arithmetic independently, and refuse
/// inputs beyond their enumeration budget instead of running unbounded.
struct OracleBudget {
    int max_scenarios = 12;
    int max_sites = 8;
    int max_demand_nodes = 12;
    long long max_enumeration_steps = 50000000;
};

class OracleRefusal : public std::runtime_error {
public:
    explicit OracleRefusal(const std::string& what) : std::runtime_error(what) {}
};

/// Max over all C(N,k) subsets of the subset mean.
double cvar_enumerate(const std::vector<double>& values, int k, const OracleBudget& budget = {});

/// Exact minimal uncovered demand by enumerating every assignment of demand
/// nodes to open covering sites.
long long second_stage_enumerate(const Instance& inst, const ScenarioSet& scen,
                                 const std::vector<int>& open, std::size_t scenario,
                                 const OracleBudget& budget = {});

/// Ground-truth Pareto frontier: every first-stage vector, every scenario's
/// second stage by enumeration, risk by subset enumeration.
Frontier exact_frontier(const Instance& inst, const ScenarioSet& scen, const RiskSpec& risk,
                        const OracleBudget& budget = {});

/// Monte-Carlo hypervolume estimate: returns (estimate, standard error).
std::pair<double, double> hypervolume_monte_carlo(const Frontier& frontier,
                                                  std::pair<double, double> reference,
                                                  long long samples, std::uint64_t seed);

}  // namespace biflp::oracle
