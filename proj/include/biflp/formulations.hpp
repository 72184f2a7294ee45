#pragma once

#include <utility>
#include <vector>

#include "biflp/cvar.hpp"
#include "biflp/instance.hpp"
#include "biflp/milp.hpp"

namespace biflp {

struct FirstStageSolution {
    std::vector<int> open;  // 0/1 per site index
    long long cost = 0;     // exact integer dot product with the opening costs

    static FirstStageSolution make(const Instance& inst, std::vector<int> open);
};

struct ScenarioOutcome {
    std::size_t scenario = 0;
    std::vector<std::vector<int>> assigned;  // x[demand position][site index]
    std::vector<long long> delivered;        // u per site index
    long long uncovered = 0;                 // total demand minus delivered
};

enum class CvarFormulation { Classical, Subset };

/// A built two-stage model plus the bookkeeping the frontier drivers need:
/// the budget row (objective (3) as a constraint), a switchable risk row for
/// lexicographic solves, and column maps for extracting solutions.
struct FlpModel {
    MilpModel model;
    CvarFormulation kind = CvarFormulation::Classical;
    int k = 1;  // risk values live on the 1/k grid

    int budget_row = -1;
    int risk_row = -1;
    double risk_row_off = 0.0;  // rhs that leaves the risk row slack

    std::vector<int> y_cols;                         // per site
    std::vector<std::vector<int>> u_cols;            // [scenario][site]
    std::vector<std::pair<int, int>> cover_pairs;    // (demand position, site) with psi = 1
    std::vector<std::vector<int>> x_cols;            // [scenario][cover pair]
    LinearExpr cost_expr;                            // objective (3)
    LinearExpr risk_expr;                            // objective (4)

    SubsetCvarHandle cut_handle;  // Subset kind only

    FirstStageSolution extract_first_stage(const Instance& inst,
                                           const std::vector<double>& assignment) const;
};

/// Subset-based model: min rho subject to the covering rows, with the subset
/// family left to the lazy channel (the returned handle drives separation).
FlpModel build_mb(const Instance& inst, const ScenarioSet& scen, const RiskSpec& risk);

/// Classical model: min eta + (1/((1-alpha)N)) sum excess_s with the same
/// covering rows plus the VaR-auxiliary linearization block.
FlpModel build_ma(const Instance& inst, const ScenarioSet& scen, double alpha);

/// Second stage for one scenario with the first stage fixed: maximizes the
/// delivered amount, i.e. minimizes that scenario's uncovered demand.
ScenarioOutcome solve_second_stage(const Instance& inst, const ScenarioSet& scen,
                                   const FirstStageSolution& y, std::size_t scenario,
                                   double time_limit_seconds = kInfinity);

/// Exact per-scenario minimal uncovered demand for a fixed first stage.
std::vector<long long> evaluate_uncovered_vector(const Instance& inst, const ScenarioSet& scen,
                                                 const FirstStageSolution& y);

}  // namespace biflp
