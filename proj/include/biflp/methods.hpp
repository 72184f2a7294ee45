#pragma once

#include <vector>

#include "biflp/frontier.hpp"

namespace biflp {

enum class ModelFamily {
    Classical,     // MA
    SubsetExact,   // MB, separation at every point
    SubsetFrozen,  // MB-bar, separation for the first extreme point only
};

struct DriverOptions {
    double time_limit_per_point = kInfinity;  // seconds
    double time_limit_total = kInfinity;
};

struct MatheuristicOptions {
    double per_point_budget = 10.0;  // seconds per frontier point
    int kappa = 2;                   // local branching radius
    double time_limit_total = kInfinity;
};

struct PointLog {
    long long cost = 0;
    double risk = 0.0;
    int cuts_added = 0;
    int separator_calls = 0;
    double seconds = 0.0;
    bool exact = true;
};

struct DriverStats {
    std::vector<PointLog> point_log;
    int cuts_total = 0;
    int separator_calls_total = 0;
    int separator_calls_after_first_point = 0;
    std::size_t pool_size = 0;
    bool hit_time_limit = false;
    double seconds = 0.0;
};

struct FrontierRun {
    Frontier frontier;
    DriverStats stats;
};

/// Budget sweep step: greatest common divisor of the opening costs (1 when
/// degenerate), so consecutive epsilon values enumerate exactly the
/// achievable cost levels.
long long cost_step(const Instance& inst);

/// Epsilon-constraint sweep: lexicographic (min risk, then min cost) under a
/// shrinking budget row, from the full budget down to zero.
FrontierRun epsilon_constraint(ModelFamily family, const Instance& inst, const ScenarioSet& scen,
                               const RiskSpec& risk, const DriverOptions& opts = {});

/// Balanced-box search over objective-space rectangles via paired
/// lexicographic solves. Requires an exact family (Classical or SubsetExact).
FrontierRun balanced_box(ModelFamily family, const Instance& inst, const ScenarioSet& scen,
                         const RiskSpec& risk, const DriverOptions& opts = {});

/// Epsilon-constraint skeleton with RINS-style fixing, then local branching,
/// then an unrestricted fallback, escalating whenever the stage result cannot
/// be certified optimal against relaxation bounds.
FrontierRun matheuristic(ModelFamily family, const Instance& inst, const ScenarioSet& scen,
                         const RiskSpec& risk, const MatheuristicOptions& opts = {});

/// Replaces every point's risk with the exact CVaR of its first stage (the
/// second stage decouples by scenario once y is fixed) and re-filters.
Frontier reevaluate_frontier(const Frontier& frontier, const Instance& inst,
                             const ScenarioSet& scen, const RiskSpec& risk);

}  // namespace biflp
