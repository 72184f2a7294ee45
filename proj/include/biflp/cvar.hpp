#pragma once

#include <optional>
#include <set>
#include <vector>

#include "biflp/instance.hpp"
#include "biflp/milp.hpp"

namespace biflp {

constexpr double kSeparationTol = 1e-6;

/// Mean of the k largest entries: the top-k CVaR of an equal-probability
/// sample at confidence level 1 - k/N.
double cvar_topk(const std::vector<double>& values, int k);

/// Separation oracle over the subset family. `values` are the per-scenario
/// contributions (uncovered demand already scaled by 1/k); returns the index
/// set of the k largest entries iff their sum exceeds rho_hat + tolerance,
/// otherwise nullopt (candidate accepted). Ties by lowest scenario index;
/// the returned subset is sorted ascending.
std::optional<std::vector<int>> separate(const std::vector<double>& values, int k, double rho_hat,
                                         double tolerance = kSeparationTol);

enum class InitialCutRanking {
    MaxTotalDemand,         // k scenarios with the largest total demand
    LiteralRankDescending,  // the four ranking steps read literally
};

/// Heuristic seed subset for the relaxed model.
std::vector<int> initial_cut(const ScenarioSet& scen, int k,
                             InitialCutRanking ranking = InitialCutRanking::MaxTotalDemand);

/// One subset inequality rho >= rhs_constant + u_coefficient * sum u_j^(s),
/// with u_coefficient = -1/k for every s in the subset.
struct Cut {
    std::vector<int> subset;    // scenario ids, ascending, |subset| = k
    double rhs_constant = 0.0;  // (1/k) * sum over the subset of total demands
    double u_coefficient = 0.0;
};

class CutPool {
public:
    bool contains(const std::vector<int>& subset) const { return seen_.count(subset) > 0; }
    bool insert(Cut cut);
    const std::vector<Cut>& cuts() const { return cuts_; }
    std::size_t size() const { return cuts_.size(); }

private:
    std::vector<Cut> cuts_;
    std::set<std::vector<int>> seen_;
};

/// Binds a subset-CVaR model to its scenario bookkeeping: the rho column, the
/// u columns per scenario, each scenario's total demand, and how many pool
/// cuts have been materialized as rows of the bound model.
struct SubsetCvarHandle {
    int rho_col = -1;
    std::vector<int> y_cols;               // first-stage columns, per site
    std::vector<std::vector<int>> u_cols;  // [scenario][site]
    std::vector<double> total_demand;      // per scenario
    int k = 1;
    int cuts_applied = 0;

    std::size_t n_scenarios() const { return total_demand.size(); }
    std::vector<double> uncovered(const std::vector<double>& assignment) const;
    Cut make_cut(const std::vector<int>& subset) const;
    Constraint cut_row(const Cut& cut) const;
};

struct DelayedCutResult {
    SolveResult solve;
    int cuts_generated = 0;  // subsets this loop added to the pool
    int separator_calls = 0;
};

/// Exact second-stage values for a first-stage vector: minimal uncovered
/// demand per scenario. Lets the separation see the optimal second stage of
/// each candidate instead of whatever slack values the node carries.
using ExactUncoveredFn = std::function<std::vector<long long>(const std::vector<int>& open)>;

/// Delayed cut generation: materializes any pool cuts not yet in the model,
/// then solves with `separate` as the lazy separator. Every violated subset
/// becomes a Cut, enters the pool (deduplicated) and the model. Terminates
/// because the subset family is finite.
DelayedCutResult delayed_cut_loop(MilpModel& model, SubsetCvarHandle& handle, CutPool& pool,
                                  double time_limit_seconds = kInfinity,
                                  const ExactUncoveredFn& exact_uncovered = nullptr);

/// Same loop over a persistent solver, keeping its warm basis across the
/// frontier sweep.
DelayedCutResult delayed_cut_loop(IncrementalMip& mip, SubsetCvarHandle& handle, CutPool& pool,
                                  double time_limit_seconds = kInfinity,
                                  const ExactUncoveredFn& exact_uncovered = nullptr);

}  // namespace biflp
