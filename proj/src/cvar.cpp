#include "biflp/cvar.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace biflp {

namespace {

void check_k(std::size_t n, int k) {
    if (n == 0) throw std::invalid_argument("empty value vector");
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw std::invalid_argument("k must be in [1, N], got k=" + std::to_string(k) +
                                    " with N=" + std::to_string(n));
}

/// Scenario indices ordered by (value descending, index ascending).
std::vector<int> order_desc(const std::vector<double>& values) {
    std::vector<int> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return values[a] > values[b]; });
    return idx;
}

}  // namespace

double cvar_topk(const std::vector<double>& values, int k) {
    check_k(values.size(), k);
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += sorted[i];
    return sum / static_cast<double>(k);
}

std::optional<std::vector<int>> separate(const std::vector<double>& values, int k, double rho_hat,
                                         double tolerance) {
    check_k(values.size(), k);
    const std::vector<int> order = order_desc(values);
    double sum = 0.0;
    std::vector<int> subset(order.begin(), order.begin() + k);
    for (int s : subset) sum += values[s];
    if (sum <= rho_hat + tolerance) return std::nullopt;
    std::sort(subset.begin(), subset.end());
    return subset;
}

std::vector<int> initial_cut(const ScenarioSet& scen, int k, InitialCutRanking ranking) {
    const std::size_t n = scen.n_scenarios();
    check_k(n, k);

    std::vector<double> score(n, 0.0);
    if (ranking == InitialCutRanking::MaxTotalDemand) {
        for (std::size_t s = 0; s < n; ++s) score[s] = static_cast<double>(scen.total_demand(s));
    } else {
        // Literal reading: rank scenarios per demand point (descending demand),
        // sum the ranks, keep the scenarios with the largest cumulative rank.
        for (std::size_t i = 0; i < scen.n_demand_nodes(); ++i) {
            std::vector<int> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
                return scen.demand(i, a) > scen.demand(i, b);
            });
            for (std::size_t pos = 0; pos < n; ++pos)
                score[idx[pos]] += static_cast<double>(pos + 1);
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score[a] > score[b]; });
    std::vector<int> subset(order.begin(), order.begin() + k);
    std::sort(subset.begin(), subset.end());
    return subset;
}

bool CutPool::insert(Cut cut) {
    if (!seen_.insert(cut.subset).second) return false;
    cuts_.push_back(std::move(cut));
    return true;
}

std::vector<double> SubsetCvarHandle::uncovered(const std::vector<double>& assignment) const {
    std::vector<double> out(n_scenarios());
    for (std::size_t s = 0; s < out.size(); ++s) {
        double delivered = 0.0;
        for (int col : u_cols[s]) delivered += assignment[col];
        out[s] = total_demand[s] - delivered;
    }
    return out;
}

Cut SubsetCvarHandle::make_cut(const std::vector<int>& subset) const {
    Cut cut;
    cut.subset = subset;
    std::sort(cut.subset.begin(), cut.subset.end());
    double demand_sum = 0.0;
    for (int s : cut.subset) demand_sum += total_demand[s];
    cut.rhs_constant = demand_sum / static_cast<double>(k);
    cut.u_coefficient = -1.0 / static_cast<double>(k);
    return cut;
}

Constraint SubsetCvarHandle::cut_row(const Cut& cut) const {
    LinearExpr row;
    row.push_back({rho_col, 1.0});
    for (int s : cut.subset)
        for (int col : u_cols[s]) row.push_back({col, -cut.u_coefficient});
    return Constraint{std::move(row), RowSense::GreaterEqual, cut.rhs_constant};
}

namespace {

DelayedCutResult run_cut_loop(MilpModel& model, IncrementalMip* mip, SubsetCvarHandle& handle,
                              CutPool& pool, double time_limit_seconds,
                              const ExactUncoveredFn& exact_uncovered) {
    auto append = [&](const Constraint& row) {
        if (mip)
            mip->add_constraint(row.row, row.sense, row.rhs);
        else
            model.add_constraint(row.row, row.sense, row.rhs);
    };
    for (std::size_t i = handle.cuts_applied; i < pool.size(); ++i)
        append(handle.cut_row(pool.cuts()[i]));
    handle.cuts_applied = static_cast<int>(pool.size());

    const int k = handle.k;
    LazySeparator separator = [&](const std::vector<double>& assignment)
        -> std::optional<Constraint> {
        const double rho_hat = assignment[handle.rho_col];
        // Candidate values as carried by the node.
        std::vector<double> noded = handle.uncovered(assignment);
        for (double& v : noded) v /= static_cast<double>(k);

        auto try_cut = [&](const std::vector<int>& subset) -> std::optional<Constraint> {
            if (pool.contains(subset)) return std::nullopt;
            Cut cut = handle.make_cut(subset);
            Constraint row = handle.cut_row(cut);
            if (model.violation(row, assignment) <= kFeasibilityTol) return std::nullopt;
            pool.insert(std::move(cut));
            ++handle.cuts_applied;
            return row;
        };

        if (exact_uncovered) {
            // Separate on the exact optimal second stage of this first stage.
            std::vector<int> open(handle.y_cols.size());
            for (std::size_t j = 0; j < open.size(); ++j)
                open[j] = assignment[handle.y_cols[j]] > 0.5 ? 1 : 0;
            const std::vector<long long> unc = exact_uncovered(open);
            std::vector<double> values(unc.begin(), unc.end());
            for (double& v : values) v /= static_cast<double>(k);
            auto subset = separate(values, k, rho_hat, kSeparationTol);
            if (!subset) return std::nullopt;  // rho covers the true tail of this y
            if (auto row = try_cut(*subset)) return row;
            // The true tail is pooled but slack second-stage values still
            // violate it somewhere; cut on the node's own values instead.
            auto fallback = separate(noded, k, rho_hat, kSeparationTol);
            if (!fallback) return std::nullopt;
            return try_cut(*fallback);
        }

        auto subset = separate(noded, k, rho_hat, kSeparationTol);
        if (!subset) return std::nullopt;
        return try_cut(*subset);
    };

    DelayedCutResult out;
    out.solve = mip ? mip->solve(time_limit_seconds, separator)
                    : solve_mip(model, time_limit_seconds, separator);
    out.cuts_generated = out.solve.cuts_added;
    out.separator_calls = out.solve.separator_calls;
    return out;
}

}  // namespace

DelayedCutResult delayed_cut_loop(MilpModel& model, SubsetCvarHandle& handle, CutPool& pool,
                                  double time_limit_seconds,
                                  const ExactUncoveredFn& exact_uncovered) {
    return run_cut_loop(model, nullptr, handle, pool, time_limit_seconds, exact_uncovered);
}

DelayedCutResult delayed_cut_loop(IncrementalMip& mip, SubsetCvarHandle& handle, CutPool& pool,
                                  double time_limit_seconds,
                                  const ExactUncoveredFn& exact_uncovered) {
    return run_cut_loop(mip.model(), &mip, handle, pool, time_limit_seconds, exact_uncovered);
}

}  // namespace biflp
