#include "biflp/formulations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace biflp {

namespace {

std::vector<std::pair<int, int>> covering_pairs(const Instance& inst) {
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < inst.n_demand_nodes(); ++i)
        for (std::size_t j = 0; j < inst.n_sites(); ++j)
            if (inst.covers(i, j)) pairs.push_back({static_cast<int>(i), static_cast<int>(j)});
    return pairs;
}

/// Shared covering structure: y columns, per-scenario x and u columns, and
/// rows (6)-(9). `scenario_ids` selects which scenarios get a second stage.
void build_core(const Instance& inst, const ScenarioSet& scen,
                const std::vector<std::size_t>& scenario_ids, FlpModel& fm) {
    MilpModel& m = fm.model;
    const std::size_t nj = inst.n_sites();

    for (std::size_t j = 0; j < nj; ++j)
        fm.y_cols.push_back(m.add_variable("y_" + std::to_string(j), 0.0, 1.0, VarKind::Binary));

    fm.cover_pairs = covering_pairs(inst);
    std::vector<std::vector<int>> pairs_of_node(inst.n_demand_nodes());
    for (std::size_t p = 0; p < fm.cover_pairs.size(); ++p)
        pairs_of_node[fm.cover_pairs[p].first].push_back(static_cast<int>(p));

    fm.x_cols.assign(scenario_ids.size(), {});
    fm.u_cols.assign(scenario_ids.size(), {});
    for (std::size_t t = 0; t < scenario_ids.size(); ++t) {
        const std::size_t s = scenario_ids[t];
        const std::string tag = "_s" + std::to_string(s);
        for (const auto& [i, j] : fm.cover_pairs)
            fm.x_cols[t].push_back(m.add_variable(
                "x" + tag + "_i" + std::to_string(i) + "_j" + std::to_string(j), 0.0, 1.0,
                VarKind::Binary));
        for (std::size_t j = 0; j < nj; ++j) {
            long long coverable = 0;  // implied bound: nothing beyond assigned demand
            for (const auto& [i, pj] : fm.cover_pairs)
                if (pj == static_cast<int>(j)) coverable += scen.demand(i, s);
            fm.u_cols[t].push_back(m.add_variable(
                "u" + tag + "_j" + std::to_string(j), 0.0,
                static_cast<double>(std::min(inst.capacity(j), coverable)), VarKind::Integer));
        }

        // (6): at most one covering assignment per demand node. Rows with a
        // single covering site are implied by the binary bound and skipped.
        for (std::size_t i = 0; i < inst.n_demand_nodes(); ++i) {
            if (pairs_of_node[i].size() < 2) continue;
            LinearExpr row;
            for (int p : pairs_of_node[i]) row.push_back({fm.x_cols[t][p], 1.0});
            m.add_constraint(std::move(row), RowSense::LessEqual, 1.0);
        }
        // (7): capacity only when open.
        for (std::size_t j = 0; j < nj; ++j)
            m.add_constraint({{fm.u_cols[t][j], 1.0},
                              {fm.y_cols[j], -static_cast<double>(inst.capacity(j))}},
                             RowSense::LessEqual, 0.0);
        // (8): delivery bounded by assigned demand.
        for (std::size_t j = 0; j < nj; ++j) {
            LinearExpr row{{fm.u_cols[t][j], 1.0}};
            for (std::size_t p = 0; p < fm.cover_pairs.size(); ++p)
                if (fm.cover_pairs[p].second == static_cast<int>(j))
                    row.push_back({fm.x_cols[t][p],
                                   -static_cast<double>(scen.demand(fm.cover_pairs[p].first, s))});
            m.add_constraint(std::move(row), RowSense::LessEqual, 0.0);
        }
        // (9): assignment only to open sites.
        for (std::size_t p = 0; p < fm.cover_pairs.size(); ++p)
            m.add_constraint({{fm.x_cols[t][p], 1.0}, {fm.y_cols[fm.cover_pairs[p].second], -1.0}},
                             RowSense::LessEqual, 0.0);
    }

    for (std::size_t j = 0; j < nj; ++j)
        if (inst.opening_cost(j) != 0)
            fm.cost_expr.push_back({fm.y_cols[j], static_cast<double>(inst.opening_cost(j))});
}

void add_driver_rows(const Instance& inst, const ScenarioSet& scen, FlpModel& fm) {
    fm.budget_row = fm.model.add_constraint(fm.cost_expr, RowSense::LessEqual,
                                            static_cast<double>(inst.total_opening_cost()));
    long long max_demand = 0;
    for (std::size_t s = 0; s < scen.n_scenarios(); ++s)
        max_demand = std::max(max_demand, scen.total_demand(s));
    fm.risk_row_off = 2.0 * static_cast<double>(max_demand) + 10.0;
    fm.risk_row = fm.model.add_constraint(fm.risk_expr, RowSense::LessEqual, fm.risk_row_off);
}

std::vector<std::size_t> all_scenarios(const ScenarioSet& scen) {
    std::vector<std::size_t> ids(scen.n_scenarios());
    for (std::size_t s = 0; s < ids.size(); ++s) ids[s] = s;
    return ids;
}

}  // namespace

FirstStageSolution FirstStageSolution::make(const Instance& inst, std::vector<int> open) {
    if (open.size() != inst.n_sites())
        throw std::invalid_argument("FirstStageSolution: open vector size mismatch");
    FirstStageSolution y;
    y.open = std::move(open);
    for (std::size_t j = 0; j < y.open.size(); ++j) {
        if (y.open[j] != 0 && y.open[j] != 1)
            throw std::invalid_argument("FirstStageSolution: open values must be 0/1");
        if (y.open[j]) y.cost += inst.opening_cost(j);
    }
    return y;
}

FirstStageSolution FlpModel::extract_first_stage(const Instance& inst,
                                                 const std::vector<double>& assignment) const {
    std::vector<int> open(y_cols.size(), 0);
    for (std::size_t j = 0; j < y_cols.size(); ++j)
        open[j] = assignment[y_cols[j]] > 0.5 ? 1 : 0;
    return FirstStageSolution::make(inst, std::move(open));
}

FlpModel build_mb(const Instance& inst, const ScenarioSet& scen, const RiskSpec& risk) {
    if (risk.k < 1 || static_cast<std::size_t>(risk.k) > scen.n_scenarios())
        throw std::invalid_argument("build_mb: k out of range");
    FlpModel fm;
    fm.kind = CvarFormulation::Subset;
    fm.k = risk.k;
    build_core(inst, scen, all_scenarios(scen), fm);

    const int rho = fm.model.add_variable("rho", 0.0, kInfinity, VarKind::Continuous);
    fm.risk_expr = {{rho, 1.0}};
    fm.model.set_objective(fm.risk_expr, ObjSense::Minimize);
    add_driver_rows(inst, scen, fm);

    fm.cut_handle.rho_col = rho;
    fm.cut_handle.y_cols = fm.y_cols;
    fm.cut_handle.u_cols = fm.u_cols;
    fm.cut_handle.k = risk.k;
    for (std::size_t s = 0; s < scen.n_scenarios(); ++s)
        fm.cut_handle.total_demand.push_back(static_cast<double>(scen.total_demand(s)));
    return fm;
}

FlpModel build_ma(const Instance& inst, const ScenarioSet& scen, double alpha) {
    if (alpha < 0.0 || alpha >= 1.0) throw std::invalid_argument("build_ma: alpha must be in [0, 1)");
    FlpModel fm;
    fm.kind = CvarFormulation::Classical;
    const std::size_t n = scen.n_scenarios();
    build_core(inst, scen, all_scenarios(scen), fm);

    // Tail weight 1/((1-alpha)N); when alpha sits on the scenario grid this is
    // exactly 1/k, which keeps MA and MB on the same risk grid.
    const double kreal = (1.0 - alpha) * static_cast<double>(n);
    const int k = std::max(1, static_cast<int>(std::llround(kreal)));
    const double factor =
        std::abs(kreal - static_cast<double>(k)) < 1e-9 ? 1.0 / k : 1.0 / kreal;
    fm.k = k;

    long long max_demand = 0;
    for (std::size_t s = 0; s < n; ++s) max_demand = std::max(max_demand, scen.total_demand(s));

    const int eta = fm.model.add_variable("eta", 0.0, static_cast<double>(max_demand),
                                          VarKind::Continuous);
    fm.risk_expr = {{eta, 1.0}};
    for (std::size_t s = 0; s < n; ++s) {
        const int exc = fm.model.add_variable("excess_" + std::to_string(s), 0.0,
                                              static_cast<double>(scen.total_demand(s)),
                                              VarKind::Continuous);
        fm.risk_expr.push_back({exc, factor});
        // excess_s >= uncovered_s - eta, i.e. eta + excess_s + sum_j u >= D_s.
        LinearExpr row{{eta, 1.0}, {exc, 1.0}};
        for (int col : fm.u_cols[s]) row.push_back({col, 1.0});
        fm.model.add_constraint(std::move(row), RowSense::GreaterEqual,
                                static_cast<double>(scen.total_demand(s)));
    }
    fm.model.set_objective(fm.risk_expr, ObjSense::Minimize);
    add_driver_rows(inst, scen, fm);
    return fm;
}

ScenarioOutcome solve_second_stage(const Instance& inst, const ScenarioSet& scen,
                                   const FirstStageSolution& y, std::size_t scenario,
                                   double time_limit_seconds) {
    if (scenario >= scen.n_scenarios())
        throw std::invalid_argument("solve_second_stage: scenario out of range");
    FlpModel fm;
    build_core(inst, scen, {scenario}, fm);

    LinearExpr delivered;
    for (int col : fm.u_cols[0]) delivered.push_back({col, 1.0});
    fm.model.set_objective(delivered, ObjSense::Maximize);

    std::vector<std::pair<int, double>> fixings;
    for (std::size_t j = 0; j < fm.y_cols.size(); ++j)
        fixings.push_back({fm.y_cols[j], static_cast<double>(y.open.at(j))});
    MilpModel fixed = fix_variables(fm.model, fixings);

    SolveResult res = solve_mip(fixed, time_limit_seconds);
    if (!res.has_solution())
        throw std::runtime_error("solve_second_stage: no solution within the time limit");

    ScenarioOutcome out;
    out.scenario = scenario;
    out.assigned.assign(inst.n_demand_nodes(), std::vector<int>(inst.n_sites(), 0));
    for (std::size_t p = 0; p < fm.cover_pairs.size(); ++p)
        out.assigned[fm.cover_pairs[p].first][fm.cover_pairs[p].second] =
            res.assignment[fm.x_cols[0][p]] > 0.5 ? 1 : 0;
    long long total_delivered = 0;
    for (std::size_t j = 0; j < inst.n_sites(); ++j) {
        const long long u = std::llround(res.assignment[fm.u_cols[0][j]]);
        out.delivered.push_back(u);
        total_delivered += u;
    }
    out.uncovered = scen.total_demand(scenario) - total_delivered;
    return out;
}

std::vector<long long> evaluate_uncovered_vector(const Instance& inst, const ScenarioSet& scen,
                                                 const FirstStageSolution& y) {
    std::vector<long long> out(scen.n_scenarios());
    for (std::size_t s = 0; s < scen.n_scenarios(); ++s)
        out[s] = solve_second_stage(inst, scen, y, s).uncovered;
    return out;
}

}  // namespace biflp
