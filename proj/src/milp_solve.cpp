#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "biflp/milp.hpp"
#include "simplex_engine.hpp"

namespace biflp {

namespace {

using detail::LpStatus;
using detail::SimplexEngine;

double to_user(double internal, bool negated) { return negated ? -internal : internal; }

struct BBNode {
    long long id = 0;
    int parent = -1;
    int var = -1;  // branching variable, -1 at the root
    double blb = 0.0;
    double bub = 0.0;
    double bound = -kInfinity;  // parent relaxation bound, internal sense
    std::shared_ptr<const std::vector<unsigned char>> warm;
};

struct HeapEntry {
    double bound = 0.0;
    long long id = 0;
    int index = 0;
    bool operator>(const HeapEntry& o) const {
        if (bound != o.bound) return bound > o.bound;
        return id > o.id;
    }
};

}  // namespace

SolveResult solve_lp(const MilpModel& model) {
    SimplexEngine eng(model);
    const LpStatus st = eng.solve();
    SolveResult res;
    res.simplex_iterations = eng.iterations();
    switch (st) {
        case LpStatus::Optimal:
            res.status = SolveStatus::Optimal;
            res.assignment = eng.structural_values();
            res.objective = to_user(eng.objective_value(), eng.objective_negated());
            res.bound = res.objective;
            break;
        case LpStatus::Infeasible:
            res.status = SolveStatus::Infeasible;
            break;
        case LpStatus::Unbounded:
            res.status = SolveStatus::Unbounded;
            break;
        default:
            throw std::runtime_error("solve_lp: simplex iteration limit reached");
    }
    return res;
}

namespace detail {

SolveResult solve_bnb(MilpModel& model, SimplexEngine& eng, double time_limit_seconds,
                      const LazySeparator& separator) {
    using Clock = SimplexEngine::Clock;
    if (!(time_limit_seconds > 0.0)) throw std::invalid_argument("solve_mip: time limit must be positive");
    const auto start = Clock::now();
    const auto deadline =
        time_limit_seconds == kInfinity
            ? Clock::time_point::max()
            : start + std::chrono::duration_cast<Clock::duration>(
                          std::chrono::duration<double>(time_limit_seconds));

    const bool negated = eng.objective_negated();

    std::vector<int> int_vars;
    for (int v = 0; v < model.n_vars(); ++v)
        if (model.var_kind(v) != VarKind::Continuous) int_vars.push_back(v);

    // Branching importance: how many rows a column touches. First-stage style
    // variables coupled into many rows move the dual bound; leaf variables do
    // not. Most-fractional breaks ties within an importance class.
    std::vector<int> col_rows(model.n_vars(), 0);
    for (int c = 0; c < model.n_constraints(); ++c)
        for (const Term& t : model.constraint(c).row) ++col_rows[t.var];

    // When the objective has integer coefficients over integer variables its
    // value lives on the gcd grid, so node bounds round up to the next grid
    // multiple. This prunes exactly, not heuristically.
    long long obj_grid = 0;
    bool grid_ok = !model.objective().empty();
    for (const Term& t : model.objective()) {
        if (!grid_ok) break;
        if (model.var_kind(t.var) == VarKind::Continuous ||
            std::abs(t.coef - std::round(t.coef)) > 1e-9) {
            grid_ok = false;
            break;
        }
        obj_grid = std::gcd(obj_grid, std::llround(std::abs(t.coef)));
    }
    if (obj_grid == 0) grid_ok = false;
    auto sharpen = [&](double internal_bound) {
        if (!grid_ok) return internal_bound;
        const double g = static_cast<double>(obj_grid);
        return g * std::ceil(internal_bound / g - 1e-9);
    };

    std::deque<BBNode> nodes;
    nodes.push_back(BBNode{});
    long long next_id = 1;
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>> open;

    // Bound context of the node the engine currently reflects.
    std::map<int, std::pair<double, double>> active;
    auto move_to = [&](int target) {
        std::map<int, std::pair<double, double>> want;
        for (int a = target; a >= 0; a = nodes[a].parent)
            if (nodes[a].var >= 0)
                want.emplace(nodes[a].var, std::make_pair(nodes[a].blb, nodes[a].bub));
        for (const auto& [v, b] : active)
            if (!want.count(v)) eng.set_var_bounds(v, model.lower_bound(v), model.upper_bound(v));
        for (const auto& [v, b] : want) eng.set_var_bounds(v, b.first, b.second);
        active = std::move(want);
    };

    std::vector<double> incumbent;
    double inc_internal = kInfinity;
    double prune_floor = kInfinity;
    auto cutoff = [&] {
        if (inc_internal == kInfinity) return kInfinity;
        return inc_internal - kMipRelGap * std::max(1.0, std::abs(inc_internal));
    };

    SolveResult res;
    int cur = 0;
    bool have_current = true;
    bool timed_out = false;
    std::vector<int> dive;        // pending siblings of the current dive, LIFO
    std::vector<char> done;       // node already processed or pruned
    done.push_back(0);
    int dive_len = 0;
    constexpr int kMaxDive = 64;  // best-bound refresh cadence

    while (true) {
        if (!have_current) {
            int found = -1;
            bool sibling = false;
            // Continue the dive through pending siblings: they are one bound
            // flip away, so the current factorization stays useful.
            while (dive_len < kMaxDive && !dive.empty()) {
                const int id = dive.back();
                dive.pop_back();
                if (done[id]) continue;
                if (nodes[id].bound >= cutoff()) {
                    prune_floor = std::min(prune_floor, nodes[id].bound);
                    done[id] = 1;
                    continue;
                }
                found = id;
                sibling = true;
                break;
            }
            while (found < 0 && !open.empty()) {
                const HeapEntry e = open.top();
                open.pop();
                if (done[e.index]) continue;
                if (e.bound >= cutoff()) {
                    prune_floor = std::min(prune_floor, e.bound);
                    done[e.index] = 1;
                    continue;
                }
                found = e.index;
                break;
            }
            if (found < 0) break;
            cur = found;
            done[cur] = 1;
            move_to(cur);
            if (sibling) {
                ++dive_len;  // keep the factor, phase 1 repairs the basis
            } else {
                eng.restore(*nodes[cur].warm);
                dive_len = 0;
            }
            have_current = true;
        }

        if (Clock::now() >= deadline) {
            timed_out = true;
            break;
        }

        const LpStatus st = eng.solve(deadline);
        ++res.nodes;
        if (st == LpStatus::TimedOut || st == LpStatus::IterLimit) {
            timed_out = true;
            break;
        }
        if (st == LpStatus::Infeasible) {
            have_current = false;
            continue;
        }
        if (st == LpStatus::Unbounded) {
            res.status = SolveStatus::Unbounded;
            res.simplex_iterations = eng.iterations();
            res.bound = to_user(-kInfinity, negated);
            for (const auto& [v, b] : active)
                eng.set_var_bounds(v, model.lower_bound(v), model.upper_bound(v));
            return res;
        }

        const double lp = sharpen(eng.objective_value());
        if (lp >= cutoff() || (grid_ok && lp >= inc_internal - 1e-9)) {
            prune_floor = std::min(prune_floor, lp);
            have_current = false;
            continue;
        }

        // Branch on the most-fractional variable within the highest coupling
        // class; binaries before general integers, ties by lowest index.
        int bvar = -1;
        int brank = -1;
        double bscore = 0.0;
        double bval = 0.0;
        for (int v : int_vars) {
            const double x = eng.value(v);
            const double f = x - std::floor(x);
            const double dist = std::min(f, 1.0 - f);
            if (dist <= kIntegralityTol) continue;
            const int rank = (model.var_kind(v) == VarKind::Binary ? 1 << 20 : 0) + col_rows[v];
            if (rank > brank || (rank == brank && dist > bscore)) {
                brank = rank;
                bscore = dist;
                bvar = v;
                bval = x;
            }
        }

        if (bvar < 0) {
            // Integer-feasible candidate; offer it to the separator first.
            std::vector<double> cand = eng.structural_values();
            for (int v : int_vars) cand[v] = std::round(cand[v]);
            if (separator) {
                ++res.separator_calls;
                if (auto row = separator(cand)) {
                    if (model.violation(*row, cand) <= kFeasibilityTol)
                        throw std::invalid_argument(
                            "lazy separator returned a row the candidate does not violate");
                    model.add_constraint(row->row, row->sense, row->rhs);
                    eng.add_row(*row);
                    ++res.cuts_added;
                    continue;  // re-solve this node under the new row
                }
            }
            const double cobj = model.eval_expr(model.objective(), cand);
            const double cint = negated ? -cobj : cobj;
            if (cint < inc_internal) {
                inc_internal = cint;
                incumbent = std::move(cand);
            }
            have_current = false;
            continue;
        }

        auto warm = std::make_shared<const std::vector<unsigned char>>(eng.snapshot());
        const double fl = std::floor(bval);
        const double cl = std::ceil(bval);
        BBNode down;
        down.id = next_id++;
        down.parent = cur;
        down.var = bvar;
        down.blb = eng.var_lb(bvar);
        down.bub = fl;
        down.bound = lp;
        down.warm = warm;
        BBNode up;
        up.id = next_id++;
        up.parent = cur;
        up.var = bvar;
        up.blb = cl;
        up.bub = eng.var_ub(bvar);
        up.bound = lp;
        up.warm = warm;

        nodes.push_back(std::move(down));
        const int idown = static_cast<int>(nodes.size()) - 1;
        nodes.push_back(std::move(up));
        const int iup = static_cast<int>(nodes.size()) - 1;
        done.push_back(0);
        done.push_back(0);

        // Plunge into the child the relaxation value rounds to (ties down).
        const bool go_down = bval - fl <= 0.5;
        const int go = go_down ? idown : iup;
        const int stay = go_down ? iup : idown;
        open.push(HeapEntry{lp, nodes[stay].id, stay});
        dive.push_back(stay);
        done[go] = 1;
        eng.set_var_bounds(bvar, nodes[go].blb, nodes[go].bub);
        active[bvar] = {nodes[go].blb, nodes[go].bub};
        cur = go;
    }

    res.simplex_iterations = eng.iterations();
    // Leave the engine at the root bound context for the next warm solve.
    for (const auto& [v, b] : active)
        eng.set_var_bounds(v, model.lower_bound(v), model.upper_bound(v));

    double dual = std::min(inc_internal, prune_floor);
    if (timed_out) {
        if (!open.empty()) dual = std::min(dual, open.top().bound);
        if (have_current) dual = std::min(dual, nodes[cur].bound);
    }

    if (!incumbent.empty()) {
        res.status = timed_out ? SolveStatus::TimeLimitFeasible : SolveStatus::Optimal;
        res.objective = to_user(inc_internal, negated);
        res.assignment = std::move(incumbent);
        res.bound = to_user(dual, negated);
    } else if (timed_out) {
        res.status = SolveStatus::TimeLimitNoSolution;
        res.bound = to_user(dual, negated);
    } else {
        res.status = SolveStatus::Infeasible;
    }
    return res;
}

}  // namespace detail

SolveResult solve_mip(MilpModel& model, double time_limit_seconds, const LazySeparator& separator) {
    SimplexEngine eng(model);
    return detail::solve_bnb(model, eng, time_limit_seconds, separator);
}

IncrementalMip::IncrementalMip(MilpModel& model)
    : model_(&model), engine_(std::make_unique<SimplexEngine>(model)) {}

IncrementalMip::~IncrementalMip() = default;

int IncrementalMip::add_constraint(LinearExpr row, RowSense sense, double rhs) {
    const int idx = model_->add_constraint(std::move(row), sense, rhs);
    engine_->add_row(model_->constraint(idx));
    return idx;
}

void IncrementalMip::set_rhs(int constraint, double rhs) {
    model_->set_rhs(constraint, rhs);
    engine_->set_row_rhs(constraint, rhs);
}

void IncrementalMip::set_objective(LinearExpr expr, ObjSense sense) {
    model_->set_objective(std::move(expr), sense);
    engine_->set_costs(*model_);
}

SolveResult IncrementalMip::solve(double time_limit_seconds, const LazySeparator& separator) {
    return detail::solve_bnb(*model_, *engine_, time_limit_seconds, separator);
}

SolveResult IncrementalMip::solve_relaxation() {
    const detail::LpStatus st = engine_->solve();
    SolveResult res;
    res.simplex_iterations = engine_->iterations();
    switch (st) {
        case detail::LpStatus::Optimal:
            res.status = SolveStatus::Optimal;
            res.assignment = engine_->structural_values();
            res.objective = to_user(engine_->objective_value(), engine_->objective_negated());
            res.bound = res.objective;
            break;
        case detail::LpStatus::Infeasible:
            res.status = SolveStatus::Infeasible;
            break;
        case detail::LpStatus::Unbounded:
            res.status = SolveStatus::Unbounded;
            break;
        default:
            throw std::runtime_error("solve_relaxation: simplex iteration limit reached");
    }
    return res;
}

}  // namespace biflp
