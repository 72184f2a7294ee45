#include "biflp/methods.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace biflp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_until(Clock::time_point deadline) {
    if (deadline == Clock::time_point::max()) return kInfinity;
    const double s = std::chrono::duration<double>(deadline - Clock::now()).count();
    return std::max(s, 0.0);
}

Clock::time_point deadline_in(double seconds) {
    if (seconds == kInfinity) return Clock::time_point::max();
    return Clock::now() +
           std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
}

/// Risk values of integer instances live on the 1/k grid; snap solver output
/// onto it when within half a step.
double snap_risk(double value, int k) {
    const double g = std::round(value * k) / static_cast<double>(k);
    return std::abs(g - value) < 0.5 / k ? g : value;
}

double ceil_to_grid(double value, double step) {
    return step * std::ceil(value / step - 1e-9);
}

FlpModel build_family(ModelFamily family, const Instance& inst, const ScenarioSet& scen,
                      const RiskSpec& risk) {
    if (family == ModelFamily::Classical) return build_ma(inst, scen, risk.alpha);
    return build_mb(inst, scen, risk);
}

/// One solvable model plus the metadata needed to run lexicographic phases on
/// it. Stage models of the matheuristic get their own handle copy; the pool
/// is shared so discovered subsets are never lost.
/// Memoized exact second-stage evaluation shared by a whole driver run.
struct SecondStageCache {
    const Instance* inst = nullptr;
    const ScenarioSet* scen = nullptr;
    std::map<std::vector<int>, std::vector<long long>> memo;

    std::vector<long long> eval(const std::vector<int>& open) {
        auto it = memo.find(open);
        if (it != memo.end()) return it->second;
        auto unc = evaluate_uncovered_vector(*inst, *scen, FirstStageSolution::make(*inst, open));
        memo.emplace(open, unc);
        return unc;
    }
};

/// Phase objectives with a vanishing preference for delivered demand and
/// active assignments. The weights sit far below the 1/k risk grid and the
/// opening-cost grid, so optima are unchanged, but second-stage vertices
/// become integral instead of degenerate.
struct PhaseObjectives {
    LinearExpr risk;
    LinearExpr cost;

    static PhaseObjectives make(const FlpModel& fm) {
        PhaseObjectives out{fm.risk_expr, fm.cost_expr};
        for (auto* e : {&out.risk, &out.cost}) {
            for (const auto& per_scenario : fm.u_cols)
                for (int c : per_scenario) e->push_back({c, -0x1.0p-30});
            for (const auto& per_scenario : fm.x_cols)
                for (int c : per_scenario) e->push_back({c, -0x1.0p-40});
        }
        return out;
    }
};

struct SolveContext {
    IncrementalMip* mip = nullptr;
    const FlpModel* meta = nullptr;
    const PhaseObjectives* phase = nullptr;
    SubsetCvarHandle* handle = nullptr;
    CutPool* pool = nullptr;
    bool separation = false;
    DriverStats* stats = nullptr;
    const Instance* inst = nullptr;
    SecondStageCache* cache = nullptr;

    void set_rhs(int row, double rhs) { mip->set_rhs(row, rhs); }
    void set_objective(const LinearExpr& expr, ObjSense sense) { mip->set_objective(expr, sense); }

    SolveResult run(double tl, int* cuts = nullptr, int* calls = nullptr) {
        if (separation && handle) {
            ExactUncoveredFn exact;
            if (cache)
                exact = [this](const std::vector<int>& open) { return cache->eval(open); };
            DelayedCutResult r = delayed_cut_loop(*mip, *handle, *pool, tl, exact);
            if (cuts) *cuts += r.cuts_generated;
            if (calls) *calls += r.separator_calls;
            if (stats) {
                stats->cuts_total += r.cuts_generated;
                stats->separator_calls_total += r.separator_calls;
            }
            return r.solve;
        }
        return mip->solve(tl);
    }
};

struct LexResult {
    FrontierPoint point;
    bool exact = false;
};

/// Lexicographic (min risk, then min cost) under budget <= eps.
std::optional<LexResult> lex_risk_cost(SolveContext& ctx, double eps, Clock::time_point deadline,
                                       int* cuts = nullptr, int* calls = nullptr) {
    const FlpModel& meta = *ctx.meta;
    ctx.set_rhs(meta.budget_row, eps);
    ctx.set_rhs(meta.risk_row, meta.risk_row_off);
    ctx.set_objective(ctx.phase->risk, ObjSense::Minimize);

    double tl = seconds_until(deadline);
    if (tl <= 0.0) return std::nullopt;
    SolveResult a = ctx.run(tl, cuts, calls);
    if (!a.has_solution()) return std::nullopt;
    const bool exact_a = a.status == SolveStatus::Optimal;
    const double risk = exact_a ? snap_risk(a.objective, meta.k) : a.objective;

    ctx.set_rhs(meta.risk_row, risk + 1e-6);
    ctx.set_objective(ctx.phase->cost, ObjSense::Minimize);
    tl = seconds_until(deadline);
    LexResult out;
    if (tl > 0.0) {
        SolveResult b = ctx.run(tl, cuts, calls);
        if (b.has_solution()) {
            FirstStageSolution y = meta.extract_first_stage(*ctx.inst, b.assignment);
            out.point = FrontierPoint{y.cost, risk, std::move(y.open), Provenance::Exact};
            out.exact = exact_a && b.status == SolveStatus::Optimal;
            if (!out.exact) out.point.provenance = Provenance::Approximate;
            return out;
        }
    }
    // Second phase starved; fall back to the first-phase incumbent.
    FirstStageSolution y = meta.extract_first_stage(*ctx.inst, a.assignment);
    out.point = FrontierPoint{y.cost, risk, std::move(y.open), Provenance::Approximate};
    out.exact = false;
    return out;
}

/// Lexicographic (min cost, then min risk) under risk <= bound, cost <= eps.
std::optional<LexResult> lex_cost_risk(SolveContext& ctx, double risk_bound, double eps,
                                       Clock::time_point deadline, int* cuts = nullptr,
                                       int* calls = nullptr) {
    const FlpModel& meta = *ctx.meta;
    ctx.set_rhs(meta.budget_row, eps);
    ctx.set_rhs(meta.risk_row, risk_bound);
    ctx.set_objective(ctx.phase->cost, ObjSense::Minimize);

    double tl = seconds_until(deadline);
    if (tl <= 0.0) return std::nullopt;
    SolveResult a = ctx.run(tl, cuts, calls);
    if (!a.has_solution()) return std::nullopt;
    const bool exact_a = a.status == SolveStatus::Optimal;
    FirstStageSolution ya = meta.extract_first_stage(*ctx.inst, a.assignment);

    ctx.set_rhs(meta.budget_row, static_cast<double>(ya.cost));
    ctx.set_objective(ctx.phase->risk, ObjSense::Minimize);
    tl = seconds_until(deadline);
    LexResult out;
    if (tl > 0.0) {
        SolveResult b = ctx.run(tl, cuts, calls);
        if (b.has_solution()) {
            const bool exact_b = b.status == SolveStatus::Optimal;
            const double risk = exact_b ? snap_risk(b.objective, meta.k) : b.objective;
            FirstStageSolution y = meta.extract_first_stage(*ctx.inst, b.assignment);
            out.point = FrontierPoint{y.cost, risk, std::move(y.open),
                                      exact_a && exact_b ? Provenance::Exact
                                                         : Provenance::Approximate};
            out.exact = exact_a && exact_b;
            return out;
        }
    }
    return std::nullopt;
}

/// Seeds the subset pool for families that separate: the demand-ranking
/// heuristic subset plus the tail of the all-open first stage. The latter
/// pins the relaxation bound of the first extreme point, where every site
/// is affordable.
void seed_pool(const Instance& inst, const ScenarioSet& scen, const FlpModel& fm, CutPool& pool) {
    pool.insert(fm.cut_handle.make_cut(initial_cut(scen, fm.k)));
    const FirstStageSolution all_open =
        FirstStageSolution::make(inst, std::vector<int>(inst.n_sites(), 1));
    const std::vector<long long> uncovered = evaluate_uncovered_vector(inst, scen, all_open);
    std::vector<double> values(uncovered.begin(), uncovered.end());
    for (double& v : values) v /= static_cast<double>(fm.k);
    if (auto subset = separate(values, fm.k, -kInfinity, 0.0))
        pool.insert(fm.cut_handle.make_cut(*subset));
}

}  // namespace

long long cost_step(const Instance& inst) {
    long long g = 0;
    for (std::size_t j = 0; j < inst.n_sites(); ++j)
        g = std::gcd(g, inst.opening_cost(j));
    return g > 0 ? g : 1;
}

FrontierRun epsilon_constraint(ModelFamily family, const Instance& inst, const ScenarioSet& scen,
                               const RiskSpec& risk, const DriverOptions& opts) {
    const auto run_start = Clock::now();
    const auto total_deadline = deadline_in(opts.time_limit_total);

    FlpModel fm = build_family(family, inst, scen, risk);
    CutPool pool;
    SecondStageCache cache{&inst, &scen, {}};
    const PhaseObjectives phase = PhaseObjectives::make(fm);
    IncrementalMip mip(fm.model);
    SolveContext ctx{&mip, &fm, &phase, &fm.cut_handle, &pool,
                     family != ModelFamily::Classical, nullptr, &inst, &cache};
    if (ctx.separation) seed_pool(inst, scen, fm, pool);

    FrontierRun run;
    ctx.stats = &run.stats;
    const long long delta = cost_step(inst);
    double eps = static_cast<double>(inst.total_opening_cost());
    std::vector<FrontierPoint> points;
    bool first = true;

    while (eps >= 0.0) {
        const auto point_start = Clock::now();
        const auto point_deadline =
            std::min(deadline_in(opts.time_limit_per_point), total_deadline);
        int cuts = 0, calls = 0;
        auto lr = lex_risk_cost(ctx, eps, point_deadline, &cuts, &calls);
        if (!lr) {
            run.stats.hit_time_limit = true;
            break;
        }
        if (!first) run.stats.separator_calls_after_first_point += calls;
        if (family == ModelFamily::SubsetFrozen && first) ctx.separation = false;
        first = false;

        run.stats.point_log.push_back(PointLog{lr->point.cost, lr->point.risk, cuts, calls,
                                               std::chrono::duration<double>(Clock::now() -
                                                                             point_start)
                                                   .count(),
                                               lr->exact});
        const long long c = lr->point.cost;
        points.push_back(std::move(lr->point));
        if (c == 0) break;
        eps = static_cast<double>(c - delta);
        if (Clock::now() >= total_deadline) {
            run.stats.hit_time_limit = true;
            break;
        }
    }

    run.frontier = Frontier::from_points(std::move(points));
    run.stats.pool_size = pool.size();
    run.stats.seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
    return run;
}

FrontierRun balanced_box(ModelFamily family, const Instance& inst, const ScenarioSet& scen,
                         const RiskSpec& risk, const DriverOptions& opts) {
    if (family == ModelFamily::SubsetFrozen)
        throw std::invalid_argument("balanced_box requires an exact model family");
    const auto run_start = Clock::now();
    const auto total_deadline = deadline_in(opts.time_limit_total);

    FlpModel fm = build_family(family, inst, scen, risk);
    CutPool pool;
    SecondStageCache cache{&inst, &scen, {}};
    const PhaseObjectives phase = PhaseObjectives::make(fm);
    IncrementalMip mip(fm.model);
    SolveContext ctx{&mip, &fm, &phase, &fm.cut_handle, &pool,
                     family != ModelFamily::Classical, nullptr, &inst, &cache};
    if (ctx.separation) seed_pool(inst, scen, fm, pool);

    FrontierRun run;
    ctx.stats = &run.stats;
    const long long delta = cost_step(inst);
    const double full_budget = static_cast<double>(inst.total_opening_cost());
    const double risk_grid = 1.0 / fm.k;

    auto next_point_deadline = [&] {
        return std::min(deadline_in(opts.time_limit_per_point), total_deadline);
    };
    std::map<long long, FrontierPoint> ndps;  // keyed by cost
    auto log_point = [&](const LexResult& lr, int cuts, int calls, double secs) {
        run.stats.point_log.push_back(
            PointLog{lr.point.cost, lr.point.risk, cuts, calls, secs, lr.exact});
    };

    auto solve_logged = [&](auto&& fn) -> std::optional<LexResult> {
        const auto t0 = Clock::now();
        int cuts = 0, calls = 0;
        auto lr = fn(next_point_deadline(), &cuts, &calls);
        if (lr) log_point(*lr, cuts, calls, std::chrono::duration<double>(Clock::now() - t0).count());
        return lr;
    };

    // Risk-minimal and cost-minimal extreme points.
    auto z_low_risk = solve_logged([&](Clock::time_point dl, int* cu, int* ca) {
        return lex_risk_cost(ctx, full_budget, dl, cu, ca);
    });
    if (!z_low_risk) {
        run.stats.hit_time_limit = true;
        run.stats.seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
        return run;
    }
    auto z_low_cost = solve_logged([&](Clock::time_point dl, int* cu, int* ca) {
        return lex_cost_risk(ctx, fm.risk_row_off, full_budget, dl, cu, ca);
    });
    if (!z_low_cost) {
        run.stats.hit_time_limit = true;
        run.frontier = Frontier::from_points({z_low_risk->point});
        run.stats.seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
        return run;
    }

    ndps[z_low_risk->point.cost] = z_low_risk->point;
    ndps[z_low_cost->point.cost] = z_low_cost->point;

    std::deque<std::pair<FrontierPoint, FrontierPoint>> queue;  // (cheap/high-risk, costly/low-risk)
    if (z_low_cost->point.cost != z_low_risk->point.cost)
        queue.push_back({z_low_cost->point, z_low_risk->point});

    while (!queue.empty()) {
        if (Clock::now() >= total_deadline) {
            run.stats.hit_time_limit = true;
            break;
        }
        auto [a, b] = queue.front();
        queue.pop_front();
        if (b.cost - a.cost < 2 * delta) continue;
        if (a.risk - b.risk < 2.0 * risk_grid - 1e-9) continue;
        const double mid = 0.5 * (a.risk + b.risk);

        auto p1 = solve_logged([&](Clock::time_point dl, int* cu, int* ca) {
            return lex_cost_risk(ctx, mid + 1e-9, full_budget, dl, cu, ca);
        });
        if (!p1) {
            run.stats.hit_time_limit = true;
            break;
        }
        ndps[p1->point.cost] = p1->point;

        auto p2 = solve_logged([&](Clock::time_point dl, int* cu, int* ca) {
            return lex_risk_cost(ctx, static_cast<double>(p1->point.cost - delta), dl, cu, ca);
        });
        if (!p2) {
            run.stats.hit_time_limit = true;
            break;
        }
        ndps[p2->point.cost] = p2->point;

        if (p2->point.cost != a.cost) queue.push_back({a, p2->point});
        if (p1->point.cost != b.cost) queue.push_back({p1->point, b});
    }

    std::vector<FrontierPoint> points;
    for (auto& [c, p] : ndps) points.push_back(std::move(p));
    run.frontier = Frontier::from_points(std::move(points));
    run.stats.pool_size = pool.size();
    run.stats.seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
    return run;
}

FrontierRun matheuristic(ModelFamily family, const Instance& inst, const ScenarioSet& scen,
                         const RiskSpec& risk, const MatheuristicOptions& opts) {
    if (opts.per_point_budget <= 0.0)
        throw std::invalid_argument("matheuristic: per-point budget must be positive");
    if (opts.kappa < 1) throw std::invalid_argument("matheuristic: kappa must be at least 1");

    const auto run_start = Clock::now();
    const auto total_deadline = deadline_in(opts.time_limit_total);

    FlpModel fm = build_family(family, inst, scen, risk);
    CutPool pool;
    SecondStageCache cache{&inst, &scen, {}};
    const PhaseObjectives phase = PhaseObjectives::make(fm);
    IncrementalMip mip(fm.model);
    SolveContext ctx{&mip, &fm, &phase, &fm.cut_handle, &pool,
                     family != ModelFamily::Classical, nullptr, &inst, &cache};
    if (ctx.separation) seed_pool(inst, scen, fm, pool);

    FrontierRun run;
    ctx.stats = &run.stats;
    const long long delta = cost_step(inst);
    const double cost_grid = static_cast<double>(delta);
    std::vector<FrontierPoint> points;

    // First extreme point, solved exactly.
    {
        const auto t0 = Clock::now();
        int cuts = 0, calls = 0;
        auto first = lex_risk_cost(ctx, static_cast<double>(inst.total_opening_cost()),
                                   std::min(deadline_in(opts.per_point_budget), total_deadline),
                                   &cuts, &calls);
        if (!first) {
            run.stats.hit_time_limit = true;
            run.stats.seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
            return run;
        }
        run.stats.point_log.push_back(
            PointLog{first->point.cost, first->point.risk, cuts, calls,
                     std::chrono::duration<double>(Clock::now() - t0).count(), first->exact});
        points.push_back(first->point);
        if (family == ModelFamily::SubsetFrozen) ctx.separation = false;
    }

    FrontierPoint prev = points.back();
    double eps = static_cast<double>(prev.cost - delta);

    // Unrestricted LP relaxation bound for the risk phase at this budget.
    auto risk_lp_bound = [&](double budget) {
        mip.set_rhs(fm.budget_row, budget);
        mip.set_rhs(fm.risk_row, fm.risk_row_off);
        mip.set_objective(fm.risk_expr, ObjSense::Minimize);
        return mip.solve_relaxation();
    };
    auto cost_lp_bound = [&](double budget, double risk_cap) {
        mip.set_rhs(fm.budget_row, budget);
        mip.set_rhs(fm.risk_row, risk_cap);
        mip.set_objective(fm.cost_expr, ObjSense::Minimize);
        return mip.solve_relaxation();
    };

    while (eps >= 0.0 && Clock::now() < total_deadline) {
        const auto t0 = Clock::now();
        const auto point_deadline =
            std::min(deadline_in(opts.per_point_budget), total_deadline);
        int cuts = 0, calls = 0;

        SolveResult lp = risk_lp_bound(eps);
        const double risk_floor =
            lp.status == SolveStatus::Optimal
                ? ceil_to_grid(lp.objective, 1.0 / fm.k)
                : 0.0;

        std::optional<LexResult> best;
        auto consider = [&](std::optional<LexResult> r) {
            if (!r) return;
            if (!best || r->point.risk < best->point.risk - 1e-9 ||
                (std::abs(r->point.risk - best->point.risk) <= 1e-9 &&
                 r->point.cost < best->point.cost))
                best = std::move(r);
        };
        // A stage result is proven when its risk matches the relaxation floor
        // and its cost matches the cost-phase relaxation floor.
        auto proven = [&](const LexResult& r) {
            if (!r.exact) return false;
            if (r.point.risk > risk_floor + 1e-9) return false;
            SolveResult clp = cost_lp_bound(eps, r.point.risk + 1e-6);
            if (clp.status != SolveStatus::Optimal) return false;
            return static_cast<double>(r.point.cost) <= ceil_to_grid(clp.objective, cost_grid) + 1e-6;
        };

        bool done = false;

        // (a) RINS: fix first-stage agreements between the previous incumbent
        // and the relaxation, solve the reduced model under a short budget.
        if (lp.status == SolveStatus::Optimal) {
            std::vector<std::pair<int, double>> fixings;
            for (std::size_t j = 0; j < fm.y_cols.size(); ++j) {
                const double v = lp.assignment[fm.y_cols[j]];
                if (std::abs(v - prev.open[j]) <= kIntegralityTol)
                    fixings.push_back({fm.y_cols[j], static_cast<double>(prev.open[j])});
            }
            MilpModel reduced = fix_variables(fm.model, fixings);
            IncrementalMip smip(reduced);
            SubsetCvarHandle stage_handle = fm.cut_handle;
            SolveContext sctx{&smip, &fm, &phase, &stage_handle, &pool, ctx.separation,
                              &run.stats, &inst, &cache};
            const auto stage_deadline =
                std::min(deadline_in(opts.per_point_budget / 4.0), point_deadline);
            auto r = lex_risk_cost(sctx, eps, stage_deadline, &cuts, &calls);
            if (r && proven(*r)) {
                consider(r);
                done = true;
            } else {
                consider(std::move(r));
            }
        }

        // (b) Local branching around the previous incumbent.
        if (!done) {
            std::vector<std::pair<int, double>> center;
            for (std::size_t j = 0; j < fm.y_cols.size(); ++j)
                center.push_back({fm.y_cols[j], static_cast<double>(prev.open[j])});
            MilpModel ball = add_local_branching(fm.model, center, opts.kappa);
            IncrementalMip smip(ball);
            SubsetCvarHandle stage_handle = fm.cut_handle;
            SolveContext sctx{&smip, &fm, &phase, &stage_handle, &pool, ctx.separation,
                              &run.stats, &inst, &cache};
            const auto stage_deadline =
                std::min(deadline_in(opts.per_point_budget / 2.0), point_deadline);
            auto r = lex_risk_cost(sctx, eps, stage_deadline, &cuts, &calls);
            if (r && proven(*r)) {
                consider(r);
                done = true;
            } else {
                consider(std::move(r));
            }
        }

        // (c) Unrestricted fallback with the leftover budget.
        if (!done) {
            auto r = lex_risk_cost(ctx, eps, point_deadline, &cuts, &calls);
            if (r && r->exact) done = true;
            consider(std::move(r));
        }

        run.stats.point_log.push_back(PointLog{
            best ? best->point.cost : -1, best ? best->point.risk : 0.0, cuts, calls,
            std::chrono::duration<double>(Clock::now() - t0).count(), done});
        run.stats.separator_calls_after_first_point += calls;

        if (!best) {
            run.stats.hit_time_limit = true;
            eps -= cost_grid;
            continue;
        }
        best->point.provenance = done ? Provenance::Exact : Provenance::Approximate;
        prev = best->point;
        points.push_back(best->point);
        if (prev.cost == 0) break;
        eps = static_cast<double>(prev.cost - delta);
    }
    if (eps >= 0.0 && points.empty()) run.stats.hit_time_limit = true;

    run.frontier = Frontier::from_points(std::move(points));
    run.stats.pool_size = pool.size();
    run.stats.seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
    return run;
}

Frontier reevaluate_frontier(const Frontier& frontier, const Instance& inst,
                             const ScenarioSet& scen, const RiskSpec& risk) {
    std::vector<FrontierPoint> points;
    for (const FrontierPoint& p : frontier.points()) {
        FirstStageSolution y = FirstStageSolution::make(inst, p.open);
        const std::vector<long long> uncovered = evaluate_uncovered_vector(inst, scen, y);
        std::vector<double> values(uncovered.begin(), uncovered.end());
        FrontierPoint q = p;
        q.risk = cvar_topk(values, risk.k);
        q.provenance = Provenance::Reevaluated;
        points.push_back(std::move(q));
    }
    return Frontier::from_points(std::move(points));
}

}  // namespace biflp
