#pragma once

#include <chrono>
#include <vector>

#include "biflp/milp.hpp"

namespace biflp::detail {

enum class LpStatus { Optimal, Infeasible, Unbounded, TimedOut, IterLimit };

// Column status codes (kept as raw bytes so basis snapshots are cheap).
constexpr unsigned char kBasic = 0;
constexpr unsigned char kAtLower = 1;
constexpr unsigned char kAtUpper = 2;
constexpr unsigned char kFreeZero = 3;

/// Bounded-variable primal simplex over the row-equality form A x + s = b.
///
/// The basis is factorized in two blocks: rows owned by basic slacks are
/// solved by substitution, the remaining square "bump" of structural basic
/// columns is kept as a dense LU. Pivots between refactorizations are applied
/// as product-form eta updates. Feasibility is restored by a composite
/// phase 1 that prices bound-violation costs, so the engine can warm-start
/// from any basis after bound changes or row additions.
class SimplexEngine {
public:
    using Clock = std::chrono::steady_clock;

    explicit SimplexEngine(const MilpModel& model);

    int n_struct() const { return ns_; }
    int n_rows() const { return m_; }
    int n_cols() const { return ns_ + m_; }

    double var_lb(int var) const { return lower_[var]; }
    double var_ub(int var) const { return upper_[var]; }
    void set_var_bounds(int var, double lb, double ub);
    void add_row(const Constraint& c);
    void set_row_rhs(int row, double rhs);
    /// Reloads costs and sense from the model (same variables, same rows).
    void set_costs(const MilpModel& model);

    void cold_start();
    std::vector<unsigned char> snapshot() const { return vstat_; }
    void restore(const std::vector<unsigned char>& status);

    LpStatus solve(Clock::time_point deadline = Clock::time_point::max());

    /// Objective in the internal minimization sense.
    double objective_value() const;
    bool objective_negated() const { return negated_; }
    double value(int col) const { return xval_[col]; }
    std::vector<double> structural_values() const;
    long long iterations() const { return total_iters_; }

private:
    struct ColEntry {
        int row = 0;
        double coef = 0.0;
    };
    struct Eta {
        int pos = 0;
        double pivot = 0.0;
        std::vector<std::pair<int, double>> nz;  // (position, coefficient)
    };

    static constexpr double kPivotTol = 1e-9;
    static constexpr double kDualTol = 1e-9;
    static constexpr int kRefactorEtas = 120;
    static constexpr long long kRefactorIters = 400;
    static constexpr long long kIterCap = 5000000;
    static constexpr int kBlandTrigger = 1000;  // consecutive degenerate pivots

    bool refactorize();
    void compute_basics();
    void ftran(const std::vector<double>& rhs_rows, std::vector<double>& out_pos) const;
    void btran(const std::vector<double>& cost_pos, std::vector<double>& out_rows) const;
    void snap_nonbasic(int col);
    bool basic_feasible(int col) const;

    int ns_ = 0;
    int m_ = 0;
    bool negated_ = false;
    std::vector<std::vector<ColEntry>> cols_;  // structural columns as (row, coef)
    std::vector<double> lower_, upper_;    // per column, slacks after structurals
    std::vector<double> cost_;             // per column, internal minimize
    std::vector<double> rhs_;

    std::vector<unsigned char> vstat_;
    std::vector<int> head_;    // basic column per basis position
    std::vector<double> xval_;
    bool factor_valid_ = false;
    bool values_valid_ = false;

    int bump_dim_ = 0;
    std::vector<double> lu_;    // dense bump LU, row-major
    std::vector<int> lupiv_;
    std::vector<int> bump_rows_;   // bump row index -> global row
    std::vector<int> row_owner_;   // global row -> basis position of owning slack, or -1
    std::vector<int> bump_cols_;   // bump col index -> basis position
    std::vector<std::vector<std::pair<int, double>>> sigma_;  // per bump col: (slack-owned row, coef)
    std::vector<Eta> etas_;

    long long total_iters_ = 0;
    long long iters_since_refactor_ = 0;
};

}  // namespace biflp::detail
