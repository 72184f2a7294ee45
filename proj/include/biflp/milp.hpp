#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace biflp {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Engine tolerances. Instance data is integer, so these sit comfortably
// below unit granularity.
constexpr double kIntegralityTol = 1e-6;
constexpr double kFeasibilityTol = 1e-7;
constexpr double kMipRelGap = 1e-6;

enum class VarKind { Continuous, Binary, Integer };
enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class ObjSense { Minimize, Maximize };

struct Term {
    int var = 0;
    double coef = 0.0;
};
using LinearExpr = std::vector<Term>;

struct Constraint {
    LinearExpr row;
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;
};

enum class SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimitFeasible,
    TimeLimitNoSolution,
};

struct SolveResult {
    SolveStatus status = SolveStatus::Infeasible;
    double objective = 0.0;            // valid when a solution exists
    std::vector<double> assignment;    // per variable index; empty when no solution
    double bound = 0.0;                // best dual bound, in the model's sense
    int cuts_added = 0;                // lazy rows accepted during the solve
    int separator_calls = 0;
    long long nodes = 0;
    long long simplex_iterations = 0;

    bool has_solution() const {
        return status == SolveStatus::Optimal || status == SolveStatus::TimeLimitFeasible;
    }
};

/// Lazy separation callback. Given an integer-feasible candidate assignment,
/// return a violated row to append (violation must exceed the feasibility
/// tolerance), or nullopt to accept the candidate.
using LazySeparator = std::function<std::optional<Constraint>(const std::vector<double>&)>;

class MilpModel {
public:
    int add_variable(std::string name, double lb, double ub, VarKind kind);
    int add_constraint(LinearExpr row, RowSense sense, double rhs);
    void set_objective(LinearExpr expr, ObjSense sense);

    void set_rhs(int constraint, double rhs);
    void set_bounds(int var, double lb, double ub);

    int n_vars() const { return static_cast<int>(kinds_.size()); }
    int n_constraints() const { return static_cast<int>(constraints_.size()); }
    const std::string& var_name(int v) const { return names_.at(v); }
    VarKind var_kind(int v) const { return kinds_.at(v); }
    double lower_bound(int v) const { return lb_.at(v); }
    double upper_bound(int v) const { return ub_.at(v); }
    const Constraint& constraint(int c) const { return constraints_.at(c); }
    const LinearExpr& objective() const { return objective_; }
    ObjSense objective_sense() const { return obj_sense_; }

    double eval_expr(const LinearExpr& expr, const std::vector<double>& assignment) const;
    /// Signed violation of a row at an assignment (positive = violated).
    double violation(const Constraint& c, const std::vector<double>& assignment) const;

private:
    void check_var(int v) const;
    LinearExpr normalize(LinearExpr expr) const;

    std::vector<std::string> names_;
    std::vector<double> lb_, ub_;
    std::vector<VarKind> kinds_;
    std::vector<Constraint> constraints_;
    LinearExpr objective_;
    ObjSense obj_sense_ = ObjSense::Minimize;
};

/// Solves the LP relaxation with a bounded-variable primal simplex.
SolveResult solve_lp(const MilpModel& model);

/// Branch and bound with best-bound node selection and depth-first plunging.
/// Lazy rows accepted from the separator are appended to `model` (they are
/// valid globally). Returns the best incumbent on time limit.
SolveResult solve_mip(MilpModel& model, double time_limit_seconds = kInfinity,
                      const LazySeparator& separator = nullptr);

namespace detail {
class SimplexEngine;
}

/// Repeated solves over one model with a persistent simplex basis: right-hand
/// sides and the objective may change between solves, rows may be appended.
/// The frontier drivers sweep hundreds of closely related solves, so warm
/// starts dominate cold ones here.
class IncrementalMip {
public:
    explicit IncrementalMip(MilpModel& model);
    ~IncrementalMip();
    IncrementalMip(const IncrementalMip&) = delete;
    IncrementalMip& operator=(const IncrementalMip&) = delete;

    MilpModel& model() { return *model_; }
    int add_constraint(LinearExpr row, RowSense sense, double rhs);
    void set_rhs(int constraint, double rhs);
    void set_objective(LinearExpr expr, ObjSense sense);

    SolveResult solve(double time_limit_seconds = kInfinity,
                      const LazySeparator& separator = nullptr);
    SolveResult solve_relaxation();

private:
    MilpModel* model_;
    std::unique_ptr<detail::SimplexEngine> engine_;
};

/// Copy of the model with lower = upper = value for each (var, value) pair.
MilpModel fix_variables(const MilpModel& model, const std::vector<std::pair<int, double>>& fixings);

/// Copy of the model with the Hamming-ball row
///   sum_{j: center_j = 0} y_j + sum_{j: center_j = 1} (1 - y_j) <= radius
/// appended for the given binary center.
MilpModel add_local_branching(const MilpModel& model,
                              const std::vector<std::pair<int, double>>& center, int radius);

/// Text dump in LP interchange format (write-only debugging aid).
void write_lp(const MilpModel& model, std::ostream& out);

}  // namespace biflp
