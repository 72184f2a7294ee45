#include "biflp/milp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace biflp {

void MilpModel::check_var(int v) const {
    if (v < 0 || v >= n_vars())
        throw std::invalid_argument("unknown variable index " + std::to_string(v));
}

LinearExpr MilpModel::normalize(LinearExpr expr) const {
    std::map<int, double> acc;
    for (const Term& t : expr) {
        check_var(t.var);
        acc[t.var] += t.coef;
    }
    LinearExpr out;
    out.reserve(acc.size());
    for (const auto& [var, coef] : acc)
        if (coef != 0.0) out.push_back({var, coef});
    return out;
}

int MilpModel::add_variable(std::string name, double lb, double ub, VarKind kind) {
    if (lb > ub) throw std::invalid_argument("variable '" + name + "': lower bound above upper");
    if (kind == VarKind::Binary && (lb < 0.0 || ub > 1.0))
        throw std::invalid_argument("binary variable '" + name + "' must have bounds within [0,1]");
    names_.push_back(std::move(name));
    lb_.push_back(lb);
    ub_.push_back(ub);
    kinds_.push_back(kind);
    return n_vars() - 1;
}

int MilpModel::add_constraint(LinearExpr row, RowSense sense, double rhs) {
    constraints_.push_back(Constraint{normalize(std::move(row)), sense, rhs});
    return n_constraints() - 1;
}

void MilpModel::set_objective(LinearExpr expr, ObjSense sense) {
    objective_ = normalize(std::move(expr));
    obj_sense_ = sense;
}

void MilpModel::set_rhs(int constraint, double rhs) {
    if (constraint < 0 || constraint >= n_constraints())
        throw std::invalid_argument("unknown constraint index " + std::to_string(constraint));
    constraints_[constraint].rhs = rhs;
}

void MilpModel::set_bounds(int var, double lb, double ub) {
    check_var(var);
    if (lb > ub) throw std::invalid_argument("set_bounds: lower bound above upper");
    if (kinds_[var] == VarKind::Binary && (lb < 0.0 || ub > 1.0))
        throw std::invalid_argument("set_bounds: binary bounds must stay within [0,1]");
    lb_[var] = lb;
    ub_[var] = ub;
}

double MilpModel::eval_expr(const LinearExpr& expr, const std::vector<double>& assignment) const {
    double v = 0.0;
    for (const Term& t : expr) v += t.coef * assignment.at(t.var);
    return v;
}

double MilpModel::violation(const Constraint& c, const std::vector<double>& assignment) const {
    const double lhs = eval_expr(c.row, assignment);
    switch (c.sense) {
        case RowSense::LessEqual: return lhs - c.rhs;
        case RowSense::GreaterEqual: return c.rhs - lhs;
        case RowSense::Equal: return std::abs(lhs - c.rhs);
    }
    return 0.0;
}

MilpModel fix_variables(const MilpModel& model, const std::vector<std::pair<int, double>>& fixings) {
    MilpModel out = model;
    for (const auto& [var, value] : fixings) {
        if (var < 0 || var >= model.n_vars())
            throw std::invalid_argument("fix_variables: unknown variable index " + std::to_string(var));
        if (value < model.lower_bound(var) - 1e-12 || value > model.upper_bound(var) + 1e-12)
            throw std::invalid_argument("fix_variables: value out of bounds for '" +
                                        model.var_name(var) + "'");
        if (model.var_kind(var) != VarKind::Continuous &&
            std::abs(value - std::round(value)) > 1e-9)
            throw std::invalid_argument("fix_variables: fractional value for integer variable '" +
                                        model.var_name(var) + "'");
        const double v = model.var_kind(var) == VarKind::Continuous ? value : std::round(value);
        out.set_bounds(var, v, v);
    }
    return out;
}

MilpModel add_local_branching(const MilpModel& model,
                              const std::vector<std::pair<int, double>>& center, int radius) {
    if (radius < 0) throw std::invalid_argument("add_local_branching: radius must be nonnegative");
    MilpModel out = model;
    LinearExpr row;
    int ones = 0;
    for (const auto& [var, value] : center) {
        if (var < 0 || var >= model.n_vars())
            throw std::invalid_argument("add_local_branching: unknown variable index " +
                                        std::to_string(var));
        if (std::abs(value) <= 1e-9) {
            row.push_back({var, 1.0});
        } else if (std::abs(value - 1.0) <= 1e-9) {
            row.push_back({var, -1.0});
            ++ones;
        } else {
            throw std::invalid_argument("add_local_branching: non-binary center entry for '" +
                                        model.var_name(var) + "'");
        }
    }
    out.add_constraint(std::move(row), RowSense::LessEqual, static_cast<double>(radius - ones));
    return out;
}

namespace {

void write_expr(const MilpModel& model, const LinearExpr& expr, std::ostream& out) {
    bool first = true;
    for (const Term& t : expr) {
        if (t.coef >= 0.0)
            out << (first ? "" : " + ") << t.coef;
        else
            out << (first ? "- " : " - ") << -t.coef;
        out << " " << model.var_name(t.var);
        first = false;
    }
    if (first) out << "0";
}

}  // namespace

void write_lp(const MilpModel& model, std::ostream& out) {
    out << (model.objective_sense() == ObjSense::Minimize ? "Minimize" : "Maximize") << "\n obj: ";
    write_expr(model, model.objective(), out);
    out << "\nSubject To\n";
    for (int c = 0; c < model.n_constraints(); ++c) {
        const Constraint& row = model.constraint(c);
        out << " c" << c << ": ";
        write_expr(model, row.row, out);
        switch (row.sense) {
            case RowSense::LessEqual: out << " <= "; break;
            case RowSense::Equal: out << " = "; break;
            case RowSense::GreaterEqual: out << " >= "; break;
        }
        out << row.rhs << "\n";
    }
    out << "Bounds\n";
    for (int v = 0; v < model.n_vars(); ++v) {
        out << " ";
        if (model.lower_bound(v) == -kInfinity)
            out << "-inf";
        else
            out << model.lower_bound(v);
        out << " <= " << model.var_name(v) << " <= ";
        if (model.upper_bound(v) == kInfinity)
            out << "+inf";
        else
            out << model.upper_bound(v);
        out << "\n";
    }
    bool any_int = false;
    for (int v = 0; v < model.n_vars(); ++v) {
        if (model.var_kind(v) == VarKind::Continuous) continue;
        if (!any_int) out << (any_int = true, "General\n");
        out << " " << model.var_name(v) << "\n";
    }
    out << "End\n";
}

}  // namespace biflp
