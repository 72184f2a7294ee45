#include "simplex_engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace biflp::detail {

SimplexEngine::SimplexEngine(const MilpModel& model) {
    ns_ = model.n_vars();
    m_ = model.n_constraints();
    negated_ = model.objective_sense() == ObjSense::Maximize;

    cols_.assign(ns_, {});
    lower_.resize(ns_ + m_);
    upper_.resize(ns_ + m_);
    cost_.assign(ns_ + m_, 0.0);
    rhs_.resize(m_);

    for (int v = 0; v < ns_; ++v) {
        lower_[v] = model.lower_bound(v);
        upper_[v] = model.upper_bound(v);
    }
    for (const Term& t : model.objective()) cost_[t.var] = negated_ ? -t.coef : t.coef;

    for (int r = 0; r < m_; ++r) {
        const Constraint& c = model.constraint(r);
        for (const Term& t : c.row) cols_[t.var].push_back(ColEntry{r, t.coef});
        rhs_[r] = c.rhs;
        const int slack = ns_ + r;
        switch (c.sense) {
            case RowSense::LessEqual:
                lower_[slack] = 0.0;
                upper_[slack] = kInfinity;
                break;
            case RowSense::Equal:
                lower_[slack] = 0.0;
                upper_[slack] = 0.0;
                break;
            case RowSense::GreaterEqual:
                lower_[slack] = -kInfinity;
                upper_[slack] = 0.0;
                break;
        }
    }
    cold_start();
}

void SimplexEngine::snap_nonbasic(int col) {
    switch (vstat_[col]) {
        case kAtLower:
            if (lower_[col] == -kInfinity) {
                if (upper_[col] < kInfinity) {
                    vstat_[col] = kAtUpper;
                    xval_[col] = upper_[col];
                } else {
                    vstat_[col] = kFreeZero;
                    xval_[col] = 0.0;
                }
            } else {
                xval_[col] = lower_[col];
            }
            break;
        case kAtUpper:
            if (upper_[col] == kInfinity) {
                if (lower_[col] > -kInfinity) {
                    vstat_[col] = kAtLower;
                    xval_[col] = lower_[col];
                } else {
                    vstat_[col] = kFreeZero;
                    xval_[col] = 0.0;
                }
            } else {
                xval_[col] = upper_[col];
            }
            break;
        case kFreeZero:
            if (lower_[col] > -kInfinity && (0.0 < lower_[col] || upper_[col] < 0.0)) {
                vstat_[col] = kAtLower;
                xval_[col] = lower_[col];
            } else if (upper_[col] < kInfinity && 0.0 > upper_[col]) {
                vstat_[col] = kAtUpper;
                xval_[col] = upper_[col];
            } else {
                xval_[col] = 0.0;
            }
            break;
        default:
            break;
    }
}

void SimplexEngine::set_var_bounds(int var, double lb, double ub) {
    lower_[var] = lb;
    upper_[var] = ub;
    if (vstat_[var] != kBasic) snap_nonbasic(var);
    values_valid_ = false;
}

void SimplexEngine::set_row_rhs(int row, double rhs) {
    rhs_[row] = rhs;
    values_valid_ = false;
}

void SimplexEngine::set_costs(const MilpModel& model) {
    negated_ = model.objective_sense() == ObjSense::Maximize;
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (const Term& t : model.objective()) cost_[t.var] = negated_ ? -t.coef : t.coef;
}

void SimplexEngine::add_row(const Constraint& c) {
    std::map<int, double> acc;
    for (const Term& t : c.row) acc[t.var] += t.coef;
    const int r = m_;
    for (const auto& [var, coef] : acc)
        if (coef != 0.0) cols_[var].push_back(ColEntry{r, coef});
    rhs_.push_back(c.rhs);
    double slo = 0.0, shi = 0.0;
    if (c.sense == RowSense::LessEqual) shi = kInfinity;
    if (c.sense == RowSense::GreaterEqual) slo = -kInfinity;
    lower_.push_back(slo);
    upper_.push_back(shi);
    cost_.push_back(0.0);
    vstat_.push_back(kBasic);
    head_.push_back(ns_ + r);
    xval_.push_back(0.0);
    ++m_;
    factor_valid_ = false;
    values_valid_ = false;
}

void SimplexEngine::cold_start() {
    vstat_.assign(ns_ + m_, kAtLower);
    xval_.assign(ns_ + m_, 0.0);
    head_.resize(m_);
    for (int v = 0; v < ns_; ++v) {
        if (lower_[v] > -kInfinity) {
            vstat_[v] = kAtLower;
            xval_[v] = lower_[v];
        } else if (upper_[v] < kInfinity) {
            vstat_[v] = kAtUpper;
            xval_[v] = upper_[v];
        } else {
            vstat_[v] = kFreeZero;
            xval_[v] = 0.0;
        }
    }
    for (int r = 0; r < m_; ++r) {
        vstat_[ns_ + r] = kBasic;
        head_[r] = ns_ + r;
    }
    factor_valid_ = false;
    values_valid_ = false;
}

void SimplexEngine::restore(const std::vector<unsigned char>& status) {
    if (status.size() > vstat_.size()) throw std::logic_error("restore: snapshot larger than model");
    std::copy(status.begin(), status.end(), vstat_.begin());
    // Rows appended after the snapshot keep their slacks basic.
    for (std::size_t c = status.size(); c < vstat_.size(); ++c) vstat_[c] = kBasic;

    int pos = 0;
    for (int c = 0; c < n_cols() && pos <= m_; ++c)
        if (vstat_[c] == kBasic) {
            if (pos == m_) { pos = m_ + 1; break; }
            head_[pos++] = c;
        }
    if (pos != m_) {
        cold_start();
        return;
    }
    for (int c = 0; c < n_cols(); ++c)
        if (vstat_[c] != kBasic) snap_nonbasic(c);
    factor_valid_ = false;
    values_valid_ = false;
}

bool SimplexEngine::refactorize() {
    etas_.clear();
    row_owner_.assign(m_, -1);
    bump_cols_.clear();
    bump_rows_.clear();

    for (int p = 0; p < m_; ++p) {
        const int col = head_[p];
        if (col >= ns_)
            row_owner_[col - ns_] = p;
        else
            bump_cols_.push_back(p);
    }
    for (int r = 0; r < m_; ++r)
        if (row_owner_[r] < 0) bump_rows_.push_back(r);
    if (bump_rows_.size() != bump_cols_.size()) return false;

    bump_dim_ = static_cast<int>(bump_cols_.size());
    const int s = bump_dim_;
    std::vector<int> row_to_bump(m_, -1);
    for (int i = 0; i < s; ++i) row_to_bump[bump_rows_[i]] = i;

    lu_.assign(static_cast<std::size_t>(s) * s, 0.0);
    lupiv_.assign(s, 0);
    sigma_.assign(s, {});
    for (int j = 0; j < s; ++j) {
        const int col = head_[bump_cols_[j]];
        for (const ColEntry& t : cols_[col]) {
            const int br = row_to_bump[t.row];
            if (br >= 0)
                lu_[static_cast<std::size_t>(br) * s + j] = t.coef;
            else
                sigma_[j].push_back({t.row, t.coef});
        }
    }

    // Dense LU with partial pivoting.
    for (int k = 0; k < s; ++k) {
        int piv = k;
        double best = std::abs(lu_[static_cast<std::size_t>(k) * s + k]);
        for (int i = k + 1; i < s; ++i) {
            const double v = std::abs(lu_[static_cast<std::size_t>(i) * s + k]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best < 1e-11) return false;
        lupiv_[k] = piv;
        if (piv != k)
            for (int j = 0; j < s; ++j)
                std::swap(lu_[static_cast<std::size_t>(k) * s + j],
                          lu_[static_cast<std::size_t>(piv) * s + j]);
        const double dkk = lu_[static_cast<std::size_t>(k) * s + k];
        for (int i = k + 1; i < s; ++i) {
            double& lik = lu_[static_cast<std::size_t>(i) * s + k];
            if (lik == 0.0) continue;
            lik /= dkk;
            const double f = lik;
            const double* rk = &lu_[static_cast<std::size_t>(k) * s];
            double* ri = &lu_[static_cast<std::size_t>(i) * s];
            for (int j = k + 1; j < s; ++j) ri[j] -= f * rk[j];
        }
    }

    factor_valid_ = true;
    iters_since_refactor_ = 0;
    compute_basics();
    return true;
}

void SimplexEngine::ftran(const std::vector<double>& rhs_rows, std::vector<double>& out_pos) const {
    const int s = bump_dim_;
    out_pos.assign(m_, 0.0);

    std::vector<double> zb(s);
    for (int i = 0; i < s; ++i) zb[i] = rhs_rows[bump_rows_[i]];
    // Row interchanges were applied to whole rows during factorization, so
    // the right-hand side takes every swap before the triangular solves.
    for (int k = 0; k < s; ++k) std::swap(zb[k], zb[lupiv_[k]]);
    for (int k = 0; k < s; ++k) {
        const double v = zb[k];
        if (v == 0.0) continue;
        for (int i = k + 1; i < s; ++i) zb[i] -= lu_[static_cast<std::size_t>(i) * s + k] * v;
    }
    for (int k = s - 1; k >= 0; --k) {
        double v = zb[k];
        const double* rk = &lu_[static_cast<std::size_t>(k) * s];
        for (int j = k + 1; j < s; ++j) v -= rk[j] * zb[j];
        zb[k] = v / rk[k];
    }

    for (int r = 0; r < m_; ++r)
        if (row_owner_[r] >= 0) out_pos[row_owner_[r]] = rhs_rows[r];
    for (int j = 0; j < s; ++j) {
        out_pos[bump_cols_[j]] = zb[j];
        if (zb[j] == 0.0) continue;
        for (const auto& [row, coef] : sigma_[j]) out_pos[row_owner_[row]] -= coef * zb[j];
    }

    for (const Eta& e : etas_) {
        const double t = out_pos[e.pos] / e.pivot;
        if (t != 0.0)
            for (const auto& [p, v] : e.nz)
                if (p != e.pos) out_pos[p] -= v * t;
        out_pos[e.pos] = t;
    }
}

void SimplexEngine::btran(const std::vector<double>& cost_pos, std::vector<double>& out_rows) const {
    std::vector<double> c = cost_pos;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double dot = 0.0;
        for (const auto& [p, v] : it->nz) dot += v * c[p];
        c[it->pos] = (c[it->pos] - (dot - it->pivot * c[it->pos])) / it->pivot;
    }

    const int s = bump_dim_;
    out_rows.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r)
        if (row_owner_[r] >= 0) out_rows[r] = c[row_owner_[r]];

    std::vector<double> rt(s);
    for (int j = 0; j < s; ++j) {
        double v = c[bump_cols_[j]];
        for (const auto& [row, coef] : sigma_[j]) v -= coef * out_rows[row];
        rt[j] = v;
    }
    // Solve bump^T w = rt: forward with U^T, backward with L^T, then permute.
    for (int k = 0; k < s; ++k) {
        double v = rt[k];
        for (int i = 0; i < k; ++i) v -= lu_[static_cast<std::size_t>(i) * s + k] * rt[i];
        rt[k] = v / lu_[static_cast<std::size_t>(k) * s + k];
    }
    for (int k = s - 1; k >= 0; --k) {
        double v = rt[k];
        for (int i = k + 1; i < s; ++i) v -= lu_[static_cast<std::size_t>(i) * s + k] * rt[i];
        rt[k] = v;
    }
    for (int k = s - 1; k >= 0; --k) std::swap(rt[k], rt[lupiv_[k]]);

    for (int i = 0; i < s; ++i) out_rows[bump_rows_[i]] = rt[i];
}

void SimplexEngine::compute_basics() {
    std::vector<double> v = rhs_;
    for (int c = 0; c < n_cols(); ++c) {
        if (vstat_[c] == kBasic) continue;
        const double x = xval_[c];
        if (x == 0.0) continue;
        if (c < ns_)
            for (const ColEntry& t : cols_[c]) v[t.row] -= t.coef * x;
        else
            v[c - ns_] -= x;
    }
    std::vector<double> z;
    ftran(v, z);
    for (int p = 0; p < m_; ++p) xval_[head_[p]] = z[p];
    values_valid_ = true;
}

bool SimplexEngine::basic_feasible(int col) const {
    return xval_[col] >= lower_[col] - kFeasibilityTol && xval_[col] <= upper_[col] + kFeasibilityTol;
}

double SimplexEngine::objective_value() const {
    double obj = 0.0;
    for (int v = 0; v < ns_; ++v)
        if (cost_[v] != 0.0) obj += cost_[v] * xval_[v];
    return obj;
}

std::vector<double> SimplexEngine::structural_values() const {
    return std::vector<double>(xval_.begin(), xval_.begin() + ns_);
}

LpStatus SimplexEngine::solve(Clock::time_point deadline) {
    if (!factor_valid_) {
        if (!refactorize()) {
            cold_start();
            if (!refactorize()) throw std::runtime_error("simplex: singular slack basis");
        }
    } else if (!values_valid_) {
        compute_basics();
    }

    std::vector<double> cpos(m_), yrow, alpha;
    std::vector<double> scatter(m_, 0.0);
    long long degen_streak = 0;
    bool bland = false;

    for (long long iter = 0;; ++iter) {
        if (iter > kIterCap) return LpStatus::IterLimit;
        if ((iter & 63) == 0 && deadline != Clock::time_point::max() && Clock::now() >= deadline)
            return LpStatus::TimedOut;
        if (iters_since_refactor_ >= kRefactorIters ||
            static_cast<int>(etas_.size()) >= kRefactorEtas) {
            if (!refactorize()) {
                cold_start();
                refactorize();
            }
        }

        // Phase from current infeasibility, composite phase-1 costs on basics.
        bool phase1 = false;
        for (int p = 0; p < m_ && !phase1; ++p) phase1 = !basic_feasible(head_[p]);
        for (int p = 0; p < m_; ++p) {
            const int col = head_[p];
            if (phase1) {
                if (xval_[col] < lower_[col] - kFeasibilityTol)
                    cpos[p] = -1.0;
                else if (xval_[col] > upper_[col] + kFeasibilityTol)
                    cpos[p] = 1.0;
                else
                    cpos[p] = 0.0;
            } else {
                cpos[p] = cost_[col];
            }
        }

        btran(cpos, yrow);

        // Pricing.
        int enter = -1;
        int dir = 1;
        double best_score = bland ? 0.0 : kDualTol;
        for (int c = 0; c < n_cols(); ++c) {
            const unsigned char st = vstat_[c];
            if (st == kBasic) continue;
            if (lower_[c] == upper_[c]) continue;  // fixed, never enters
            double d = phase1 ? 0.0 : cost_[c];
            if (c < ns_) {
                for (const ColEntry& t : cols_[c]) d -= t.coef * yrow[t.row];
            } else {
                d -= yrow[c - ns_];
            }
            int cand_dir = 0;
            if (st == kAtLower && d < -kDualTol)
                cand_dir = 1;
            else if (st == kAtUpper && d > kDualTol)
                cand_dir = -1;
            else if (st == kFreeZero && std::abs(d) > kDualTol)
                cand_dir = d < 0.0 ? 1 : -1;
            if (cand_dir == 0) continue;
            if (bland) {
                enter = c;
                dir = cand_dir;
                break;
            }
            const double score = std::abs(d);
            if (score > best_score) {
                best_score = score;
                enter = c;
                dir = cand_dir;
            }
        }

        if (enter < 0) {
            if (phase1) return LpStatus::Infeasible;
            return LpStatus::Optimal;
        }

        // FTRAN the entering column.
        std::fill(scatter.begin(), scatter.end(), 0.0);
        if (enter < ns_)
            for (const ColEntry& t : cols_[enter]) scatter[t.row] = t.coef;
        else
            scatter[enter - ns_] = 1.0;
        ftran(scatter, alpha);

        // Two-pass Harris ratio test: pass 1 finds the largest step keeping
        // every basic within its bound plus the feasibility tolerance; pass 2
        // picks the largest pivot among blockers inside that step.
        const double t_enter = (lower_[enter] > -kInfinity && upper_[enter] < kInfinity)
                                   ? upper_[enter] - lower_[enter]
                                   : kInfinity;
        double t_rel = t_enter;
        // Breakpoint of basic position p in this direction; strict and
        // tolerance-relaxed variants. Returns false when unblocked.
        auto breakpoint = [&](int p, double relax, double& lim, unsigned char& target) {
            const double a = alpha[p];
            if (std::abs(a) <= kPivotTol) return false;
            const double rate = -dir * a;
            const int col = head_[p];
            const double v = xval_[col];
            const double l = lower_[col];
            const double u = upper_[col];
            if (v < l - kFeasibilityTol) {
                if (rate <= 0.0) return false;
                lim = (l + relax - v) / rate;
                target = kAtLower;
            } else if (v > u + kFeasibilityTol) {
                if (rate >= 0.0) return false;
                lim = (u - relax - v) / rate;
                target = kAtUpper;
            } else if (rate > 0.0) {
                if (u == kInfinity) return false;
                lim = (u + relax - v) / rate;
                target = kAtUpper;
            } else {
                if (l == -kInfinity) return false;
                lim = (l - relax - v) / rate;
                target = kAtLower;
            }
            if (lim < 0.0) lim = 0.0;
            return true;
        };

        for (int p = 0; p < m_; ++p) {
            double lim;
            unsigned char target;
            if (breakpoint(p, kFeasibilityTol, lim, target)) t_rel = std::min(t_rel, lim);
        }

        if (t_rel == kInfinity) {
            if (phase1) throw std::runtime_error("simplex: unbounded phase-1 direction");
            return LpStatus::Unbounded;
        }

        int block_pos = -1;
        unsigned char block_status = kAtLower;
        double block_alpha = 0.0;
        double t_limit = t_rel;
        for (int p = 0; p < m_; ++p) {
            double lim;
            unsigned char target;
            if (!breakpoint(p, 0.0, lim, target)) continue;
            if (lim > t_rel) continue;
            if (block_pos < 0 || std::abs(alpha[p]) > std::abs(block_alpha)) {
                block_pos = p;
                block_status = target;
                block_alpha = alpha[p];
                t_limit = lim;
            }
        }
        if (block_pos < 0) t_limit = t_enter;  // entering variable flips bound

        ++total_iters_;
        ++iters_since_refactor_;
        const double step = dir * t_limit;

        if (block_pos < 0) {
            // Bound flip of the entering variable.
            for (int p = 0; p < m_; ++p)
                if (alpha[p] != 0.0) xval_[head_[p]] -= alpha[p] * step;
            vstat_[enter] = vstat_[enter] == kAtLower ? kAtUpper : kAtLower;
            xval_[enter] = vstat_[enter] == kAtLower ? lower_[enter] : upper_[enter];
            degen_streak = 0;
            bland = false;
            continue;
        }

        for (int p = 0; p < m_; ++p)
            if (alpha[p] != 0.0) xval_[head_[p]] -= alpha[p] * step;
        const int leave = head_[block_pos];
        xval_[enter] = (vstat_[enter] == kAtLower   ? lower_[enter]
                        : vstat_[enter] == kAtUpper ? upper_[enter]
                                                    : 0.0) +
                       step;
        xval_[leave] = block_status == kAtLower ? lower_[leave] : upper_[leave];
        vstat_[leave] = block_status;
        vstat_[enter] = kBasic;
        head_[block_pos] = enter;

        Eta e;
        e.pos = block_pos;
        e.pivot = alpha[block_pos];
        for (int p = 0; p < m_; ++p)
            if (std::abs(alpha[p]) > 1e-12) e.nz.push_back({p, alpha[p]});
        etas_.push_back(std::move(e));

        if (t_limit <= 1e-10) {
            if (++degen_streak >= kBlandTrigger) bland = true;
        } else {
            degen_streak = 0;
            bland = false;
        }
    }
}

}  // namespace biflp::detail
