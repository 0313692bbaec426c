#pragma once
#include <algorithm>
#include <random>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>
#include <cpsvm/error.hpp>
#include <cpsvm/lp/factor.hpp>
#include <cpsvm/lp/model.hpp>

namespace cpsvm::lp {

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, Zero };

/**
 * Simplex basis. basic[pos] names the variable at basis position pos:
 * j >= 0 is structural column j, j < 0 is the logical of row (-j - 1).
 * Row logicals carry the row activity, bounded by the row sense.
 */
struct Basis
{
    std::vector<int> basic;
    std::vector<VarStatus> col_status;
    std::vector<VarStatus> row_status;

    bool empty() const noexcept { return basic.empty() && col_status.empty(); }

    static int logical(int row) { return -row - 1; }
    static bool is_logical(int var) { return var < 0; }
    static int row_of(int var) { return -var - 1; }
};

enum class LpStatus : std::uint8_t { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s)
{
    switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
    }
    return "?";
}

struct LpSolution
{
    LpStatus status = LpStatus::IterationLimit;
    std::vector<double> primal;         ///< structural values
    std::vector<double> row_activity;   ///< a_i^T x
    std::vector<double> duals;          ///< q, one per row (>= 0 on active >= rows)
    std::vector<double> reduced_costs;  ///< c_j - q^T A_j
    double objective = 0.0;
    long pivots = 0;
};

struct SimplexOptions
{
    double feas_tol = 1e-7;
    double opt_tol = 1e-7;
    int refactor_interval = 100;
    /// Consecutive degenerate pivots before the bounds are perturbed; the same count again switches to Bland's rule.
    int bland_after = 50;
    /// 0 selects max(20000, 50 (m + n)).
    long max_iterations = 0;
    bool crash = true;
};

namespace detail {

class SimplexEngine
{
public:
    SimplexEngine(const LpModel& model, const SimplexOptions& opt) : m_(model), opt_(opt)
    {
        nrows_ = model.num_rows();
        ncols_ = model.num_cols();
        const int nv = ncols_ + nrows_;
        lower_.resize(nv);
        upper_.resize(nv);
        cost_.assign(nv, 0.0);
        for (int j = 0; j < ncols_; ++j) {
            lower_[j] = model.column(j).lower;
            upper_[j] = model.column(j).upper;
            cost_[j] = model.column(j).cost;
        }
        for (int i = 0; i < nrows_; ++i) {
            lower_[ncols_ + i] = model.row_lower(i);
            upper_[ncols_ + i] = model.row_upper(i);
        }
        logical_index_.resize(nrows_);
        std::iota(logical_index_.begin(), logical_index_.end(), 0);
        logical_value_.assign(nrows_, -1.0);
        dense_col_.resize(ncols_);
        for (int j = 0; j < ncols_; ++j) dense_col_[j] = static_cast<int>(model.column(j).coef.nnz()) == nrows_;
    }

    void load(const Basis* warm)
    {
        const int nv = ncols_ + nrows_;
        status_.assign(nv, VarStatus::AtLower);
        head_.clear();
        if (warm && !warm->empty()) {
            if (warm->col_status.size() > static_cast<std::size_t>(ncols_) ||
                warm->row_status.size() > static_cast<std::size_t>(nrows_))
                throw DomainError("simplex: warm basis is larger than the model");
            for (std::size_t j = 0; j < warm->col_status.size(); ++j) status_[j] = warm->col_status[j];
            for (std::size_t j = warm->col_status.size(); j < static_cast<std::size_t>(ncols_); ++j)
                status_[j] = default_status(static_cast<int>(j));
            for (std::size_t i = 0; i < warm->row_status.size(); ++i) status_[ncols_ + i] = warm->row_status[i];
            for (std::size_t i = warm->row_status.size(); i < static_cast<std::size_t>(nrows_); ++i)
                status_[ncols_ + i] = VarStatus::Basic;
            for (int b : warm->basic) {
                const int v = Basis::is_logical(b) ? ncols_ + Basis::row_of(b) : b;
                if (v < 0 || v >= nv || status_[v] != VarStatus::Basic)
                    throw DomainError("simplex: warm basis names an invalid basic variable");
                head_.push_back(v);
            }
            for (std::size_t i = warm->row_status.size(); i < static_cast<std::size_t>(nrows_); ++i)
                head_.push_back(ncols_ + static_cast<int>(i));
            int basic_count = 0;
            for (auto s : status_) basic_count += s == VarStatus::Basic;
            if (static_cast<int>(head_.size()) != nrows_ || basic_count != nrows_)
                throw DomainError("simplex: warm basis has the wrong number of basic variables");
            for (int v = 0; v < nv; ++v)
                if (status_[v] != VarStatus::Basic) status_[v] = sanitize(v, status_[v]);
        } else {
            for (int j = 0; j < ncols_; ++j) status_[j] = default_status(j);
            for (int i = 0; i < nrows_; ++i) {
                status_[ncols_ + i] = VarStatus::Basic;
                head_.push_back(ncols_ + i);
            }
        }
        x_.assign(nv, 0.0);
        for (int v = 0; v < nv; ++v)
            if (status_[v] != VarStatus::Basic) x_[v] = nonbasic_value(v);
        if (!(warm && !warm->empty()) && opt_.crash) crash();
        refactor();
    }

    LpSolution run(Basis& out_basis)
    {
        LpSolution sol;
        const long max_iter = opt_.max_iterations > 0
                                  ? opt_.max_iterations
                                  : std::max<long>(20000, 50L * (nrows_ + ncols_));
        long iter = 0;
        int degenerate_run = 0;
        std::vector<double> cb(nrows_), y, alpha;
        bool done = false;
        while (!done) {
            if (iter >= max_iter) {
                sol.status = LpStatus::IterationLimit;
                break;
            }
            // phase selection: composite cost on infeasible basics
            bool phase1 = false;
            for (int pos = 0; pos < nrows_; ++pos) {
                const int v = head_[pos];
                if (x_[v] < lower_[v] - opt_.feas_tol) {
                    cb[pos] = -1.0;
                    phase1 = true;
                } else if (x_[v] > upper_[v] + opt_.feas_tol) {
                    cb[pos] = 1.0;
                    phase1 = true;
                } else {
                    cb[pos] = 0.0;
                }
            }
            if (!phase1)
                for (int pos = 0; pos < nrows_; ++pos) cb[pos] = cost_[head_[pos]];
            y = cb;
            factor_.btran(y);

            if (degenerate_run >= opt_.bland_after && !perturbed_ && !perturb_spent_) {
                perturb_bounds();
                degenerate_run = 0;
                continue;
            }
            const bool bland = degenerate_run >= opt_.bland_after;
            int entering = -1;
            double enter_d = 0.0, best_score = 0.0;
            for (int v = 0; v < ncols_ + nrows_; ++v) {
                const VarStatus s = status_[v];
                if (s == VarStatus::Basic || lower_[v] == upper_[v]) continue;
                const double d = (phase1 ? 0.0 : cost_[v]) - dot(v, y);
                double score = 0.0;
                if (s == VarStatus::AtLower) score = d < -opt_.opt_tol ? -d : 0.0;
                else if (s == VarStatus::AtUpper) score = d > opt_.opt_tol ? d : 0.0;
                else score = std::abs(d) > opt_.opt_tol ? std::abs(d) : 0.0;
                if (score <= 0.0) continue;
                if (bland) {
                    entering = v;
                    enter_d = d;
                    break;
                }
                if (score > best_score) {
                    best_score = score;
                    entering = v;
                    enter_d = d;
                }
            }

            if (entering < 0) {
                // accept only on a fresh factorization
                if (factor_.num_etas() > 0) {
                    refactor();
                    continue;
                }
                if (perturbed_) {
                    restore_bounds();
                    degenerate_run = 0;
                    continue;
                }
                sol.status = phase1 ? LpStatus::Infeasible : LpStatus::Optimal;
                done = true;
                break;
            }

            const double dir = enter_d < 0 ? 1.0 : -1.0;
            alpha.assign(nrows_, 0.0);
            scatter(entering, alpha);
            factor_.ftran(alpha);

            // ratio test (Harris two-pass; plain min-ratio under Bland)
            const double htol = opt_.feas_tol * 1e-2;
            double t_relaxed = kInf;
            for (int pos = 0; pos < nrows_; ++pos) {
                const double delta = -dir * alpha[pos];
                if (std::abs(delta) < kAlphaTol) continue;
                const int v = head_[pos];
                const auto [lo, hi] = effective_bounds(v, phase1);
                // clamp at 0: a basic slightly outside its bound must not push the bound negative
                if (delta < 0 && lo > -kInf) t_relaxed = std::min(t_relaxed, std::max(0.0, (x_[v] - lo + htol) / -delta));
                else if (delta > 0 && hi < kInf) t_relaxed = std::min(t_relaxed, std::max(0.0, (hi - x_[v] + htol) / delta));
            }
            int leave_pos = -1;
            double t = kInf, best_alpha = 0.0;
            for (int pos = 0; pos < nrows_; ++pos) {
                const double delta = -dir * alpha[pos];
                if (std::abs(delta) < kAlphaTol) continue;
                const int v = head_[pos];
                const auto [lo, hi] = effective_bounds(v, phase1);
                double ratio;
                if (delta < 0 && lo > -kInf) ratio = std::max(0.0, (x_[v] - lo) / -delta);
                else if (delta > 0 && hi < kInf) ratio = std::max(0.0, (hi - x_[v]) / delta);
                else continue;
                if (bland) {
                    if (ratio < t || (ratio == t && leave_pos >= 0 && v < head_[leave_pos])) {
                        t = ratio;
                        leave_pos = pos;
                    }
                } else if (ratio <= t_relaxed && std::abs(delta) > best_alpha) {
                    best_alpha = std::abs(delta);
                    t = ratio;
                    leave_pos = pos;
                }
            }
            const double range = upper_[entering] - lower_[entering];
            const bool flip = range < kInf && range <= t;
            if (leave_pos < 0 && !flip) {
                if (perturbed_) {
                    restore_bounds();
                    continue;
                }
                // a ray seen through a long eta file may be spurious; confirm on a fresh factorization
                if (factor_.num_etas() > 0) {
                    refactor();
                    continue;
                }
                if (phase1) {
                    sol.status = LpStatus::Infeasible;
                } else {
                    sol.status = LpStatus::Unbounded;
                }
                break;
            }
            if (flip) t = range;

            // bound the leaving variable hits, taken before the move makes it feasible
            std::pair<double, double> leave_bounds{0.0, 0.0};
            if (!flip) leave_bounds = effective_bounds(head_[leave_pos], phase1);
            for (int pos = 0; pos < nrows_; ++pos)
                if (alpha[pos] != 0.0) x_[head_[pos]] -= dir * t * alpha[pos];
            x_[entering] += dir * t;
            ++iter;
            degenerate_run = t <= 1e-12 ? degenerate_run + 1 : 0;

            if (flip) {
                status_[entering] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
                x_[entering] = dir > 0 ? upper_[entering] : lower_[entering];
                continue;
            }
            const int leaving = head_[leave_pos];
            const double delta_leave = -dir * alpha[leave_pos];
            const auto [lo, hi] = leave_bounds;
            if (delta_leave < 0) {
                x_[leaving] = lo;
                status_[leaving] = lo == upper_[leaving] && lo != lower_[leaving] ? VarStatus::AtUpper : VarStatus::AtLower;
            } else {
                x_[leaving] = hi;
                status_[leaving] = hi == lower_[leaving] && hi != upper_[leaving] ? VarStatus::AtLower : VarStatus::AtUpper;
            }
            status_[entering] = VarStatus::Basic;
            head_[leave_pos] = entering;
            factor_.update(leave_pos, alpha);
            if (factor_.num_etas() >= opt_.refactor_interval || std::abs(alpha[leave_pos]) < 1e-7) refactor();
        }

        if (perturbed_) restore_bounds();
        sol.pivots = iter;
        finish(sol);
        out_basis = export_basis();
        return sol;
    }

    double reduced_cost_of(int j)
    {
        std::vector<double> y(nrows_);
        for (int pos = 0; pos < nrows_; ++pos) y[pos] = cost_[head_[pos]];
        factor_.btran(y);
        return cost_[j] - dot(j, y);
    }

private:
    static constexpr double kAlphaTol = 1e-9;
    static constexpr double kPerturb = 1e-6;

    // Widen the bounds of the basic variables by a small random amount so the
    // current degenerate vertex becomes nondegenerate; undone before the final answer.
    void perturb_bounds()
    {
        saved_lower_ = lower_;
        saved_upper_ = upper_;
        std::mt19937_64 rng(0x5eed);
        std::uniform_real_distribution<double> u(1.0, 2.0);
        for (int v : head_) {
            if (lower_[v] == upper_[v]) continue;
            if (lower_[v] > -kInf) lower_[v] -= kPerturb * u(rng) * (1.0 + std::abs(lower_[v]));
            if (upper_[v] < kInf) upper_[v] += kPerturb * u(rng) * (1.0 + std::abs(upper_[v]));
        }
        perturbed_ = true;
    }

    void restore_bounds()
    {
        lower_ = std::move(saved_lower_);
        upper_ = std::move(saved_upper_);
        perturbed_ = false;
        perturb_spent_ = true;
        reset_nonbasic_values();
    }

    void reset_nonbasic_values()
    {
        for (std::size_t v = 0; v < x_.size(); ++v)
            if (status_[v] != VarStatus::Basic) x_[v] = nonbasic_value(static_cast<int>(v));
        refactor();
    }

    VarStatus default_status(int v) const
    {
        if (lower_[v] > -kInf) return VarStatus::AtLower;
        if (upper_[v] < kInf) return VarStatus::AtUpper;
        return VarStatus::Zero;
    }

    VarStatus sanitize(int v, VarStatus s) const
    {
        if (s == VarStatus::AtLower && lower_[v] == -kInf) return default_status(v);
        if (s == VarStatus::AtUpper && upper_[v] == kInf) return default_status(v);
        if (s == VarStatus::Zero && (lower_[v] > -kInf || upper_[v] < kInf)) return default_status(v);
        return s;
    }

    double nonbasic_value(int v) const
    {
        switch (status_[v]) {
        case VarStatus::AtLower: return lower_[v];
        case VarStatus::AtUpper: return upper_[v];
        default: return 0.0;
        }
    }

    std::pair<double, double> effective_bounds(int v, bool phase1) const
    {
        if (phase1) {
            if (x_[v] < lower_[v] - opt_.feas_tol) return {-kInf, lower_[v]};
            if (x_[v] > upper_[v] + opt_.feas_tol) return {upper_[v], kInf};
        }
        return {lower_[v], upper_[v]};
    }

    ColumnView view(int v) const
    {
        if (v < ncols_) {
            const auto& c = m_.column(v).coef;
            return {c.index.data(), c.value.data(), static_cast<int>(c.nnz())};
        }
        const int i = v - ncols_;
        return {&logical_index_[i], &logical_value_[i], 1};
    }

    double dot(int v, const std::vector<double>& y) const
    {
        if (v >= ncols_) return -y[v - ncols_];
        const auto& c = m_.column(v).coef;
        double s = 0.0;
        const double* val = c.value.data();
        if (dense_col_[v]) {
            const double* yy = y.data();
            for (int i = 0; i < nrows_; ++i) s += val[i] * yy[i];
        } else {
            const int* idx = c.index.data();
            const std::size_t nnz = c.nnz();
            for (std::size_t k = 0; k < nnz; ++k) s += val[k] * y[idx[k]];
        }
        return s;
    }

    void scatter(int v, std::vector<double>& out) const
    {
        const auto c = view(v);
        for (int t = 0; t < c.nnz; ++t) out[c.index[t]] = c.value[t];
    }

    // Swap violated logicals for structural singletons that repair the row.
    void crash()
    {
        std::vector<double> act(nrows_, 0.0);
        for (int j = 0; j < ncols_; ++j) {
            if (x_[j] == 0.0) continue;
            const auto c = view(j);
            for (int t = 0; t < c.nnz; ++t) act[c.index[t]] += c.value[t] * x_[j];
        }
        std::vector<int> candidate(nrows_, -1);
        for (int j = 0; j < ncols_; ++j) {
            const auto c = view(j);
            if (c.nnz == 1 && candidate[c.index[0]] < 0 && status_[j] != VarStatus::Basic) candidate[c.index[0]] = j;
        }
        for (int pos = 0; pos < nrows_; ++pos) {
            const int lv = head_[pos];
            const int i = lv - ncols_;
            if (i < 0 || candidate[i] < 0) continue;
            double target;
            if (act[i] < lower_[lv] - opt_.feas_tol) target = lower_[lv];
            else if (act[i] > upper_[lv] + opt_.feas_tol) target = upper_[lv];
            else continue;
            const int j = candidate[i];
            const double a = m_.column(j).coef.value[0];
            const double xj = x_[j] + (target - act[i]) / a;
            if (xj < lower_[j] - opt_.feas_tol || xj > upper_[j] + opt_.feas_tol) continue;
            head_[pos] = j;
            status_[j] = VarStatus::Basic;
            status_[lv] = target == lower_[lv] ? VarStatus::AtLower : VarStatus::AtUpper;
            x_[lv] = target;
        }
    }

    void refactor()
    {
        for (int attempt = 0; attempt < 3; ++attempt) {
            const auto def = factor_.factorize(nrows_, [&](int pos) { return view(head_[pos]); });
            if (def.empty()) {
                compute_basic_values();
                return;
            }
            // repair: dependent columns leave, logicals of uncovered rows enter
            for (std::size_t k = 0; k < def.positions.size(); ++k) {
                const int pos = def.positions[k];
                const int out = head_[pos];
                status_[out] = default_status(out);
                if (status_[out] == VarStatus::AtLower && upper_[out] < kInf &&
                    std::abs(x_[out] - upper_[out]) < std::abs(x_[out] - lower_[out]))
                    status_[out] = VarStatus::AtUpper;
                x_[out] = nonbasic_value(out);
                const int in = ncols_ + def.rows[k];
                if (status_[in] == VarStatus::Basic)
                    throw FactorizationError("simplex: basis repair found a basic logical on an uncovered row");
                status_[in] = VarStatus::Basic;
                head_[pos] = in;
            }
        }
        throw FactorizationError("simplex: basis remains singular after repair");
    }

    void compute_basic_values()
    {
        std::vector<double> rhs(nrows_, 0.0);
        for (int v = 0; v < ncols_ + nrows_; ++v) {
            if (status_[v] == VarStatus::Basic || x_[v] == 0.0) continue;
            const auto c = view(v);
            for (int t = 0; t < c.nnz; ++t) rhs[c.index[t]] -= c.value[t] * x_[v];
        }
        factor_.ftran(rhs);
        for (int pos = 0; pos < nrows_; ++pos) x_[head_[pos]] = rhs[pos];
    }

    void finish(LpSolution& sol)
    {
        if (factor_.num_etas() > 0) refactor();
        std::vector<double> y(nrows_);
        for (int pos = 0; pos < nrows_; ++pos) y[pos] = cost_[head_[pos]];
        factor_.btran(y);
        sol.primal.assign(x_.begin(), x_.begin() + ncols_);
        // snap basic values within round-off of a bound
        for (int j = 0; j < ncols_; ++j) {
            if (status_[j] != VarStatus::Basic) continue;
            double& v = sol.primal[j];
            if (std::abs(v - lower_[j]) < kSnapTol) v = lower_[j];
            else if (std::abs(v - upper_[j]) < kSnapTol) v = upper_[j];
            else if (std::abs(v) < kSnapTol) v = 0.0;
        }
        sol.row_activity = m_.row_activity(sol.primal);
        sol.duals = y;
        sol.reduced_costs.resize(ncols_);
        for (int j = 0; j < ncols_; ++j) sol.reduced_costs[j] = cost_[j] - dot(j, y);
        sol.objective = m_.objective(sol.primal);
    }

    Basis export_basis() const
    {
        Basis b;
        b.basic.resize(nrows_);
        for (int pos = 0; pos < nrows_; ++pos) {
            const int v = head_[pos];
            b.basic[pos] = v < ncols_ ? v : Basis::logical(v - ncols_);
        }
        b.col_status.assign(status_.begin(), status_.begin() + ncols_);
        b.row_status.assign(status_.begin() + ncols_, status_.end());
        return b;
    }

    static constexpr double kSnapTol = 1e-11;

    const LpModel& m_;
    SimplexOptions opt_;
    int nrows_ = 0, ncols_ = 0;
    std::vector<double> lower_, upper_, cost_, x_;
    std::vector<double> saved_lower_, saved_upper_;
    bool perturbed_ = false;
    bool perturb_spent_ = false;
    std::vector<VarStatus> status_;
    std::vector<int> head_;
    std::vector<int> logical_index_;
    std::vector<double> logical_value_;
    std::vector<char> dense_col_;
    BasisFactor factor_;
};

} // namespace detail

struct SolveResult
{
    LpSolution solution;
    Basis basis;
};

/**
 * Bounded-variable primal revised simplex.
 *
 * With a warm basis the solve resumes from it; columns or rows added to the
 * model since the basis was produced enter as nonbasic-at-bound structurals
 * and basic logicals respectively. A basis that is primal infeasible for the
 * current model is handled by a composite phase 1 that keeps the basis.
 */
inline SolveResult solve(const LpModel& model, const Basis* warm = nullptr, const SimplexOptions& opt = {})
{
    detail::SimplexEngine eng(model, opt);
    eng.load(warm);
    SolveResult r;
    r.solution = eng.run(r.basis);
    return r;
}

inline SolveResult solve(const LpModel& model, const Basis& warm, const SimplexOptions& opt = {})
{
    return solve(model, &warm, opt);
}

/// Appends columns; new variables start nonbasic at a finite bound (or free at zero).
inline Basis add_columns(LpModel& model, std::span<const LpColumn> cols, Basis basis)
{
    for (const auto& c : cols) {
        const int j = model.add_column(c);
        const auto& col = model.column(j);
        basis.col_status.push_back(col.lower > -kInf ? VarStatus::AtLower
                                   : col.upper < kInf ? VarStatus::AtUpper
                                                      : VarStatus::Zero);
    }
    return basis;
}

/// Appends rows; each new row's logical enters the basis.
inline Basis add_rows(LpModel& model, std::span<const LpRow> rows, Basis basis)
{
    for (const auto& r : rows) {
        const int i = model.add_row(r);
        basis.row_status.push_back(VarStatus::Basic);
        basis.basic.push_back(Basis::logical(i));
    }
    return basis;
}

/// c_j - q^T A_j for the duals q of basis b.
inline double reduced_cost(const LpModel& model, const Basis& b, int j)
{
    cpsvm::detail::require(j >= 0 && j < model.num_cols(), "reduced_cost: column index out of range");
    detail::SimplexEngine eng(model, {});
    eng.load(&b);
    return eng.reduced_cost_of(j);
}

} // namespace cpsvm::lp
