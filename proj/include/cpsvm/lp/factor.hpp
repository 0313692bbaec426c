#pragma once
#include <algorithm>
#include <cmath>
#include <vector>
#include <cpsvm/error.hpp>

namespace cpsvm::lp {

/// Read-only view of one basis column.
struct ColumnView
{
    const int* index = nullptr;
    const double* value = nullptr;
    int nnz = 0;
};

/**
 * Factorization of a simplex basis B (m x m) plus a product-form eta file.
 *
 * Columns with a single nonzero in a not-yet-covered row ("singletons":
 * slacks, hinge slacks) are eliminated directly; the remaining kernel
 * B[uncovered rows, other columns] is factorized densely with partial
 * pivoting. For the SVM restricted LPs the kernel is roughly the number of
 * basic coefficient variables, far smaller than m.
 *
 * Positions index the columns of B; solves map row space <-> position space.
 */
class BasisFactor
{
public:
    /// Result of factorize(): positions whose column was dependent, paired with
    /// rows that were left uncovered. Empty when the basis is nonsingular.
    struct Deficiency
    {
        std::vector<int> positions;
        std::vector<int> rows;
        bool empty() const noexcept { return positions.empty(); }
    };

    template <class ColumnOf>
    Deficiency factorize(int m, ColumnOf&& column_of)
    {
        m_ = m;
        etas_.clear();
        cols_.assign(m, ColumnView{});
        for (int pos = 0; pos < m; ++pos) cols_[pos] = column_of(pos);

        row_single_pos_.assign(m, -1);
        single_val_.assign(m, 0.0);
        kernel_pos_.clear();
        for (int pos = 0; pos < m; ++pos) {
            const auto& c = cols_[pos];
            if (c.nnz == 1 && row_single_pos_[c.index[0]] < 0 && std::abs(c.value[0]) > kPivotTol) {
                row_single_pos_[c.index[0]] = pos;
                single_val_[pos] = c.value[0];
            } else {
                kernel_pos_.push_back(pos);
            }
        }
        kernel_row_.clear();
        row_to_kernel_.assign(m, -1);
        for (int r = 0; r < m; ++r)
            if (row_single_pos_[r] < 0) {
                row_to_kernel_[r] = static_cast<int>(kernel_row_.size());
                kernel_row_.push_back(r);
            }
        k_ = static_cast<int>(kernel_pos_.size());

        lu_.assign(static_cast<std::size_t>(k_) * k_, 0.0);
        for (int kc = 0; kc < k_; ++kc) {
            const auto& c = cols_[kernel_pos_[kc]];
            for (int t = 0; t < c.nnz; ++t) {
                const int kr = row_to_kernel_[c.index[t]];
                if (kr >= 0) at(kr, kc) = c.value[t];
            }
        }
        return eliminate();
    }

    int size() const noexcept { return m_; }
    int kernel_size() const noexcept { return k_; }
    int num_etas() const noexcept { return static_cast<int>(etas_.size()); }

    /// a (row space) -> B^{-1} a (position space), in place.
    void ftran(std::vector<double>& a) const
    {
        std::vector<double> xk(k_);
        for (int s = 0; s < k_; ++s) xk[s] = a[kernel_row_[perm_[s]]];
        lu_solve(xk);
        std::vector<double> x(m_, 0.0);
        for (int kc = 0; kc < k_; ++kc) {
            const double v = xk[kc];
            x[kernel_pos_[kc]] = v;
            if (v == 0.0) continue;
            const auto& c = cols_[kernel_pos_[kc]];
            for (int t = 0; t < c.nnz; ++t) a[c.index[t]] -= c.value[t] * v;
        }
        for (int r = 0; r < m_; ++r) {
            const int pos = row_single_pos_[r];
            if (pos >= 0) x[pos] = a[r] / single_val_[pos];
        }
        for (const auto& e : etas_) {
            const double xr = x[e.pos] / e.pivot;
            x[e.pos] = xr;
            if (xr == 0.0) continue;
            for (std::size_t t = 0; t < e.index.size(); ++t) x[e.index[t]] -= e.value[t] * xr;
        }
        a.swap(x);
    }

    /// c (position space) -> c^T B^{-1} (row space), in place.
    void btran(std::vector<double>& c) const
    {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = c[it->pos];
            for (std::size_t t = 0; t < it->index.size(); ++t) s -= c[it->index[t]] * it->value[t];
            c[it->pos] = s / it->pivot;
        }
        std::vector<double> y(m_, 0.0);
        for (int r = 0; r < m_; ++r) {
            const int pos = row_single_pos_[r];
            if (pos >= 0) y[r] = c[pos] / single_val_[pos];
        }
        std::vector<double> rhs(k_);
        for (int kc = 0; kc < k_; ++kc) {
            const auto& col = cols_[kernel_pos_[kc]];
            double s = c[kernel_pos_[kc]];
            for (int t = 0; t < col.nnz; ++t)
                if (row_to_kernel_[col.index[t]] < 0) s -= y[col.index[t]] * col.value[t];
            rhs[kc] = s;
        }
        lu_solve_transpose(rhs);
        for (int s = 0; s < k_; ++s) y[kernel_row_[perm_[s]]] = rhs[s];
        c.swap(y);
    }

    /// Records the replacement of the column at `pos` by a column whose ftran is `alpha`.
    void update(int pos, const std::vector<double>& alpha)
    {
        Eta e;
        e.pos = pos;
        e.pivot = alpha[pos];
        for (int i = 0; i < m_; ++i)
            if (i != pos && alpha[i] != 0.0 && std::abs(alpha[i]) > 1e-14) {
                e.index.push_back(i);
                e.value.push_back(alpha[i]);
            }
        etas_.push_back(std::move(e));
    }

    static constexpr double kPivotTol = 1e-11;

private:
    struct Eta
    {
        int pos = 0;
        double pivot = 1.0;
        std::vector<int> index;
        std::vector<double> value;
    };

    double& at(int r, int c) { return lu_[static_cast<std::size_t>(r) * k_ + c]; }
    double at(int r, int c) const { return lu_[static_cast<std::size_t>(r) * k_ + c]; }

    // Gaussian elimination with partial pivoting on rows of the kernel.
    // Rows are physically swapped; perm_[s] is the original kernel row now at s.
    Deficiency eliminate()
    {
        perm_.resize(k_);
        for (int s = 0; s < k_; ++s) perm_[s] = s;
        std::vector<double> col_scale(k_, 0.0);
        for (int c = 0; c < k_; ++c)
            for (int r = 0; r < k_; ++r) col_scale[c] = std::max(col_scale[c], std::abs(at(r, c)));

        Deficiency def;
        std::vector<int> pivot_col;
        int s = 0;
        for (int c = 0; c < k_; ++c) {
            int best = -1;
            double best_abs = 0.0;
            for (int r = s; r < k_; ++r) {
                const double v = std::abs(at(r, c));
                if (v > best_abs) {
                    best_abs = v;
                    best = r;
                }
            }
            if (best < 0 || best_abs <= kRelPivotTol * std::max(1.0, col_scale[c]) || best_abs <= kPivotTol) {
                def.positions.push_back(kernel_pos_[c]);
                continue;
            }
            if (best != s) {
                for (int cc = 0; cc < k_; ++cc) std::swap(at(s, cc), at(best, cc));
                std::swap(perm_[s], perm_[best]);
            }
            const double piv = at(s, c);
            for (int r = s + 1; r < k_; ++r) {
                const double f = at(r, c) / piv;
                at(r, c) = f;
                if (f == 0.0) continue;
                double* rr = &lu_[static_cast<std::size_t>(r) * k_];
                const double* sr = &lu_[static_cast<std::size_t>(s) * k_];
                for (int cc = c + 1; cc < k_; ++cc) rr[cc] -= f * sr[cc];
            }
            pivot_col.push_back(c);
            ++s;
        }
        for (int r = s; r < k_; ++r) def.rows.push_back(kernel_row_[perm_[r]]);
        return def;
    }

    // Solve K x = b where b is already row-permuted (b[s] = rhs at perm_[s]).
    void lu_solve(std::vector<double>& b) const
    {
        for (int s = 0; s < k_; ++s) {
            const double bs = b[s];
            if (bs == 0.0) continue;
            for (int r = s + 1; r < k_; ++r) b[r] -= at(r, s) * bs;
        }
        for (int s = k_ - 1; s >= 0; --s) {
            double v = b[s];
            const double* row = &lu_[static_cast<std::size_t>(s) * k_];
            for (int c = s + 1; c < k_; ++c) v -= row[c] * b[c];
            b[s] = v / row[s];
        }
    }

    // Solve K^T y = c; returns y in permuted row order (y[s] belongs to perm_[s]).
    void lu_solve_transpose(std::vector<double>& c) const
    {
        for (int s = 0; s < k_; ++s) {
            const double v = c[s] / at(s, s);
            c[s] = v;
            if (v == 0.0) continue;
            const double* row = &lu_[static_cast<std::size_t>(s) * k_];
            for (int cc = s + 1; cc < k_; ++cc) c[cc] -= row[cc] * v;
        }
        for (int s = k_ - 1; s >= 0; --s) {
            double v = c[s];
            for (int r = s + 1; r < k_; ++r) v -= at(r, s) * c[r];
            c[s] = v;
        }
    }

    static constexpr double kRelPivotTol = 1e-9;

    int m_ = 0;
    int k_ = 0;
    std::vector<ColumnView> cols_;
    std::vector<int> row_single_pos_;
    std::vector<double> single_val_;
    std::vector<int> kernel_pos_;
    std::vector<int> kernel_row_;
    std::vector<int> row_to_kernel_;
    std::vector<int> perm_;
    std::vector<double> lu_;
    std::vector<Eta> etas_;
};

} // namespace cpsvm::lp
