#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>
#include <cpsvm/error.hpp>

namespace cpsvm::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense : std::uint8_t { GreaterEq, LessEq, Equal };

/// Sparse column: parallel arrays of row indices (strictly increasing) and values.
struct SparseColumn
{
    std::vector<int> index;
    std::vector<double> value;

    std::size_t nnz() const noexcept { return index.size(); }

    void push(int row, double v)
    {
        index.push_back(row);
        value.push_back(v);
    }

    /// Sorts by row and drops explicit zeros.
    void normalize()
    {
        std::vector<std::size_t> order(index.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return index[a] < index[b]; });
        std::vector<int> idx;
        std::vector<double> val;
        idx.reserve(order.size());
        val.reserve(order.size());
        for (auto k : order) {
            if (value[k] == 0.0) continue;
            if (!idx.empty() && idx.back() == index[k]) throw DomainError("SparseColumn: duplicate row index");
            idx.push_back(index[k]);
            val.push_back(value[k]);
        }
        index = std::move(idx);
        value = std::move(val);
    }
};

struct LpColumn
{
    double cost = 0.0;
    double lower = 0.0;
    double upper = kInf;
    SparseColumn coef;
};

struct LpRow
{
    RowSense sense = RowSense::GreaterEq;
    double rhs = 0.0;
    /// Coefficients on already existing columns, as (column, value).
    std::vector<std::pair<int, double>> entries;
};

/**
 * min c^T x  s.t.  each row  a_i^T x {>=,<=,=} b_i,  l <= x <= u.
 *
 * Stored column-wise; rows can be appended after columns exist, in which
 * case their coefficients are appended to the affected columns.
 */
class LpModel
{
public:
    int num_rows() const noexcept { return static_cast<int>(rows_.size()); }
    int num_cols() const noexcept { return static_cast<int>(cols_.size()); }

    const LpColumn& column(int j) const { return cols_[j]; }
    RowSense row_sense(int i) const { return rows_[i].sense; }
    double row_rhs(int i) const { return rows_[i].rhs; }

    /// Activity bounds implied by the row sense.
    double row_lower(int i) const
    {
        return rows_[i].sense == RowSense::LessEq ? -kInf : rows_[i].rhs;
    }
    double row_upper(int i) const
    {
        return rows_[i].sense == RowSense::GreaterEq ? kInf : rows_[i].rhs;
    }

    int add_column(LpColumn col)
    {
        if (!std::isfinite(col.cost)) throw DomainError("LpModel: column cost must be finite");
        if (col.lower > col.upper) throw DomainError("LpModel: column lower bound exceeds upper bound");
        if (col.lower == kInf || col.upper == -kInf) throw DomainError("LpModel: infeasible infinite bound");
        col.coef.normalize();
        for (int r : col.coef.index)
            if (r < 0 || r >= num_rows()) throw DomainError("LpModel: column coefficient row index out of range");
        cols_.push_back(std::move(col));
        return num_cols() - 1;
    }

    int add_row(RowSense sense, double rhs, const std::vector<std::pair<int, double>>& entries = {})
    {
        if (!std::isfinite(rhs)) throw DomainError("LpModel: row rhs must be finite");
        for (const auto& [j, v] : entries)
            if (j < 0 || j >= num_cols()) throw DomainError("LpModel: row entry column index out of range");
        const int i = num_rows();
        rows_.push_back({sense, rhs, {}});
        for (const auto& [j, v] : entries) {
            if (v == 0.0) continue;
            auto& c = cols_[j].coef;
            if (!c.index.empty() && c.index.back() == i) throw DomainError("LpModel: duplicate row entry");
            c.push(i, v);
        }
        return i;
    }

    int add_row(const LpRow& row) { return add_row(row.sense, row.rhs, row.entries); }

    void set_cost(int j, double c)
    {
        if (!std::isfinite(c)) throw DomainError("LpModel: column cost must be finite");
        cols_[j].cost = c;
    }

    void set_bounds(int j, double lower, double upper)
    {
        if (lower > upper) throw DomainError("LpModel: column lower bound exceeds upper bound");
        cols_[j].lower = lower;
        cols_[j].upper = upper;
    }

    /// Row activities a_i^T x.
    std::vector<double> row_activity(const std::vector<double>& x) const
    {
        std::vector<double> act(rows_.size(), 0.0);
        for (int j = 0; j < num_cols(); ++j) {
            if (x[j] == 0.0) continue;
            const auto& c = cols_[j].coef;
            for (std::size_t k = 0; k < c.nnz(); ++k) act[c.index[k]] += c.value[k] * x[j];
        }
        return act;
    }

    double objective(const std::vector<double>& x) const
    {
        double s = 0.0;
        for (int j = 0; j < num_cols(); ++j) s += cols_[j].cost * x[j];
        return s;
    }

    /// Largest bound or row violation of x.
    double primal_residual(const std::vector<double>& x) const
    {
        double worst = 0.0;
        for (int j = 0; j < num_cols(); ++j) {
            worst = std::max(worst, cols_[j].lower - x[j]);
            worst = std::max(worst, x[j] - cols_[j].upper);
        }
        const auto act = row_activity(x);
        for (int i = 0; i < num_rows(); ++i) {
            worst = std::max(worst, row_lower(i) - act[i]);
            worst = std::max(worst, act[i] - row_upper(i));
        }
        return worst;
    }

private:
    std::vector<LpColumn> cols_;
    std::vector<LpRow> rows_;
};

} // namespace cpsvm::lp
