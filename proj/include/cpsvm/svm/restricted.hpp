#pragma once
#include <cmath>
#include <span>
#include <utility>
#include <vector>
#include <cpsvm/data/dataset.hpp>
#include <cpsvm/lp/simplex.hpp>
#include <cpsvm/svm/common.hpp>

namespace cpsvm {

/**
 * Incrementally grown restricted hinge LP
 *
 *   min  sum_{i in I} xi_i + c sum_{j in J} (b+_j + b-_j) + (auxiliary costs)
 *   s.t. xi_i + y_i x_iJ^T (b+ - b-) + y_i b0 >= 1,   i in I
 *        auxiliary rows (group links, epigraph cuts)
 *
 * Samples and features are only ever added. The simplex basis is kept between
 * solves: new features enter nonbasic at zero, and a new sample whose margin
 * is violated by the current solution enters with its slack xi_i basic, so the
 * warm basis stays primal feasible.
 */
class HingeModel
{
public:
    using Entries = std::vector<std::pair<int, double>>;

    HingeModel(const Dataset& d, double feature_cost) : d_(&d), feature_cost_(feature_cost)
    {
        d.require_both_classes();
        row_of_sample_.assign(d.n(), -1);
        plus_of_feature_.assign(d.p(), -1);
        lp::LpColumn b0;
        b0.lower = -lp::kInf;
        b0.cost = 0.0;
        beta0_col_ = model_.add_column(std::move(b0));
        x_.assign(1, 0.0);
    }

    const Dataset& data() const noexcept { return *d_; }
    const lp::LpModel& model() const noexcept { return model_; }
    const lp::Basis& basis() const noexcept { return basis_; }

    bool sample_active(int i) const { return row_of_sample_[i] >= 0; }
    bool feature_active(int j) const { return plus_of_feature_[j] >= 0; }
    /// Active samples / features in insertion order.
    const std::vector<int>& samples() const noexcept { return samples_; }
    const std::vector<int>& features() const noexcept { return features_; }
    int sample_row(int i) const { return row_of_sample_[i]; }
    int plus_col(int j) const { return plus_of_feature_[j]; }
    int minus_col(int j) const { return plus_of_feature_[j] + 1; }
    int beta0_col() const noexcept { return beta0_col_; }
    int xi_col(int i) const { return xi_of_row_[row_of_sample_[i]]; }

    /// Adds the hinge rows (and slacks) of samples not yet active.
    void add_samples(std::span<const int> idx)
    {
        for (int i : idx) {
            detail::require(i >= 0 && i < d_->n(), "HingeModel: sample index out of range");
            if (sample_active(i)) continue;
            const double y = d_->labels[i];
            lp::LpRow row{lp::RowSense::GreaterEq, 1.0, {}};
            double margin = y * value(beta0_col_);
            row.entries.reserve(2 * features_.size() + 1);
            row.entries.emplace_back(beta0_col_, y);
            for (int j : features_) {
                const double v = d_->features.coeff(i, j);
                if (v == 0.0) continue;
                row.entries.emplace_back(plus_col(j), y * v);
                row.entries.emplace_back(minus_col(j), -y * v);
                margin += y * v * (value(plus_col(j)) - value(minus_col(j)));
            }
            const int r = add_row_internal(row);
            row_of_sample_[i] = r;
            samples_.push_back(i);
            lp::LpColumn xi;
            xi.cost = 1.0;
            xi.coef.push(r, 1.0);
            const int c = add_column_internal(std::move(xi));
            xi_of_row_.resize(model_.num_rows(), -1);
            xi_of_row_[r] = c;
            if (!basis_.empty() && margin < 1.0) {
                // slack takes the violated row's place in the basis
                const auto pos = find_basic(lp::Basis::logical(r));
                basis_.basic[pos] = c;
                basis_.col_status[c] = lp::VarStatus::Basic;
                basis_.row_status[r] = lp::VarStatus::AtLower;
                x_[c] = 1.0 - margin;
            }
        }
    }

    /// Adds b+_j, b-_j with cost `cost` each; `aux` lists coefficients on auxiliary rows (shared by both signs).
    void add_feature(int j, double cost, const Entries& aux = {})
    {
        detail::require(j >= 0 && j < d_->p(), "HingeModel: feature index out of range");
        if (feature_active(j)) return;
        lp::LpColumn plus, minus;
        plus.cost = minus.cost = cost;
        if (!d_->features.is_sparse() && samples_.size() < static_cast<std::size_t>(d_->n())) {
            for (int i : samples_) {
                const double v = d_->features.coeff(i, j);
                if (v == 0.0) continue;
                const double yv = d_->labels[i] * v;
                plus.coef.push(row_of_sample_[i], yv);
                minus.coef.push(row_of_sample_[i], -yv);
            }
        } else {
            d_->features.for_each_in_col(j, [&](Eigen::Index i, double v) {
                const int r = row_of_sample_[i];
                if (r < 0 || v == 0.0) return;
                const double yv = d_->labels[i] * v;
                plus.coef.push(r, yv);
                minus.coef.push(r, -yv);
            });
        }
        for (const auto& [r, v] : aux) {
            plus.coef.push(r, v);
            minus.coef.push(r, v);
        }
        plus_of_feature_[j] = add_column_internal(std::move(plus));
        add_column_internal(std::move(minus));
        features_.push_back(j);
    }

    void add_feature(int j) { add_feature(j, feature_cost_); }

    void add_features(std::span<const int> js)
    {
        for (int j : js) add_feature(j);
    }

    /// Auxiliary column (coefficients on existing rows); enters nonbasic at its lower bound.
    int add_aux_column(lp::LpColumn col) { return add_column_internal(std::move(col)); }

    /// Auxiliary row; its logical enters the basis (possibly infeasible).
    int add_aux_row(lp::RowSense sense, double rhs, Entries entries)
    {
        const int r = add_row_internal({sense, rhs, std::move(entries)});
        xi_of_row_.resize(model_.num_rows(), -1);
        return r;
    }

    /// Changes the cost of every b+/b- column (regularization path).
    void set_feature_cost(double c)
    {
        feature_cost_ = c;
        for (int j : features_) {
            model_.set_cost(plus_col(j), c);
            model_.set_cost(minus_col(j), c);
        }
    }

    void set_cost(int col, double c) { model_.set_cost(col, c); }
    double feature_cost() const noexcept { return feature_cost_; }

    lp::LpStatus solve(const lp::SimplexOptions& opt = {})
    {
        auto r = basis_.empty() ? lp::solve(model_, nullptr, opt) : lp::solve(model_, basis_, opt);
        sol_ = std::move(r.solution);
        basis_ = std::move(r.basis);
        x_ = sol_.primal;
        pivots_ += sol_.pivots;
        ++solves_;
        return sol_.status;
    }

    const lp::LpSolution& solution() const noexcept { return sol_; }
    long total_pivots() const noexcept { return pivots_; }
    int solves() const noexcept { return solves_; }

    double value(int col) const { return col < static_cast<int>(x_.size()) ? x_[col] : 0.0; }
    double row_dual(int r) const { return sol_.duals[r]; }
    double lp_objective() const noexcept { return sol_.objective; }

    Vec beta() const
    {
        Vec b = Vec::Zero(d_->p());
        for (int j : features_) b[j] = value(plus_col(j)) - value(minus_col(j));
        return b;
    }
    double beta0() const { return value(beta0_col_); }

    /// pi over all n samples, zero off the active set.
    Vec pi_full() const
    {
        Vec pi = Vec::Zero(d_->n());
        for (int i : samples_) pi[i] = sol_.duals[row_of_sample_[i]];
        return pi;
    }

    /// Largest |(1 - pi_i) xi_i| and |pi_i (xi_i + y_i(x_i^T beta + b0) - 1)| over active samples.
    double complementary_slackness_residual() const
    {
        double worst = 0.0;
        const auto& act = sol_.row_activity;
        for (int i : samples_) {
            const int r = row_of_sample_[i];
            const double pi = sol_.duals[r];
            const double xi = value(xi_of_row_[r]);
            worst = std::max(worst, std::abs((1.0 - pi) * xi));
            worst = std::max(worst, std::abs(pi * (act[r] - 1.0)));
        }
        return worst;
    }

    /// Fills the LP-side fields of an SvmSolution.
    void export_solution(SvmSolution& s) const
    {
        s.beta = beta();
        s.beta0 = beta0();
        s.samples = detail::sorted_unique(samples_);
        s.features = detail::sorted_unique(features_);
        s.xi.clear();
        s.duals.clear();
        for (int i : s.samples) {
            const int r = row_of_sample_[i];
            s.xi.push_back(value(xi_of_row_[r]));
            s.duals.push_back(sol_.duals[r]);
        }
        s.lp_objective = sol_.objective;
        s.diag.active_samples = static_cast<int>(samples_.size());
        s.diag.active_features = static_cast<int>(features_.size());
        s.diag.pivots = pivots_;
        s.diag.lp_status = sol_.status;
        s.diag.cs_residual = complementary_slackness_residual();
    }

private:
    int add_row_internal(const lp::LpRow& row)
    {
        if (basis_.empty()) return model_.add_row(row);
        basis_ = lp::add_rows(model_, std::span(&row, 1), std::move(basis_));
        return model_.num_rows() - 1;
    }

    int add_column_internal(lp::LpColumn col)
    {
        int j;
        if (basis_.empty()) {
            j = model_.add_column(std::move(col));
        } else {
            basis_ = lp::add_columns(model_, std::span(&col, 1), std::move(basis_));
            j = model_.num_cols() - 1;
        }
        x_.resize(model_.num_cols(), 0.0);
        x_[j] = model_.column(j).lower > -lp::kInf ? model_.column(j).lower : 0.0;
        return j;
    }

    std::size_t find_basic(int var) const
    {
        for (std::size_t k = basis_.basic.size(); k-- > 0;)
            if (basis_.basic[k] == var) return k;
        throw FactorizationError("HingeModel: expected basic variable missing from basis");
    }

    const Dataset* d_;
    double feature_cost_;
    lp::LpModel model_;
    lp::Basis basis_;
    lp::LpSolution sol_;
    std::vector<double> x_;
    std::vector<int> row_of_sample_;
    std::vector<int> plus_of_feature_;
    std::vector<int> xi_of_row_;
    std::vector<int> samples_;
    std::vector<int> features_;
    int beta0_col_ = 0;
    long pivots_ = 0;
    int solves_ = 0;
};

} // namespace cpsvm
