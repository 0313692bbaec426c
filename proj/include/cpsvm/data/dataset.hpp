#pragma once
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>
#include <cpsvm/data/feature_matrix.hpp>
#include <cpsvm/error.hpp>

namespace cpsvm {

/**
 * Training data (X, y) with y in {-1, +1}^n.
 * Immutable in practice: every transformation returns a new Dataset.
 */
struct Dataset
{
    FeatureMatrix features;
    Vec labels;
    /// Scale factors applied by standardize_columns (original column norms).
    std::optional<Vec> column_norms;
    /// Columns that were all zero at standardization time.
    std::vector<int> zero_columns;

    Dataset() = default;
    Dataset(FeatureMatrix x, Vec y) : features(std::move(x)), labels(std::move(y))
    {
        detail::require(features.rows() == labels.size(), "Dataset: label count does not match row count");
        for (Eigen::Index i = 0; i < labels.size(); ++i)
            if (labels[i] != 1.0 && labels[i] != -1.0)
                throw DomainError("Dataset: labels must be -1 or +1");
    }

    int n() const noexcept { return static_cast<int>(features.rows()); }
    int p() const noexcept { return static_cast<int>(features.cols()); }

    int count_positive() const
    {
        return static_cast<int>((labels.array() > 0).count());
    }
    int count_negative() const { return n() - count_positive(); }

    void require_both_classes() const
    {
        if (count_positive() == 0 || count_negative() == 0)
            throw DomainError("Dataset: both classes must be present");
    }

    /// Margins y_i (x_i^T beta + beta0).
    Vec margins(const Vec& beta, double beta0) const
    {
        Vec m = features.times(beta);
        m.array() += beta0;
        return labels.cwiseProduct(m);
    }

    double hinge_loss(const Vec& beta, double beta0) const
    {
        return (1.0 - margins(beta, beta0).array()).max(0.0).sum();
    }

    /// Rows restricted to `rows_sel`.
    Dataset subset_rows(std::span<const int> rows_sel) const
    {
        Vec y(static_cast<Eigen::Index>(rows_sel.size()));
        for (std::size_t k = 0; k < rows_sel.size(); ++k) y[k] = labels[rows_sel[k]];
        return Dataset(features.select_rows(rows_sel), std::move(y));
    }

    /// Columns restricted to `cols`; column k of the result is column cols[k].
    Dataset subset_cols(std::span<const int> cols) const
    {
        return Dataset(features.select_cols(cols), labels);
    }
};

/// Scale every nonzero column to unit L2 norm. Zero columns are left alone and listed.
inline Dataset standardize_columns(const Dataset& d)
{
    Dataset out = d;
    Vec norms(d.p());
    out.zero_columns.clear();
    for (int j = 0; j < d.p(); ++j) {
        const double nrm = d.features.col_norm(j);
        norms[j] = nrm;
        if (nrm == 0.0) {
            out.zero_columns.push_back(j);
            continue;
        }
        // exact unit columns stay bit-identical
        if (nrm != 1.0) out.features.scale_col(j, 1.0 / nrm);
    }
    if (d.column_norms) norms = norms.cwiseProduct(*d.column_norms);
    out.column_norms = std::move(norms);
    return out;
}

/// Disjoint partition of [p] into nonempty groups.
struct GroupStructure
{
    std::vector<std::vector<int>> groups;

    GroupStructure() = default;
    explicit GroupStructure(std::vector<std::vector<int>> g) : groups(std::move(g)) {}

    int size() const noexcept { return static_cast<int>(groups.size()); }
    const std::vector<int>& operator[](int g) const { return groups[g]; }

    void validate(int p) const
    {
        std::vector<char> seen(p, 0);
        int covered = 0;
        for (const auto& g : groups) {
            if (g.empty()) throw DomainError("GroupStructure: empty group");
            for (int j : g) {
                if (j < 0 || j >= p) throw DomainError("GroupStructure: feature index out of range");
                if (seen[j]) throw DomainError("GroupStructure: groups overlap at feature " + std::to_string(j));
                seen[j] = 1;
                ++covered;
            }
        }
        if (covered != p) throw DomainError("GroupStructure: groups do not cover all features");
    }

    /// group_of[j] = index of the group containing feature j.
    std::vector<int> group_of(int p) const
    {
        std::vector<int> out(p, -1);
        for (int g = 0; g < size(); ++g)
            for (int j : groups[g]) out[j] = g;
        return out;
    }

    static GroupStructure contiguous(int num_groups, int group_size)
    {
        std::vector<std::vector<int>> g(num_groups);
        for (int k = 0; k < num_groups; ++k) {
            g[k].resize(group_size);
            std::iota(g[k].begin(), g[k].end(), k * group_size);
        }
        return GroupStructure(std::move(g));
    }

    static GroupStructure singletons(int p) { return contiguous(p, 1); }
};

/// Nonincreasing nonnegative Slope weights with cached prefix sums.
class SlopeWeights
{
public:
    SlopeWeights() = default;
    explicit SlopeWeights(std::vector<double> lambdas) : lambdas_(std::move(lambdas))
    {
        for (std::size_t j = 0; j < lambdas_.size(); ++j) {
            if (!(lambdas_[j] >= 0.0) || !std::isfinite(lambdas_[j]))
                throw DomainError("SlopeWeights: weights must be finite and nonnegative");
            if (j > 0 && lambdas_[j] > lambdas_[j - 1])
                throw DomainError("SlopeWeights: weights must be nonincreasing");
        }
        prefix_.assign(lambdas_.size() + 1, 0.0);
        for (std::size_t j = 0; j < lambdas_.size(); ++j) prefix_[j + 1] = prefix_[j] + lambdas_[j];
    }

    std::size_t size() const noexcept { return lambdas_.size(); }
    /// 0-based: operator[](0) is the largest weight.
    double operator[](std::size_t j) const { return lambdas_[j]; }
    /// Weight at 0-based position j, or 0 past the end.
    double at_or_zero(std::size_t j) const { return j < lambdas_.size() ? lambdas_[j] : 0.0; }
    /// Sum of the k largest weights.
    double prefix(std::size_t k) const { return prefix_[k]; }
    const std::vector<double>& values() const noexcept { return lambdas_; }

    SlopeWeights scaled(double s) const
    {
        std::vector<double> v = lambdas_;
        for (auto& x : v) x *= s;
        return SlopeWeights(std::move(v));
    }

    /// Equal weights, reducing the Slope norm to c * L1.
    static SlopeWeights constant(std::size_t p, double c) { return SlopeWeights(std::vector<double>(p, c)); }

    /// lambda_j = 2 * base for j <= k0, base afterwards.
    static SlopeWeights two_level(std::size_t p, std::size_t k0, double base)
    {
        std::vector<double> v(p, base);
        for (std::size_t j = 0; j < std::min(k0, p); ++j) v[j] = 2.0 * base;
        return SlopeWeights(std::move(v));
    }

    /// lambda_j = sqrt(log(2p / j)) * base, j = 1..p.
    static SlopeWeights bh_log(std::size_t p, double base)
    {
        std::vector<double> v(p);
        for (std::size_t j = 1; j <= p; ++j)
            v[j - 1] = std::sqrt(std::log(2.0 * static_cast<double>(p) / static_cast<double>(j))) * base;
        return SlopeWeights(std::move(v));
    }

private:
    std::vector<double> lambdas_;
    std::vector<double> prefix_;
};

/// Smallest lambda at which beta = 0 is optimal for the L1 problem: max_j ||X_j||_1.
inline double lambda_max_l1(const Dataset& d)
{
    double best = 0.0;
    for (int j = 0; j < d.p(); ++j) best = std::max(best, d.features.col_l1(j));
    return best;
}

/// Group analogue: max_g sum_{j in g} ||X_j||_1.
inline double lambda_max_group(const Dataset& d, const GroupStructure& groups)
{
    double best = 0.0;
    for (const auto& g : groups.groups) {
        double s = 0.0;
        for (int j : g) s += d.features.col_l1(j);
        best = std::max(best, s);
    }
    return best;
}

/**
 * Dual solution of the L1 problem for lambda >= lambda_max:
 * the majority class gets N_minority / N_majority, the minority class gets 1.
 */
inline Vec lambda_max_duals(const Dataset& d)
{
    d.require_both_classes();
    const double np = d.count_positive();
    const double nm = d.count_negative();
    Vec pi(d.n());
    for (int i = 0; i < d.n(); ++i) {
        const bool pos = d.labels[i] > 0;
        if (np >= nm) pi[i] = pos ? nm / np : 1.0;
        else pi[i] = pos ? 1.0 : np / nm;
    }
    return pi;
}

/// Optimal objective when beta = 0: min over beta0 of sum_i (1 - y_i beta0)_+ = 2 min(N+, N-).
inline double zero_model_objective(const Dataset& d)
{
    return 2.0 * std::min(d.count_positive(), d.count_negative());
}

/// Intercept attaining zero_model_objective.
inline double zero_model_intercept(const Dataset& d)
{
    const int diff = d.count_positive() - d.count_negative();
    return diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
}

} // namespace cpsvm
