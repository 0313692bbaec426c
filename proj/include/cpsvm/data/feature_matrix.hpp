#pragma once
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>
#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cpsvm/error.hpp>

namespace cpsvm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/**
 * n x p design matrix held either densely or as compressed sparse columns.
 *
 * Every cutting-plane operation on the data is a column scan (pricing,
 * model construction) or a matrix-vector product, so both layouts are
 * column-major. Rows are only touched through products.
 */
class FeatureMatrix
{
public:
    FeatureMatrix() = default;
    explicit FeatureMatrix(Mat dense) : dense_(std::move(dense)), sparse_(false) {}
    explicit FeatureMatrix(SpMat sparse) : sp_(std::move(sparse)), sparse_(true)
    {
        sp_.makeCompressed();
    }

    bool is_sparse() const noexcept { return sparse_; }
    Eigen::Index rows() const noexcept { return sparse_ ? sp_.rows() : dense_.rows(); }
    Eigen::Index cols() const noexcept { return sparse_ ? sp_.cols() : dense_.cols(); }

    const Mat& dense() const { return dense_; }
    const SpMat& sparse() const { return sp_; }

    /// Calls f(row, value) for every stored entry of column j.
    template <class F>
    void for_each_in_col(Eigen::Index j, F&& f) const
    {
        if (sparse_) {
            for (SpMat::InnerIterator it(sp_, j); it; ++it) f(it.row(), it.value());
        } else {
            const double* c = dense_.col(j).data();
            for (Eigen::Index i = 0; i < dense_.rows(); ++i) f(i, c[i]);
        }
    }

    double col_dot(Eigen::Index j, const Vec& v) const
    {
        if (sparse_) return sp_.col(j).dot(v);
        return dense_.col(j).dot(v);
    }

    double col_l1(Eigen::Index j) const
    {
        if (sparse_) {
            double s = 0;
            for (SpMat::InnerIterator it(sp_, j); it; ++it) s += std::abs(it.value());
            return s;
        }
        return dense_.col(j).lpNorm<1>();
    }

    double col_norm(Eigen::Index j) const
    {
        if (sparse_) return sp_.col(j).norm();
        return dense_.col(j).norm();
    }

    void scale_col(Eigen::Index j, double s)
    {
        if (sparse_) {
            for (SpMat::InnerIterator it(sp_, j); it; ++it) it.valueRef() *= s;
        } else {
            dense_.col(j) *= s;
        }
    }

    double coeff(Eigen::Index i, Eigen::Index j) const
    {
        return sparse_ ? sp_.coeff(i, j) : dense_(i, j);
    }

    Vec times(const Vec& beta) const
    {
        if (sparse_) return sp_ * beta;
        return dense_ * beta;
    }

    Vec transpose_times(const Vec& v) const
    {
        if (sparse_) return sp_.transpose() * v;
        return dense_.transpose() * v;
    }

    /// X restricted to the given columns (in the given order).
    FeatureMatrix select_cols(std::span<const int> cols) const
    {
        if (sparse_) {
            std::vector<Eigen::Triplet<double>> trip;
            for (std::size_t k = 0; k < cols.size(); ++k)
                for (SpMat::InnerIterator it(sp_, cols[k]); it; ++it)
                    trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(k), it.value());
            SpMat out(rows(), static_cast<Eigen::Index>(cols.size()));
            out.setFromTriplets(trip.begin(), trip.end());
            return FeatureMatrix(std::move(out));
        }
        Mat out(rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) out.col(k) = dense_.col(cols[k]);
        return FeatureMatrix(std::move(out));
    }

    /// X restricted to the given rows (in the given order).
    FeatureMatrix select_rows(std::span<const int> rows_sel) const
    {
        const auto m = static_cast<Eigen::Index>(rows_sel.size());
        if (sparse_) {
            std::vector<int> new_index(rows(), -1);
            for (std::size_t k = 0; k < rows_sel.size(); ++k) new_index[rows_sel[k]] = static_cast<int>(k);
            std::vector<Eigen::Triplet<double>> trip;
            for (Eigen::Index j = 0; j < cols(); ++j)
                for (SpMat::InnerIterator it(sp_, j); it; ++it)
                    if (new_index[it.row()] >= 0)
                        trip.emplace_back(new_index[it.row()], static_cast<int>(j), it.value());
            SpMat out(m, cols());
            out.setFromTriplets(trip.begin(), trip.end());
            return FeatureMatrix(std::move(out));
        }
        Mat out(m, cols());
        for (Eigen::Index k = 0; k < m; ++k) out.row(k) = dense_.row(rows_sel[k]);
        return FeatureMatrix(std::move(out));
    }

    Mat to_dense() const { return sparse_ ? Mat(sp_) : dense_; }

private:
    Mat dense_;
    SpMat sp_;
    bool sparse_ = false;
};

} // namespace cpsvm
