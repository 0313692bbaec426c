#pragma once
#include <algorithm>
#include <cmath>
#include <Eigen/Eigenvalues>
#include <cpsvm/data/dataset.hpp>
#include <cpsvm/error.hpp>

namespace cpsvm {

/**
 * Nesterov-smoothed hinge loss
 *   F(beta, beta0) = sum_i [ (z_i + w_i z_i)/2 - (tau/2) w_i^2 ],
 *   z_i = 1 - y_i (x_i^T beta + beta0),  w_i = clip(z_i / (2 tau), -1, 1).
 * Gradients are with respect to (beta, beta0) in R^{p+1}.
 */
class SmoothedHinge
{
public:
    struct ValueGrad
    {
        double value = 0.0;
        Vec grad;   ///< length p + 1, intercept last
    };

    SmoothedHinge(const Dataset& d, double tau) : d_(&d), tau_(tau)
    {
        if (!(tau > 0.0)) throw DomainError("SmoothedHinge: tau must be positive");
    }

    const Dataset& data() const noexcept { return *d_; }
    double tau() const noexcept { return tau_; }

    /// Per-sample smoothed loss of z = 1 - y (x^T beta + beta0).
    double sample_value(double z) const
    {
        const double w = std::clamp(z / (2.0 * tau_), -1.0, 1.0);
        return 0.5 * (z + w * z) - 0.5 * tau_ * w * w;
    }

    /// 0.5 (1 + w_i) y_i, the weight each sample carries in the negative gradient.
    double sample_weight(double z, double y) const
    {
        return 0.5 * (1.0 + std::clamp(z / (2.0 * tau_), -1.0, 1.0)) * y;
    }

    /// Value given xb = X beta.
    double value_from_xb(const Vec& xb, double beta0) const
    {
        double v = 0.0;
        for (Eigen::Index i = 0; i < xb.size(); ++i) v += sample_value(1.0 - d_->labels[i] * (xb[i] + beta0));
        return v;
    }

    /// Value and gradient given xb = X beta; also fills r_i = 0.5 (1 + w_i) y_i.
    ValueGrad value_grad_from_xb(const Vec& xb, double beta0, Vec* r_out = nullptr) const
    {
        const int n = d_->n();
        Vec r(n);
        double v = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = 1.0 - d_->labels[i] * (xb[i] + beta0);
            v += sample_value(z);
            r[i] = sample_weight(z, d_->labels[i]);
        }
        ValueGrad out;
        out.value = v;
        out.grad.resize(d_->p() + 1);
        out.grad.head(d_->p()) = -d_->features.transpose_times(r);
        out.grad[d_->p()] = -r.sum();
        if (r_out) *r_out = std::move(r);
        return out;
    }

    ValueGrad value_grad(const Vec& beta, double beta0) const
    {
        return value_grad_from_xb(d_->features.times(beta), beta0);
    }

private:
    const Dataset* d_;
    double tau_;
};

inline SmoothedHinge::ValueGrad smoothed_value_grad(const SmoothedHinge& obj, const Vec& beta, double beta0)
{
    return obj.value_grad(beta, beta0);
}

/**
 * Largest eigenvalue of [X 1]^T [X 1] by power iteration (relative change
 * 1e-6, at most 1e4 steps); falls back to the squared Frobenius norm.
 */
inline double augmented_spectral_bound(const FeatureMatrix& x)
{
    const Eigen::Index n = x.rows(), p = x.cols();
    Vec v = Vec::Ones(p + 1) / std::sqrt(static_cast<double>(p + 1));
    double est = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Vec u = x.times(v.head(p));
        u.array() += v[p];
        Vec w(p + 1);
        w.head(p) = x.transpose_times(u);
        w[p] = u.sum();
        const double nrm = w.norm();
        if (nrm == 0.0) return 0.0;
        const double next = v.dot(w);
        v = w / nrm;
        if (it > 0 && std::abs(next - est) <= 1e-6 * std::abs(next)) return std::max(next, nrm);
        est = next;
    }
    double fro = static_cast<double>(n);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double c = x.col_norm(j);
        fro += c * c;
    }
    return fro;
}

/// sigma_max(X~^T X~) / (4 tau), inflated by 1% so it is a safe upper bound.
inline double lipschitz(const SmoothedHinge& obj)
{
    return 1.01 * augmented_spectral_bound(obj.data().features) / (4.0 * obj.tau());
}

/// sigma_max(X_g^T X_g) for a block of columns, exact via a small symmetric eigensolve.
inline double block_spectral_norm(const FeatureMatrix& x, const std::vector<int>& cols)
{
    const auto k = static_cast<Eigen::Index>(cols.size());
    Mat gram(k, k);
    if (x.is_sparse()) {
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = a; b < k; ++b) {
                const double v = x.sparse().col(cols[a]).dot(x.sparse().col(cols[b]));
                gram(a, b) = gram(b, a) = v;
            }
    } else {
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = a; b < k; ++b) {
                const double v = x.dense().col(cols[a]).dot(x.dense().col(cols[b]));
                gram(a, b) = gram(b, a) = v;
            }
    }
    if (k == 1) return gram(0, 0);
    Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

} // namespace cpsvm
