#pragma once
#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>
#include <cpsvm/data/dataset.hpp>
#include <cpsvm/error.hpp>

namespace cpsvm {

/// sign(v) (|v| - mu)_+, componentwise.
inline Vec soft_threshold(const Vec& v, double mu)
{
    if (!(mu >= 0.0)) throw DomainError("soft_threshold: mu must be nonnegative");
    Vec out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]) - mu;
        out[i] = a > 0.0 ? std::copysign(a, v[i]) : 0.0;
    }
    return out;
}

namespace detail {

// Indices ordering |v| decreasing; ties keep the original order.
inline std::vector<int> order_by_magnitude(const Vec& v)
{
    std::vector<int> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(v[a]) > std::abs(v[b]); });
    return idx;
}

} // namespace detail

/// Euclidean projection onto {u : ||u||_1 <= r} by sorting magnitudes and shifting.
inline Vec project_l1_ball(const Vec& v, double r)
{
    if (!(r >= 0.0)) throw DomainError("project_l1_ball: radius must be nonnegative");
    if (v.lpNorm<1>() <= r) return v;
    if (r == 0.0) return Vec::Zero(v.size());
    std::vector<double> u(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) u[i] = std::abs(v[i]);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumsum += u[j];
        const double t = (cumsum - r) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) theta = t;
        else break;
    }
    Vec out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]) - theta;
        out[i] = a > 0.0 ? std::copysign(a, v[i]) : 0.0;
    }
    return out;
}

/// prox of mu ||.||_inf, through the Moreau decomposition with the L1 ball.
inline Vec prox_linf(const Vec& v, double mu)
{
    if (!(mu >= 0.0)) throw DomainError("prox_linf: mu must be nonnegative");
    if (mu == 0.0) return v;
    return v - project_l1_ball(v, mu);
}

/**
 * prox of sum_j w_j |u|_(j) for nonincreasing w >= 0.
 *
 * Sort |v| decreasing, fit a nonincreasing sequence to |v|_(j) - w_j by
 * pool-adjacent-violators, clip at zero, then restore order and signs.
 * Only the first v.size() weights are used.
 */
inline Vec prox_slope(const Vec& v, std::span<const double> w)
{
    const auto p = static_cast<std::size_t>(v.size());
    if (w.size() < p) throw DomainError("prox_slope: fewer weights than coordinates");
    for (std::size_t j = 0; j < p; ++j) {
        if (!(w[j] >= 0.0)) throw DomainError("prox_slope: weights must be nonnegative");
        if (j > 0 && w[j] > w[j - 1]) throw DomainError("prox_slope: weights must be nonincreasing");
    }
    const auto order = detail::order_by_magnitude(v);

    // blocks of the pooled fit: start index, length, sum
    std::vector<std::size_t> start, len;
    std::vector<double> sum;
    for (std::size_t k = 0; k < p; ++k) {
        start.push_back(k);
        len.push_back(1);
        sum.push_back(std::abs(v[order[k]]) - w[k]);
        while (sum.size() > 1) {
            const std::size_t b = sum.size() - 1;
            if (sum[b - 1] / len[b - 1] > sum[b] / len[b]) break;
            sum[b - 1] += sum[b];
            len[b - 1] += len[b];
            sum.pop_back();
            len.pop_back();
            start.pop_back();
        }
    }
    Vec out = Vec::Zero(v.size());
    for (std::size_t b = 0; b < sum.size(); ++b) {
        const double val = std::max(0.0, sum[b] / len[b]);
        if (val == 0.0) continue;
        for (std::size_t k = start[b]; k < start[b] + len[b]; ++k) {
            const int i = order[k];
            out[i] = std::copysign(val, v[i]);
        }
    }
    return out;
}

inline Vec prox_slope(const Vec& v, const SlopeWeights& w, double mu = 1.0)
{
    if (!(mu >= 0.0)) throw DomainError("prox_slope: mu must be nonnegative");
    if (mu == 1.0) return prox_slope(v, std::span<const double>(w.values()));
    std::vector<double> scaled(w.values());
    for (auto& x : scaled) x *= mu;
    return prox_slope(v, std::span<const double>(scaled));
}

/// sum_j w_j |beta|_(j) with |beta| sorted decreasing.
inline double slope_norm(const Vec& beta, std::span<const double> w)
{
    if (w.size() < static_cast<std::size_t>(beta.size())) throw DomainError("slope_norm: fewer weights than coordinates");
    std::vector<double> a(static_cast<std::size_t>(beta.size()));
    for (Eigen::Index i = 0; i < beta.size(); ++i) a[i] = std::abs(beta[i]);
    std::sort(a.begin(), a.end(), std::greater<>());
    double s = 0.0;
    for (std::size_t j = 0; j < a.size() && a[j] > 0.0; ++j) s += w[j] * a[j];
    return s;
}

inline double slope_norm(const Vec& beta, const SlopeWeights& w)
{
    return slope_norm(beta, std::span<const double>(w.values()));
}

} // namespace cpsvm
