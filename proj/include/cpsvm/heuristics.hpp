#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <thread>
#include <vector>
#include <cpsvm/data/dataset.hpp>
#include <cpsvm/first_order/apg.hpp>
#include <cpsvm/svm/common.hpp>

namespace cpsvm {

/// The m columns with largest |x_j^T y| (ties by index), sorted.
inline std::vector<int> correlation_screen(const Dataset& d, int m)
{
    detail::require(m >= 1 && m <= d.p(), "correlation_screen: m must lie in [1, p]");
    const Vec c = d.features.transpose_times(d.labels);
    std::vector<std::pair<double, int>> cand;
    cand.reserve(d.p());
    for (int j = 0; j < d.p(); ++j) cand.emplace_back(std::abs(c[j]), j);
    return detail::top_by_score(std::move(cand), m);
}

/// The m groups with largest sum_{j in g} |x_j^T y|, sorted.
inline std::vector<int> group_correlation_screen(const Dataset& d, const GroupStructure& groups, int m)
{
    detail::require(m >= 1 && m <= groups.size(), "group_correlation_screen: m must lie in [1, G]");
    groups.validate(d.p());
    const Vec c = d.features.transpose_times(d.labels);
    std::vector<std::pair<double, int>> cand;
    cand.reserve(groups.size());
    for (int g = 0; g < groups.size(); ++g) {
        double s = 0.0;
        for (int j : groups[g]) s += std::abs(c[j]);
        cand.emplace_back(s, g);
    }
    return detail::top_by_score(std::move(cand), m);
}

struct SubsampleConfig
{
    int n0 = 0;          ///< subset size; 0 means min(n, 10 p)
    double mu_tol = 1e-1;
    int q_max = 0;       ///< 0 means max(1, n / n0)
    int jobs = 1;
    std::uint64_t seed = 0;
    /// Fit each subset on its `screen` most correlated columns only; 0 fits all columns.
    int screen = 0;
};

struct SubsampleFit
{
    Vec beta;
    double beta0 = 0.0;
    int fits = 0;
    /// ||avg_Q - avg_{Q-1}|| at the last step (0 when only one fit ran).
    double last_change = 0.0;
    bool converged = false;
};

/// Subset j: n0 distinct rows drawn from its own stream seeded by (seed, j), returned sorted.
inline std::vector<int> draw_subset(int n, int n0, std::uint64_t seed, int j)
{
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(j)};
    std::mt19937_64 rng(ss);
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::vector<int> out;
    out.reserve(n0);
    std::sample(all.begin(), all.end(), std::back_inserter(out), n0, rng);
    return out;
}

/**
 * Running average of fits on random row subsets. `fit(sub, scale)` solves the
 * subsample problem with the penalty multiplied by scale = n0 / n.
 * Fits are computed in batches of cfg.jobs threads but averaged in index
 * order, so the result does not depend on the degree of parallelism.
 */
inline SubsampleFit subsample_average(const Dataset& d, const SubsampleConfig& cfg,
                                      const std::function<FoResult(const Dataset&, double)>& fit)
{
    const int n = d.n();
    const int n0 = cfg.n0 > 0 ? cfg.n0 : std::min(n, 10 * d.p());
    detail::require(n0 <= n, "subsample_average: n0 exceeds n");
    const int q_max = cfg.q_max > 0 ? cfg.q_max : std::max(1, n / n0);
    const int jobs = std::max(1, cfg.jobs);
    const double scale = static_cast<double>(n0) / n;

    SubsampleFit out;
    Vec sum = Vec::Zero(d.p());
    double sum0 = 0.0;
    Vec prev_avg;
    double prev_avg0 = 0.0;
    std::vector<FoResult> batch;
    for (int start = 0; start < q_max && !out.converged; start += jobs) {
        const int count = std::min(jobs, q_max - start);
        batch.assign(count, FoResult{});
        auto work = [&](int k) {
            const Dataset sub = d.subset_rows(draw_subset(n, n0, cfg.seed, start + k));
            batch[k] = fit(sub, scale);
        };
        if (count == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (int k = 0; k < count; ++k) pool.emplace_back(work, k);
            for (auto& t : pool) t.join();
        }
        for (int k = 0; k < count; ++k) {
            sum += batch[k].beta;
            sum0 += batch[k].beta0;
            ++out.fits;
            const Vec avg = sum / out.fits;
            const double avg0 = sum0 / out.fits;
            if (out.fits > 1) {
                out.last_change = std::sqrt((avg - prev_avg).squaredNorm() + (avg0 - prev_avg0) * (avg0 - prev_avg0));
                if (out.last_change <= cfg.mu_tol) out.converged = true;
            }
            prev_avg = avg;
            prev_avg0 = avg0;
            if (out.converged) break;
        }
    }
    out.beta = prev_avg;
    out.beta0 = prev_avg0;
    return out;
}

/// L1 instance: each subset is fitted by the smoothed proximal gradient at lambda * n0 / n.
inline SubsampleFit subsample_average_fit(const Dataset& d, double lambda, const SubsampleConfig& cfg,
                                          const FoConfig& fo = {})
{
    detail::require(lambda >= 0.0, "subsample_average_fit: lambda must be nonnegative");
    return subsample_average(d, cfg, [&](const Dataset& sub, double scale) {
        const L1Penalty pen{lambda * scale};
        if (cfg.screen <= 0 || cfg.screen >= sub.p()) return accelerated_prox_gradient(sub, pen, fo);
        const auto cols = correlation_screen(sub, cfg.screen);
        FoResult r = accelerated_prox_gradient(sub.subset_cols(cols), pen, fo);
        Vec full = Vec::Zero(sub.p());
        for (std::size_t k = 0; k < cols.size(); ++k) full[cols[k]] = r.beta[k];
        r.beta = std::move(full);
        return r;
    });
}

/// Up to cap nonzero coefficients of largest |beta_j| (ties by index), sorted.
inline std::vector<int> init_columns_from_beta(const Vec& beta, int cap)
{
    detail::require(cap >= 1, "init_columns_from_beta: cap must be at least 1");
    std::vector<std::pair<double, int>> cand;
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        if (beta[j] != 0.0) cand.emplace_back(std::abs(beta[j]), static_cast<int>(j));
    return detail::top_by_score(std::move(cand), cap);
}

/// Samples with positive hinge loss at (beta, beta0).
inline std::vector<int> init_constraints_from_beta(const Dataset& d, const Vec& beta, double beta0)
{
    detail::require(beta.size() == d.p(), "init_constraints_from_beta: beta has wrong length");
    const Vec m = d.margins(beta, beta0);
    std::vector<int> out;
    for (int i = 0; i < d.n(); ++i)
        if (1.0 - m[i] > 0.0) out.push_back(i);
    return out;
}

/// Groups containing at least one nonzero coefficient, the cap of largest ||beta_g||_inf.
inline std::vector<int> init_groups_from_beta(const GroupStructure& groups, const Vec& beta, int cap)
{
    detail::require(cap >= 1, "init_groups_from_beta: cap must be at least 1");
    std::vector<std::pair<double, int>> cand;
    for (int g = 0; g < groups.size(); ++g) {
        double m = 0.0;
        for (int j : groups[g]) m = std::max(m, std::abs(beta[j]));
        if (m > 0.0) cand.emplace_back(m, g);
    }
    return detail::top_by_score(std::move(cand), cap);
}

} // namespace cpsvm
