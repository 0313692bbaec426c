#pragma once
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>
#include <cpsvm/data/dataset.hpp>
#include <cpsvm/error.hpp>
#include <cpsvm/lp/simplex.hpp>

namespace cpsvm {

/// Active samples I and features J of a restricted model, both sorted.
struct WorkingSet
{
    std::vector<int> samples;
    std::vector<int> features;

    static WorkingSet all(const Dataset& d)
    {
        WorkingSet ws;
        ws.samples.resize(d.n());
        ws.features.resize(d.p());
        std::iota(ws.samples.begin(), ws.samples.end(), 0);
        std::iota(ws.features.begin(), ws.features.end(), 0);
        return ws;
    }
};

struct CutgenConfig
{
    /// Pricing tolerance: columns need reduced cost < -epsilon, samples violation > epsilon.
    double epsilon = 1e-2;
    int max_outer = 1000;
    /// Largest number of columns (or groups) added per round; 0 means no limit.
    int max_added_per_round = 0;
    /// Same for samples.
    int max_samples_per_round = 0;
    lp::SimplexOptions lp{};

    void validate() const
    {
        detail::require(epsilon > 0.0, "CutgenConfig: epsilon must be positive");
        detail::require(max_outer >= 1, "CutgenConfig: max_outer must be at least 1");
        detail::require(max_added_per_round >= 0 && max_samples_per_round >= 0,
                        "CutgenConfig: caps must be nonnegative");
    }
};

struct Diagnostics
{
    int outer_rounds = 0;
    int active_samples = 0;
    int active_features = 0;
    int active_groups = 0;
    int cuts = 0;
    /// Columns added by the final dual-norm check after the single-column rule found none (Slope only).
    int certificate_additions = 0;
    long pivots = 0;
    double seconds = 0.0;
    /// Every pricing pass over the full index sets came back empty at epsilon.
    bool certified = false;
    lp::LpStatus lp_status = lp::LpStatus::Optimal;
    /// Largest reduced-cost violation over all columns/groups (<= 0 means dual feasible).
    double dual_violation = 0.0;
    /// Largest constraint violation 1 - y_i(x_i^T beta + beta0) - xi_i over all samples.
    double primal_violation = 0.0;
    /// Largest complementary slackness residual over active samples.
    double cs_residual = 0.0;
};

struct SvmSolution
{
    Vec beta;                   ///< length p, zero outside the active features
    double beta0 = 0.0;
    std::vector<double> xi;     ///< slacks of the active samples, aligned with samples
    std::vector<double> duals;  ///< pi of the active samples, aligned with samples
    std::vector<int> samples;
    std::vector<int> features;
    std::vector<int> groups;    ///< active groups (group models only)
    double lp_objective = 0.0;
    /// Objective recomputed from (beta, beta0) on the full data.
    double objective = 0.0;
    std::optional<double> eta;  ///< epigraph variable (Slope only)
    Diagnostics diag;
};

/// sum_i (1 - y_i(x_i^T beta + beta0))_+ + lambda ||beta||_1 on the full data.
inline double l1_objective(const Dataset& d, const Vec& beta, double beta0, double lambda)
{
    return d.hinge_loss(beta, beta0) + lambda * beta.lpNorm<1>();
}

/// Mean over replications of (f - f*) / f*, in percent.
inline double ara(std::span<const double> f, std::span<const double> best)
{
    detail::require(f.size() == best.size() && !f.empty(), "ara: need matching nonempty inputs");
    double s = 0.0;
    for (std::size_t r = 0; r < f.size(); ++r) {
        if (!(best[r] > 0.0)) throw DomainError("ara: reference objective must be positive");
        s += (f[r] - best[r]) / best[r];
    }
    return 100.0 * s / static_cast<double>(f.size());
}

namespace detail {

inline bool is_sorted_unique(const std::vector<int>& v)
{
    for (std::size_t k = 1; k < v.size(); ++k)
        if (v[k] <= v[k - 1]) return false;
    return true;
}

inline std::vector<int> sorted_unique(std::vector<int> v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

/// Keep the `cap` entries of largest score (ties by index); cap 0 keeps all. Returns sorted indices.
inline std::vector<int> top_by_score(std::vector<std::pair<double, int>> cand, int cap)
{
    if (cap > 0 && static_cast<int>(cand.size()) > cap) {
        std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
            return a.first > b.first || (a.first == b.first && a.second < b.second);
        });
        cand.resize(cap);
    }
    std::vector<int> out;
    out.reserve(cand.size());
    for (const auto& c : cand) out.push_back(c.second);
    std::sort(out.begin(), out.end());
    return out;
}

class Stopwatch
{
public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

} // namespace detail
} // namespace cpsvm
