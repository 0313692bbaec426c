#pragma once
#include <cmath>
#include <span>
#include <vector>
#include <cpsvm/data/dataset.hpp>
#include <cpsvm/first_order/smoothing.hpp>
#include <cpsvm/prox.hpp>

namespace cpsvm {

struct FoConfig
{
    int max_iter = 200;
    double tol = 1e-3;
    /// Smoothing schedule; more than one value runs warm-started continuation.
    std::vector<double> taus{0.2};
    bool accelerated = true;

    void validate() const
    {
        detail::require(max_iter >= 1, "FoConfig: max_iter must be at least 1");
        detail::require(tol > 0.0, "FoConfig: tol must be positive");
        detail::require(!taus.empty(), "FoConfig: empty tau schedule");
        for (double t : taus) detail::require(t > 0.0, "FoConfig: tau must be positive");
    }

    /// tau0, tau0 r, ..., tau0 r^(count-1).
    static std::vector<double> geometric_taus(double tau0 = 0.2, double ratio = 0.7, int count = 5)
    {
        std::vector<double> t(count);
        for (int k = 0; k < count; ++k) t[k] = tau0 * std::pow(ratio, k);
        return t;
    }
};

struct FoResult
{
    Vec beta;
    double beta0 = 0.0;
    /// Smoothed composite objective after every step (iteration or sweep).
    std::vector<double> trace;
    int iterations = 0;
    bool converged = false;
};

struct L1Penalty
{
    double lambda;
    double value(const Vec& b) const { return lambda * b.lpNorm<1>(); }
    Vec prox(const Vec& v, double step) const { return soft_threshold(v, lambda * step); }
};

struct GroupLinfPenalty
{
    const GroupStructure* groups;
    double lambda;

    double value(const Vec& b) const
    {
        double s = 0.0;
        for (const auto& g : groups->groups) {
            double m = 0.0;
            for (int j : g) m = std::max(m, std::abs(b[j]));
            s += m;
        }
        return lambda * s;
    }

    Vec prox(const Vec& v, double step) const
    {
        Vec out(v.size());
        for (const auto& g : groups->groups) {
            Vec block(static_cast<Eigen::Index>(g.size()));
            for (std::size_t k = 0; k < g.size(); ++k) block[k] = v[g[k]];
            const Vec r = prox_linf(block, lambda * step);
            for (std::size_t k = 0; k < g.size(); ++k) out[g[k]] = r[k];
        }
        return out;
    }
};

struct SlopePenalty
{
    std::vector<double> weights;

    double value(const Vec& b) const { return slope_norm(b, weights); }

    Vec prox(const Vec& v, double step) const
    {
        std::vector<double> w(weights.begin(), weights.begin() + v.size());
        for (auto& x : w) x *= step;
        return prox_slope(v, w);
    }
};

/**
 * Proximal gradient (FISTA momentum when cfg.accelerated) on F_tau + penalty,
 * with fixed step 1/L, L = lipschitz(F_tau). The intercept takes a plain
 * gradient step. Each tau stage restarts the momentum at q = 1. Stops a stage
 * when successive iterates differ by at most cfg.tol.
 */
template <class Penalty>
FoResult accelerated_prox_gradient(const Dataset& d, const Penalty& pen, const FoConfig& cfg,
                                   const Vec* beta_init = nullptr, double beta0_init = 0.0)
{
    cfg.validate();
    const int p = d.p();
    FoResult res;
    res.beta = beta_init ? *beta_init : Vec::Zero(p);
    res.beta0 = beta0_init;
    detail::require(res.beta.size() == p, "accelerated_prox_gradient: initial beta has wrong length");
    const double sigma = augmented_spectral_bound(d.features);

    for (double tau : cfg.taus) {
        const SmoothedHinge obj(d, tau);
        const double lip = 1.01 * sigma / (4.0 * tau);
        if (lip == 0.0) break;
        const double step = 1.0 / lip;

        // prev: last prox iterate; (a, a0): extrapolated point
        Vec prev = res.beta, a = res.beta;
        double prev0 = res.beta0, a0 = res.beta0;
        Vec x_prev = d.features.times(prev), x_a = x_prev;
        double q = 1.0;
        res.converged = false;
        for (int it = 0; it < cfg.max_iter; ++it) {
            const auto vg = obj.value_grad_from_xb(x_a, a0);
            Vec next = pen.prox(a - step * vg.grad.head(p), step);
            const double next0 = a0 - step * vg.grad[p];
            Vec x_next = d.features.times(next);
            res.trace.push_back(obj.value_from_xb(x_next, next0) + pen.value(next));
            ++res.iterations;

            const double change = std::sqrt((next - prev).squaredNorm() + (next0 - prev0) * (next0 - prev0));
            const double q_next = cfg.accelerated ? 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * q * q)) : 1.0;
            const double mom = (q - 1.0) / q_next;
            a = next + mom * (next - prev);
            a0 = next0 + mom * (next0 - prev0);
            x_a = x_next + mom * (x_next - x_prev);
            prev = std::move(next);
            prev0 = next0;
            x_prev = std::move(x_next);
            q = q_next;
            if (change <= cfg.tol) {
                res.converged = true;
                break;
            }
        }
        res.beta = prev;
        res.beta0 = prev0;
    }
    return res;
}

} // namespace cpsvm
