#pragma once
#include <cmath>
#include <vector>
#include <cpsvm/data/dataset.hpp>
#include <cpsvm/first_order/apg.hpp>
#include <cpsvm/first_order/smoothing.hpp>
#include <cpsvm/prox.hpp>

namespace cpsvm {

struct BlockCdResult : FoResult
{
    /// X beta as maintained by the incremental updates.
    Vec xb;
};

/**
 * Cyclic proximal block coordinate descent for F_tau + lambda sum_g ||beta_g||_inf.
 *
 * Each group takes a prox_linf step with constant C_g = sigma_max(X_g^T X_g)/(4 tau),
 * then the intercept takes a gradient step with constant n/(4 tau). X beta is
 * updated incrementally. A group at zero whose prox step stays at zero is
 * skipped. One trace entry per sweep; a stage stops when the sweep moved the
 * iterate by at most cfg.tol.
 */
inline BlockCdResult block_cd_group(const Dataset& d, const GroupStructure& groups, double lambda, const FoConfig& cfg,
                                    const Vec* beta_init = nullptr, double beta0_init = 0.0)
{
    cfg.validate();
    groups.validate(d.p());
    const int n = d.n(), p = d.p();
    BlockCdResult res;
    res.beta = beta_init ? *beta_init : Vec::Zero(p);
    res.beta0 = beta0_init;
    detail::require(res.beta.size() == p, "block_cd_group: initial beta has wrong length");
    res.xb = d.features.times(res.beta);

    std::vector<double> sigma(groups.size());
    for (int g = 0; g < groups.size(); ++g) sigma[g] = block_spectral_norm(d.features, groups[g]);
    const GroupLinfPenalty pen{&groups, lambda};

    Vec r(n);
    for (double tau : cfg.taus) {
        const SmoothedHinge obj(d, tau);
        auto refresh_r = [&] {
            for (int i = 0; i < n; ++i) r[i] = obj.sample_weight(1.0 - d.labels[i] * (res.xb[i] + res.beta0), d.labels[i]);
        };
        res.converged = false;
        for (int sweep = 0; sweep < cfg.max_iter; ++sweep) {
            double moved = 0.0;
            for (int g = 0; g < groups.size(); ++g) {
                if (sigma[g] == 0.0) continue;
                const auto& cols = groups[g];
                const double cg = sigma[g] / (4.0 * tau);
                refresh_r();
                const auto k = static_cast<Eigen::Index>(cols.size());
                Vec cur(k), grad(k);
                bool at_zero = true;
                for (Eigen::Index t = 0; t < k; ++t) {
                    cur[t] = res.beta[cols[t]];
                    at_zero = at_zero && cur[t] == 0.0;
                    grad[t] = -d.features.col_dot(cols[t], r);
                }
                const Vec next = prox_linf(cur - grad / cg, lambda / cg);
                const Vec delta = next - cur;
                if (at_zero && delta.isZero(0.0)) continue;
                for (Eigen::Index t = 0; t < k; ++t) {
                    if (delta[t] == 0.0) continue;
                    res.beta[cols[t]] = next[t];
                    d.features.for_each_in_col(cols[t], [&](Eigen::Index i, double v) { res.xb[i] += v * delta[t]; });
                }
                moved += delta.squaredNorm();
            }
            refresh_r();
            const double step0 = r.sum() * 4.0 * tau / n;
            res.beta0 += step0;
            moved += step0 * step0;
            res.trace.push_back(obj.value_from_xb(res.xb, res.beta0) + pen.value(res.beta));
            ++res.iterations;
            if (std::sqrt(moved) <= cfg.tol) {
                res.converged = true;
                break;
            }
        }
    }
    return res;
}

} // namespace cpsvm
