#pragma once
#include <algorithm>
#include <optional>
#include <vector>
#include <cpsvm/data/dataset.hpp>
#include <cpsvm/prox.hpp>
#include <cpsvm/svm/l1_svm.hpp>

namespace cpsvm {

/// Epigraph cuts over a column set; cuts[l][k] is the weight of columns[k] in cut l.
struct CutPool
{
    std::vector<int> columns;
    std::vector<std::vector<double>> cuts;

    int size() const noexcept { return static_cast<int>(cuts.size()); }
    bool empty() const noexcept { return cuts.empty(); }
};

struct SlopeConfig : CutgenConfig
{
    /// Guard on the pool size; 0 selects 10 p.
    int max_cuts = 0;

    SlopeConfig() { max_added_per_round = 10; }
};

/// sum_i hinge + sum_j lambda_j |beta|_(j) on the full data.
inline double slope_objective(const Dataset& d, const Vec& beta, double beta0, const SlopeWeights& w)
{
    return d.hinge_loss(beta, beta0) + slope_norm(beta, w);
}

/// Weights assigned in decreasing order of |beta| (ties by index): the cut that is tight at beta.
inline std::vector<double> tight_cut(const Vec& beta, const SlopeWeights& w)
{
    const auto order = detail::order_by_magnitude(beta);
    std::vector<double> cut(beta.size());
    for (std::size_t r = 0; r < order.size(); ++r) cut[order[r]] = w.at_or_zero(r);
    return cut;
}

/// A violated cut at (beta, eta), or nothing when eta + epsilon >= slope_norm(beta).
inline std::optional<std::vector<double>> separate_cut(const Vec& beta, double eta, const SlopeWeights& w, double epsilon)
{
    if (eta + epsilon >= slope_norm(beta, w)) return std::nullopt;
    return tight_cut(beta, w);
}

/// largest over k of (sum of the k largest |q_j|) - (lambda_1 + ... + lambda_k).
inline double slope_dual_violation(const Vec& q, const SlopeWeights& w)
{
    std::vector<double> a(q.size());
    for (Eigen::Index j = 0; j < q.size(); ++j) a[j] = std::abs(q[j]);
    std::sort(a.begin(), a.end(), std::greater<>());
    double s = 0.0, worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < a.size(); ++k) {
        s += a[k];
        worst = std::max(worst, s - w.prefix(k + 1));
    }
    return worst;
}

/**
 * Columns outside J with |q_j| >= lambda_{|J|+1} + epsilon, in decreasing |q_j|
 * (ties by index), at most cap of them (0 = all). Order matters: the k-th
 * column receives lambda_{|J|+k} in every existing cut.
 */
inline std::vector<int> price_slope_columns(const Dataset& d, const Vec& pi, const SlopeWeights& w,
                                           const std::vector<int>& J, double epsilon, int cap = 10)
{
    if (static_cast<int>(J.size()) >= d.p()) return {};
    std::vector<char> active(d.p(), 0);
    for (int j : J) active[j] = 1;
    const Vec q = feature_correlations(d, pi);
    const double threshold = w.at_or_zero(J.size()) + epsilon;
    std::vector<std::pair<double, int>> cand;
    for (int j = 0; j < d.p(); ++j)
        if (!active[j] && std::abs(q[j]) >= threshold) cand.emplace_back(std::abs(q[j]), j);
    std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    if (cap > 0 && static_cast<int>(cand.size()) > cap) cand.resize(cap);
    std::vector<int> out;
    for (const auto& c : cand) out.push_back(c.second);
    return out;
}

/// Appends new_columns to the pool; the k-th gets lambda_{|J|+k} in every cut.
inline void extend_cuts(CutPool& pool, const std::vector<int>& new_columns, const SlopeWeights& w)
{
    const std::size_t base = pool.columns.size();
    for (std::size_t k = 0; k < new_columns.size(); ++k) {
        const double weight = w.at_or_zero(base + k);
        for (auto& cut : pool.cuts) cut.push_back(weight);
        pool.columns.push_back(new_columns[k]);
    }
}

/**
 * Restricted Slope model: xi, b+/b- over the pool's columns (no direct cost),
 * eta >= 0 with cost 1 and one row eta - sum_k w_k (b+_k + b-_k) >= 0 per cut.
 */
class SlopeModel
{
public:
    SlopeModel(const Dataset& d, const SlopeWeights& w) : w_(&w), hm_(d, 0.0)
    {
        if (w.size() != static_cast<std::size_t>(d.p())) throw DomainError("SlopeModel: need one weight per feature");
        lp::LpColumn eta;
        eta.cost = 1.0;
        eta_col_ = hm_.add_aux_column(std::move(eta));
    }

    HingeModel& hinge() noexcept { return hm_; }
    const HingeModel& hinge() const noexcept { return hm_; }
    const CutPool& pool() const noexcept { return pool_; }
    int eta_col() const noexcept { return eta_col_; }
    double eta() const { return hm_.value(eta_col_); }

    /// Adds columns in the given order, extending every cut.
    void add_columns(const std::vector<int>& cols)
    {
        std::vector<int> fresh;
        for (int j : cols)
            if (!hm_.feature_active(j) && std::find(fresh.begin(), fresh.end(), j) == fresh.end()) fresh.push_back(j);
        const std::size_t base = pool_.columns.size();
        extend_cuts(pool_, fresh, *w_);
        for (std::size_t k = 0; k < fresh.size(); ++k) {
            const double weight = w_->at_or_zero(base + k);
            HingeModel::Entries aux;
            if (weight != 0.0)
                for (int r : cut_rows_) aux.emplace_back(r, -weight);
            hm_.add_feature(fresh[k], 0.0, aux);
        }
    }

    /// Adds a cut given as weights aligned with pool().columns.
    void add_cut(std::vector<double> weights)
    {
        detail::require(weights.size() == pool_.columns.size(), "SlopeModel: cut size does not match the column set");
        HingeModel::Entries e;
        e.emplace_back(eta_col_, 1.0);
        for (std::size_t k = 0; k < weights.size(); ++k) {
            if (weights[k] == 0.0) continue;
            const int j = pool_.columns[k];
            e.emplace_back(hm_.plus_col(j), -weights[k]);
            e.emplace_back(hm_.minus_col(j), -weights[k]);
        }
        cut_rows_.push_back(hm_.add_aux_row(lp::RowSense::GreaterEq, 0.0, std::move(e)));
        pool_.cuts.push_back(std::move(weights));
    }

    /// beta restricted to the pool's columns, in pool order.
    Vec beta_on_pool() const
    {
        Vec b(pool_.columns.size());
        for (std::size_t k = 0; k < pool_.columns.size(); ++k) {
            const int j = pool_.columns[k];
            b[k] = hm_.value(hm_.plus_col(j)) - hm_.value(hm_.minus_col(j));
        }
        return b;
    }

private:
    const SlopeWeights* w_;
    HingeModel hm_;
    int eta_col_ = -1;
    CutPool pool_;
    std::vector<int> cut_rows_;
};

/// Restricted Slope LP over all samples, columns J and the given pool; throws on an empty pool.
inline lp::LpModel build_slope_restricted(const Dataset& d, const SlopeWeights& w, const std::vector<int>& J,
                                          const CutPool& pool)
{
    if (pool.empty()) throw DomainError("build_slope_restricted: empty cut pool");
    if (pool.columns != J) throw DomainError("build_slope_restricted: pool columns differ from J");
    for (const auto& c : pool.cuts)
        if (c.size() != J.size()) throw DomainError("build_slope_restricted: cut size does not match J");
    SlopeModel sm(d, w);
    sm.hinge().add_samples(WorkingSet::all(d).samples);
    sm.add_columns(J);
    for (const auto& c : pool.cuts) sm.add_cut(c);
    return sm.hinge().model();
}

/**
 * Smallest scale s such that beta = 0 is optimal for every weight vector
 * s * shape: sum of the k largest ||X_j||_1 <= s (shape_1 + ... + shape_k) for all k.
 */
inline double slope_lambda_max(const Dataset& d, const SlopeWeights& shape)
{
    std::vector<double> a(d.p());
    for (int j = 0; j < d.p(); ++j) a[j] = d.features.col_l1(j);
    std::sort(a.begin(), a.end(), std::greater<>());
    double s = 0.0, best = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        s += a[k];
        if (shape.prefix(k + 1) <= 0.0) {
            if (s > 0.0) throw DomainError("slope_lambda_max: leading weights are zero");
            continue;
        }
        best = std::max(best, s / shape.prefix(k + 1));
    }
    return best;
}

/**
 * Simultaneous cut separation and column generation. J_init must be nonempty;
 * the first cut is the tight cut of beta_init on J_init (beta_init = 0 orders by index).
 * Certification additionally checks the full dual-norm condition over all p
 * columns and adds the offending columns if it fails.
 */
inline SvmSolution solve_slope(const Dataset& d, const SlopeWeights& w, const std::vector<int>& J_init,
                               const Vec* beta_init = nullptr, const SlopeConfig& cfg = {})
{
    cfg.validate();
    if (J_init.empty()) throw DomainError("solve_slope: J_init must be nonempty");
    detail::validate_indices(J_init, d.p(), "solve_slope");
    if (beta_init && beta_init->size() != d.p()) throw DomainError("solve_slope: beta_init has the wrong length");
    const detail::Stopwatch clock;
    const int max_cuts = cfg.max_cuts > 0 ? cfg.max_cuts : 10 * d.p();

    SlopeModel sm(d, w);
    HingeModel& hm = sm.hinge();
    hm.add_samples(WorkingSet::all(d).samples);
    const auto J0 = detail::sorted_unique(J_init);
    sm.add_columns(J0);
    {
        Vec b(J0.size());
        for (std::size_t k = 0; k < J0.size(); ++k) b[k] = beta_init ? (*beta_init)[J0[k]] : 0.0;
        sm.add_cut(tight_cut(b, w));
    }

    SvmSolution s;
    int round = 0;
    bool certified = false;
    while (round < cfg.max_outer) {
        ++round;
        if (hm.solve(cfg.lp) != lp::LpStatus::Optimal) break;
        const Vec pi = hm.pi_full();
        auto cut = separate_cut(sm.beta_on_pool(), sm.eta(), w, cfg.epsilon);
        auto cols = price_slope_columns(d, pi, w, hm.features(), cfg.epsilon, cfg.max_added_per_round);
        if (!cut && cols.empty()) {
            // pricing only sees single columns; close the gap with the full dual-norm test
            const Vec q = feature_correlations(d, pi);
            if (slope_dual_violation(q, w) <= cfg.epsilon) {
                certified = true;
                break;
            }
            std::vector<std::pair<double, int>> order;
            for (int j = 0; j < d.p(); ++j) order.emplace_back(std::abs(q[j]), j);
            std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
                return a.first > b.first || (a.first == b.first && a.second < b.second);
            });
            double sum = 0.0;
            int worst_k = 0;
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < order.size(); ++k) {
                sum += order[k].first;
                if (sum - w.prefix(k + 1) > worst) {
                    worst = sum - w.prefix(k + 1);
                    worst_k = static_cast<int>(k) + 1;
                }
            }
            for (int k = 0; k < worst_k; ++k)
                if (!hm.feature_active(order[k].second)) cols.push_back(order[k].second);
            if (cols.empty()) break;
            s.diag.certificate_additions += static_cast<int>(cols.size());
        }
        if (cut) {
            if (sm.pool().size() >= max_cuts) break;
            sm.add_cut(std::move(*cut));
        }
        sm.add_columns(cols);
    }

    hm.export_solution(s);
    s.eta = sm.eta();
    s.objective = slope_objective(d, s.beta, s.beta0, w);
    s.diag.outer_rounds = round;
    s.diag.cuts = sm.pool().size();
    s.diag.certified = certified && s.diag.lp_status == lp::LpStatus::Optimal;
    if (s.diag.lp_status == lp::LpStatus::Optimal) {
        s.diag.dual_violation = slope_dual_violation(feature_correlations(d, hm.pi_full()), w);
        s.diag.primal_violation = std::max(0.0, slope_norm(s.beta, w) - *s.eta);
    }
    s.diag.seconds = clock.seconds();
    return s;
}

namespace detail {

/// min sum_m (lambda_m - lambda_{m+1}) (m theta_m + sum_j v_mj) s.t. theta_m + v_mj >= alpha_j.
inline void add_slope_epigraph(lp::LpModel& m, const SlopeWeights& w, const std::vector<int>& plus_cols,
                               const std::vector<int>& minus_cols, const std::vector<double>& alpha_rhs)
{
    const int p = static_cast<int>(w.size());
    for (int mm = 1; mm <= p; ++mm) {
        const double c = w[mm - 1] - w.at_or_zero(mm);
        if (c == 0.0) continue;
        const int first_row = m.num_rows();
        for (int j = 0; j < p; ++j) {
            lp::LpRow row{lp::RowSense::GreaterEq, alpha_rhs.empty() ? 0.0 : alpha_rhs[j], {}};
            if (!plus_cols.empty()) {
                row.entries.emplace_back(plus_cols[j], -1.0);
                row.entries.emplace_back(minus_cols[j], -1.0);
            }
            m.add_row(row);
        }
        lp::LpColumn theta;
        theta.lower = -lp::kInf;
        theta.cost = c * mm;
        for (int j = 0; j < p; ++j) theta.coef.push(first_row + j, 1.0);
        m.add_column(std::move(theta));
        for (int j = 0; j < p; ++j) {
            lp::LpColumn v;
            v.cost = c;
            v.coef.push(first_row + j, 1.0);
            m.add_column(std::move(v));
        }
    }
}

} // namespace detail

/// slope_norm(beta) evaluated through the prefix-sum LP used by the oracle (p <= 50).
inline double slope_norm_by_lp(const Vec& beta, const SlopeWeights& w)
{
    detail::require(beta.size() == static_cast<Eigen::Index>(w.size()), "slope_norm_by_lp: size mismatch");
    detail::require(w.size() <= 50, "slope_norm_by_lp: p must not exceed 50");
    lp::LpModel m;
    std::vector<double> a(beta.size());
    for (Eigen::Index j = 0; j < beta.size(); ++j) a[j] = std::abs(beta[j]);
    detail::add_slope_epigraph(m, w, {}, {}, a);
    if (m.num_cols() == 0) return 0.0;
    const auto r = lp::solve(m);
    if (r.solution.status != lp::LpStatus::Optimal) throw FactorizationError("slope_norm_by_lp: LP not solved");
    return r.solution.objective;
}

/// Full Slope-SVM optimum via the O(p^2) prefix-sum formulation (p <= 50).
inline double slope_oracle_small(const Dataset& d, const SlopeWeights& w)
{
    if (d.p() > 50) throw DomainError("slope_oracle_small: p must not exceed 50");
    if (w.size() != static_cast<std::size_t>(d.p())) throw DomainError("slope_oracle_small: need one weight per feature");
    d.require_both_classes();
    const int n = d.n(), p = d.p();
    lp::LpModel m;
    for (int i = 0; i < n; ++i) m.add_row(lp::RowSense::GreaterEq, 1.0);
    std::vector<int> plus(p), minus(p);
    for (int sign : {1, -1})
        for (int j = 0; j < p; ++j) {
            lp::LpColumn c;
            d.features.for_each_in_col(j, [&](Eigen::Index i, double v) {
                if (v != 0.0) c.coef.push(static_cast<int>(i), sign * d.labels[i] * v);
            });
            (sign > 0 ? plus : minus)[j] = m.add_column(std::move(c));
        }
    lp::LpColumn b0;
    b0.lower = -lp::kInf;
    for (int i = 0; i < n; ++i) b0.coef.push(i, d.labels[i]);
    m.add_column(std::move(b0));
    for (int i = 0; i < n; ++i) {
        lp::LpColumn xi;
        xi.cost = 1.0;
        xi.coef.push(i, 1.0);
        m.add_column(std::move(xi));
    }
    detail::add_slope_epigraph(m, w, plus, minus, {});
    const auto r = lp::solve(m);
    if (r.solution.status != lp::LpStatus::Optimal)
        throw FactorizationError(std::string("slope_oracle_small: LP ended with ") + lp::to_string(r.solution.status));
    return r.solution.objective;
}

} // namespace cpsvm
