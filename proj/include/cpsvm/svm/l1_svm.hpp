#pragma once
#include <algorithm>
#include <cmath>
#include <vector>
#include <cpsvm/data/dataset.hpp>
#include <cpsvm/svm/common.hpp>
#include <cpsvm/svm/restricted.hpp>

namespace cpsvm {

/// q_j = sum_i y_i x_ij pi_i for every feature; pi is zero off the active samples.
inline Vec feature_correlations(const Dataset& d, const Vec& pi)
{
    return d.features.transpose_times(d.labels.cwiseProduct(pi));
}

/// Restricted L1 model M(I, J); throws on empty I.
inline lp::LpModel build_restricted(const Dataset& d, double lambda, const WorkingSet& ws)
{
    if (ws.samples.empty()) throw DomainError("build_restricted: empty sample set");
    HingeModel hm(d, lambda);
    hm.add_samples(ws.samples);
    hm.add_features(ws.features);
    return hm.model();
}

/**
 * Features outside J whose pair (b+_j, b-_j) has reduced cost
 * lambda - |sum_i y_i x_ij pi_i| < -epsilon; with cap > 0, the cap most negative.
 * Returned sorted.
 */
inline std::vector<int> price_columns(const Dataset& d, const Vec& pi, double lambda, const std::vector<int>& J,
                                      double epsilon, int cap = 0)
{
    std::vector<char> active(d.p(), 0);
    for (int j : J) active[j] = 1;
    const Vec q = feature_correlations(d, pi);
    std::vector<std::pair<double, int>> cand;
    for (int j = 0; j < d.p(); ++j) {
        if (active[j]) continue;
        const double rc = lambda - std::abs(q[j]);
        if (rc < -epsilon) cand.emplace_back(-rc, j);
    }
    return detail::top_by_score(std::move(cand), cap);
}

/**
 * Samples outside I with 1 - y_i(x_i^T beta + beta0) > epsilon; with cap > 0,
 * the cap most violated. Returned sorted.
 */
inline std::vector<int> price_constraints(const Dataset& d, const Vec& beta, double beta0, const std::vector<int>& I,
                                          double epsilon, int cap = 0)
{
    std::vector<char> active(d.n(), 0);
    for (int i : I) active[i] = 1;
    const Vec m = d.margins(beta, beta0);
    std::vector<std::pair<double, int>> cand;
    for (int i = 0; i < d.n(); ++i) {
        if (active[i]) continue;
        const double rc = 1.0 - m[i];
        if (rc > epsilon) cand.emplace_back(rc, i);
    }
    return detail::top_by_score(std::move(cand), cap);
}

/// max_j (|q_j| - lambda) over all features; <= epsilon certifies dual feasibility at epsilon.
inline double l1_dual_violation(const Dataset& d, const Vec& pi, double lambda)
{
    const Vec q = feature_correlations(d, pi);
    return q.size() ? q.cwiseAbs().maxCoeff() - lambda : -lambda;
}

/// max over samples outside I of 1 - y_i(x_i^T beta + beta0) (violation of the omitted rows).
inline double omitted_row_violation(const Dataset& d, const Vec& beta, double beta0, const std::vector<int>& I)
{
    std::vector<char> active(d.n(), 0);
    for (int i : I) active[i] = 1;
    const Vec m = d.margins(beta, beta0);
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < d.n(); ++i)
        if (!active[i]) worst = std::max(worst, 1.0 - m[i]);
    return worst;
}

namespace detail {

/// Makes sure both classes are represented in a sample set.
inline std::vector<int> with_both_classes(const Dataset& d, std::vector<int> I)
{
    bool pos = false, neg = false;
    for (int i : I) (d.labels[i] > 0 ? pos : neg) = true;
    for (int i = 0; i < d.n() && !(pos && neg); ++i) {
        if (!pos && d.labels[i] > 0) {
            I.push_back(i);
            pos = true;
        } else if (!neg && d.labels[i] < 0) {
            I.push_back(i);
            neg = true;
        }
    }
    return sorted_unique(std::move(I));
}

inline void validate_indices(const std::vector<int>& v, int bound, const char* what)
{
    for (int k : v)
        if (k < 0 || k >= bound) throw DomainError(std::string(what) + ": index out of range");
}

/**
 * Outer loop shared by the L1 drivers: solve, price samples and features
 * against the same solution, add, repeat until a full pass adds nothing.
 */
inline SvmSolution run_l1_cutgen(HingeModel& hm, double lambda, bool price_cols, bool price_rows,
                                 const CutgenConfig& cfg)
{
    const Stopwatch clock;
    const Dataset& d = hm.data();
    SvmSolution s;
    int round = 0;
    bool certified = false;
    while (round < cfg.max_outer) {
        ++round;
        if (hm.solve(cfg.lp) != lp::LpStatus::Optimal) break;
        std::vector<int> new_rows, new_cols;
        const Vec beta = hm.beta();
        if (price_rows) new_rows = price_constraints(d, beta, hm.beta0(), hm.samples(), cfg.epsilon, cfg.max_samples_per_round);
        if (price_cols) new_cols = price_columns(d, hm.pi_full(), lambda, hm.features(), cfg.epsilon, cfg.max_added_per_round);
        if (new_rows.empty() && new_cols.empty()) {
            certified = true;
            break;
        }
        hm.add_samples(new_rows);
        hm.add_features(new_cols);
    }
    hm.export_solution(s);
    s.objective = l1_objective(d, s.beta, s.beta0, lambda);
    s.diag.outer_rounds = round;
    s.diag.certified = certified && s.diag.lp_status == lp::LpStatus::Optimal;
    if (s.diag.lp_status == lp::LpStatus::Optimal) {
        s.diag.dual_violation = l1_dual_violation(d, hm.pi_full(), lambda);
        s.diag.primal_violation = std::max(0.0, omitted_row_violation(d, s.beta, s.beta0, hm.samples()));
    }
    s.diag.seconds = clock.seconds();
    return s;
}

} // namespace detail

/// Column generation with all samples active, starting from features J_init.
inline SvmSolution solve_colgen(const Dataset& d, double lambda, const std::vector<int>& J_init, const CutgenConfig& cfg = {})
{
    cfg.validate();
    detail::validate_indices(J_init, d.p(), "solve_colgen");
    HingeModel hm(d, lambda);
    hm.add_samples(WorkingSet::all(d).samples);
    hm.add_features(detail::sorted_unique(J_init));
    return detail::run_l1_cutgen(hm, lambda, true, false, cfg);
}

/// Constraint generation with all features active, starting from samples I_init.
inline SvmSolution solve_congen(const Dataset& d, double lambda, const std::vector<int>& I_init, const CutgenConfig& cfg = {})
{
    cfg.validate();
    detail::validate_indices(I_init, d.n(), "solve_congen");
    HingeModel hm(d, lambda);
    hm.add_samples(detail::with_both_classes(d, I_init));
    hm.add_features(WorkingSet::all(d).features);
    return detail::run_l1_cutgen(hm, lambda, false, true, cfg);
}

/// Combined column and constraint generation from (I, J).
inline SvmSolution solve_colcon(const Dataset& d, double lambda, const WorkingSet& ws_init, const CutgenConfig& cfg = {})
{
    cfg.validate();
    detail::validate_indices(ws_init.samples, d.n(), "solve_colcon");
    detail::validate_indices(ws_init.features, d.p(), "solve_colcon");
    HingeModel hm(d, lambda);
    hm.add_samples(detail::with_both_classes(d, ws_init.samples));
    hm.add_features(detail::sorted_unique(ws_init.features));
    return detail::run_l1_cutgen(hm, lambda, true, true, cfg);
}

/// The full LP over all samples and features.
inline SvmSolution solve_l1_full(const Dataset& d, double lambda, const CutgenConfig& cfg = {})
{
    return solve_colcon(d, lambda, WorkingSet::all(d), cfg);
}

/// The j0 features of largest |q_j| under the lambda_max duals (ties by index), sorted.
inline std::vector<int> path_initial_features(const Dataset& d, int j0)
{
    detail::require(j0 >= 1, "path_initial_features: j0 must be at least 1");
    const Vec q = feature_correlations(d, lambda_max_duals(d));
    std::vector<std::pair<double, int>> cand;
    for (int j = 0; j < d.p(); ++j) cand.emplace_back(std::abs(q[j]), j);
    return detail::top_by_score(std::move(cand), std::min(j0, d.p()));
}

/// Geometric grid lambda_max * ratio^k, k = 0..count-1.
inline std::vector<double> geometric_grid(double lambda_max, double ratio, int count)
{
    detail::require(ratio > 0.0 && ratio < 1.0, "geometric_grid: ratio must lie in (0, 1)");
    detail::require(count >= 1, "geometric_grid: count must be positive");
    std::vector<double> g(count);
    for (int k = 0; k < count; ++k) g[k] = lambda_max * std::pow(ratio, k);
    return g;
}

namespace detail {

inline void validate_grid(const std::vector<double>& grid)
{
    detail::require(!grid.empty(), "regularization path: empty grid");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        detail::require(grid[k] > 0.0, "regularization path: lambda must be positive");
        if (k > 0 && !(grid[k] < grid[k - 1])) throw DomainError("regularization path: grid must be strictly decreasing");
    }
}

} // namespace detail

/**
 * Column generation along a decreasing grid. The first point starts from the
 * j0 features ranked by the lambda_max reduced costs; every later point reuses
 * the previous working set and simplex basis.
 */
inline std::vector<SvmSolution> regularization_path(const Dataset& d, const std::vector<double>& grid, int j0,
                                                    const CutgenConfig& cfg = {})
{
    cfg.validate();
    detail::validate_grid(grid);
    HingeModel hm(d, grid.front());
    hm.add_samples(WorkingSet::all(d).samples);
    hm.add_features(path_initial_features(d, j0));
    std::vector<SvmSolution> path;
    path.reserve(grid.size());
    for (double lambda : grid) {
        hm.set_feature_cost(lambda);
        path.push_back(detail::run_l1_cutgen(hm, lambda, true, false, cfg));
    }
    return path;
}

} // namespace cpsvm
