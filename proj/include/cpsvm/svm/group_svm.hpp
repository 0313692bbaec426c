#pragma once
#include <vector>
#include <cpsvm/data/dataset.hpp>
#include <cpsvm/svm/l1_svm.hpp>

namespace cpsvm {

/**
 * Restricted Group-SVM model on top of HingeModel: b+/b- carry no cost, each
 * active group owns v_g >= 0 with cost lambda and linking rows
 * v_g - b+_j - b-_j >= 0 for its coefficients.
 */
class GroupModel
{
public:
    GroupModel(const Dataset& d, const GroupStructure& groups, double lambda)
        : groups_(&groups), hm_(d, 0.0), lambda_(lambda), v_col_(groups.size(), -1)
    {
        groups.validate(d.p());
    }

    HingeModel& hinge() noexcept { return hm_; }
    const HingeModel& hinge() const noexcept { return hm_; }
    const GroupStructure& groups() const noexcept { return *groups_; }
    const std::vector<int>& active_groups() const noexcept { return active_; }
    bool group_active(int g) const { return v_col_[g] >= 0; }
    int v_col(int g) const { return v_col_[g]; }

    void add_group(int g)
    {
        detail::require(g >= 0 && g < groups_->size(), "GroupModel: group index out of range");
        if (group_active(g)) return;
        const auto& members = (*groups_)[g];
        std::vector<int> rows;
        rows.reserve(members.size());
        for (std::size_t k = 0; k < members.size(); ++k)
            rows.push_back(hm_.add_aux_row(lp::RowSense::GreaterEq, 0.0, {}));
        lp::LpColumn v;
        v.cost = lambda_;
        for (int r : rows) v.coef.push(r, 1.0);
        v_col_[g] = hm_.add_aux_column(std::move(v));
        for (std::size_t k = 0; k < members.size(); ++k) hm_.add_feature(members[k], 0.0, {{rows[k], -1.0}});
        active_.push_back(g);
    }

    void add_groups(std::span<const int> gs)
    {
        for (int g : gs) add_group(g);
    }

    void set_lambda(double lambda)
    {
        lambda_ = lambda;
        for (int g : active_) hm_.set_cost(v_col_[g], lambda);
    }

    double v_value(int g) const { return hm_.value(v_col_[g]); }

private:
    const GroupStructure* groups_;
    HingeModel hm_;
    double lambda_;
    std::vector<int> v_col_;
    std::vector<int> active_;
};

/// sum_i hinge + lambda sum_g ||beta_g||_inf on the full data.
inline double group_objective(const Dataset& d, const GroupStructure& groups, const Vec& beta, double beta0, double lambda)
{
    double pen = 0.0;
    for (int g = 0; g < groups.size(); ++g) {
        double m = 0.0;
        for (int j : groups[g]) m = std::max(m, std::abs(beta[j]));
        pen += m;
    }
    return d.hinge_loss(beta, beta0) + lambda * pen;
}

/// Per-group dual norms sum_{j in g} |q_j|.
inline Vec group_scores(const Dataset& d, const GroupStructure& groups, const Vec& pi)
{
    const Vec q = feature_correlations(d, pi);
    Vec s = Vec::Zero(groups.size());
    for (int g = 0; g < groups.size(); ++g)
        for (int j : groups[g]) s[g] += std::abs(q[j]);
    return s;
}

/// Restricted Group-SVM LP over active groups and samples I; throws on empty I.
inline lp::LpModel build_group_restricted(const Dataset& d, const GroupStructure& groups, double lambda,
                                          const std::vector<int>& active_groups, const std::vector<int>& I)
{
    if (I.empty()) throw DomainError("build_group_restricted: empty sample set");
    GroupModel gm(d, groups, lambda);
    gm.hinge().add_samples(I);
    gm.add_groups(active_groups);
    return gm.hinge().model();
}

/// Inactive groups with lambda - sum_{j in g} |q_j| < -epsilon (cap > 0 keeps the most negative), sorted.
inline std::vector<int> price_groups(const Dataset& d, const GroupStructure& groups, const Vec& pi, double lambda,
                                     const std::vector<int>& active_groups, double epsilon, int cap = 0)
{
    std::vector<char> active(groups.size(), 0);
    for (int g : active_groups) active[g] = 1;
    const Vec s = group_scores(d, groups, pi);
    std::vector<std::pair<double, int>> cand;
    for (int g = 0; g < groups.size(); ++g) {
        if (active[g]) continue;
        const double rc = lambda - s[g];
        if (rc < -epsilon) cand.emplace_back(-rc, g);
    }
    return detail::top_by_score(std::move(cand), cap);
}

/// The j0 groups with the most negative reduced cost at lambda_max (ties by index), sorted.
inline std::vector<int> group_path_init(const Dataset& d, const GroupStructure& groups, int j0)
{
    detail::require(j0 >= 1, "group_path_init: j0 must be at least 1");
    const Vec s = group_scores(d, groups, lambda_max_duals(d));
    std::vector<std::pair<double, int>> cand;
    for (int g = 0; g < groups.size(); ++g) cand.emplace_back(s[g], g);
    return detail::top_by_score(std::move(cand), std::min(j0, groups.size()));
}

namespace detail {

inline SvmSolution run_group_cutgen(GroupModel& gm, double lambda, bool price_rows, const CutgenConfig& cfg)
{
    const Stopwatch clock;
    HingeModel& hm = gm.hinge();
    const Dataset& d = hm.data();
    const GroupStructure& groups = gm.groups();
    SvmSolution s;
    int round = 0;
    bool certified = false;
    while (round < cfg.max_outer) {
        ++round;
        if (hm.solve(cfg.lp) != lp::LpStatus::Optimal) break;
        std::vector<int> new_rows;
        if (price_rows)
            new_rows = price_constraints(d, hm.beta(), hm.beta0(), hm.samples(), cfg.epsilon, cfg.max_samples_per_round);
        const auto new_groups =
            price_groups(d, groups, hm.pi_full(), lambda, gm.active_groups(), cfg.epsilon, cfg.max_added_per_round);
        if (new_rows.empty() && new_groups.empty()) {
            certified = true;
            break;
        }
        hm.add_samples(new_rows);
        gm.add_groups(new_groups);
    }
    hm.export_solution(s);
    s.groups = sorted_unique(gm.active_groups());
    s.objective = group_objective(d, groups, s.beta, s.beta0, lambda);
    s.diag.outer_rounds = round;
    s.diag.active_groups = static_cast<int>(s.groups.size());
    s.diag.certified = certified && s.diag.lp_status == lp::LpStatus::Optimal;
    if (s.diag.lp_status == lp::LpStatus::Optimal) {
        const Vec sc = group_scores(d, groups, hm.pi_full());
        s.diag.dual_violation = sc.size() ? sc.maxCoeff() - lambda : -lambda;
        s.diag.primal_violation = std::max(0.0, omitted_row_violation(d, s.beta, s.beta0, hm.samples()));
    }
    s.diag.seconds = clock.seconds();
    return s;
}

inline void validate_groups(const GroupStructure& groups, const std::vector<int>& gs)
{
    for (int g : gs)
        if (g < 0 || g >= groups.size()) throw DomainError("group index out of range");
}

} // namespace detail

/// Column generation over groups with all samples active.
inline SvmSolution solve_group_colgen(const Dataset& d, const GroupStructure& groups, double lambda,
                                      const std::vector<int>& init_groups, const CutgenConfig& cfg = {})
{
    cfg.validate();
    detail::validate_groups(groups, init_groups);
    GroupModel gm(d, groups, lambda);
    gm.hinge().add_samples(WorkingSet::all(d).samples);
    gm.add_groups(detail::sorted_unique(init_groups));
    return detail::run_group_cutgen(gm, lambda, false, cfg);
}

/// Column generation over groups together with constraint generation over samples.
inline SvmSolution solve_group_colcon(const Dataset& d, const GroupStructure& groups, double lambda,
                                      const std::vector<int>& I_init, const std::vector<int>& init_groups,
                                      const CutgenConfig& cfg = {})
{
    cfg.validate();
    detail::validate_indices(I_init, d.n(), "solve_group_colcon");
    detail::validate_groups(groups, init_groups);
    GroupModel gm(d, groups, lambda);
    gm.hinge().add_samples(detail::with_both_classes(d, I_init));
    gm.add_groups(detail::sorted_unique(init_groups));
    return detail::run_group_cutgen(gm, lambda, true, cfg);
}

/// Group column generation along a strictly decreasing grid, warm-started point to point.
inline std::vector<SvmSolution> group_regularization_path(const Dataset& d, const GroupStructure& groups,
                                                          const std::vector<double>& grid, int j0,
                                                          const CutgenConfig& cfg = {})
{
    cfg.validate();
    detail::validate_grid(grid);
    GroupModel gm(d, groups, grid.front());
    gm.hinge().add_samples(WorkingSet::all(d).samples);
    gm.add_groups(group_path_init(d, groups, j0));
    std::vector<SvmSolution> path;
    path.reserve(grid.size());
    for (double lambda : grid) {
        gm.set_lambda(lambda);
        path.push_back(detail::run_group_cutgen(gm, lambda, false, cfg));
    }
    return path;
}

} // namespace cpsvm
