#include <gtest/gtest.h>
#include <numeric>
#include <cpsvm/data/synth.hpp>
#include <cpsvm/svm/group_svm.hpp>
#include "support/svm_oracles.hpp"

using namespace cpsvm;

namespace {

std::pair<Dataset, GroupStructure> group_data(int n, int G, int size, std::uint64_t seed, int k0 = 2)
{
    SynthConfig cfg;
    cfg.n = n;
    cfg.p = G * size;
    cfg.num_groups = G;
    cfg.group_size = size;
    cfg.k0 = std::min(k0, G);
    cfg.rho = 0.1;
    cfg.seed = seed;
    return synth_group_gaussian(cfg);
}

Dataset plain(int n, int p, std::uint64_t seed)
{
    SynthConfig cfg;
    cfg.n = n;
    cfg.p = p;
    cfg.k0 = std::min(5, p);
    cfg.seed = seed;
    return synth_gaussian(cfg);
}

std::vector<int> iota(int k)
{
    std::vector<int> v(k);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

} // namespace

TEST(BuildGroupRestricted, AllGroupsMatchesOracle)
{
    for (int seed = 0; seed < 4; ++seed) {
        const auto [d, groups] = group_data(30, 5, 3, 100 + seed);
        const double lam = 0.1 * lambda_max_group(d, groups);
        const auto m = build_group_restricted(d, groups, lam, iota(5), iota(30));
        EXPECT_EQ(m.num_rows(), 30 + 15);
        const auto r = lp::solve(m);
        const auto ref = oracle::full_group(d, groups, lam);
        ASSERT_EQ(ref.status, lp::LpStatus::Optimal);
        EXPECT_NEAR(r.solution.objective, ref.objective, 1e-7 * std::max(1.0, ref.objective));
    }
}

TEST(BuildGroupRestricted, RowCountAndEmptySamples)
{
    const auto [d, groups] = group_data(20, 4, 3, 1);
    EXPECT_EQ(build_group_restricted(d, groups, 1.0, {1, 3}, {0, 1, 2, 3}).num_rows(), 4 + 6);
    EXPECT_THROW(build_group_restricted(d, groups, 1.0, {0}, {}), DomainError);
}

TEST(BuildGroupRestricted, SingletonGroupsEqualL1)
{
    const auto d = plain(30, 8, 2);
    const double lam = 0.1 * lambda_max_l1(d);
    const auto g = lp::solve(build_group_restricted(d, GroupStructure::singletons(8), lam, iota(8), iota(30)));
    EXPECT_NEAR(g.solution.objective, oracle::full_l1(d, lam).objective, 1e-8);
}

TEST(PriceGroups, ZeroDualsAndSingletonReduction)
{
    const auto d = plain(25, 10, 3);
    const auto single = GroupStructure::singletons(10);
    EXPECT_TRUE(price_groups(d, single, Vec::Zero(25), 0.3, {}, 1e-2).empty());
    const Vec pi = lambda_max_duals(d);
    for (double frac : {0.2, 0.5, 0.9}) {
        const double lam = frac * lambda_max_l1(d);
        EXPECT_EQ(price_groups(d, single, pi, lam, {1, 2}, 1e-2), price_columns(d, pi, lam, {1, 2}, 1e-2));
        EXPECT_EQ(price_groups(d, single, pi, lam, {}, 1e-2, 3), price_columns(d, pi, lam, {}, 1e-2, 3));
    }
}

TEST(PriceGroups, EmptyAtFullOptimum)
{
    const auto [d, groups] = group_data(40, 6, 3, 4);
    const double lam = 0.1 * lambda_max_group(d, groups);
    CutgenConfig cfg;
    cfg.epsilon = 1e-8;
    const auto s = solve_group_colgen(d, groups, lam, iota(6), cfg);
    Vec pi = Vec::Zero(40);
    for (std::size_t k = 0; k < s.samples.size(); ++k) pi[s.samples[k]] = s.duals[k];
    EXPECT_TRUE(price_groups(d, groups, pi, lam, {}, 1e-6).empty());
}

TEST(GroupPathInit, HandInstance)
{
    // 4 samples, 2 groups {0,1}, {2}; y = (1, 1, -1, -1) so pi = 1 everywhere
    Mat x(4, 3);
    x << 1, 0, 2, 1, 1, 0, 0, 1, 1, -1, 0, 1;
    Vec y(4);
    y << 1, 1, -1, -1;
    const Dataset d(FeatureMatrix(x), y);
    const GroupStructure groups({{0, 1}, {2}});
    // q = X^T y = (1+1-0+1, 0+1-1-0, 2+0-1-1) = (3, 0, 0): group 0 scores 3, group 1 scores 0
    const Vec s = group_scores(d, groups, lambda_max_duals(d));
    EXPECT_NEAR(s[0], 3.0, 1e-12);
    EXPECT_NEAR(s[1], 0.0, 1e-12);
    EXPECT_EQ(group_path_init(d, groups, 1), (std::vector<int>{0}));
    EXPECT_EQ(group_path_init(d, groups, 2), (std::vector<int>{0, 1}));
    EXPECT_EQ(group_path_init(d, groups, 9), (std::vector<int>{0, 1}));
}

TEST(GroupPathInit, SingletonsRankLikeL1)
{
    const auto d = plain(30, 12, 5);
    EXPECT_EQ(group_path_init(d, GroupStructure::singletons(12), 4), path_initial_features(d, 4));
}

TEST(GroupColgen, MatchesFullModelAndCertifies)
{
    for (int seed = 0; seed < 4; ++seed) {
        const auto [d, groups] = group_data(50, 20, 4, 200 + seed);
        const double lam = 0.1 * lambda_max_group(d, groups);
        CutgenConfig cfg;
        cfg.epsilon = 1e-7;
        const auto s = solve_group_colgen(d, groups, lam, {}, cfg);
        const auto ref = oracle::full_group(d, groups, lam);
        ASSERT_TRUE(s.diag.certified);
        EXPECT_LE(rel(s.objective, ref.objective), 1e-6);
        EXPECT_LE(s.diag.dual_violation, 1e-7);
        EXPECT_LE(s.diag.cs_residual, 1e-6);
        EXPECT_LE(rel(s.objective, s.lp_objective), 1e-6);
    }
}

TEST(GroupColgen, VEqualsGroupInfNorm)
{
    const auto [d, groups] = group_data(40, 10, 3, 6);
    const double lam = 0.05 * lambda_max_group(d, groups);
    GroupModel gm(d, groups, lam);
    gm.hinge().add_samples(iota(40));
    gm.add_groups(iota(10));
    ASSERT_EQ(gm.hinge().solve(), lp::LpStatus::Optimal);
    const Vec beta = gm.hinge().beta();
    for (int g = 0; g < 10; ++g) {
        double m = 0.0;
        for (int j : groups[g]) m = std::max(m, std::abs(beta[j]));
        EXPECT_NEAR(gm.v_value(g), m, 1e-7) << g;
    }
}

TEST(GroupColgen, SingletonGroupsMatchL1Driver)
{
    for (int seed = 0; seed < 3; ++seed) {
        const auto d = plain(40, 30, 300 + seed);
        const double lam = 0.05 * lambda_max_l1(d);
        CutgenConfig cfg;
        cfg.epsilon = 1e-8;
        const auto g = solve_group_colgen(d, GroupStructure::singletons(30), lam, {}, cfg);
        const auto l = solve_colgen(d, lam, {}, cfg);
        EXPECT_LE(rel(g.objective, l.objective), 1e-6);
    }
}

TEST(GroupColgen, AboveLambdaMaxGivesZero)
{
    for (int seed = 0; seed < 4; ++seed) {
        const auto [d, groups] = group_data(30, 6, 3, 400 + seed);
        const double lam = 1.001 * lambda_max_group(d, groups);
        for (const auto& s : {solve_group_colgen(d, groups, lam, {}), solve_group_colgen(d, groups, lam, iota(6)),
                              solve_group_colcon(d, groups, lam, {0, 1}, {2})}) {
            EXPECT_EQ(s.beta, Vec::Zero(18));
            EXPECT_NEAR(s.objective, zero_model_objective(d), 1e-9);
        }
    }
}

TEST(GroupColcon, MatchesFullModel)
{
    for (int seed = 0; seed < 3; ++seed) {
        const auto [d, groups] = group_data(120, 15, 4, 500 + seed);
        const double lam = 0.05 * lambda_max_group(d, groups);
        CutgenConfig cfg;
        cfg.epsilon = 1e-7;
        const auto s = solve_group_colcon(d, groups, lam, {0, 1, 2, 3}, {}, cfg);
        ASSERT_TRUE(s.diag.certified);
        EXPECT_LE(rel(s.objective, oracle::full_group(d, groups, lam).objective), 1e-6);
        EXPECT_LE(s.diag.primal_violation, 1e-7);
    }
}

TEST(GroupPath, EveryPointMatchesFullModel)
{
    const auto [d, groups] = group_data(40, 12, 3, 7);
    const auto grid = geometric_grid(lambda_max_group(d, groups), 0.6, 6);
    CutgenConfig cfg;
    cfg.epsilon = 1e-7;
    const auto path = group_regularization_path(d, groups, grid, 2, cfg);
    ASSERT_EQ(path.size(), 6u);
    EXPECT_EQ(path[0].beta, Vec::Zero(36));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        EXPECT_TRUE(path[k].diag.certified);
        EXPECT_LE(rel(path[k].objective, oracle::full_group(d, groups, grid[k]).objective), 1e-6) << k;
    }
    EXPECT_THROW(group_regularization_path(d, groups, {1.0, 2.0}, 2), DomainError);
}
