#include <gtest/gtest.h>
#include <random>
#include <cpsvm/prox.hpp>
#include "support/prox_oracles.hpp"

using cpsvm::Vec;

namespace {

Vec random_vec(std::mt19937_64& rng, int p, double scale = 2.0)
{
    std::normal_distribution<double> g(0.0, scale);
    Vec v(p);
    for (int i = 0; i < p; ++i) v[i] = g(rng);
    return v;
}

std::vector<double> random_weights(std::mt19937_64& rng, int p)
{
    std::uniform_real_distribution<double> u(0.0, 1.5);
    std::vector<double> w(p);
    for (auto& x : w) x = u(rng);
    std::sort(w.begin(), w.end(), std::greater<>());
    return w;
}

} // namespace

TEST(SoftThreshold, HandExample)
{
    Vec v(2);
    v << 3.0, -0.5;
    const Vec out = cpsvm::soft_threshold(v, 1.0);
    EXPECT_DOUBLE_EQ(out[0], 2.0);
    EXPECT_DOUBLE_EQ(out[1], 0.0);
}

TEST(SoftThreshold, ZeroIsIdentityAndNegativeRejected)
{
    std::mt19937_64 rng(1);
    const Vec v = random_vec(rng, 7);
    EXPECT_EQ(cpsvm::soft_threshold(v, 0.0), v);
    EXPECT_THROW(cpsvm::soft_threshold(v, -1.0), cpsvm::DomainError);
}

TEST(SoftThreshold, MatchesScalarScan)
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int rep = 0; rep < 50; ++rep) {
        const Vec v = random_vec(rng, 4);
        const double mu = u(rng);
        const Vec out = cpsvm::soft_threshold(v, mu);
        for (int i = 0; i < 4; ++i) EXPECT_NEAR(out[i], oracle::scalar_l1_prox_scan(v[i], mu), 1e-7);
    }
}

TEST(ProjectL1Ball, InteriorAndAxis)
{
    Vec v(2);
    v << 0.3, -0.2;
    EXPECT_EQ(cpsvm::project_l1_ball(v, 1.0), v);
    v << 2.0, 0.0;
    const Vec out = cpsvm::project_l1_ball(v, 1.0);
    EXPECT_DOUBLE_EQ(out[0], 1.0);
    EXPECT_DOUBLE_EQ(out[1], 0.0);
}

TEST(ProjectL1Ball, MatchesBisectionOracle)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (int rep = 0; rep < 200; ++rep) {
        const int p = 1 + rep % 8;
        const Vec v = random_vec(rng, p);
        const double r = u(rng);
        const Vec out = cpsvm::project_l1_ball(v, r);
        EXPECT_LE(out.lpNorm<1>(), r + 1e-12);
        EXPECT_LE((out - oracle::l1_projection_bisection(v, r)).lpNorm<Eigen::Infinity>(), 1e-6);
    }
}

TEST(ProxLinf, AnalyticAndMoreau)
{
    Vec v(2);
    v << 2.0, 0.0;
    const Vec out = cpsvm::prox_linf(v, 1.0);
    EXPECT_DOUBLE_EQ(out[0], 1.0);
    EXPECT_DOUBLE_EQ(out[1], 0.0);

    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 100; ++rep) {
        const Vec a = random_vec(rng, 6);
        const double mu = 0.1 + 0.05 * rep;
        const Vec sum = cpsvm::prox_linf(a, mu) + cpsvm::project_l1_ball(a, mu);
        EXPECT_LE((sum - a).lpNorm<Eigen::Infinity>(), 1e-14);
    }
    const Vec a = random_vec(rng, 5);
    EXPECT_EQ(cpsvm::prox_linf(a, a.lpNorm<1>() + 1.0), Vec::Zero(5));
    EXPECT_EQ(cpsvm::prox_linf(a, 0.0), a);
}

TEST(ProxSlope, EqualWeightsIsSoftThreshold)
{
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const Vec v = random_vec(rng, 9);
        const std::vector<double> w(9, 0.7);
        EXPECT_LE((cpsvm::prox_slope(v, w) - cpsvm::soft_threshold(v, 0.7)).lpNorm<Eigen::Infinity>(), 1e-14);
    }
}

TEST(ProxSlope, ZeroWeightsIsIdentity)
{
    std::mt19937_64 rng(6);
    const Vec v = random_vec(rng, 8);
    EXPECT_EQ(cpsvm::prox_slope(v, std::vector<double>(8, 0.0)), v);
}

TEST(ProxSlope, RejectsUnsortedWeights)
{
    const Vec v = Vec::Ones(3);
    EXPECT_THROW(cpsvm::prox_slope(v, std::vector<double>{1.0, 2.0, 0.5}), cpsvm::DomainError);
    EXPECT_THROW(cpsvm::SlopeWeights(std::vector<double>{1.0, 2.0}), cpsvm::DomainError);
}

TEST(ProxSlope, MatchesExhaustiveOracle)
{
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 200; ++rep) {
        const int p = 1 + rep % 6;
        const Vec v = random_vec(rng, p);
        const auto w = random_weights(rng, p);
        const Vec out = cpsvm::prox_slope(v, w);
        const Vec ref = oracle::slope_prox_exhaustive(v, w);
        EXPECT_LE((out - ref).lpNorm<Eigen::Infinity>(), 1e-8) << "rep " << rep;
    }
}

TEST(ProxSlope, PerturbationsDoNotImprove)
{
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1e-3);
    const Vec v = random_vec(rng, 12);
    const auto w = random_weights(rng, 12);
    const Vec out = cpsvm::prox_slope(v, w);
    const double f = oracle::slope_prox_objective(out, v, w);
    for (int k = 0; k < 1000; ++k) {
        Vec u = out;
        for (int i = 0; i < u.size(); ++i) u[i] += g(rng);
        EXPECT_LE(f, oracle::slope_prox_objective(u, v, w) + 1e-10);
    }
}

TEST(ProxSlope, PreservesMagnitudeOrder)
{
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 50; ++rep) {
        const Vec v = random_vec(rng, 10);
        const auto w = random_weights(rng, 10);
        const Vec out = cpsvm::prox_slope(v, w);
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j)
                if (std::abs(v[i]) >= std::abs(v[j])) EXPECT_GE(std::abs(out[i]), std::abs(out[j]) - 1e-15);
    }
}

TEST(Prox, FirmlyNonexpansive)
{
    std::mt19937_64 rng(10);
    for (int rep = 0; rep < 100; ++rep) {
        const Vec a = random_vec(rng, 7), b = random_vec(rng, 7);
        const auto w = random_weights(rng, 7);
        const double d = (a - b).norm() + 1e-14;
        EXPECT_LE((cpsvm::soft_threshold(a, 0.5) - cpsvm::soft_threshold(b, 0.5)).norm(), d);
        EXPECT_LE((cpsvm::project_l1_ball(a, 1.5) - cpsvm::project_l1_ball(b, 1.5)).norm(), d);
        EXPECT_LE((cpsvm::prox_linf(a, 1.5) - cpsvm::prox_linf(b, 1.5)).norm(), d);
        EXPECT_LE((cpsvm::prox_slope(a, w) - cpsvm::prox_slope(b, w)).norm(), d);
    }
}

TEST(SlopeNorm, Basics)
{
    std::mt19937_64 rng(11);
    const Vec b = random_vec(rng, 6);
    EXPECT_NEAR(cpsvm::slope_norm(b, std::vector<double>(6, 0.3)), 0.3 * b.lpNorm<1>(), 1e-14);
    const std::vector<double> w{3.0, 2.0, 1.0};
    Vec e = Vec::Zero(3);
    e[2] = 1.0;
    EXPECT_DOUBLE_EQ(cpsvm::slope_norm(e, w), 3.0);
}

TEST(SlopeNorm, SortedPairingDominatesPermutations)
{
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        const Vec b = random_vec(rng, 8);
        const auto w = random_weights(rng, 8);
        const double s = cpsvm::slope_norm(b, w);
        std::vector<int> perm(8);
        std::iota(perm.begin(), perm.end(), 0);
        for (int k = 0; k < 500; ++k) {
            std::shuffle(perm.begin(), perm.end(), rng);
            double t = 0.0;
            for (int j = 0; j < 8; ++j) t += w[perm[j]] * std::abs(b[j]);
            EXPECT_LE(t, s + 1e-12);
        }
    }
}
