#include <gtest/gtest.h>
#include <random>
#include <sstream>
#include <cpsvm/data/io.hpp>
#include <cpsvm/data/synth.hpp>

using namespace cpsvm;

namespace {

Mat random_mat(int n, int p, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Mat x(n, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) x(i, j) = nd(rng);
    return x;
}

Vec alternating(int n)
{
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = i % 2 ? -1.0 : 1.0;
    return y;
}

double corr(const Mat& x, int a, int b)
{
    const Vec u = x.col(a).array() - x.col(a).mean();
    const Vec v = x.col(b).array() - x.col(b).mean();
    return u.dot(v) / std::sqrt(u.squaredNorm() * v.squaredNorm());
}

} // namespace

TEST(Dataset, RejectsBadLabelsAndCounts)
{
    Vec y(2);
    y << 1, 0;
    EXPECT_THROW(Dataset(FeatureMatrix(Mat::Zero(2, 2)), y), DomainError);
    EXPECT_THROW(Dataset(FeatureMatrix(Mat::Zero(3, 2)), alternating(2)), DomainError);
    const Dataset one_class(FeatureMatrix(Mat::Zero(2, 1)), Vec::Ones(2));
    EXPECT_THROW(one_class.require_both_classes(), DomainError);
}

TEST(Svmlight, ReadsHandExample)
{
    std::istringstream in("+1 1:0.5 3:2.0\n-1 2:1.0\n");
    const auto d = read_svmlight(in);
    EXPECT_EQ(d.n(), 2);
    EXPECT_EQ(d.p(), 3);
    EXPECT_TRUE(d.features.is_sparse());
    EXPECT_EQ(d.features.coeff(0, 0), 0.5);
    EXPECT_EQ(d.features.coeff(0, 1), 0.0);
    EXPECT_EQ(d.features.coeff(0, 2), 2.0);
    EXPECT_EQ(d.features.coeff(1, 1), 1.0);
    EXPECT_EQ(d.labels, (Vec(2) << 1, -1).finished());
}

TEST(Svmlight, ErrorsCarryLineNumbers)
{
    std::istringstream empty("");
    EXPECT_THROW(read_svmlight(empty), ParseError);
    try {
        std::istringstream in("+1 1:1\n\n-1 3:1 2:4\n");
        read_svmlight(in);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    std::istringstream bad_pair("+1 1=2\n");
    EXPECT_THROW(read_svmlight(bad_pair), ParseError);
    std::istringstream three_labels("1 1:1\n2 1:1\n0 1:1\n");
    EXPECT_THROW(read_svmlight(three_labels), DomainError);
    std::istringstream too_wide("+1 4:1\n");
    EXPECT_THROW(read_svmlight(too_wide, 3), ParseError);
}

TEST(Svmlight, ZeroOneLabelsAndDimensionOverride)
{
    std::istringstream in("0 1:1 # comment\n1 2:3\n1 1:2\n");
    const auto d = read_svmlight(in, 5);
    EXPECT_EQ(d.p(), 5);
    EXPECT_EQ(d.labels, (Vec(3) << -1, 1, 1).finished());
}

TEST(Svmlight, RoundTripIsExact)
{
    Mat x = random_mat(15, 9, 3);
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 9; ++j)
            if ((i + 2 * j) % 3 == 0) x(i, j) = 0.0;
    const Dataset d(FeatureMatrix(SpMat(x.sparseView())), alternating(15));
    std::stringstream s;
    write_svmlight(s, d);
    const auto back = read_svmlight(s, 9);
    EXPECT_EQ(back.features.to_dense(), x);
    EXPECT_EQ(back.labels, d.labels);
}

TEST(Csv, HeaderAndLabelColumn)
{
    std::istringstream in("a,b,label\n1,2,1\n3,4.5,0\n");
    const auto d = read_csv(in);
    EXPECT_EQ(d.n(), 2);
    EXPECT_EQ(d.p(), 2);
    EXPECT_EQ(d.features.coeff(1, 1), 4.5);
    EXPECT_EQ(d.labels, (Vec(2) << 1, -1).finished());
    std::istringstream ragged("a,b,label\n1,2,1\n3,1\n");
    EXPECT_THROW(read_csv(ragged), ParseError);
}

TEST(GroupsFile, RoundTripAndValidation)
{
    std::istringstream in("0 2\n1\n\n3 4 5\n");
    const auto g = read_groups(in);
    ASSERT_EQ(g.size(), 3);
    EXPECT_NO_THROW(g.validate(6));
    EXPECT_THROW(g.validate(7), DomainError);
    std::stringstream s;
    write_groups(s, g);
    EXPECT_EQ(read_groups(s).groups, g.groups);
    EXPECT_THROW(GroupStructure({{0, 1}, {1, 2}}).validate(3), DomainError);
    EXPECT_THROW(GroupStructure({{0, 1}, {}, {2}}).validate(3), DomainError);
    EXPECT_EQ(g.group_of(6), (std::vector<int>{0, 1, 0, 2, 2, 2}));
}

TEST(SlopeWeightsFile, ValidatesOrder)
{
    std::istringstream ok("3\n2\n2\n0.5\n");
    const auto w = read_slope_weights(ok);
    EXPECT_EQ(w.size(), 4u);
    EXPECT_EQ(w.prefix(3), 7.0);
    std::istringstream bad("1\n2\n");
    EXPECT_THROW(read_slope_weights(bad), DomainError);
    EXPECT_THROW(SlopeWeights({1.0, -0.5}), DomainError);
}

TEST(SlopeWeights, Generators)
{
    const auto t = SlopeWeights::two_level(5, 2, 0.5);
    EXPECT_EQ(t.values(), (std::vector<double>{1.0, 1.0, 0.5, 0.5, 0.5}));
    const auto b = SlopeWeights::bh_log(4, 2.0);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(b[j], 2.0 * std::sqrt(std::log(8.0 / (j + 1.0))));
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_DOUBLE_EQ(b.prefix(k), s);
        s += b[k];
    }
    EXPECT_EQ(b.at_or_zero(7), 0.0);
}

TEST(Standardize, HandColumnZeroColumnAndIdempotence)
{
    Mat x(2, 3);
    x << 3, 0, 1, 4, 0, 0;
    const Dataset d(FeatureMatrix(x), alternating(2));
    const auto s = standardize_columns(d);
    EXPECT_NEAR(s.features.coeff(0, 0), 0.6, 1e-15);
    EXPECT_NEAR(s.features.coeff(1, 0), 0.8, 1e-15);
    EXPECT_EQ(s.features.coeff(0, 2), 1.0);
    EXPECT_EQ(s.zero_columns, (std::vector<int>{1}));
    EXPECT_EQ((*s.column_norms)[0], 5.0);
    const auto twice = standardize_columns(s);
    EXPECT_LE((twice.features.to_dense() - s.features.to_dense()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Standardize, UnitNormsDenseAndSparse)
{
    const Mat x = random_mat(30, 12, 4);
    for (const auto& fm : {FeatureMatrix(x), FeatureMatrix(SpMat(x.sparseView()))}) {
        const auto s = standardize_columns(Dataset(fm, alternating(30)));
        for (int j = 0; j < 12; ++j) EXPECT_NEAR(s.features.col_norm(j), 1.0, 1e-12);
    }
}

TEST(Synth, DeterministicAndBalanced)
{
    SynthConfig cfg;
    cfg.n = 31;
    cfg.p = 7;
    cfg.k0 = 3;
    cfg.seed = 5;
    const auto a = synth_gaussian(cfg), b = synth_gaussian(cfg);
    EXPECT_EQ(a.features.dense(), b.features.dense());
    EXPECT_EQ(a.count_positive(), 16);
    cfg.seed = 6;
    EXPECT_NE(synth_gaussian(cfg).features.dense(), a.features.dense());
    cfg.rho = 1.0;
    EXPECT_THROW(synth_gaussian(cfg), DomainError);
    cfg.rho = 0.1;
    cfg.k0 = 8;
    EXPECT_THROW(synth_gaussian(cfg), DomainError);
}

TEST(Synth, MomentsMatchPopulation)
{
    SynthConfig cfg;
    cfg.n = 10000;
    cfg.p = 5;
    cfg.k0 = 0;
    cfg.rho = 0.0;
    cfg.standardize = false;
    cfg.seed = 7;
    const Mat x = synth_gaussian(cfg).features.dense();
    // n = 1e4: sample moments within about 4 standard errors (0.04)
    for (int j = 0; j < 5; ++j) {
        EXPECT_NEAR(x.col(j).mean(), 0.0, 0.04);
        EXPECT_NEAR((x.col(j).array() - x.col(j).mean()).square().mean(), 1.0, 0.06);
        for (int k = j + 1; k < 5; ++k) EXPECT_NEAR(corr(x, j, k), 0.0, 0.04);
    }
    cfg.rho = 0.5;
    cfg.k0 = 2;
    const auto d = synth_gaussian(cfg);
    const Mat z = d.features.dense();
    EXPECT_NEAR(corr(z, 3, 4), 0.5, 0.04);
    // signal columns: class means +1 / -1
    double pos = 0.0;
    for (int i = 0; i < 5000; ++i) pos += z(i, 0);
    EXPECT_NEAR(pos / 5000, 1.0, 0.05);
}

TEST(Synth, ZeroSignalHasZeroMeans)
{
    SynthConfig cfg;
    cfg.n = 4000;
    cfg.p = 3;
    cfg.k0 = 0;
    cfg.standardize = false;
    const auto d = synth_gaussian(cfg);
    for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(d.features.dense().col(j).head(2000).mean(), 0.0, 0.08);
        EXPECT_NEAR(d.features.dense().col(j).tail(2000).mean(), 0.0, 0.08);
    }
}

TEST(SynthGroup, BlockCorrelationAndReduction)
{
    SynthConfig cfg;
    cfg.n = 10000;
    cfg.p = 6;
    cfg.num_groups = 2;
    cfg.group_size = 3;
    cfg.k0 = 0;
    cfg.rho = 0.6;
    cfg.standardize = false;
    const auto [d, groups] = synth_group_gaussian(cfg);
    const Mat x = d.features.dense();
    EXPECT_NEAR(corr(x, 0, 1), 0.6, 0.04);
    EXPECT_NEAR(corr(x, 3, 5), 0.6, 0.04);
    EXPECT_NEAR(corr(x, 0, 4), 0.0, 0.04);
    EXPECT_NEAR(corr(x, 2, 3), 0.0, 0.04);
    EXPECT_EQ(groups.groups, GroupStructure::contiguous(2, 3).groups);

    SynthConfig one = cfg;
    one.n = 50;
    one.num_groups = 1;
    one.group_size = 6;
    one.k0 = 1;
    SynthConfig plain = one;
    plain.num_groups = 0;
    plain.k0 = 6;
    EXPECT_EQ(synth_group_gaussian(one).first.features.dense(), synth_gaussian(plain).features.dense());

    cfg.group_size = 4;
    EXPECT_THROW(synth_group_gaussian(cfg), DomainError);
}

TEST(LambdaMax, HandAndBruteForce)
{
    Mat x(2, 2);
    x << 1, -2, 3, 0;
    Vec y(2);
    y << 1, -1;
    EXPECT_EQ(lambda_max_l1(Dataset(FeatureMatrix(x), y)), 4.0);
    EXPECT_EQ(lambda_max_l1(Dataset(FeatureMatrix(Mat::Zero(2, 3)), y)), 0.0);

    const Mat r = random_mat(20, 30, 8);
    const Dataset d(FeatureMatrix(SpMat(r.sparseView())), alternating(20));
    double best = 0.0;
    for (int j = 0; j < 30; ++j) {
        double s = 0.0;
        for (int i = 0; i < 20; ++i) s += std::abs(r(i, j));
        best = std::max(best, s);
    }
    EXPECT_NEAR(lambda_max_l1(d), best, 1e-12);
    EXPECT_NEAR(lambda_max_group(d, GroupStructure({[] {
                                       std::vector<int> all(30);
                                       std::iota(all.begin(), all.end(), 0);
                                       return all;
                                   }()})),
                r.cwiseAbs().sum(), 1e-10);
    EXPECT_EQ(lambda_max_group(d, GroupStructure::singletons(30)), lambda_max_l1(d));

    const auto groups = GroupStructure::contiguous(6, 5);
    double gbest = 0.0;
    for (int g = 0; g < 6; ++g) gbest = std::max(gbest, r.middleCols(5 * g, 5).cwiseAbs().sum());
    EXPECT_NEAR(lambda_max_group(d, groups), gbest, 1e-10);
}

TEST(LambdaMax, DualsAndZeroModel)
{
    Vec y(5);
    y << 1, 1, 1, -1, -1;
    const Dataset d(FeatureMatrix(Mat::Zero(5, 1)), y);
    EXPECT_EQ(lambda_max_duals(d), (Vec(5) << 2.0 / 3, 2.0 / 3, 2.0 / 3, 1, 1).finished());
    EXPECT_EQ(zero_model_objective(d), 4.0);
    EXPECT_EQ(zero_model_intercept(d), 1.0);
    // (1 - beta0)_+ * 3 + (1 + beta0)_+ * 2 at beta0 = 1
    EXPECT_EQ(d.hinge_loss(Vec::Zero(1), 1.0), 4.0);
}
