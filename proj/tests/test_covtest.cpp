#include <gtest/gtest.h>

#include <pwlarsen/covtest.hpp>
#include <pwlarsen/en_oracle.hpp>
#include <pwlarsen/io.hpp>

#include "support.hpp"

using namespace pwlarsen;

TEST(SigmaHat, PerfectFitAndProjection)
{
    const Dataset base = fixtures::random_dataset(30, 4, 1);
    VectorXd b(4);
    b << 1, -2, 0.5, 3;
    EXPECT_NEAR(sigma_hat(Dataset(base.X(), base.X() * b)), 0.0, 1e-25);

    VectorXd z = VectorXd::Zero(8);
    const Dataset d = fixtures::orthonormal_dataset(100, 8, 2, z);
    const VectorXd resid = d.y() - d.X() * (d.X().transpose() * d.y());
    EXPECT_NEAR(sigma_hat(d), resid.squaredNorm() / 92.0, 1e-14);
}

TEST(SigmaHat, NormalEquationsOracle)
{
    const Dataset d = fixtures::random_dataset(40, 6, 3);
    const VectorXd b = (d.X().transpose() * d.X()).ldlt().solve(d.X().transpose() * d.y());
    EXPECT_NEAR(sigma_hat(d), (d.y() - d.X() * b).squaredNorm() / 34.0, 1e-8);
}

TEST(SigmaHat, Errors)
{
    try {
        (void)sigma_hat(fixtures::random_dataset(5, 5, 4));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Underdetermined);
    }
    MatrixXd X = MatrixXd::Random(10, 3);
    X.col(2) = X.col(0) + X.col(1);
    try {
        (void)sigma_hat(Dataset(X, VectorXd::Random(10)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
    }
}

TEST(CovTestLasso, FirstStepHasEmptyRestrictedFit)
{
    const Dataset d = fixtures::random_dataset(30, 6, 5);
    const KnotPath path = lars_path(d, 6);
    const CovTestResult r = cov_test_lasso(d, path, 0, 2.0);
    const Knot k1 = extract_knot(path, 1);
    EXPECT_NEAR(r.statistic, d.y().dot(d.X() * k1.beta) / 2.0, 1e-12);
    EXPECT_EQ(r.entering_predictor, path.events[0].predictor);
    EXPECT_EQ(r.reference, Reference::exp(1.0));
    EXPECT_NEAR(r.p_value, std::exp(-r.statistic), 1e-15);
}

TEST(CovTestLasso, OrthonormalClosedForm)
{
    VectorXd z(6);
    z << 3.1, -2.4, 1.7, 1.1, -0.6, 0.2;
    const Dataset d = fixtures::orthonormal_dataset(50, 6, 6, z);
    const KnotPath path = lars_path(d, 10);
    for (std::size_t k = 0; k + 1 < path.entry_count(); ++k) {
        const double lk = path.knots[k];
        const double lk1 = path.knots[k + 1];
        EXPECT_NEAR(cov_test_lasso(d, path, k, 1.0).statistic, lk * (lk - lk1), 1e-10) << "k = " << k;
    }
}

TEST(CovTestLasso, ZeroWhenNewCoefficientStaysZero)
{
    // predictors 2 and 3 tie, so the knot after predictor 2's entry coincides with it
    VectorXd z(3);
    z << 3.0, 2.0, 2.0;
    const Dataset d = fixtures::orthonormal_dataset(20, 3, 7, z);
    const KnotPath path = lars_path(d, 5);
    EXPECT_NEAR(cov_test_lasso(d, path, 1, 1.0).statistic, 0.0, 1e-12);
}

TEST(CovTestLasso, Errors)
{
    const Dataset d = fixtures::random_dataset(30, 4, 8);
    const KnotPath path = lars_path(d, 2);
    try {
        (void)cov_test_lasso(d, path, 0, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonpositiveSigma2);
    }
    try {
        (void)cov_test_lasso(d, path, 5, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::KnotIndexOutOfRange);
    }
}

TEST(CovTestEn, AlphaOneIsLassoBitwise)
{
    const Dataset d = fixtures::random_dataset(30, 6, 9);
    const PathGrid pg = pw_lars_en(d, AlphaGrid::uniform(0.9), 4);
    for (std::size_t k = 0; k < 3; ++k) {
        const CovTestResult a = cov_test_en(d, pg, 1.0, k, 1.0);
        const CovTestResult b = cov_test_lasso(d, pg.paths[0], k, 1.0);
        EXPECT_EQ(a.statistic, b.statistic);
        EXPECT_EQ(a.p_value, b.p_value);
    }
    try {
        (void)cov_test_en(d, pg, 0.85, 0, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::AlphaNotInGrid);
    }
}

TEST(CovTestEn, MatchesOracleComputation)
{
    // the restricted path solve agrees with an independent coordinate-descent solve
    for (std::uint64_t seed = 20; seed < 24; ++seed) {
        const Dataset d = fixtures::random_dataset(35, 7, seed);
        const PathGrid pg = pw_lars_en(d, AlphaGrid::uniform(0.5), 4);
        for (double alpha : {0.9, 0.5}) {
            const KnotPath& path = pg.at(alpha);
            for (std::size_t k = 0; k < 3; ++k) {
                const CovTestResult r = cov_test_en(d, pg, alpha, k, 1.3);
                const Knot kk = extract_knot(path, k);
                const Knot next = extract_knot(path, k + 1);
                const double lam = next.lambda;
                const double eta = lam * (1.0 - alpha);
                double restricted = 0.0;
                if (!kk.active_above.empty()) {
                    const Dataset sub = restrict_columns(d, kk.active_above.indices);
                    const VectorXd b = en_solve_cd(sub, lam, alpha, 1e-13, 1000000);
                    restricted = sub.y().dot(sub.X() * b);
                }
                const double expected = (1.0 + eta) * (d.y().dot(d.X() * next.beta) - restricted) / 1.3;
                EXPECT_NEAR(r.statistic, expected, 1e-7) << "alpha " << alpha << " k " << k;
                EXPECT_GE(r.statistic, -1e-8);
            }
        }
    }
}

TEST(CovTestEn, OrthonormalMatchesLassoWhenRefined)
{
    VectorXd z(6);
    z << 3.1, -2.4, 1.7, 1.1, -0.6, 0.2;
    const Dataset d = fixtures::orthonormal_dataset(50, 6, 10, z);
    PwOptions opt;
    opt.refine = true;
    const PathGrid pg = pw_lars_en(d, AlphaGrid::uniform(0.5), 5, opt);
    for (std::size_t k = 0; k < 4; ++k) {
        const double lasso = cov_test_en(d, pg, 1.0, k, 1.0).statistic;
        for (double alpha : {0.9, 0.5}) EXPECT_NEAR(cov_test_en(d, pg, alpha, k, 1.0).statistic, lasso, 1e-6);
    }
}

TEST(CovTestSequence, EstimatedSigmaUsesF)
{
    const Dataset d = fixtures::random_dataset(40, 5, 11);
    const auto seq = covtest_sequence(d, 1.0, 4, std::nullopt);
    ASSERT_EQ(seq.size(), 4u);
    const double s2 = sigma_hat(d);
    for (const auto& r : seq) {
        EXPECT_TRUE(r.sigma2_estimated);
        EXPECT_EQ(r.reference, Reference::f(35));
        EXPECT_EQ(r.sigma2_used, s2);
        EXPECT_NEAR(r.p_value, std::pow(1.0 + 2.0 * std::max(r.statistic, 0.0) / 35.0, -17.5), 1e-12);
    }
    const auto known = covtest_sequence(d, 1.0, 4, 1.0);
    EXPECT_FALSE(known[0].sigma2_estimated);
    EXPECT_EQ(known[0].reference, Reference::exp(1.0));
}

TEST(CovTestSequence, OffGridAlphaIsAppended)
{
    const Dataset d = fixtures::random_dataset(40, 5, 12);
    const AlphaGrid g = grid_reaching(0.735);
    EXPECT_NEAR(g.values().back(), 0.735, 1e-15);
    EXPECT_EQ(covtest_sequence(d, 0.735, 3, 1.0).size(), 3u);
}

TEST(Prostate, TableTwoLasso)
{
    const Dataset d = standardize(io::load_prostate());
    const auto seq = covtest_sequence(d, 1.0, 8, std::nullopt);
    ASSERT_EQ(seq.size(), 8u);
    const Index order[] = {1, 2, 5, 4, 8, 3, 6, 7};
    for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(seq[k].entering_predictor + 1, order[k]);
    EXPECT_LT(seq[0].p_value, 0.0005);
    EXPECT_NEAR(seq[1].p_value, 0.052, 0.002);
    EXPECT_NEAR(seq[7].p_value, 0.978, 0.002);
    EXPECT_EQ(seq[0].reference, Reference::f(59));
}

TEST(Prostate, TableTwoElasticNetEarlySteps)
{
    const Dataset d = standardize(io::load_prostate());
    const auto s09 = covtest_sequence(d, 0.9, 8, std::nullopt);
    EXPECT_EQ(s09[0].entering_predictor, 0);
    EXPECT_EQ(s09[1].entering_predictor, 4);
    EXPECT_NEAR(s09[1].p_value, 0.464, 0.002);
    const auto s05 = covtest_sequence(d, 0.5, 8, std::nullopt);
    EXPECT_EQ(s05[1].entering_predictor, 4);
    EXPECT_NEAR(s05[1].p_value, 0.003, 0.001);
}
