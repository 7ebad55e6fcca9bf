#include <random>

#include <gtest/gtest.h>

#include <pwlarsen/en_oracle.hpp>
#include <pwlarsen/model.hpp>
#include <pwlarsen/pw_lars_en.hpp>

#include "support.hpp"

using namespace pwlarsen;

TEST(Standardize, UnitNormColumn)
{
    MatrixXd X(3, 1);
    X << 3, 4, 0;
    VectorXd y(3);
    y << 1, 2, 3;
    const Dataset d = standardize(Dataset(X, y));
    EXPECT_DOUBLE_EQ(d.X().col(0).squaredNorm(), 1.0);
    EXPECT_NEAR(d.X().col(0).sum(), 0.0, 1e-15);
    EXPECT_NEAR(d.y().sum(), 0.0, 1e-15);
    EXPECT_TRUE(d.standardized());
    EXPECT_DOUBLE_EQ(d.y_mean(), 2.0);
}

TEST(Standardize, Idempotent)
{
    const Dataset d = fixtures::random_dataset(20, 5, 11);
    const Dataset d2 = standardize(d);
    EXPECT_LE((d.X() - d2.X()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((d.y() - d2.y()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((d.col_norms() - d2.col_norms()).cwiseAbs().maxCoeff(), 1e-12 * d.col_norms().maxCoeff());
    EXPECT_LE((d.col_means() - d2.col_means()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardize, BackTransformReproducesRawLeastSquares)
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    MatrixXd X(20, 5);
    VectorXd y(20);
    for (Index i = 0; i < 20; ++i) {
        for (Index j = 0; j < 5; ++j) X(i, j) = 3.0 * z(rng) + static_cast<double>(j);
        y[i] = 2.0 + z(rng);
    }
    const Dataset raw(X, y);
    const Dataset d = standardize(raw);

    // raw LS with intercept through the normal equations
    MatrixXd X1(20, 6);
    X1 << VectorXd::Ones(20), X;
    const VectorXd b_raw = (X1.transpose() * X1).ldlt().solve(X1.transpose() * y);
    const VectorXd b_std = (d.X().transpose() * d.X()).ldlt().solve(d.X().transpose() * d.y());

    const VectorXd b_back = to_original_scale(d, b_std);
    EXPECT_LE((b_back - b_raw.tail(5)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(original_intercept(d, b_std), b_raw[0], 1e-8);
    const VectorXd fit_raw = X1 * b_raw;
    const VectorXd fit_std = (d.X() * b_std).array() + d.y_mean();
    EXPECT_LE((fit_raw - fit_std).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Standardize, ZeroVarianceColumnRejected)
{
    MatrixXd X(4, 2);
    X << 1, 5, 2, 5, 3, 5, 4, 5;
    VectorXd y = VectorXd::LinSpaced(4, 0, 1);
    try {
        (void)standardize(Dataset(X, y));
        FAIL() << "expected ZeroVarianceColumn";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroVarianceColumn);
        EXPECT_NE(std::string(e.what()).find("column 2"), std::string::npos);
    }
}

TEST(Dataset, RejectsBadInput)
{
    EXPECT_THROW(Dataset(MatrixXd::Ones(3, 2), VectorXd::Ones(4)), Error);
    MatrixXd X = MatrixXd::Ones(3, 2);
    X(1, 1) = std::numeric_limits<double>::quiet_NaN();
    try {
        Dataset d(X, VectorXd::Ones(3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonFiniteInput);
    }
}

TEST(ENParams, DerivedFields)
{
    const ENParams a(2.0, 0.7);
    EXPECT_DOUBLE_EQ(a.gamma(), 2.0 * 0.7);
    EXPECT_NEAR(a.gamma() + a.eta(), 2.0, 1e-15);
    EXPECT_EQ(ENParams(3.0, 1.0).eta(), 0.0);
    try {
        ENParams bad(1.0, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::AlphaOutOfRange);
    }
    EXPECT_THROW(ENParams(1.0, 1.2), Error);
    EXPECT_THROW(ENParams(-1.0, 0.5), Error);
}

TEST(ActiveSet, AddRemoveKeepsSignsAligned)
{
    ActiveSet a;
    a.add(3, -1);
    a.add(1, 1);
    a.add(5, 1);
    a.remove(1);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a.indices[1], 5);
    EXPECT_EQ(a.signs[0], -1);
    EXPECT_THROW(a.add(3, 1), Error);
    EXPECT_THROW(a.remove(7), Error);
    EXPECT_EQ(a.sorted(), (std::vector<Index>{3, 5}));
}

TEST(Objective, ZeroAndLassoReductions)
{
    const Dataset d = fixtures::random_dataset(15, 4, 2);
    EXPECT_DOUBLE_EQ(en_objective(d, VectorXd::Zero(4), ENParams(1.3, 0.4)), 0.5 * d.y().squaredNorm());
    VectorXd b(4);
    b << 0.3, -0.2, 0.0, 1.1;
    const double lasso = 0.5 * (d.y() - d.X() * b).squaredNorm() + 0.9 * b.lpNorm<1>();
    EXPECT_NEAR(en_objective(d, b, ENParams(0.9, 1.0)), lasso, 1e-13);
    EXPECT_THROW((void)en_objective(d, VectorXd::Zero(3), ENParams(1.0, 1.0)), Error);
}

TEST(Objective, MatchesAugmentedForm)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 25; ++rep) {
        const Dataset d = fixtures::random_dataset(12, 5, 100 + static_cast<std::uint64_t>(rep));
        VectorXd b(5);
        for (Index j = 0; j < 5; ++j) b[j] = u(rng);
        const ENParams par(2.0 * (u(rng) + 1.0), 0.5 * (u(rng) + 1.0) + 0.01);
        const Dataset a = augment(d, par.eta());
        const double aug = 0.5 * (a.y() - a.X() * b).squaredNorm() + par.gamma() * b.lpNorm<1>();
        EXPECT_NEAR(en_objective(d, b, par), aug, 1e-10);
    }
}

TEST(Kkt, ZeroAboveLambdaZero)
{
    const Dataset d = fixtures::random_dataset(30, 6, 3);
    const double lam0 = (d.X().transpose() * d.y()).cwiseAbs().maxCoeff();
    for (double alpha : {1.0, 0.8, 0.5}) {
        const auto r = kkt_residual(d, VectorXd::Zero(6), ENParams(lam0 / alpha, alpha));
        EXPECT_LE(r.active_violation, 1e-10);
        EXPECT_LE(r.inactive_excess, 1e-10);
    }
}

TEST(Kkt, LeastSquaresAtLambdaZero)
{
    const Dataset d = fixtures::random_dataset(30, 6, 4);
    const VectorXd b = (d.X().transpose() * d.X()).ldlt().solve(d.X().transpose() * d.y());
    EXPECT_LE(kkt_residual(d, b, ENParams(0.0, 1.0)).active_violation, 1e-8);
}

TEST(Kkt, OracleSolutionAndPerturbation)
{
    std::mt19937_64 rng(23);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 10; ++rep) {
        const Dataset d = fixtures::random_dataset(25, 6, 200 + static_cast<std::uint64_t>(rep));
        const double lam0 = (d.X().transpose() * d.y()).cwiseAbs().maxCoeff();
        const double alpha = rep % 2 == 0 ? 1.0 : 0.6;
        const ENParams par(0.3 * lam0, alpha);
        const VectorXd b = en_solve_cd(d, par.lambda(), alpha);
        EXPECT_TRUE(kkt_residual(d, b, par).within(1e-6));
        const double f0 = en_objective(d, b, par);
        for (int t = 0; t < 100; ++t) {
            VectorXd delta(6);
            for (Index j = 0; j < 6; ++j) delta[j] = z(rng);
            delta *= 1e-4 / delta.norm();
            EXPECT_LE(f0, en_objective(d, b + delta, par) + 1e-12);
        }
    }
}

TEST(Kkt, DetectsNonOptimalPoint)
{
    const Dataset d = fixtures::random_dataset(25, 6, 9);
    VectorXd b = VectorXd::Zero(6);
    b[0] = 5.0;
    EXPECT_FALSE(kkt_residual(d, b, ENParams(0.1, 1.0)).within(1e-3));
}

TEST(RestrictColumns, KeepsOrderAndMetadata)
{
    const Dataset d = fixtures::random_dataset(10, 4, 6);
    const std::vector<Index> cols{2, 0};
    const Dataset r = restrict_columns(d, cols);
    EXPECT_EQ(r.p(), 2);
    EXPECT_EQ(r.X().col(0), d.X().col(2));
    EXPECT_EQ(r.col_norms()[1], d.col_norms()[0]);
    EXPECT_TRUE(r.standardized());
}
