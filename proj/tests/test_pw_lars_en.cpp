#include <gtest/gtest.h>

#include <pwlarsen/en_oracle.hpp>
#include <pwlarsen/pw_lars_en.hpp>

#include "support.hpp"

using namespace pwlarsen;

namespace {

/// lambda_k(alpha) iterated to the fixed point eta = lambda (1 - alpha).
EnKnot fixed_point_knot(const Dataset& d, double alpha, std::size_t k)
{
    EnKnot kn = en_knot_at(d, alpha, 0.0, k);
    for (int it = 0; it < 100; ++it) {
        EnKnot next = en_knot_at(d, alpha, kn.lambda * (1.0 - alpha), k);
        const double change = std::abs(next.lambda - kn.lambda);
        kn = std::move(next);
        if (change < 1e-12) break;
    }
    return kn;
}

} // namespace

TEST(AlphaGridTest, DefaultGrid)
{
    const AlphaGrid g = AlphaGrid::uniform();
    ASSERT_EQ(g.size(), 51u);
    EXPECT_EQ(g[0], 1.0);
    EXPECT_EQ(g[50], 0.5);
    EXPECT_EQ(g.index_of(0.9), 10u);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LT(g[i], g[i - 1]);
    EXPECT_FALSE(g.find(0.905).has_value());
    try {
        (void)g.index_of(0.905);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::AlphaNotInGrid);
    }
}

TEST(AlphaGridTest, Validation)
{
    EXPECT_THROW(AlphaGrid({0.9, 0.8}), Error);
    EXPECT_THROW(AlphaGrid({1.0, 0.8, 0.8}), Error);
    EXPECT_THROW(AlphaGrid({1.0, 0.5, 0.0}), Error);
    EXPECT_NO_THROW(AlphaGrid({1.0}));
    EXPECT_THROW((void)AlphaGrid::uniform(0.0), Error);
}

TEST(Augment, Structure)
{
    const Dataset d = fixtures::random_dataset(10, 4, 1);
    const Dataset a0 = augment(d, 0.0);
    EXPECT_EQ(a0.n(), 14);
    EXPECT_EQ(a0.X().topRows(10), d.X());
    EXPECT_EQ(a0.X().bottomRows(4).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(a0.y().tail(4).cwiseAbs().maxCoeff(), 0.0);

    const Dataset a = augment(d, 0.44);
    for (Index j = 0; j < 4; ++j) EXPECT_NEAR(a.X().col(j).squaredNorm(), 1.44, 1e-12);
    EXPECT_FALSE(a.standardized());
    EXPECT_EQ(a.max_active(), 4);
    try {
        (void)augment(d, -0.1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NegativeEta);
    }
}

TEST(EnKnotAt, LassoReduction)
{
    const Dataset d = fixtures::random_dataset(30, 6, 2);
    const KnotPath path = lars_path(d, 6);
    for (std::size_t k = 0; k <= 4; ++k) {
        const EnKnot kn = en_knot_at(d, 1.0, 0.0, k);
        const Knot ref = extract_knot(path, k);
        EXPECT_EQ(kn.lambda, ref.lambda);
        EXPECT_EQ(kn.beta, ref.beta);
    }
}

TEST(EnKnotAt, FixedPointSatisfiesKkt)
{
    const Dataset d = fixtures::random_dataset(30, 6, 3);
    for (double alpha : {0.9, 0.7, 0.5}) {
        const EnKnot k1 = fixed_point_knot(d, alpha, 1);
        const ENParams par(k1.lambda, alpha);
        EXPECT_EQ(support_of(k1.beta).size(), 1u);
        const auto r = kkt_residual(d, k1.beta, par);
        EXPECT_LE(r.active_violation, 1e-9);
        EXPECT_LE(r.inactive_excess, 1e-9);
        // the second predictor is exactly at its entry threshold
        const VectorXd c = d.X().transpose() * (d.y() - d.X() * k1.beta);
        EXPECT_NEAR(std::abs(c[k1.event.predictor]), par.gamma(), 1e-9);
    }
}

TEST(EnKnotAt, FixedPointMatchesOracle)
{
    const Dataset d = fixtures::random_dataset(30, 6, 4);
    for (std::size_t k = 1; k <= 5; ++k) {
        const EnKnot kn = fixed_point_knot(d, 0.9, k);
        const VectorXd cd = en_solve_cd(d, kn.lambda, 0.9, 1e-12, 1000000);
        EXPECT_LE((cd - kn.beta).cwiseAbs().maxCoeff(), 1e-5) << "k = " << k;
    }
}

TEST(PwLarsEn, DegenerateGridIsLasso)
{
    const Dataset d = fixtures::random_dataset(30, 6, 5);
    const PathGrid pg = pw_lars_en(d, AlphaGrid({1.0}), 4);
    ASSERT_EQ(pg.paths.size(), 1u);
    const KnotPath ref = lars_path(d, 4);
    EXPECT_EQ(pg.paths[0].knots, ref.knots);
    EXPECT_EQ(pg.paths[0].events, ref.events);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_EQ(pg.paths[0].betas[i], ref.betas[i]);
}

TEST(PwLarsEn, LambdaZeroAnalytic)
{
    const Dataset d = fixtures::random_dataset(30, 6, 6);
    const PathGrid pg = pw_lars_en(d, AlphaGrid::uniform(0.5), 3);
    for (std::size_t i = 0; i < pg.grid.size(); ++i)
        EXPECT_DOUBLE_EQ(pg.paths[i].knots[0], lambda0(d, pg.grid[i]).lambda0);
}

TEST(PwLarsEn, RefinedKnotsSatisfyKktAndSupportChange)
{
    for (std::uint64_t seed = 10; seed < 14; ++seed) {
        const Dataset d = fixtures::random_dataset(30, 6, seed);
        PwOptions opt;
        opt.refine = true;
        const PathGrid pg = pw_lars_en(d, AlphaGrid::uniform(0.5), 6, opt);
        for (double alpha : {0.9, 0.7, 0.5}) {
            const KnotPath& path = pg.at(alpha);
            for (std::size_t i = 1; i < path.size(); ++i) {
                const double lam = path.knots[i];
                if (lam == 0.0) continue;
                EXPECT_LE(kkt_residual(d, path.betas[i], ENParams(lam, alpha)).worst(), 1e-6);
                const double eps = 1e-6 * lam;
                const auto above = support_of(en_solve_cd(d, lam + eps, alpha, 1e-13, 1000000)).size();
                const auto below = support_of(en_solve_cd(d, lam - eps, alpha, 1e-13, 1000000)).size();
                const std::size_t expected = path.events[i].type == EventType::Drop ? above - 1 : above + 1;
                EXPECT_EQ(below, expected) << "alpha " << alpha << " knot " << i;
            }
        }
    }
}

TEST(PwLarsEn, OneStepCloseToFixedPoint)
{
    const Dataset d = fixtures::random_dataset(30, 6, 20);
    PwOptions opt;
    opt.refine = true;
    const PathGrid refined = pw_lars_en(d, AlphaGrid::uniform(0.5), 6, opt);
    const PathGrid one_step = pw_lars_en(d, AlphaGrid::uniform(0.5), 6);
    for (std::size_t i = 0; i < refined.grid.size(); ++i) {
        const auto& a = refined.paths[i].knots;
        const auto& b = one_step.paths[i].knots;
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (a[k] == 0.0) continue;
            EXPECT_LE(std::abs(a[k] - b[k]) / a[k], 1e-2) << "alpha " << refined.grid[i] << " k " << k;
        }
    }
    EXPECT_TRUE(refined.warnings.empty());
}

TEST(PwLarsEn, CoarseGridWarns)
{
    const Dataset d = fixtures::random_dataset(30, 6, 21);
    PwOptions opt;
    opt.refine = true;
    const PathGrid pg = pw_lars_en(d, AlphaGrid({1.0, 0.3}), 4, opt);
    ASSERT_FALSE(pg.warnings.empty());
    EXPECT_NE(pg.warnings[0].find("GridTooCoarse"), std::string::npos);
}

TEST(PwLarsEn, OrthonormalFigureOneSetup)
{
    VectorXd z(10);
    z << 6.0, -5.0, 4.0, 3.5, -3.0, 0.9, -0.6, 0.4, 0.25, -0.1;
    const Dataset d = fixtures::orthonormal_dataset(100, 10, 30, z);
    PwOptions opt;
    opt.refine = true;
    const PathGrid pg = pw_lars_en(d, AlphaGrid::uniform(0.5), 10, opt);
    for (double alpha : {1.0, 0.9, 0.5}) {
        const KnotPath& path = pg.at(alpha);
        ASSERT_EQ(path.size(), 11u) << "alpha " << alpha; // ten entries plus the end of the path
        for (std::size_t k = 0; k < 10; ++k)
            EXPECT_NEAR(path.knots[k] * alpha, std::abs(z[static_cast<Index>(k)]), 1e-8);
        for (std::size_t k = 1; k < 10; ++k) {
            const VectorXd b = en_solve_orthonormal(d, path.knots[k], alpha);
            EXPECT_LE((b - path.betas[k]).cwiseAbs().maxCoeff(), 1e-8);
        }
    }
}

TEST(PwLarsEn, CoefficientsBetweenKnots)
{
    const Dataset d = fixtures::random_dataset(30, 6, 40);
    PwOptions opt;
    opt.refine = true;
    const PathGrid pg = pw_lars_en(d, AlphaGrid::uniform(0.7), 6, opt);
    for (double alpha : {1.0, 0.85, 0.7}) {
        const KnotPath& path = pg.at(alpha);
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            const double lam = 0.5 * (path.knots[i] + path.knots[i + 1]);
            if (lam <= 0.0) continue;
            const VectorXd cd = en_solve_cd(d, lam, alpha, 1e-13, 1000000);
            EXPECT_LE((en_coefficients_at(d, path, lam) - cd).cwiseAbs().maxCoeff(), 1e-6);
        }
    }
}

TEST(EnPathExact, AlphaOneIsLars)
{
    const Dataset d = fixtures::random_dataset(25, 5, 50);
    const KnotPath a = en_path_exact(d, 1.0, 5);
    const KnotPath b = lars_path(d, 5);
    EXPECT_EQ(a.knots, b.knots);
    EXPECT_EQ(a.events, b.events);
}

TEST(EnPathExact, MatchesGridScanIncludingDrops)
{
    // n = 40, p = 7 with four signals: at alpha = 0.5 predictor 7 enters and
    // later leaves the active set before re-entering
    const Dataset d = fixtures::random_dataset(40, 7, 1015, 4);
    const double alpha = 0.5;
    const KnotPath path = en_path_exact(d, alpha, 10); // room for the re-entry
    const double step = 1e-4;
    const auto scan = knots_bruteforce(d, alpha, path.knots.front() * (1.0 - 1e-9), step, 1e-13);
    std::vector<std::pair<double, KnotEvent>> seen;
    for (const auto& a : scan) {
        for (Index j : a.entered) seen.emplace_back(a.lambda, KnotEvent::enter(j));
        for (Index j : a.left) seen.emplace_back(a.lambda, KnotEvent::drop(j));
    }
    ASSERT_EQ(path.events.back(), KnotEvent::end());
    ASSERT_EQ(seen.size() + 2, path.size()); // plus lambda_0 and the end of the path
    bool dropped = false;
    for (std::size_t i = 0; i < seen.size(); ++i) {
        EXPECT_EQ(path.events[i + 1], seen[i].second) << "event " << i;
        EXPECT_NEAR(path.knots[i + 1], seen[i].first, step);
        dropped = dropped || seen[i].second.type == EventType::Drop;
    }
    EXPECT_TRUE(dropped);
    for (std::size_t i = 1; i + 1 < path.size(); ++i)
        EXPECT_LE(kkt_residual(d, path.betas[i], ENParams(path.knots[i], alpha)).worst(), 1e-10);
}

TEST(EnPathExact, StopsAfterKEntries)
{
    const Dataset d = fixtures::random_dataset(30, 8, 51);
    const KnotPath path = en_path_exact(d, 0.7, 3);
    EXPECT_EQ(path.entry_count(), 4u);
    EXPECT_NE(path.events.back().type, EventType::End);
    EXPECT_THROW((void)en_path_exact(d, 0.0, 3), Error);
    EXPECT_THROW((void)en_path_exact(d, 0.7, 0), Error);
}
