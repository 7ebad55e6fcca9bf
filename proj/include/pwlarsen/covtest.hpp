#pragma once
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <pwlarsen/error.hpp>
#include <pwlarsen/lars.hpp>
#include <pwlarsen/model.hpp>
#include <pwlarsen/pw_lars_en.hpp>
#include <pwlarsen/reference.hpp>

namespace pwlarsen {

struct CovTestResult
{
    std::size_t step = 0;          // k, zero-based
    Index entering_predictor = -1; // predictor tested at this step
    double statistic = 0.0;
    Reference reference;
    double p_value = 1.0;
    double sigma2_used = 1.0;
    bool sigma2_estimated = false;
    double alpha = 1.0;
};

/**
 * Unbiased residual variance of the full least-squares fit,
 * ||y - X b_LS||^2 / (n - p).
 */
inline double sigma_hat(const Dataset& d)
{
    if (d.n() <= d.p())
        throw Error(ErrorKind::Underdetermined,
                    "need n > p to estimate sigma^2 (n = " + std::to_string(d.n()) +
                    ", p = " + std::to_string(d.p()) + ")");
    Eigen::ColPivHouseholderQR<MatrixXd> qr(d.X());
    qr.setThreshold(1e-12);
    if (qr.rank() < d.p()) throw Error(ErrorKind::RankDeficient, "design is not of full column rank");
    const VectorXd b = qr.solve(d.y());
    return (d.y() - d.X() * b).squaredNorm() / static_cast<double>(d.n() - d.p());
}

namespace detail {

/// Lasso fit at penalty gamma on the columns A of the (possibly augmented) design.
inline VectorXd restricted_fit(const Dataset& d, const ActiveSet& A, double gamma, double eta,
                               const LarsOptions& opt)
{
    VectorXd full = VectorXd::Zero(d.p());
    if (A.empty()) return full;
    const Dataset sub = restrict_columns(d, A.indices);
    const std::size_t depth = 4 * static_cast<std::size_t>(sub.p()) + 4;
    const KnotPath path = eta == 0.0 ? lars_path(sub, depth, opt) : lars_path(augment(sub, eta), depth, opt);
    const VectorXd b = coefficients_at(path, gamma);
    for (std::size_t a = 0; a < A.size(); ++a) full[A.indices[a]] = b[static_cast<Index>(a)];
    return full;
}

inline CovTestResult covariance_statistic(const Dataset& d, const KnotPath& path, std::size_t k,
                                          double sigma2, double alpha, const LarsOptions& opt)
{
    detail::require(sigma2 > 0.0 && std::isfinite(sigma2), ErrorKind::NonpositiveSigma2,
                    "sigma^2 must be positive");
    const Knot at_k = extract_knot(path, k);
    const Knot next = extract_knot(path, k + 1);
    const double lam_next = next.lambda;
    // eta_{k+1} is tied to the found knot, not to the warm-start value the
    // augmented run used; the two agree once the path is refined.
    const double eta = alpha == 1.0 ? 0.0 : lam_next * (1.0 - alpha);
    const VectorXd restricted = restricted_fit(d, at_k.active_above, lam_next * alpha, eta, opt);

    const double full_cov = d.y().dot(d.X() * next.beta);
    const double restricted_cov = d.y().dot(d.X() * restricted);

    CovTestResult r;
    r.step = k;
    r.entering_predictor = at_k.event.type == EventType::Enter ? at_k.event.predictor : -1;
    r.statistic = (1.0 + eta) * (full_cov - restricted_cov) / sigma2;
    r.reference = Reference::exp(1.0);
    r.p_value = pvalue(r.statistic, r.reference);
    r.sigma2_used = sigma2;
    r.alpha = alpha;
    return r;
}

} // namespace detail

/**
 * Lasso covariance test statistic for the predictor entering at knot k:
 *   T_k = (<y, X b(lambda_{k+1})> - <y, X_A b_A(lambda_{k+1})>) / sigma^2
 * with A the active set just above lambda_k. The restricted fit is an exact
 * LARS path on the columns of A, interpolated at lambda_{k+1}.
 */
inline CovTestResult cov_test_lasso(const Dataset& d, const KnotPath& path, std::size_t k, double sigma2,
                                    const LarsOptions& opt = {})
{
    detail::require(path.alpha == 1.0, ErrorKind::InvalidArgument, "cov_test_lasso needs an alpha = 1 path");
    return detail::covariance_statistic(d, path, k, sigma2, 1.0, opt);
}

/**
 * Elastic net covariance test statistic at a grid alpha:
 *   T_k(alpha) = (1 + eta_{k+1}) / sigma^2 * (<y, X b(lambda_{k+1}, alpha)> - <y, X_A b_A(lambda_{k+1}, alpha)>)
 * with eta_{k+1} = lambda_{k+1}(alpha) (1 - alpha). The restricted fit solves the
 * augmented Lasso on A with that eta, evaluated at gamma = lambda_{k+1} alpha.
 * At alpha = 1 this is cov_test_lasso on the same path.
 */
inline CovTestResult cov_test_en(const Dataset& d, const PathGrid& pg, double alpha, std::size_t k,
                                 double sigma2, const LarsOptions& opt = {})
{
    const std::size_t i = pg.grid.index_of(alpha);
    if (i == 0) return cov_test_lasso(d, pg.paths[0], k, sigma2, opt);
    return detail::covariance_statistic(d, pg.paths[i], k, sigma2, pg.grid[i], opt);
}

/// Switches a known-sigma result to the estimated-sigma F(2, n - p) reference.
inline void use_estimated_sigma(CovTestResult& r, double df2)
{
    r.sigma2_estimated = true;
    r.reference = Reference::f(df2);
    r.p_value = pvalue(r.statistic, r.reference);
}

/**
 * Covariance tests for steps k = 0..K-1 at one alpha. With sigma2 given the
 * reference is Exp(1); otherwise sigma^2 is estimated by sigma_hat and the
 * reference is F(2, n - p). Stops early if the path has fewer knots.
 */
inline std::vector<CovTestResult> covtest_sequence(const Dataset& d, const PathGrid& pg, double alpha,
                                                   std::size_t K, std::optional<double> sigma2,
                                                   const LarsOptions& opt = {})
{
    const bool estimated = !sigma2.has_value();
    const double s2 = estimated ? sigma_hat(d) : *sigma2;
    const KnotPath& path = pg.paths[pg.grid.index_of(alpha)];
    std::vector<CovTestResult> out;
    for (std::size_t k = 0; k < K && k + 1 < path.entry_count(); ++k) {
        CovTestResult r = cov_test_en(d, pg, alpha, k, s2, opt);
        if (estimated) use_estimated_sigma(r, static_cast<double>(d.n() - d.p()));
        out.push_back(r);
    }
    return out;
}

/// Grid 1, 1 - step, ... that reaches alpha exactly (alpha appended if off-step).
inline AlphaGrid grid_reaching(double alpha, double step = AlphaGrid::default_step)
{
    AlphaGrid g = AlphaGrid::uniform(alpha, step);
    if (g.find(alpha)) return g;
    std::vector<double> v = g.values();
    v.push_back(alpha);
    return AlphaGrid(std::move(v), step);
}

inline std::vector<CovTestResult> covtest_sequence(const Dataset& d, double alpha, std::size_t K,
                                                   std::optional<double> sigma2, const PwOptions& opt = {})
{
    const PathGrid pg = pw_lars_en(d, grid_reaching(alpha), K, opt);
    return covtest_sequence(d, pg, alpha, K, sigma2, opt.lars);
}

} // namespace pwlarsen
