#pragma once
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include <pwlarsen/error.hpp>
#include <pwlarsen/model.hpp>

// Slow reference solvers for the elastic net. Nothing in the path code
// depends on this header; it exists so tests can check the path code
// against an independent route.

namespace pwlarsen {

struct CdOptions
{
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    std::optional<VectorXd> init;
    /// Called after every full sweep with the sweep count and current iterate.
    std::function<void(std::size_t, const VectorXd&)> on_sweep;
};

namespace detail {

/// Gram-form cyclic coordinate descent; reused across many lambdas.
class CdSolver
{
public:
    explicit CdSolver(const Dataset& d)
        : gram_(d.X().transpose() * d.X()), xty_(d.X().transpose() * d.y())
    {}

    VectorXd solve(double lambda, double alpha, const CdOptions& opt) const
    {
        detail::require(alpha > 0.0 && alpha <= 1.0, ErrorKind::AlphaOutOfRange, "alpha must lie in (0, 1]");
        detail::require(lambda >= 0.0, ErrorKind::InvalidArgument, "lambda must be >= 0");
        const Index p = xty_.size();
        const double l1 = lambda * alpha;
        const double l2 = alpha == 1.0 ? 0.0 : lambda * (1.0 - alpha);
        VectorXd beta = opt.init ? *opt.init : VectorXd::Zero(p);
        detail::require(beta.size() == p, ErrorKind::DimensionMismatch, "initial beta has wrong length");
        // grad = X'y - X'X beta, kept in sync with every coordinate move
        VectorXd grad = xty_ - gram_ * beta;

        for (std::size_t it = 1; it <= opt.max_iter; ++it) {
            double max_change = 0.0;
            for (Index j = 0; j < p; ++j) {
                const double gjj = gram_(j, j);
                const double z = grad[j] + gjj * beta[j];
                const double next = soft_threshold(z, l1) / (gjj + l2);
                const double delta = next - beta[j];
                if (delta != 0.0) {
                    grad -= delta * gram_.col(j);
                    beta[j] = next;
                    max_change = std::max(max_change, std::abs(delta));
                }
            }
            if (opt.on_sweep) opt.on_sweep(it, beta);
            if (max_change < opt.tol) {
                grad = xty_ - gram_ * beta;
                if (kkt(beta, grad, l1, l2) <= 10.0 * opt.tol) return beta;
            }
        }
        grad = xty_ - gram_ * beta;
        throw NotConvergedError(opt.max_iter, beta, kkt(beta, grad, l1, l2));
    }

private:
    static double kkt(const VectorXd& beta, const VectorXd& grad, double l1, double l2)
    {
        double worst = 0.0;
        for (Index j = 0; j < beta.size(); ++j) {
            if (beta[j] != 0.0)
                worst = std::max(worst, std::abs(grad[j] - l2 * beta[j] - l1 * (beta[j] > 0 ? 1.0 : -1.0)));
            else
                worst = std::max(worst, std::abs(grad[j]) - l1);
        }
        return worst;
    }

    MatrixXd gram_;
    VectorXd xty_;
};

} // namespace detail

/**
 * Cyclic coordinate descent (order 1..p) on the elastic net objective.
 * Each update is beta_j <- S(x_j'r_j, lambda alpha) / (||x_j||^2 + lambda (1 - alpha)),
 * which reduces to the familiar unit-norm form on standardized data.
 * Stops when the largest coefficient change in a sweep is below tol and the
 * KKT residual is within 10 * tol.
 */
inline VectorXd en_solve_cd(const Dataset& d, double lambda, double alpha, const CdOptions& opt)
{
    return detail::CdSolver(d).solve(lambda, alpha, opt);
}

inline VectorXd en_solve_cd(const Dataset& d, double lambda, double alpha,
                            double tol = 1e-10, std::size_t max_iter = 100000)
{
    CdOptions opt;
    opt.tol = tol;
    opt.max_iter = max_iter;
    return en_solve_cd(d, lambda, alpha, opt);
}

/// Closed-form elastic net for X'X = I: S(x_j'y, lambda alpha) / (1 + lambda (1 - alpha)).
inline VectorXd en_solve_orthonormal(const Dataset& d, double lambda, double alpha)
{
    detail::require(alpha > 0.0 && alpha <= 1.0, ErrorKind::AlphaOutOfRange, "alpha must lie in (0, 1]");
    const MatrixXd G = d.X().transpose() * d.X();
    const double dev = (G - MatrixXd::Identity(d.p(), d.p())).cwiseAbs().maxCoeff();
    if (dev > 1e-8)
        throw Error(ErrorKind::NotOrthonormal, "X'X deviates from identity by " + std::to_string(dev));
    const VectorXd z = d.X().transpose() * d.y();
    const double denom = 1.0 + (alpha == 1.0 ? 0.0 : lambda * (1.0 - alpha));
    VectorXd beta(d.p());
    for (Index j = 0; j < d.p(); ++j) beta[j] = soft_threshold(z[j], lambda * alpha) / denom;
    return beta;
}

/// Support change detected between two adjacent grid points.
struct ApproxKnot
{
    double lambda;      // midpoint of the bracketing grid cell
    double upper;       // grid point above (old support)
    double lower;       // grid point below (new support)
    std::vector<Index> entered;
    std::vector<Index> left;
};

/**
 * Grid-scan knot finder: solves the elastic net by coordinate descent on the
 * descending grid lambda_max, lambda_max - step, ... > 0 (warm-started) and
 * reports each cell across which the support changes. The scan stops below
 * lambda_min, so a window around a suspected knot can be checked cheaply.
 */
inline std::vector<ApproxKnot> knots_bruteforce(const Dataset& d, double alpha, double lambda_max,
                                                double step, double tol = 1e-10, double lambda_min = 0.0)
{
    detail::require(step > 0.0, ErrorKind::InvalidArgument, "step must be > 0");
    detail::require(lambda_max > 0.0, ErrorKind::InvalidArgument, "lambda_max must be > 0");
    const detail::CdSolver solver(d);
    CdOptions opt;
    opt.tol = tol;
    VectorXd prev = solver.solve(lambda_max, alpha, opt);
    std::vector<ApproxKnot> out;
    const auto cells = static_cast<long>(std::floor(lambda_max / step));
    for (long i = 1; i <= cells; ++i) {
        const double lam = lambda_max - static_cast<double>(i) * step;
        if (lam <= 0.0 || lam < lambda_min) break;
        opt.init = prev;
        VectorXd cur = solver.solve(lam, alpha, opt);
        ApproxKnot k{lam + 0.5 * step, lam + step, lam, {}, {}};
        for (Index j = 0; j < d.p(); ++j) {
            const bool was = prev[j] != 0.0;
            const bool is = cur[j] != 0.0;
            if (is && !was) k.entered.push_back(j);
            if (was && !is) k.left.push_back(j);
        }
        if (!k.entered.empty() || !k.left.empty()) out.push_back(std::move(k));
        prev = std::move(cur);
    }
    return out;
}

} // namespace pwlarsen
