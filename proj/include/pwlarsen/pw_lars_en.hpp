#pragma once
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include <pwlarsen/en_path.hpp>
#include <pwlarsen/error.hpp>
#include <pwlarsen/lars.hpp>
#include <pwlarsen/model.hpp>

namespace pwlarsen {

/// Decreasing grid of elastic net mixing values starting at exactly 1.
class AlphaGrid
{
public:
    static constexpr double default_step = 0.01;
    static constexpr double default_min = 0.5;

    /// 1, 1 - step, 1 - 2 step, ... down to alpha_min (inclusive when it lands on the grid).
    static AlphaGrid uniform(double alpha_min = default_min, double step = default_step)
    {
        detail::require(step > 0.0 && step < 1.0, ErrorKind::InvalidArgument, "alpha step must lie in (0, 1)");
        detail::require(alpha_min > 0.0 && alpha_min <= 1.0, ErrorKind::AlphaOutOfRange,
                        "smallest alpha must lie in (0, 1]");
        std::vector<double> v;
        for (long i = 0;; ++i) {
            // snap to 12 decimals so 1 - 50 * 0.01 is exactly 0.5
            const double a = std::round((1.0 - static_cast<double>(i) * step) * 1e12) / 1e12;
            if (a < alpha_min - 1e-12 || a <= 0.0) break;
            v.push_back(a);
        }
        return AlphaGrid(std::move(v), step);
    }

    explicit AlphaGrid(std::vector<double> values, double step = default_step)
        : values_(std::move(values)), step_(step)
    {
        detail::require(!values_.empty() && values_.front() == 1.0, ErrorKind::InvalidArgument,
                        "alpha grid must start at exactly 1");
        for (std::size_t i = 1; i < values_.size(); ++i) {
            detail::require(values_[i] < values_[i - 1], ErrorKind::InvalidArgument,
                            "alpha grid must be strictly decreasing");
            detail::require(values_[i] > 0.0, ErrorKind::AlphaOutOfRange, "alpha grid values must be > 0");
        }
    }

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_.at(i); }
    double step() const noexcept { return step_; }

    std::optional<std::size_t> find(double alpha) const noexcept
    {
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (std::abs(values_[i] - alpha) <= 1e-9) return i;
        return std::nullopt;
    }

    std::size_t index_of(double alpha) const
    {
        if (auto i = find(alpha)) return *i;
        throw Error(ErrorKind::AlphaNotInGrid, "alpha " + std::to_string(alpha) + " is not on the grid");
    }

private:
    std::vector<double> values_;
    double step_;
};

/**
 * Augmented design of the elastic net: y_a = (y; 0), X_a = (X; sqrt(eta) I).
 * Columns keep norm sqrt(||x_j||^2 + eta); nothing is re-normalized.
 */
inline Dataset augment(const Dataset& d, double eta)
{
    detail::require(eta >= 0.0 && std::isfinite(eta), ErrorKind::NegativeEta,
                    "eta must be finite and >= 0, got " + std::to_string(eta));
    const Index n = d.n();
    const Index p = d.p();
    MatrixXd Xa(n + p, p);
    Xa.topRows(n) = d.X();
    Xa.bottomRows(p) = std::sqrt(eta) * MatrixXd::Identity(p, p);
    VectorXd ya = VectorXd::Zero(n + p);
    ya.head(n) = d.y();
    Transform tf = d.transform();
    tf.standardized = false;
    tf.rank_deficit = eta > 0.0 ? 0 : tf.rank_deficit + p;
    return Dataset(std::move(Xa), std::move(ya), std::move(tf));
}

/// Elastic net knot recovered from a Lasso run on the augmented design.
struct EnKnot
{
    double lambda;  // gamma / alpha
    double gamma;
    double eta;     // ridge parameter the augmented run used
    VectorXd beta;
    KnotEvent event;
    ActiveSet active_above;
    ActiveSet active_below;
};

/**
 * Runs LARS on augment(d, eta_guess), takes the k-th entry-counted knot gamma_k
 * and returns lambda = gamma_k / alpha with the solution there. With alpha = 1
 * and eta_guess = 0 this is exactly the Lasso path on d.
 */
inline EnKnot en_knot_at(const Dataset& d, double alpha, double eta_guess, std::size_t k,
                         const LarsOptions& opt = {})
{
    detail::require(alpha > 0.0 && alpha <= 1.0, ErrorKind::AlphaOutOfRange,
                    "alpha must lie in (0, 1], got " + std::to_string(alpha));
    detail::require(eta_guess >= 0.0, ErrorKind::NegativeEta, "eta guess must be >= 0");
    const std::size_t depth = std::max<std::size_t>(k, 1);
    const KnotPath path = eta_guess == 0.0 ? lars_path(d, depth, opt)
                                           : lars_path(augment(d, eta_guess), depth, opt);
    Knot kn = extract_knot(path, k);
    return {kn.lambda / alpha, kn.lambda, eta_guess, std::move(kn.beta), kn.event,
            std::move(kn.active_above), std::move(kn.active_below)};
}

struct PwOptions
{
    /// Replace the one-step knots by the exact elastic net path (en_path_exact).
    bool refine = false;
    /// Relative one-step vs exact disagreement that triggers a GridTooCoarse warning.
    double coarse_warn = 0.01;
    LarsOptions lars;
};

/**
 * Knot paths for every alpha on the grid. paths[i] holds entry-counted knots
 * 0..K for grid[i] (fewer if the path ends earlier). When refined, one_step
 * keeps the warm-start-only estimates alongside for diagnostics.
 */
struct PathGrid
{
    AlphaGrid grid;
    std::vector<KnotPath> paths;
    std::size_t K = 0;
    std::vector<std::vector<double>> one_step;
    std::vector<std::string> warnings;

    const KnotPath& at(double alpha) const { return paths[grid.index_of(alpha)]; }
};

namespace detail {

/// The End knot sits at lambda = 0, where the ridge part vanishes too.
inline void set_path_end(const Dataset& d, EnKnot& kn)
{
    kn.lambda = 0.0;
    kn.gamma = 0.0;
    kn.eta = 0.0;
    if (d.n() <= d.p()) return;
    Eigen::ColPivHouseholderQR<MatrixXd> qr(d.X());
    if (qr.rank() == d.p()) kn.beta = qr.solve(d.y());
}

inline std::vector<double> entry_knots(const KnotPath& path)
{
    std::vector<double> out;
    for (std::size_t i = 0; i < path.size(); ++i)
        if (path.events[i].counts_as_entry()) out.push_back(path.knots[i]);
    return out;
}

} // namespace detail

/**
 * Pathwise LARS-EN. The first grid point (alpha = 1) is the plain LARS-Lasso
 * path. For each following alpha_i and each k >= 1 the ridge part is
 * warm-started from the previous grid point, eta_k = lambda_k(alpha_{i-1}) (1 - alpha_i),
 * the augmented Lasso is solved by LARS and lambda_k(alpha_i) = gamma_k / alpha_i.
 * lambda_0(alpha_i) is set analytically.
 *
 * With refine, paths[i] is the exact elastic net path at alpha_i, whose knots
 * are consistent with their own ridge weight eta = lambda (1 - alpha); the
 * one-step estimates are still computed from the previous grid point and kept
 * in one_step, and disagreements above coarse_warn raise GridTooCoarse.
 */
inline PathGrid pw_lars_en(const Dataset& d, const AlphaGrid& grid, std::size_t K, const PwOptions& opt = {})
{
    detail::require(K >= 1, ErrorKind::InvalidArgument, "K must be >= 1");
    PathGrid out{grid, {}, K, {}, {}};
    out.paths.reserve(grid.size());
    out.paths.push_back(lars_path(d, K, opt.lars));
    out.one_step.push_back(detail::entry_knots(out.paths.front()));

    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double alpha = grid[i];
        const KnotPath& prev = out.paths[i - 1];
        const std::vector<double> prev_knots = detail::entry_knots(prev);

        KnotPath path;
        path.alpha = alpha;
        const auto [lam0, j1] = lambda0(d, alpha);
        const double c1 = (d.X().col(j1).transpose() * d.y())(0);
        path.knots.push_back(lam0);
        path.betas.push_back(VectorXd::Zero(d.p()));
        path.events.push_back(KnotEvent::enter(j1));
        ActiveSet first;
        first.add(j1, c1 < 0 ? -1 : 1);
        path.active_sets.push_back(first);
        path.etas.push_back(lam0 * (1.0 - alpha));
        std::vector<double> steps{lam0};

        for (std::size_t k = 1; k <= K && k < prev_knots.size(); ++k) {
            const double eta0 = prev_knots[k] * (1.0 - alpha);
            EnKnot kn;
            try {
                kn = en_knot_at(d, alpha, eta0, k, opt.lars);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::KnotIndexOutOfRange) throw;
                break;
            }
            if (kn.event.type == EventType::End) {
                // lambda = 0 means eta = 0: the end of every path is the same least-squares fit
                detail::set_path_end(d, kn);
            }
            steps.push_back(kn.lambda);
            if (kn.lambda >= path.knots.back() && kn.event.type != EventType::End) {
                path.warnings.push_back("knot " + std::to_string(k) + " does not decrease at alpha " +
                                        std::to_string(alpha));
            }
            path.knots.push_back(kn.lambda);
            path.betas.push_back(std::move(kn.beta));
            path.events.push_back(kn.event);
            path.active_sets.push_back(std::move(kn.active_below));
            path.etas.push_back(kn.eta);
            if (kn.event.type == EventType::End) break;
        }
        if (opt.refine) {
            path = en_path_exact(d, alpha, K, opt.lars);
            const std::vector<double> exact = detail::entry_knots(path);
            for (std::size_t k = 1; k < steps.size(); ++k) {
                const double ref = k < exact.size() ? exact[k] : 0.0;
                if (ref > 0.0 && std::abs(steps[k] - ref) > opt.coarse_warn * ref) {
                    char buf[160];
                    std::snprintf(buf, sizeof buf, "GridTooCoarse: alpha %.4f knot %zu one-step %.6g vs exact %.6g",
                                  alpha, k, steps[k], ref);
                    out.warnings.emplace_back(buf);
                }
            }
        }
        out.one_step.push_back(std::move(steps));
        out.paths.push_back(std::move(path));
    }
    return out;
}

/**
 * Exact elastic net solution at lambda for a path's alpha, using the active
 * set and signs of the bracketing interval:
 * (X_A'X_A + lambda (1 - alpha) I) beta_A = X_A'y - lambda alpha s_A.
 * For alpha = 1 this coincides with linear interpolation between knots;
 * for alpha < 1 the path is not linear in lambda between knots.
 */
inline VectorXd en_coefficients_at(const Dataset& d, const KnotPath& path, double lambda)
{
    detail::require(!path.knots.empty(), ErrorKind::InvalidArgument, "empty path");
    if (lambda >= path.knots.front()) return VectorXd::Zero(d.p());
    std::size_t interval = path.size();
    for (std::size_t i = 1; i < path.size(); ++i) {
        if (lambda >= path.knots[i]) {
            interval = i - 1;
            break;
        }
    }
    if (interval == path.size()) {
        if (lambda >= path.knots.back() * (1 - 1e-15)) return path.betas.back();
        throw Error(ErrorKind::KnotIndexOutOfRange, "lambda lies below the last computed knot");
    }
    const ActiveSet& A = path.active_sets[interval];
    const Index na = static_cast<Index>(A.size());
    VectorXd beta = VectorXd::Zero(d.p());
    if (na == 0) return beta;
    MatrixXd XA(d.n(), na);
    VectorXd s(na);
    for (Index a = 0; a < na; ++a) {
        XA.col(a) = d.X().col(A.indices[static_cast<std::size_t>(a)]);
        s[a] = A.signs[static_cast<std::size_t>(a)];
    }
    const double ridge = path.alpha == 1.0 ? 0.0 : lambda * (1.0 - path.alpha);
    MatrixXd G = XA.transpose() * XA;
    G.diagonal().array() += ridge;
    const VectorXd rhs = XA.transpose() * d.y() - lambda * path.alpha * s;
    const VectorXd bA = G.ldlt().solve(rhs);
    for (Index a = 0; a < na; ++a) beta[A.indices[static_cast<std::size_t>(a)]] = bA[a];
    return beta;
}

} // namespace pwlarsen
