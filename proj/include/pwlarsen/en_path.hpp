#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/math/tools/toms748_solve.hpp>

#include <pwlarsen/error.hpp>
#include <pwlarsen/lars.hpp>
#include <pwlarsen/model.hpp>

namespace pwlarsen {

namespace detail {

/**
 * Elastic net solution for a fixed active set A and sign vector s as a
 * function of lambda:
 *   beta_A(lambda) = (X_A'X_A + lambda (1 - alpha) I)^{-1} (X_A'y - lambda alpha s).
 * With X_A'X_A = V diag(d) V' every coordinate is a rational function of
 * lambda whose poles lie at lambda <= 0.
 */
class EnSegment
{
public:
    EnSegment(const MatrixXd& gram, const VectorXd& xty, const ActiveSet& A, double alpha)
        : alpha_(alpha), xty_(xty)
    {
        const Index m = static_cast<Index>(A.size());
        MatrixXd GAA(m, m);
        GA_.resize(gram.rows(), m);
        VectorXd bA(m), s(m);
        for (Index a = 0; a < m; ++a) {
            const Index ja = A.indices[static_cast<std::size_t>(a)];
            GA_.col(a) = gram.col(ja);
            bA[a] = xty[ja];
            s[a] = A.signs[static_cast<std::size_t>(a)];
            for (Index b = 0; b < m; ++b) GAA(a, b) = gram(ja, A.indices[static_cast<std::size_t>(b)]);
        }
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(GAA);
        V_ = es.eigenvectors();
        d_ = es.eigenvalues().cwiseMax(0.0);
        u_ = V_.transpose() * bA;
        w_ = V_.transpose() * s;
    }

    /// Active coefficients at lambda, in the order of A. At lambda = 0 null directions get 0.
    VectorXd beta_active(double lambda) const
    {
        const double ridge = lambda * (1.0 - alpha_);
        const double floor = 1e-12 * std::max(1.0, d_.size() ? d_.maxCoeff() : 1.0);
        VectorXd t(d_.size());
        for (Index i = 0; i < d_.size(); ++i) {
            const double den = d_[i] + ridge;
            t[i] = den > floor ? (u_[i] - lambda * alpha_ * w_[i]) / den : 0.0;
        }
        return V_ * t;
    }

    /// Correlations x_j'(y - X_A beta_A(lambda)) for all p predictors.
    VectorXd correlations(const VectorXd& beta_A) const { return xty_ - GA_ * beta_A; }

    double alpha() const noexcept { return alpha_; }

    /// prod_i (d_i + lambda (1 - alpha)) / (d_i + ref (1 - alpha)): clears the poles, stays positive.
    double pole_factor(double lambda, double ref) const
    {
        double q = 1.0;
        for (Index i = 0; i < d_.size(); ++i) q *= (d_[i] + lambda * (1.0 - alpha_)) / (d_[i] + ref * (1.0 - alpha_));
        return q;
    }

private:
    double alpha_;
    VectorXd xty_;
    MatrixXd GA_;
    MatrixXd V_;
    VectorXd d_;
    VectorXd u_;
    VectorXd w_;
};

/// Approximate real roots in [-1, 1] of sum_k c_k T_k(x), from the eigenvalues of the colleague
/// matrix. Nearly real pairs are kept too: callers only use these as scan points.
inline std::vector<double> chebyshev_roots(VectorXd c)
{
    const double scale = c.cwiseAbs().maxCoeff();
    std::vector<double> out;
    if (scale == 0.0) return out;
    Index deg = c.size() - 1;
    while (deg > 0 && std::abs(c[deg]) <= 1e-13 * scale) --deg;
    if (deg == 0) return out;
    if (deg == 1) {
        out.push_back(-c[0] / c[1]);
    } else {
        MatrixXd C = MatrixXd::Zero(deg, deg);
        C(0, 1) = 1.0;
        for (Index i = 1; i + 1 < deg; ++i) {
            C(i, i - 1) = 0.5;
            C(i, i + 1) = 0.5;
        }
        C(deg - 1, deg - 2) += 0.5;
        for (Index k = 0; k < deg; ++k) C(deg - 1, k) -= c[k] / (2.0 * c[deg]);
        Eigen::EigenSolver<MatrixXd> es(C, false);
        for (const auto& z : es.eigenvalues())
            if (std::abs(z.imag()) <= 1e-2) out.push_back(z.real());
    }
    std::vector<double> in;
    for (double x : out)
        if (x >= -1.0 - 1e-9 && x <= 1.0 + 1e-9) in.push_back(std::clamp(x, -1.0, 1.0));
    return in;
}

struct SegmentEvent
{
    double lambda = -1.0;
    Index j = -1;
    bool drop = false;
    int sign = 0;
};

/**
 * Largest lambda in (0, hi) at which the active set (A, s) stops being
 * optimal: an inactive |c_j| reaches lambda alpha or an active coefficient
 * reaches zero. `fresh` is the predictor that changed at hi; its trivial
 * root at hi is divided out. Approximate roots of a Chebyshev interpolant of
 * the pole-free event functions, together with a uniform net, give scan
 * points; the first sign change of the exact function below hi is polished
 * by TOMS 748.
 */
inline SegmentEvent next_event(const EnSegment& seg, const ActiveSet& A, Index p, double hi, Index fresh)
{
    const double alpha = seg.alpha();
    const Index m = static_cast<Index>(A.size());
    const Index deg = m + 1;           // degree of every pole-free event function
    const Index N = deg + 6;           // sample count; exact for polynomials of degree < N
    const auto lam_of = [hi](double x) { return 0.5 * hi * (x + 1.0); };

    // event f: 0..m-1 drop of A[f]; then 2 per inactive predictor (c_j - lambda alpha, c_j + lambda alpha)
    std::vector<Index> inactive;
    for (Index j = 0; j < p; ++j)
        if (!A.contains(j)) inactive.push_back(j);
    const Index F = m + 2 * static_cast<Index>(inactive.size());

    auto raw = [&](Index f, const VectorXd& bA, const VectorXd& c, double lam) {
        if (f < m) return bA[f];
        const Index j = inactive[static_cast<std::size_t>((f - m) / 2)];
        return (f - m) % 2 == 0 ? c[j] - lam * alpha : c[j] + lam * alpha;
    };
    auto predictor_of = [&](Index f) {
        return f < m ? A.indices[static_cast<std::size_t>(f)] : inactive[static_cast<std::size_t>((f - m) / 2)];
    };
    // the fresh predictor's function that vanishes at hi gets that root divided out
    Index trivial = -1;
    {
        const VectorXd bA = seg.beta_active(hi);
        const VectorXd c = seg.correlations(bA);
        double smallest = std::numeric_limits<double>::infinity();
        for (Index f = 0; f < F; ++f) {
            if (predictor_of(f) != fresh) continue;
            const double v = std::abs(raw(f, bA, c, hi));
            if (v < smallest) {
                smallest = v;
                trivial = f;
            }
        }
    }
    auto exact = [&](Index f, double lam) {
        const VectorXd bA = seg.beta_active(lam);
        const double v = raw(f, bA, seg.correlations(bA), lam);
        return f == trivial ? v / ((hi - lam) / hi) : v;
    };

    MatrixXd vals(F, N);
    for (Index s = 0; s < N; ++s) {
        const double x = std::cos(M_PI * (static_cast<double>(s) + 0.5) / static_cast<double>(N));
        const double lam = lam_of(x);
        const VectorXd bA = seg.beta_active(lam);
        const VectorXd c = seg.correlations(bA);
        const double q = seg.pole_factor(lam, hi);
        for (Index f = 0; f < F; ++f) {
            double v = raw(f, bA, c, lam) * q;
            if (f == trivial) v /= (hi - lam) / hi;
            vals(f, s) = v;
        }
    }

    SegmentEvent best;
    for (Index f = 0; f < F; ++f) {
        VectorXd coef(N);
        for (Index k = 0; k < N; ++k) {
            double sum = 0.0;
            for (Index s = 0; s < N; ++s)
                sum += vals(f, s) * std::cos(M_PI * static_cast<double>(k) * (static_cast<double>(s) + 0.5) /
                                             static_cast<double>(N));
            coef[k] = (k == 0 ? 1.0 : 2.0) * sum / static_cast<double>(N);
        }
        // scan points: candidate roots with small offsets plus a uniform net, largest first
        // (the divided-out function is 0/0 at hi itself, so it starts just below)
        const double top = hi * (1.0 - (f == trivial ? 1e-10 : 1e-13));
        std::vector<double> pts{top};
        for (int g = 1; g < 64; ++g) pts.push_back(hi * static_cast<double>(g) / 64.0);
        for (double x : chebyshev_roots(coef.head(std::min(N, deg + 1)))) {
            const double r = lam_of(x);
            for (double off : {-1e-4, -1e-7, 0.0, 1e-7, 1e-4}) pts.push_back(r + off * hi);
        }
        pts.push_back(1e-12 * hi);
        std::erase_if(pts, [&](double v) { return !(v > 0.0 && v <= top && v > best.lambda); });
        std::sort(pts.begin(), pts.end(), std::greater<>());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        if (pts.size() < 2) continue;
        double up = pts[0];
        double fup = exact(f, up);
        for (std::size_t q = 1; q < pts.size(); ++q) {
            const double lo = pts[q];
            const double flo = exact(f, lo);
            if (fup == 0.0 && up < top) {
                best = {up, predictor_of(f), f < m, f < m ? 0 : ((f - m) % 2 == 0 ? 1 : -1)};
                break;
            }
            if (flo * fup < 0.0) {
                boost::uintmax_t iters = 200;
                const auto [ra, rb] = boost::math::tools::toms748_solve(
                    [&](double l) { return exact(f, l); }, lo, up, flo, fup,
                    [](double x1, double x2) { return std::abs(x2 - x1) <= 4e-16 * std::max(1.0, std::abs(x1)); },
                    iters);
                const double root = 0.5 * (ra + rb);
                if (root > best.lambda && root < hi)
                    best = {root, predictor_of(f), f < m, f < m ? 0 : ((f - m) % 2 == 0 ? 1 : -1)};
                break;
            }
            up = lo;
            fup = flo;
        }
    }
    return best;
}

} // namespace detail

/**
 * Exact elastic net knot path for one alpha, tracked event by event.
 * Between knots the active set and signs are fixed and the solution is
 * beta_A(lambda) = (X_A'X_A + lambda (1 - alpha) I)^{-1} (X_A'y - lambda alpha s_A);
 * the next knot is the largest lambda where an inactive |c_j| reaches
 * lambda alpha or an active coefficient hits zero. Knots are entry-counted
 * as in lars_path (drops are recorded but do not advance k) and the path
 * stops after knot K or at the End knot lambda = 0. At alpha = 1 this is
 * lars_path.
 */
inline KnotPath en_path_exact(const Dataset& d, double alpha, std::size_t K, const LarsOptions& opt = {})
{
    detail::require(alpha > 0.0 && alpha <= 1.0, ErrorKind::AlphaOutOfRange,
                    "alpha must lie in (0, 1], got " + std::to_string(alpha));
    detail::require(K >= 1, ErrorKind::InvalidArgument, "K must be >= 1");
    if (alpha == 1.0) return lars_path(d, K, opt);

    const MatrixXd gram = d.X().transpose() * d.X();
    const VectorXd xty = d.X().transpose() * d.y();
    const Index p = d.p();

    KnotPath path;
    path.alpha = alpha;
    const auto [lam0, j1] = lambda0(d, alpha);
    ActiveSet A;
    A.add(j1, xty[j1] < 0 ? -1 : 1);
    path.knots.push_back(lam0);
    path.betas.push_back(VectorXd::Zero(p));
    path.events.push_back(KnotEvent::enter(j1));
    path.active_sets.push_back(A);
    path.etas.push_back(lam0 * (1.0 - alpha));

    const double tie_tol = opt.tie_tol * std::max(1.0, lam0);
    for (Index j = 0; j < p; ++j) {
        if (j != j1 && std::abs(std::abs(xty[j]) - std::abs(xty[j1])) <= tie_tol) {
            const std::string what = "predictors " + std::to_string(j1 + 1) + " and " + std::to_string(j + 1) +
                                     " tie at the first knot";
            if (opt.strict_ties) throw Error(ErrorKind::TiedEntry, what);
            path.warnings.push_back("TiedEntry: " + what);
        }
    }

    double lam = lam0;
    Index fresh = j1;
    std::size_t entries = 0;
    // a safety net only; paths have far fewer drops than this
    const std::size_t max_events = 8 * static_cast<std::size_t>(p) + 8 * K + 16;
    for (std::size_t step = 0; step < max_events; ++step) {
        const detail::EnSegment seg(gram, xty, A, alpha);
        const detail::SegmentEvent ev = detail::next_event(seg, A, p, lam, fresh);
        if (ev.j < 0) {
            // no further event: the segment runs down to lambda = 0
            VectorXd beta = VectorXd::Zero(p);
            const VectorXd bA = seg.beta_active(0.0);
            for (std::size_t a = 0; a < A.size(); ++a) beta[A.indices[a]] = bA[static_cast<Index>(a)];
            path.knots.push_back(0.0);
            path.betas.push_back(std::move(beta));
            path.events.push_back(KnotEvent::end());
            path.active_sets.push_back(A);
            path.etas.push_back(0.0);
            return path;
        }
        VectorXd beta = VectorXd::Zero(p);
        const VectorXd bA = seg.beta_active(ev.lambda);
        for (std::size_t a = 0; a < A.size(); ++a) beta[A.indices[a]] = bA[static_cast<Index>(a)];
        if (ev.drop) {
            beta[ev.j] = 0.0;
            A.remove(ev.j);
            path.events.push_back(KnotEvent::drop(ev.j));
        } else {
            A.add(ev.j, ev.sign);
            path.events.push_back(KnotEvent::enter(ev.j));
            ++entries;
        }
        path.knots.push_back(ev.lambda);
        path.betas.push_back(std::move(beta));
        path.active_sets.push_back(A);
        path.etas.push_back(ev.lambda * (1.0 - alpha));
        lam = ev.lambda;
        fresh = ev.j;
        if (!ev.drop && entries >= K) return path;
    }
    path.warnings.push_back("EventLimit: path stopped after " + std::to_string(max_events) + " events");
    return path;
}

} // namespace pwlarsen
