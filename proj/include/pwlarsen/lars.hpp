#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <pwlarsen/error.hpp>
#include <pwlarsen/model.hpp>

namespace pwlarsen {

enum class EventType { Enter, Drop, End };

/// What happens to the active set when the path crosses a knot downward.
struct KnotEvent
{
    EventType type = EventType::End;
    Index predictor = -1; // unused for End

    static KnotEvent enter(Index j) { return {EventType::Enter, j}; }
    static KnotEvent drop(Index j) { return {EventType::Drop, j}; }
    static KnotEvent end() { return {EventType::End, -1}; }

    /// Knots that count toward the entry-indexed numbering.
    bool counts_as_entry() const noexcept { return type != EventType::Drop; }

    friend bool operator==(const KnotEvent&, const KnotEvent&) = default;
};

inline std::string to_string(const KnotEvent& e)
{
    switch (e.type) {
        case EventType::Enter: return "enter";
        case EventType::Drop: return "drop";
        case EventType::End: return "end";
    }
    return "?";
}

/**
 * Knot sequence of an l1 path for one alpha.
 *
 * knots[i] is the penalty at which events[i] happens; betas[i] is the
 * solution there. active_sets[i] is the active set on the open interval
 * just below knots[i], i.e. (knots[i+1], knots[i]). The final knot may be an
 * End event at lambda = 0.
 *
 * etas is empty for a plain Lasso path; for elastic net paths assembled from
 * augmented runs it holds the ridge parameter used for each knot.
 */
struct KnotPath
{
    double alpha = 1.0;
    std::vector<double> knots;
    std::vector<VectorXd> betas;
    std::vector<KnotEvent> events;
    std::vector<ActiveSet> active_sets;
    std::vector<double> etas;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return knots.size(); }

    /// Number of knots addressable through extract_knot.
    std::size_t entry_count() const noexcept
    {
        std::size_t c = 0;
        for (const auto& e : events) c += e.counts_as_entry() ? 1 : 0;
        return c;
    }

    /// Position in knots[] of the k-th entry-counted knot, if present.
    std::optional<std::size_t> position_of_entry(std::size_t k) const noexcept
    {
        std::size_t c = 0;
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (!events[i].counts_as_entry()) continue;
            if (c == k) return i;
            ++c;
        }
        return std::nullopt;
    }
};

struct LarsOptions
{
    /// Raise TiedEntry on simultaneous events instead of breaking the tie.
    bool strict_ties = false;
    double tie_tol = 1e-12;
};

/**
 * Smallest lambda for which the elastic net solution is zero, and the first
 * entering predictor (lowest index on ties).
 */
struct LambdaZero
{
    double lambda0;
    Index j1;
};

inline LambdaZero lambda0(const Dataset& d, double alpha)
{
    detail::require(alpha > 0.0 && alpha <= 1.0, ErrorKind::AlphaOutOfRange,
                    "alpha must lie in (0, 1], got " + std::to_string(alpha));
    const VectorXd c = d.X().transpose() * d.y();
    Index j1 = 0;
    double best = std::abs(c[0]);
    for (Index j = 1; j < c.size(); ++j) {
        if (std::abs(c[j]) > best) {
            best = std::abs(c[j]);
            j1 = j;
        }
    }
    return {best / alpha, j1};
}

namespace detail {

struct Candidate
{
    double step = std::numeric_limits<double>::infinity();
    Index j = -1;
    bool tied = false;
};

inline void consider(Candidate& c, double step, Index j, double tol)
{
    if (step < c.step - tol) {
        c = {step, j, false};
    } else if (step <= c.step + tol && j != c.j) {
        c.tied = true; // lowest index already held since j is scanned upward
    }
}

} // namespace detail

/**
 * Exact LARS-Lasso path (with the Lasso drop modification) on the given
 * design. Columns need not have unit norm; the equal-correlation logic works
 * with raw inner products, which is what the augmented elastic net design
 * requires.
 *
 * The path stops once the entry-counted knot max_knots has been recorded,
 * or at lambda = 0. Entry-counted knots are the Enter events plus the final
 * End event; drops are recorded but not counted.
 */
inline KnotPath lars_path(const Dataset& d, std::size_t max_knots, const LarsOptions& opt = {})
{
    detail::require(max_knots >= 1, ErrorKind::InvalidArgument, "max_knots must be >= 1");
    const MatrixXd& X = d.X();
    const VectorXd& y = d.y();
    const Index p = d.p();
    const Index max_active = d.max_active();

    KnotPath path;
    path.alpha = 1.0;

    const auto [lam0, j1] = lambda0(d, 1.0);
    VectorXd beta = VectorXd::Zero(p);
    VectorXd c = X.transpose() * y;
    const double tol = opt.tie_tol * std::max(1.0, lam0);

    auto on_tie = [&](const std::string& what) {
        if (opt.strict_ties) throw Error(ErrorKind::TiedEntry, what);
        path.warnings.push_back(what + "; lowest index kept");
    };

    for (Index j = 0; j < p; ++j) {
        if (j != j1 && std::abs(c[j]) >= lam0 - tol)
            on_tie("predictors " + std::to_string(j1 + 1) + " and " + std::to_string(j + 1) +
                   " tie at lambda0");
    }

    ActiveSet active;
    path.knots.push_back(lam0);
    path.betas.push_back(beta);
    path.events.push_back(KnotEvent::enter(j1));
    if (lam0 == 0.0) {
        // y orthogonal to every column: the path is identically zero
        path.events.back() = KnotEvent::end();
        path.active_sets.push_back(active);
        return path;
    }
    active.add(j1, c[j1] < 0 ? -1 : 1);
    path.active_sets.push_back(active);
    std::size_t entries = 1;

    double lam = lam0;
    Index just_dropped = -1;

    while (entries <= max_knots) {
        const Index na = static_cast<Index>(active.size());
        MatrixXd XA(X.rows(), na);
        VectorXd s(na);
        for (Index a = 0; a < na; ++a) {
            XA.col(a) = X.col(active.indices[static_cast<std::size_t>(a)]);
            s[a] = active.signs[static_cast<std::size_t>(a)];
        }
        const MatrixXd G = XA.transpose() * XA;
        Eigen::LLT<MatrixXd> llt(G);
        if (llt.info() != Eigen::Success || llt.rcond() < 1e-13)
            throw Error(ErrorKind::RankDeficientActiveSet,
                        "active Gram matrix of size " + std::to_string(na) + " is singular");
        const VectorXd dir = llt.solve(s);
        const VectorXd u = XA * dir;
        const VectorXd a = X.transpose() * u;

        detail::Candidate enter, drop;
        if (na < max_active) {
            for (Index j = 0; j < p; ++j) {
                if (active.contains(j) || j == just_dropped) continue;
                // A predictor already at the boundary (a tie) enters with a zero step;
                // slightly negative steps are round-off of the same situation.
                const double lo = 1.0 - a[j];
                const double hi = 1.0 + a[j];
                if (lo > 0.0) {
                    const double st = (lam - c[j]) / lo;
                    if (st > -tol) detail::consider(enter, std::max(st, 0.0), j, tol);
                }
                if (hi > 0.0) {
                    const double st = (lam + c[j]) / hi;
                    if (st > -tol) detail::consider(enter, std::max(st, 0.0), j, tol);
                }
            }
        }
        for (Index k = 0; k < na; ++k) {
            const Index j = active.indices[static_cast<std::size_t>(k)];
            if (dir[k] == 0.0) continue;
            const double st = -beta[j] / dir[k];
            if (st > 1e-14 * lam) detail::consider(drop, st, j, tol);
        }

        const double step_end = lam;
        double step = step_end;
        EventType type = EventType::End;
        if (drop.step <= step) {
            step = drop.step;
            type = EventType::Drop;
        }
        if (enter.step < step - tol) {
            step = enter.step;
            type = EventType::Enter;
        }

        for (Index k = 0; k < na; ++k)
            beta[active.indices[static_cast<std::size_t>(k)]] += step * dir[k];

        if (type == EventType::End) {
            lam = 0.0;
            path.knots.push_back(0.0);
            path.betas.push_back(beta);
            path.events.push_back(KnotEvent::end());
            path.active_sets.push_back(active);
            break;
        }

        lam -= step;
        c = X.transpose() * (y - X * beta);

        if (type == EventType::Drop) {
            if (drop.tied) on_tie("simultaneous drops at lambda " + std::to_string(lam));
            beta[drop.j] = 0.0;
            active.remove(drop.j);
            just_dropped = drop.j;
            path.knots.push_back(lam);
            path.betas.push_back(beta);
            path.events.push_back(KnotEvent::drop(drop.j));
            path.active_sets.push_back(active);
            continue;
        }

        if (enter.tied)
            on_tie("predictors tie for entry at lambda " + std::to_string(lam));
        just_dropped = -1;
        active.add(enter.j, c[enter.j] < 0 ? -1 : 1);
        path.knots.push_back(lam);
        path.betas.push_back(beta);
        path.events.push_back(KnotEvent::enter(enter.j));
        path.active_sets.push_back(active);
        ++entries;
    }
    return path;
}

/// A single knot pulled out of a path.
struct Knot
{
    double lambda;
    VectorXd beta;
    KnotEvent event;
    ActiveSet active_above; // active set just above the knot
    ActiveSet active_below; // active set just below the knot
    std::size_t position;   // index into KnotPath::knots
};

/**
 * k-th knot counting entries only: k = 0 is lambda0, k = 1 the knot where the
 * second predictor enters, and so on; the terminal End knot counts as well.
 */
inline Knot extract_knot(const KnotPath& path, std::size_t k)
{
    const auto pos = path.position_of_entry(k);
    if (!pos)
        throw Error(ErrorKind::KnotIndexOutOfRange,
                    "knot " + std::to_string(k) + " requested but the path has " +
                    std::to_string(path.entry_count()) + " entry-counted knots");
    const std::size_t i = *pos;
    Knot out{path.knots[i], path.betas[i], path.events[i], {}, path.active_sets[i], i};
    if (i > 0) out.active_above = path.active_sets[i - 1];
    return out;
}

/**
 * Solution at an arbitrary lambda by linear interpolation between the
 * bracketing knots. Zero above the first knot; lambda below the last
 * recorded knot is an error.
 */
inline VectorXd coefficients_at(const KnotPath& path, double lambda)
{
    detail::require(!path.knots.empty(), ErrorKind::InvalidArgument, "empty path");
    if (lambda >= path.knots.front()) return VectorXd::Zero(path.betas.front().size());
    for (std::size_t i = 1; i < path.knots.size(); ++i) {
        if (lambda >= path.knots[i]) {
            const double hi = path.knots[i - 1];
            const double lo = path.knots[i];
            if (hi == lo) return path.betas[i];
            const double t = (hi - lambda) / (hi - lo);
            return (1.0 - t) * path.betas[i - 1] + t * path.betas[i];
        }
    }
    if (lambda >= path.knots.back() * (1 - 1e-15)) return path.betas.back();
    throw Error(ErrorKind::KnotIndexOutOfRange,
                "lambda " + std::to_string(lambda) + " lies below the last computed knot");
}

} // namespace pwlarsen
