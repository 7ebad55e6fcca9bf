#pragma once
#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <pwlarsen/error.hpp>

namespace pwlarsen {

using Index = Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Default KKT tolerances for exact-path and iterative-oracle solutions.
inline constexpr double kkt_tol_exact = 1e-8;
inline constexpr double kkt_tol_iterative = 1e-5;

/**
 * Record of the affine map applied by standardize(), so that coefficients
 * on the standardized scale can be mapped back to the raw scale.
 * Identity when the dataset was never standardized.
 */
struct Transform
{
    VectorXd col_means;
    VectorXd col_norms;
    double y_mean = 0.0;
    bool standardized = false;
    /// Rows that carry no rank (one per centering, plus zero padding rows).
    Index rank_deficit = 0;
};

/**
 * Response vector and predictor matrix of the centered linear model
 * y = X beta + noise. Immutable once constructed.
 */
class Dataset
{
public:
    Dataset(MatrixXd X, VectorXd y)
        : X_(std::move(X)), y_(std::move(y))
    {
        validate();
        tf_.col_means = VectorXd::Zero(X_.cols());
        tf_.col_norms = VectorXd::Ones(X_.cols());
    }

    Dataset(MatrixXd X, VectorXd y, Transform tf)
        : X_(std::move(X)), y_(std::move(y)), tf_(std::move(tf))
    {
        validate();
        detail::require(tf_.col_means.size() == X_.cols() && tf_.col_norms.size() == X_.cols(),
                        ErrorKind::DimensionMismatch, "transform metadata does not match column count");
    }

    const MatrixXd& X() const noexcept { return X_; }
    const VectorXd& y() const noexcept { return y_; }
    Index n() const noexcept { return X_.rows(); }
    Index p() const noexcept { return X_.cols(); }

    bool standardized() const noexcept { return tf_.standardized; }
    const VectorXd& col_norms() const noexcept { return tf_.col_norms; }
    const VectorXd& col_means() const noexcept { return tf_.col_means; }
    double y_mean() const noexcept { return tf_.y_mean; }
    const Transform& transform() const noexcept { return tf_; }

    /// Largest attainable active-set size for an l1 path on this design.
    Index max_active() const noexcept
    {
        return std::max<Index>(1, std::min(n() - tf_.rank_deficit, p()));
    }

private:
    void validate() const
    {
        detail::require(X_.rows() >= 1 && X_.cols() >= 1, ErrorKind::DimensionMismatch,
                        "dataset needs n >= 1 and p >= 1");
        detail::require(X_.rows() == y_.size(), ErrorKind::DimensionMismatch,
                        "X has " + std::to_string(X_.rows()) + " rows but y has " +
                        std::to_string(y_.size()) + " entries");
        detail::require(X_.allFinite() && y_.allFinite(), ErrorKind::NonFiniteInput,
                        "dataset contains non-finite entries");
    }

    MatrixXd X_;
    VectorXd y_;
    Transform tf_;
};

/**
 * Elastic net tuning pair (lambda, alpha) with the derived augmented-form
 * parameters gamma = lambda * alpha and eta = lambda * (1 - alpha).
 */
class ENParams
{
public:
    ENParams(double lambda, double alpha) : lambda_(lambda), alpha_(alpha)
    {
        detail::require(alpha > 0.0 && alpha <= 1.0, ErrorKind::AlphaOutOfRange,
                        "alpha must lie in (0, 1], got " + std::to_string(alpha));
        detail::require(lambda >= 0.0 && std::isfinite(lambda), ErrorKind::InvalidArgument,
                        "lambda must be finite and >= 0");
    }

    double lambda() const noexcept { return lambda_; }
    double alpha() const noexcept { return alpha_; }
    double gamma() const noexcept { return lambda_ * alpha_; }
    double eta() const noexcept { return alpha_ == 1.0 ? 0.0 : lambda_ * (1.0 - alpha_); }

private:
    double lambda_;
    double alpha_;
};

/// Predictors with nonzero coefficients, in order of entry, with their signs.
struct ActiveSet
{
    std::vector<Index> indices;
    std::vector<int> signs;

    std::size_t size() const noexcept { return indices.size(); }
    bool empty() const noexcept { return indices.empty(); }

    bool contains(Index j) const
    {
        return std::find(indices.begin(), indices.end(), j) != indices.end();
    }

    void add(Index j, int sign)
    {
        detail::require(!contains(j), ErrorKind::InvalidArgument, "predictor already active");
        indices.push_back(j);
        signs.push_back(sign < 0 ? -1 : 1);
    }

    void remove(Index j)
    {
        auto it = std::find(indices.begin(), indices.end(), j);
        detail::require(it != indices.end(), ErrorKind::InvalidArgument, "predictor not active");
        const auto pos = it - indices.begin();
        indices.erase(it);
        signs.erase(signs.begin() + pos);
    }

    /// Index set sorted ascending; useful for comparisons.
    std::vector<Index> sorted() const
    {
        auto s = indices;
        std::sort(s.begin(), s.end());
        return s;
    }
};

inline ActiveSet support_of(const VectorXd& beta)
{
    ActiveSet a;
    for (Index j = 0; j < beta.size(); ++j)
        if (beta[j] != 0.0) a.add(j, beta[j] < 0 ? -1 : 1);
    return a;
}

inline double soft_threshold(double z, double t) noexcept
{
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

/**
 * Centers y, centers every column of X and scales it to unit l2 norm.
 * The returned dataset records the composed transform, so standardizing an
 * already standardized dataset is a no-op on the data and keeps the original
 * back-transform.
 */
inline Dataset standardize(const Dataset& raw)
{
    const Index p = raw.p();
    const VectorXd means = raw.X().colwise().mean();
    MatrixXd X = raw.X().rowwise() - means.transpose();
    VectorXd norms(p);
    for (Index j = 0; j < p; ++j) {
        const double nj = X.col(j).norm();
        if (!(nj > 0.0) || nj <= 1e-14 * std::max(1.0, raw.X().col(j).cwiseAbs().maxCoeff()))
            throw Error(ErrorKind::ZeroVarianceColumn,
                        "column " + std::to_string(j + 1) + " has zero variance");
        norms[j] = nj;
        X.col(j) /= nj;
    }
    const double ym = raw.y().mean();
    VectorXd y = raw.y().array() - ym;

    const Transform& prev = raw.transform();
    Transform tf;
    tf.standardized = true;
    tf.rank_deficit = std::max<Index>(prev.rank_deficit, 1);
    // raw_prev = (raw_cur * prev_norm) + prev_mean, cur = (raw_cur - m) / nrm
    tf.col_norms = prev.col_norms.cwiseProduct(norms);
    tf.col_means = prev.col_means + prev.col_norms.cwiseProduct(means);
    tf.y_mean = prev.y_mean + ym;
    return Dataset(std::move(X), std::move(y), std::move(tf));
}

/// Maps standardized-scale coefficients to the raw predictor scale.
inline VectorXd to_original_scale(const Dataset& d, const VectorXd& beta)
{
    detail::require(beta.size() == d.p(), ErrorKind::DimensionMismatch, "beta has wrong length");
    return beta.cwiseQuotient(d.col_norms());
}

/// Intercept of the raw-scale model implied by standardized coefficients.
inline double original_intercept(const Dataset& d, const VectorXd& beta)
{
    return d.y_mean() - d.col_means().dot(to_original_scale(d, beta));
}

/// Dataset restricted to the given columns (in the given order).
inline Dataset restrict_columns(const Dataset& d, std::span<const Index> cols)
{
    detail::require(!cols.empty(), ErrorKind::InvalidArgument, "empty column set");
    MatrixXd X(d.n(), static_cast<Index>(cols.size()));
    Transform tf;
    tf.standardized = d.standardized();
    tf.rank_deficit = d.transform().rank_deficit;
    tf.y_mean = d.y_mean();
    tf.col_means.resize(X.cols());
    tf.col_norms.resize(X.cols());
    for (Index c = 0; c < X.cols(); ++c) {
        const Index j = cols[static_cast<std::size_t>(c)];
        detail::require(j >= 0 && j < d.p(), ErrorKind::InvalidArgument, "column index out of range");
        X.col(c) = d.X().col(j);
        tf.col_means[c] = d.col_means()[j];
        tf.col_norms[c] = d.col_norms()[j];
    }
    return Dataset(std::move(X), d.y(), std::move(tf));
}

/// 1/2 ||y - X beta||^2 + lambda * (alpha ||beta||_1 + (1 - alpha)/2 ||beta||^2)
inline double en_objective(const Dataset& d, const VectorXd& beta, const ENParams& params)
{
    detail::require(beta.size() == d.p(), ErrorKind::DimensionMismatch,
                    "beta has length " + std::to_string(beta.size()) + ", expected " +
                    std::to_string(d.p()));
    const double rss = (d.y() - d.X() * beta).squaredNorm();
    const double a = params.alpha();
    const double pen = a * beta.lpNorm<1>() + 0.5 * (1.0 - a) * beta.squaredNorm();
    return 0.5 * rss + params.lambda() * pen;
}

struct KktResidual
{
    double active_violation = 0.0;
    double inactive_excess = 0.0;

    double worst() const noexcept { return std::max(active_violation, inactive_excess); }
    bool within(double tol) const noexcept { return worst() <= tol; }
};

/**
 * First-order optimality residuals of the elastic net objective.
 *
 * Active coordinates: |x_j'r - lambda (1 - alpha) beta_j - lambda alpha sign(beta_j)|.
 * Inactive coordinates: (|x_j'r| - lambda alpha) clamped below at zero.
 * Both maxima are zero at an exact minimizer.
 */
inline KktResidual kkt_residual(const Dataset& d, const VectorXd& beta, const ENParams& params)
{
    detail::require(beta.size() == d.p(), ErrorKind::DimensionMismatch, "beta has wrong length");
    const VectorXd c = d.X().transpose() * (d.y() - d.X() * beta);
    const double g = params.gamma();
    const double e = params.eta();
    KktResidual r;
    for (Index j = 0; j < d.p(); ++j) {
        if (beta[j] != 0.0) {
            const double s = beta[j] > 0 ? 1.0 : -1.0;
            r.active_violation = std::max(r.active_violation, std::abs(c[j] - e * beta[j] - g * s));
        } else {
            r.inactive_excess = std::max(r.inactive_excess, std::abs(c[j]) - g);
        }
    }
    return r;
}

} // namespace pwlarsen
