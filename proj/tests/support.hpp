#pragma once
#include <cstdint>
#include <random>

#include <Eigen/Dense>
#include <Eigen/QR>

#include <pwlarsen/model.hpp>

namespace pwlarsen::fixtures {

/// Gaussian design with a few nonzero effects, standardized.
inline Dataset random_dataset(Index n, Index p, std::uint64_t seed, Index nonzero = 3, double noise = 1.0)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    MatrixXd X(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) X(i, j) = z(rng);
    VectorXd beta = VectorXd::Zero(p);
    for (Index j = 0; j < std::min(nonzero, p); ++j) beta[j] = (j % 2 == 0 ? 1.0 : -0.7) * (1.0 + 0.3 * static_cast<double>(j));
    VectorXd y = X * beta;
    for (Index i = 0; i < n; ++i) y[i] += noise * z(rng);
    return standardize(Dataset(std::move(X), std::move(y)));
}

/// Centered design with exactly orthonormal columns and the given response (not standardized).
inline Dataset orthonormal_dataset(Index n, Index p, std::uint64_t seed, const VectorXd& z_scores)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    MatrixXd A(n, p + 1);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= p; ++j) A(i, j) = z(rng);
    A.rowwise() -= A.colwise().mean();
    Eigen::HouseholderQR<MatrixXd> qr(A);
    const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, p + 1);
    const MatrixXd X = Q.leftCols(p);
    // y = X z + a component orthogonal to every column
    VectorXd y = X * z_scores + 0.5 * Q.col(p);
    return Dataset(X, y);
}

} // namespace pwlarsen::fixtures
