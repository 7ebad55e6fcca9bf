// Elastic net knots over a grid of alpha values on an orthonormal design,
// where they are known in closed form: lambda_k(alpha) alpha = |z_(k)|.

#include <cmath>
#include <cstdio>
#include <random>

#include <Eigen/QR>

#include <pwlarsen/pwlarsen.hpp>

using namespace pwlarsen;

int main()
{
    const Index n = 100, p = 10;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    MatrixXd Z(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) Z(i, j) = g(rng);
    Z.rowwise() -= Z.colwise().mean();
    Eigen::HouseholderQR<MatrixXd> qr(Z);
    const MatrixXd X = qr.householderQ() * MatrixXd::Identity(n, p);

    VectorXd z(p);
    z << 6.0, -5.0, 4.0, 3.5, -3.0, 0.9, -0.6, 0.4, 0.25, -0.1;
    const Dataset d(X, X * z);

    PwOptions opt;
    opt.refine = true;
    const PathGrid pg = pw_lars_en(d, AlphaGrid::uniform(0.5), static_cast<std::size_t>(p), opt);

    std::printf("%4s", "k");
    for (double a : {1.0, 0.9, 0.7, 0.5}) std::printf("  alpha=%-4.1f", a);
    std::printf("  |z_(k)|\n");
    for (std::size_t k = 0; k < static_cast<std::size_t>(p); ++k) {
        std::printf("%4zu", k);
        for (double a : {1.0, 0.9, 0.7, 0.5}) std::printf("  %10.5f", pg.at(a).knots[k]);
        std::printf("  %7.3f\n", std::abs(z[static_cast<Index>(k)]));
    }
    std::printf("\nknot times alpha reproduces |z_(k)| for every alpha; the ridge part only\n"
                "rescales the coefficients by 1 / (1 + lambda (1 - alpha)).\n");
}
