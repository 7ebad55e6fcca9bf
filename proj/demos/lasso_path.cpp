// Exact LARS-Lasso path on a small simulated problem, checked against
// coordinate descent at every knot.

#include <cstdio>
#include <random>

#include <pwlarsen/pwlarsen.hpp>

using namespace pwlarsen;

int main()
{
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> z;
    const Index n = 50, p = 6;
    MatrixXd X(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) X(i, j) = z(rng);
    VectorXd beta(p);
    beta << 2.0, -1.5, 1.0, 0.0, 0.0, 0.0;
    VectorXd y = X * beta;
    for (Index i = 0; i < n; ++i) y[i] += z(rng);

    const Dataset d = standardize(Dataset(X, y));
    const KnotPath path = lars_path(d, static_cast<std::size_t>(p));

    std::printf("%4s %10s %-6s %4s   %s\n", "k", "lambda", "event", "j", "max |beta - beta_cd|");
    for (std::size_t i = 0; i < path.size(); ++i) {
        const VectorXd cd = en_solve_cd(d, path.knots[i], 1.0, 1e-13, 1000000);
        const double gap = (cd - path.betas[i]).cwiseAbs().maxCoeff();
        std::printf("%4zu %10.5f %-6s %4ld   %.2e\n", i, path.knots[i], to_string(path.events[i]).c_str(),
                    static_cast<long>(path.events[i].predictor + 1), gap);
    }
    const VectorXd b = to_original_scale(d, path.betas.back());
    std::printf("\nleast squares coefficients at the end of the path:");
    for (Index j = 0; j < p; ++j) std::printf(" %.3f", b[j]);
    std::printf("\n");
}
