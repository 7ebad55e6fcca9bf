// Covariance test on the bundled prostate cancer training data with an
// estimated noise variance, for several elastic net mixing values.

#include <cstdio>
#include <vector>

#include <pwlarsen/pwlarsen.hpp>

using namespace pwlarsen;

int main()
{
    const Dataset d = standardize(io::load_prostate());
    const auto& names = io::prostate_predictor_names();
    const std::vector<double> alphas{1.0, 0.9, 0.5, 0.1};
    const PathGrid pg = pw_lars_en(d, grid_reaching(0.1), 8);

    std::vector<std::vector<CovTestResult>> cols;
    for (double a : alphas) cols.push_back(covtest_sequence(d, pg, a, 8, std::nullopt));

    std::printf("n = %ld, p = %ld, sigma^2 estimate %.4f, reference F(2,%ld)\n\n", static_cast<long>(d.n()),
                static_cast<long>(d.p()), sigma_hat(d), static_cast<long>(d.n() - d.p()));
    std::printf("step");
    for (double a : alphas) std::printf("   alpha=%-4.1f", a);
    std::printf("\n");
    for (std::size_t k = 0; k < 8; ++k) {
        std::printf("%4zu", k + 1);
        for (const auto& c : cols) {
            if (k < c.size())
                std::printf("   %.3f (%ld)", c[k].p_value, static_cast<long>(c[k].entering_predictor + 1));
            else
                std::printf("   %10s", "");
        }
        std::printf("\n");
    }
    std::printf("\npredictors:");
    for (std::size_t j = 0; j < names.size(); ++j) std::printf(" %zu-%s", j + 1, names[j].c_str());
    std::printf("\n");
}
