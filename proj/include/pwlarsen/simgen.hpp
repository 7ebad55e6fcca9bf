#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <pwlarsen/covtest.hpp>
#include <pwlarsen/error.hpp>
#include <pwlarsen/model.hpp>
#include <pwlarsen/pw_lars_en.hpp>
#include <pwlarsen/reference.hpp>

namespace pwlarsen::sim {

using Rng = std::mt19937_64;

/// Independent stream for replicate r of a run seeded with seed.
inline Rng replicate_rng(std::uint64_t seed, std::uint64_t r)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32), 0x5eedu};
    return Rng(seq);
}

enum class Structure { Identity, CS, AR1 };

inline std::string to_string(Structure s)
{
    switch (s) {
        case Structure::Identity: return "I";
        case Structure::CS: return "CS";
        case Structure::AR1: return "AR1";
    }
    return "?";
}

/// Predictor covariance Sigma(sigma2, rho, structure) of dimension p.
class CovSpec
{
public:
    CovSpec(double sigma2, double rho, Structure structure, Index p)
        : sigma2_(sigma2), rho_(rho), structure_(structure), p_(p)
    {
        pwlarsen::detail::require(sigma2 > 0.0, ErrorKind::InvalidArgument, "marginal variance must be > 0");
        pwlarsen::detail::require(p >= 1, ErrorKind::InvalidArgument, "dimension must be >= 1");
        pwlarsen::detail::require(rho > -1.0 && rho < 1.0, ErrorKind::NotPositiveDefinite, "rho must lie in (-1, 1)");
        if (structure == Structure::CS && p > 1)
            pwlarsen::detail::require(rho > -1.0 / static_cast<double>(p - 1), ErrorKind::NotPositiveDefinite,
                            "compound symmetry needs rho > -1/(p-1)");
    }

    static CovSpec identity(Index p) { return CovSpec(1.0, 0.0, Structure::Identity, p); }

    double sigma2() const noexcept { return sigma2_; }
    double rho() const noexcept { return rho_; }
    Structure structure() const noexcept { return structure_; }
    Index p() const noexcept { return p_; }

private:
    double sigma2_;
    double rho_;
    Structure structure_;
    Index p_;
};

/**
 * CS:  sigma2 ((1 - rho) I + rho 11')
 * AR1: sigma2 rho^|i-j|
 * Identity ignores rho.
 */
inline MatrixXd make_sigma(const CovSpec& spec)
{
    const Index p = spec.p();
    MatrixXd S(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            double v = 0.0;
            switch (spec.structure()) {
                case Structure::Identity: v = i == j ? 1.0 : 0.0; break;
                case Structure::CS: v = i == j ? 1.0 : spec.rho(); break;
                case Structure::AR1: v = std::pow(spec.rho(), static_cast<double>(std::abs(i - j))); break;
            }
            S(i, j) = spec.sigma2() * v;
        }
    }
    const double min_eig = Eigen::SelfAdjointEigenSolver<MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (!(min_eig > 0.0))
        throw Error(ErrorKind::NotPositiveDefinite, "covariance has minimum eigenvalue " + std::to_string(min_eig));
    return S;
}

/// n rows i.i.d. N(0, sigma) via the lower Cholesky factor; draws fill row by row.
inline MatrixXd sample_predictors(Index n, const MatrixXd& sigma, Rng& rng)
{
    Eigen::LLT<MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::CholeskyFailure, "covariance is not positive definite");
    const MatrixXd L = llt.matrixL();
    std::normal_distribution<double> z;
    MatrixXd Z(n, sigma.rows());
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < Z.cols(); ++j) Z(i, j) = z(rng);
    return Z * L.transpose();
}

/// Centered n x p matrix with orthonormal columns (X'X = I, 1'X = 0).
inline MatrixXd orthonormal_design(Index n, Index p, Rng& rng)
{
    pwlarsen::detail::require(p < n, ErrorKind::InvalidArgument, "orthonormal centered design needs p < n");
    std::normal_distribution<double> z;
    MatrixXd Z(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) Z(i, j) = z(rng);
    Z.rowwise() -= Z.colwise().mean();
    Eigen::HouseholderQR<MatrixXd> qr(Z);
    return qr.householderQ() * MatrixXd::Identity(n, p);
}

/// y = X beta* + noise_sd z.
inline VectorXd gen_response(const MatrixXd& X, const VectorXd& beta_star, double noise_sd, Rng& rng)
{
    pwlarsen::detail::require(X.cols() == beta_star.size(), ErrorKind::DimensionMismatch,
                    "beta* has length " + std::to_string(beta_star.size()) + " but X has " +
                    std::to_string(X.cols()) + " columns");
    std::normal_distribution<double> z;
    VectorXd y = X * beta_star;
    for (Index i = 0; i < y.size(); ++i) {
        const double e = z(rng);
        y[i] += noise_sd * e;
    }
    return y;
}

enum class Design { Gaussian, Orthonormal };

struct NullSimConfig
{
    Index n = 100;
    Index p = 10;
    CovSpec cov = CovSpec::identity(10);
    Design design = Design::Gaussian;
    VectorXd beta_star = VectorXd::Zero(10);
    std::vector<double> alpha_list{1.0, 0.9, 0.5};
    std::size_t k_test = 0;
    std::size_t reps = 1000;
    std::uint64_t seed = 1;
    bool sigma2_known = true;
    Reference reference = Reference::exp(1.0); // for KS / QQ summaries
    double grid_step = AlphaGrid::default_step;
    bool refine = true; // fixed-point knots, so eta_{k+1} matches the knot's own ridge weight
    unsigned threads = 0; // 0: hardware concurrency
    std::string label;

    void validate() const
    {
        pwlarsen::detail::require(reps >= 1, ErrorKind::InvalidArgument, "reps must be >= 1");
        pwlarsen::detail::require(n >= 2 && p >= 1, ErrorKind::InvalidArgument, "need n >= 2 and p >= 1");
        pwlarsen::detail::require(cov.p() == p, ErrorKind::DimensionMismatch, "covariance dimension differs from p");
        pwlarsen::detail::require(beta_star.size() == p, ErrorKind::DimensionMismatch, "beta* length differs from p");
        pwlarsen::detail::require(!alpha_list.empty(), ErrorKind::InvalidArgument, "alpha list is empty");
        double signal = 0.0;
        for (Index j = 0; j < p; ++j) {
            if (beta_star[j] == 0.0) continue;
            if (signal == 0.0) signal = beta_star[j];
            pwlarsen::detail::require(beta_star[j] == signal, ErrorKind::InvalidArgument,
                            "nonzero entries of beta* must share one signal value");
        }
        for (double a : alpha_list)
            pwlarsen::detail::require(a > 0.0 && a <= 1.0, ErrorKind::AlphaOutOfRange, "alpha must lie in (0, 1]");
    }
};

/// Type-7 empirical quantile: linear interpolation at position q (m - 1) + 1.
inline double empirical_quantile(std::vector<double> xs, double q)
{
    pwlarsen::detail::require(!xs.empty(), ErrorKind::EmptySamples, "no samples");
    std::sort(xs.begin(), xs.end());
    const double h = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

struct SampleStats
{
    double mean = 0.0;
    double variance = 0.0; // m - 1 denominator; 0 for a single sample
    double q95 = 0.0;
};

inline SampleStats sample_stats(const std::vector<double>& xs)
{
    pwlarsen::detail::require(!xs.empty(), ErrorKind::EmptySamples, "no samples");
    SampleStats s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        for (double x : xs) s.variance += (x - s.mean) * (x - s.mean);
        s.variance /= static_cast<double>(xs.size() - 1);
    }
    s.q95 = empirical_quantile(xs, 0.95);
    return s;
}

struct AlphaSummary
{
    double alpha;
    std::size_t k;
    SampleStats stats;
    double ks = 0.0; // against NullSimConfig::reference
    std::vector<std::size_t> replicate; // replicate index of each sample
    std::vector<double> samples;        // T_k(alpha)
    std::vector<double> p_values;
};

struct NullSimSummary
{
    std::string label;
    Reference reference;
    std::vector<AlphaSummary> per_alpha;
    std::size_t reps = 0;
    std::size_t failures = 0;
    std::vector<std::string> failure_messages;

    const AlphaSummary& at(double alpha) const
    {
        for (const auto& a : per_alpha)
            if (std::abs(a.alpha - alpha) <= 1e-9) return a;
        throw Error(ErrorKind::AlphaNotInGrid, "alpha " + std::to_string(alpha) + " not simulated");
    }
};

namespace detail {

struct ReplicateOutcome
{
    std::vector<double> T;
    std::vector<double> p;
    std::optional<std::string> failure;
};

inline AlphaGrid sim_grid(const std::vector<double>& alphas, double step)
{
    const double amin = *std::min_element(alphas.begin(), alphas.end());
    AlphaGrid g = AlphaGrid::uniform(amin, step);
    std::vector<double> v = g.values();
    for (double a : alphas)
        if (!g.find(a)) v.push_back(a);
    std::sort(v.begin(), v.end(), std::greater<>());
    v.erase(std::unique(v.begin(), v.end(), [](double x, double y) { return std::abs(x - y) <= 1e-9; }), v.end());
    return AlphaGrid(std::move(v), step);
}

inline ReplicateOutcome run_replicate(const NullSimConfig& cfg, const MatrixXd& sigma, const AlphaGrid& grid,
                                      std::size_t r)
{
    ReplicateOutcome out;
    Rng rng = replicate_rng(cfg.seed, r);
    try {
        // The orthonormal design is scaled by sqrt(n) so that, like the Gaussian
        // design, its columns have squared norm n and beta* acts on the same scale.
        const MatrixXd X = cfg.design == Design::Orthonormal
                               ? MatrixXd(orthonormal_design(cfg.n, cfg.p, rng) * std::sqrt(static_cast<double>(cfg.n)))
                               : sample_predictors(cfg.n, sigma, rng);
        const VectorXd y = gen_response(X, cfg.beta_star, 1.0, rng);
        const Dataset d = standardize(Dataset(X, y));
        PwOptions popt;
        popt.refine = cfg.refine;
        const PathGrid pg = pw_lars_en(d, grid, cfg.k_test + 1, popt);
        const double s2 = cfg.sigma2_known ? 1.0 : sigma_hat(d);
        for (double a : cfg.alpha_list) {
            CovTestResult res = cov_test_en(d, pg, a, cfg.k_test, s2);
            if (!cfg.sigma2_known) use_estimated_sigma(res, static_cast<double>(d.n() - d.p()));
            out.T.push_back(res.statistic);
            out.p.push_back(res.p_value);
        }
    } catch (const Error& e) {
        out.T.clear();
        out.p.clear();
        out.failure = e.what();
    }
    return out;
}

} // namespace detail

/**
 * Monte Carlo experiment for the covariance test: per replicate draw X and y,
 * standardize, run pathwise LARS-EN over the alpha grid and record T_k(alpha).
 * Replicate r always uses stream (seed, r), so the result does not depend on
 * the thread count. Replicates that fail (ties, singular active sets) are
 * skipped and counted; more than 1% failures is an error.
 */
inline NullSimSummary mc_null_experiment(const NullSimConfig& cfg)
{
    cfg.validate();
    const MatrixXd sigma = make_sigma(cfg.cov);
    const AlphaGrid grid = detail::sim_grid(cfg.alpha_list, cfg.grid_step);

    std::vector<detail::ReplicateOutcome> outcomes(cfg.reps);
    unsigned nthreads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    nthreads = static_cast<unsigned>(std::min<std::size_t>(nthreads, cfg.reps));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < nthreads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t r = t; r < cfg.reps; r += nthreads)
                    outcomes[r] = detail::run_replicate(cfg, sigma, grid, r);
            });
        }
    }

    NullSimSummary s;
    s.label = cfg.label;
    s.reference = cfg.reference;
    s.reps = cfg.reps;
    for (double a : cfg.alpha_list) s.per_alpha.push_back({a, cfg.k_test, {}, 0.0, {}, {}, {}});
    for (std::size_t r = 0; r < cfg.reps; ++r) {
        const auto& o = outcomes[r];
        if (o.failure) {
            ++s.failures;
            if (s.failure_messages.size() < 10)
                s.failure_messages.push_back("replicate " + std::to_string(r) + ": " + *o.failure);
            continue;
        }
        for (std::size_t i = 0; i < cfg.alpha_list.size(); ++i) {
            s.per_alpha[i].replicate.push_back(r);
            s.per_alpha[i].samples.push_back(o.T[i]);
            s.per_alpha[i].p_values.push_back(o.p[i]);
        }
    }
    if (static_cast<double>(s.failures) > 0.01 * static_cast<double>(cfg.reps))
        throw Error(ErrorKind::TooManyFailures, std::to_string(s.failures) + " of " + std::to_string(cfg.reps) +
                                                    " replicates failed");
    for (auto& a : s.per_alpha) {
        if (a.samples.empty()) continue;
        a.stats = sample_stats(a.samples);
        a.ks = ks_distance(a.samples, cfg.reference);
    }
    return s;
}

/// (theoretical, empirical) quantile pairs at plotting positions (i - 0.5) / m.
inline std::vector<std::pair<double, double>> qq_data(std::vector<double> samples, const Reference& ref)
{
    pwlarsen::detail::require(!samples.empty(), ErrorKind::EmptySamples, "no samples for a QQ plot");
    std::sort(samples.begin(), samples.end());
    const double m = static_cast<double>(samples.size());
    std::vector<std::pair<double, double>> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        out.emplace_back(reference_quantile((static_cast<double>(i) + 0.5) / m, ref), samples[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Experiment presets

inline VectorXd signal_vector(Index p, Index k, double value = 3.0)
{
    VectorXd b = VectorXd::Zero(p);
    b.head(std::min(k, p)).setConstant(value);
    return b;
}

/// Global-null cells: Sigma_1 = I, Sigma_2 = CS(1, .25), Sigma_3 = AR1(1, .25) for p in {10, 50}.
inline std::vector<NullSimConfig> preset_table1(std::uint64_t seed, std::size_t reps = 1000)
{
    std::vector<NullSimConfig> out;
    const std::pair<const char*, Structure> structures[] = {
        {"Sigma1", Structure::Identity}, {"Sigma2", Structure::CS}, {"Sigma3", Structure::AR1}};
    for (const auto& [name, st] : structures) {
        for (Index p : {Index{10}, Index{50}}) {
            NullSimConfig c;
            c.n = 100;
            c.p = p;
            c.cov = CovSpec(1.0, st == Structure::Identity ? 0.0 : 0.25, st, p);
            c.beta_star = VectorXd::Zero(p);
            c.k_test = 0;
            c.reps = reps;
            c.seed = seed;
            c.label = std::string(name) + "_p" + std::to_string(p);
            out.push_back(std::move(c));
        }
    }
    return out;
}

/// General null: Sigma_1, n = 100, p = 50, k in {1, 2} signals equal to 3, statistic T_k.
inline std::vector<NullSimConfig> preset_fig2(std::uint64_t seed, std::size_t reps = 1000)
{
    std::vector<NullSimConfig> out;
    for (Index k : {Index{1}, Index{2}}) {
        NullSimConfig c;
        c.n = 100;
        c.p = 50;
        c.cov = CovSpec::identity(50);
        c.beta_star = signal_vector(50, k);
        c.k_test = static_cast<std::size_t>(k);
        c.reps = reps;
        c.seed = seed;
        c.label = "fig2_k" + std::to_string(k);
        out.push_back(std::move(c));
    }
    return out;
}

/// Orthonormal design, one signal of 3, statistic T_2 against Exp(rate 2).
inline NullSimConfig preset_fig3(std::uint64_t seed, std::size_t reps = 1000)
{
    NullSimConfig c;
    c.n = 100;
    c.p = 50;
    c.cov = CovSpec::identity(50);
    c.design = Design::Orthonormal;
    c.beta_star = signal_vector(50, 1);
    c.k_test = 2;
    c.reps = reps;
    c.seed = seed;
    c.reference = Reference::exp(2.0);
    c.label = "fig3_orthonormal_k1";
    return c;
}

} // namespace pwlarsen::sim
