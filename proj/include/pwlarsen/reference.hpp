#pragma once
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>

#include <pwlarsen/error.hpp>

namespace pwlarsen {

/// Null reference distribution of a covariance test statistic.
struct Reference
{
    enum class Kind { Exp, F };

    Kind kind = Kind::Exp;
    double rate = 1.0; // Exp: rate d, i.e. mean 1/d
    double df1 = 2.0;  // F: numerator degrees of freedom (always 2 here)
    double df2 = 0.0;  // F: denominator degrees of freedom n - p

    static Reference exp(double rate = 1.0) { return {Kind::Exp, rate, 2.0, 0.0}; }
    static Reference f(double df2) { return {Kind::F, 1.0, 2.0, df2}; }

    void validate() const
    {
        if (kind == Kind::Exp && !(rate > 0.0 && std::isfinite(rate)))
            throw Error(ErrorKind::InvalidReference, "exponential rate must be positive");
        if (kind == Kind::F && !(df1 > 0.0 && df2 > 0.0 && std::isfinite(df2)))
            throw Error(ErrorKind::InvalidReference, "F degrees of freedom must be positive");
    }

    double mean() const
    {
        validate();
        if (kind == Kind::Exp) return 1.0 / rate;
        return df2 > 2.0 ? df2 / (df2 - 2.0) : INFINITY;
    }

    std::string label() const
    {
        char buf[64];
        if (kind == Kind::Exp)
            std::snprintf(buf, sizeof buf, "Exp(%g)", rate);
        else
            std::snprintf(buf, sizeof buf, "F(%g,%g)", df1, df2);
        return buf;
    }

    friend bool operator==(const Reference&, const Reference&) = default;
};

/// Upper-tail probability P(T >= statistic) under the reference.
inline double pvalue(double statistic, const Reference& ref)
{
    ref.validate();
    detail::require(std::isfinite(statistic), ErrorKind::InvalidArgument, "statistic must be finite");
    const double x = std::max(statistic, 0.0);
    if (ref.kind == Reference::Kind::Exp) return std::exp(-ref.rate * x);
    const boost::math::fisher_f_distribution<double> dist(ref.df1, ref.df2);
    return std::clamp(boost::math::cdf(boost::math::complement(dist, x)), 0.0, 1.0);
}

inline double reference_cdf(double x, const Reference& ref)
{
    return 1.0 - pvalue(x, ref);
}

inline double reference_quantile(double q, const Reference& ref)
{
    ref.validate();
    detail::require(q >= 0.0 && q < 1.0, ErrorKind::InvalidArgument, "quantile level must lie in [0, 1)");
    if (ref.kind == Reference::Kind::Exp) return -std::log1p(-q) / ref.rate;
    const boost::math::fisher_f_distribution<double> dist(ref.df1, ref.df2);
    return boost::math::quantile(dist, q);
}

/// Kolmogorov-Smirnov distance sup |F_m(x) - F(x)| of a sample to the reference.
inline double ks_distance(std::vector<double> samples, const Reference& ref)
{
    detail::require(!samples.empty(), ErrorKind::EmptySamples, "no samples");
    std::sort(samples.begin(), samples.end());
    const double m = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = reference_cdf(samples[i], ref);
        d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
    }
    return d;
}

} // namespace pwlarsen
