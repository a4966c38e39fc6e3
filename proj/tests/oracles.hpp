#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library under test.

#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double black_scholes_call(double s, double k, double r, double q, double sigma, double t) {
    const double sd = sigma * std::sqrt(t);
    const double d1 = (std::log(s / k) + (r - q + 0.5 * sigma * sigma) * t) / sd;
    return s * std::exp(-q * t) * norm_cdf(d1) - k * std::exp(-r * t) * norm_cdf(d1 - sd);
}

/// European call on the max of two independent, identically parameterized
/// log-normal assets: e^{-rT} * integral_K^inf (1 - F(x)^2) dx.
inline double max_call_two_iid(double s0, double k, double r, double q, double sigma, double t) {
    const double mu = std::log(s0) + (r - q - 0.5 * sigma * sigma) * t;
    const double sd = sigma * std::sqrt(t);
    auto tail = [&](double x) {
        const double f = norm_cdf((std::log(x) - mu) / sd);
        return 1.0 - f * f;
    };
    using boost::math::quadrature::gauss_kronrod;
    const double integral = gauss_kronrod<double, 61>::integrate(
        tail, k, std::numeric_limits<double>::infinity(), 15, 1e-12);
    return std::exp(-r * t) * integral;
}

/// Root of a decreasing function on [lo, hi] by plain bisection.
inline double bisect_decreasing(const std::function<double(double)>& g, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace oracle
