#include "erpia/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace erpia {

double policy_exponent(double payoff, double value, double lambda) noexcept {
    return std::min((payoff - value) / lambda, kExponentClamp);
}

double policy(double payoff, double value, double lambda) noexcept {
    return std::exp(policy_exponent(payoff, value, lambda));
}

double entropy_driver(double payoff, double value, double lambda) noexcept {
    return lambda * std::expm1(policy_exponent(payoff, value, lambda));
}

double intensity(double payoff, double value, double lambda) noexcept {
    const double x = policy_exponent(payoff, value, lambda);
    if (std::abs(x) < 1e-8) return 1.0 + 0.5 * x;
    return std::expm1(x) / x;
}

StepCoefficients step_coefficients(double payoff, double value_old, double lambda,
                                   double r) noexcept {
    const double pi = policy(payoff, value_old, lambda);
    return {pi + r, pi * value_old + lambda * (pi - 1.0), pi};
}

double policy_step(StepRule rule, double continuation, double payoff, double value_old,
                   double lambda, double r, double dt) noexcept {
    return linear_step(rule, continuation, policy(payoff, value_old, lambda), value_old, lambda, r, dt);
}

double linear_step(StepRule rule, double continuation, double pi, double value_old, double lambda,
                   double r, double dt) noexcept {
    const double a = pi + r;
    if (rule == StepRule::BackwardEuler) {
        // (c + dt b) / (1 + dt a), rescaled by 1 / (1 + dt pi) to stay finite for huge pi.
        const double s = 1.0 / (1.0 + dt * pi);
        const double q = dt * pi * s;
        return (s * continuation + q * (value_old + lambda) - s * dt * lambda) / (1.0 + s * dt * r);
    }
    // e^{-a dt} c + (b / a)(1 - e^{-a dt}), with b / a = (pi (v + lambda) - lambda) / (pi + r).
    const double z = a * dt;
    if (std::abs(z) < 1e-300) return continuation + dt * (pi * value_old + lambda * (pi - 1.0));
    const double b_over_a = (pi / a) * (value_old + lambda) - lambda / a;
    // e^{-z} - 1; expm1 only where cancellation matters
    const double em1 = z > 0.5 ? std::exp(-z) - 1.0 : std::expm1(-z);
    return (1.0 + em1) * continuation - b_over_a * em1;
}

double penalized_step(double continuation, double payoff, double penalty, double r,
                      double dt) noexcept {
    const double held = continuation / (1.0 + r * dt);
    if (held >= payoff) return held;
    return (continuation + penalty * dt * payoff) / (1.0 + r * dt + penalty * dt);
}

double entropy_implicit_root(double c, double payoff, double lambda, double r, double dt) {
    const double g = 1.0 + r * dt;
    auto residual = [&](double v) { return v * g - c - dt * entropy_driver(payoff, v, lambda); };
    // F is increasing and concave; F(lo) <= 0 <= F(hi).
    double lo = (c - lambda * dt) / g;
    double hi = std::max(payoff, c / g);
    if (lo > hi) std::swap(lo, hi);
    double v = hi;
    double step_old = hi - lo;
    double step = step_old;
    for (int it = 0; it < 100; ++it) {
        const double f = residual(v);
        if (std::abs(f) < 1e-12) return v;
        if (f < 0.0) lo = v; else hi = v;
        const double fp = g + dt * policy(payoff, v, lambda);
        const double newton = v - f / fp;
        if (newton <= lo || newton >= hi || std::abs(2.0 * f) > std::abs(step_old * fp)) {
            step_old = step;
            step = 0.5 * (hi - lo);
            v = lo + step;
        } else {
            step_old = step;
            step = newton - v;
            v = newton;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(v)))
            return v;
    }
    throw NumericalError("entropy node solve did not converge (c=" + std::to_string(c) +
                         ", P=" + std::to_string(payoff) + ", lambda=" + std::to_string(lambda) + ")");
}

double entropy_fixed_point(StepRule rule, double c, double payoff, double lambda, double r,
                           double dt) {
    if (rule == StepRule::BackwardEuler) return entropy_implicit_root(c, payoff, lambda, r, dt);
    auto gap = [&](double v) { return policy_step(rule, c, payoff, v, lambda, r, dt) - v; };
    double width = 1.0 + lambda;
    double lo = std::min(payoff, c) - width;
    double hi = std::max(payoff, c) + width;
    int guard = 0;
    while (gap(lo) <= 0.0) {
        lo -= width;
        width *= 2.0;
        if (++guard > 200) throw NumericalError("exponential fixed point: no lower bracket");
    }
    width = 1.0 + lambda;
    while (gap(hi) >= 0.0) {
        hi += width;
        width *= 2.0;
        if (++guard > 400) throw NumericalError("exponential fixed point: no upper bracket");
    }
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        gap, lo, hi, boost::math::tools::eps_tolerance<double>(52), max_iter);
    if (max_iter >= 200) throw NumericalError("exponential fixed point did not converge");
    return 0.5 * (a + b);
}

} // namespace erpia
