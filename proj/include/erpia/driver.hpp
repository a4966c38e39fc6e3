#pragma once

#include "erpia/model.hpp"

namespace erpia {

/// Upper clamp for (P - v) / lambda before exponentiation.
inline constexpr double kExponentClamp = 700.0;

/// min((P - v) / lambda, 700).
[[nodiscard]] double policy_exponent(double payoff, double value, double lambda) noexcept;

/// Optimal stopping rate exp((P - v) / lambda) with clamped exponent.
[[nodiscard]] double policy(double payoff, double value, double lambda) noexcept;

/// Entropy-regularized driver lambda (exp((P - v) / lambda) - 1).
[[nodiscard]] double entropy_driver(double payoff, double value, double lambda) noexcept;

/// Stopping intensity lambda / (P - v) (exp((P - v) / lambda) - 1); equals 1 at P = v.
[[nodiscard]] double intensity(double payoff, double value, double lambda) noexcept;

/// Coefficients of the linear equation dv/dt = a v - b frozen at the left date
/// of a step: a = pi + r, b = pi v_old + lambda (pi - 1) with pi = policy(P, v_old).
struct StepCoefficients {
    double a;
    double b;
    double pi;
};

[[nodiscard]] StepCoefficients step_coefficients(double payoff, double value_old, double lambda,
                                                 double r) noexcept;

/// One policy-evaluation step backward over [t_k, t_k + dt]: returns v_k given
/// the continuation value c = E[v_{k+1} | F_k], the payoff P_k and the previous
/// iterate at the same node.
[[nodiscard]] double policy_step(StepRule rule, double continuation, double payoff,
                                 double value_old, double lambda, double r, double dt) noexcept;

/// Same step for an arbitrary frozen rate pi (pi = 0 is the never-stop policy).
[[nodiscard]] double linear_step(StepRule rule, double continuation, double pi, double value_old,
                                 double lambda, double r, double dt) noexcept;

/// Classical penalization node solve of v = c + dt (n (P - v)^+ - r v).
[[nodiscard]] double penalized_step(double continuation, double payoff, double penalty, double r,
                                    double dt) noexcept;

/// Root of v = c + dt (lambda (exp((P - v) / lambda) - 1) - r v), the implicit
/// step of the entropy-regularized equation, by safeguarded Newton to
/// |residual| < 1e-12. Throws NumericalError after 100 iterations.
[[nodiscard]] double entropy_implicit_root(double continuation, double payoff, double lambda,
                                           double r, double dt);

/// Fixed point v = policy_step(rule, c, P, v), i.e. the value a converged
/// sweep assigns to a node with continuation c.
[[nodiscard]] double entropy_fixed_point(StepRule rule, double continuation, double payoff,
                                         double lambda, double r, double dt);

} // namespace erpia
