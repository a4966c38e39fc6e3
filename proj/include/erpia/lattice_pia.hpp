#pragma once

#include "erpia/lattice.hpp"

namespace erpia {

/// Starting surface for policy improvement on a lattice.
///  European:  v_k = e^{-r(T - t_k)} E[P_T | node].
///  NeverStop: value of the zero stopping rate, whose driver is -lambda; this
///             is a genuine policy value, so improvement is monotone from the
///             first sweep on.
enum class LatticeInit { European, NeverStop };

[[nodiscard]] NodeValues lattice_pia_init(const LatticeModel& lat, const Payoff& payoff,
                                          double lambda, LatticeInit init,
                                          StepRule rule = StepRule::BackwardEuler);

/// Policy-improvement sweep with exact lattice expectations in place of
/// regression; updates `v` in place.
void lattice_pia_sweep(NodeValues& v, const LatticeModel& lat, const Payoff& payoff, double lambda,
                       StepRule rule = StepRule::BackwardEuler, Exec exec = Exec::Parallel);

} // namespace erpia
