#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "erpia/exec.hpp"
#include "erpia/model.hpp"

namespace erpia {

/// Per-date node values of a recombining lattice; date k holds (k+1)^d entries.
class NodeValues {
public:
    NodeValues() = default;
    NodeValues(std::size_t steps, std::size_t dim);

    [[nodiscard]] std::size_t steps() const noexcept { return values_.empty() ? 0 : values_.size() - 1; }
    [[nodiscard]] std::span<double> at(std::size_t k) noexcept { return values_[k]; }
    [[nodiscard]] std::span<const double> at(std::size_t k) const noexcept { return values_[k]; }
    [[nodiscard]] double root() const noexcept { return values_[0][0]; }

private:
    std::vector<std::vector<double>> values_;
};

/// Cox-Ross-Rubinstein lattice, taken as a product of independent one-asset
/// trees when d = 2. Node (j_1, .., j_d) at date k has j_i down moves and
/// is stored at index j_1 + (k+1) j_2.
class LatticeModel {
public:
    LatticeModel(const MarketModel& model, double horizon, std::size_t steps);

    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
    [[nodiscard]] std::size_t dim() const noexcept { return model_.dim(); }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] double up() const noexcept { return up_; }
    [[nodiscard]] double prob_up() const noexcept { return p_; }
    [[nodiscard]] double rate() const noexcept { return model_.r; }
    [[nodiscard]] const MarketModel& model() const noexcept { return model_; }
    [[nodiscard]] std::size_t nodes(std::size_t k) const noexcept;

    /// Prices at node `node` of date k.
    void node_prices(std::size_t k, std::size_t node, std::span<double> out) const noexcept;
    /// Payoff at every node of date k.
    [[nodiscard]] std::vector<double> payoffs(std::size_t k, const Payoff& payoff) const;
    /// Exact one-step conditional expectation of date-(k+1) values at every node of date k.
    void expectation(std::size_t k, std::span<const double> next, std::span<double> out,
                     Exec exec = Exec::Parallel) const;

private:
    MarketModel model_;
    std::size_t steps_;
    double dt_;
    double up_;
    double p_;
};

/// V_k = max(P_k, e^{-r dt} E[V_{k+1}]).
[[nodiscard]] NodeValues american_value(const LatticeModel& lat, const Payoff& payoff);
/// V_k = e^{-r dt} E[V_{k+1}].
[[nodiscard]] NodeValues european_value(const LatticeModel& lat, const Payoff& payoff);

/// Node-exact solution of the discretized entropy-regularized equation. With
/// BackwardEuler each node solves v = c + dt (lambda (e^{(P-v)/lambda} - 1) - r v)
/// for c = E[v_{k+1}]; with Exponential each node is the fixed point of the
/// exponential policy step.
[[nodiscard]] NodeValues entropy_value_exact(const LatticeModel& lat, const Payoff& payoff,
                                             double lambda,
                                             StepRule rule = StepRule::BackwardEuler,
                                             Exec exec = Exec::Parallel);

} // namespace erpia
