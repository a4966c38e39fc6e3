#include "erpia/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "erpia/driver.hpp"

namespace erpia {

NodeValues::NodeValues(std::size_t steps, std::size_t dim) : values_(steps + 1) {
    for (std::size_t k = 0; k <= steps; ++k) {
        std::size_t n = 1;
        for (std::size_t i = 0; i < dim; ++i) n *= k + 1;
        values_[k].assign(n, 0.0);
    }
}

LatticeModel::LatticeModel(const MarketModel& model, double horizon, std::size_t steps)
    : model_(model), steps_(steps) {
    model_.validate();
    if (model_.dim() > 2) throw ConfigError("lattice: at most two assets supported");
    if (model_.dim() == 2 && steps > 300)
        throw ConfigError("lattice: two-asset trees are limited to 300 steps");
    const TimeGrid grid(horizon, steps);
    dt_ = grid.dt();
    up_ = std::exp(model_.sigma * std::sqrt(dt_));
    if (model_.sigma == 0.0) {
        // Degenerate tree: every node follows the forward price.
        up_ = std::exp((model_.r - model_.delta) * dt_);
        p_ = 1.0;
        return;
    }
    const double down = 1.0 / up_;
    p_ = (std::exp((model_.r - model_.delta) * dt_) - down) / (up_ - down);
    if (!(p_ > 0.0 && p_ < 1.0))
        throw ConfigError("lattice: risk-neutral probability " + std::to_string(p_) +
                          " outside (0,1); use more steps");
}

std::size_t LatticeModel::nodes(std::size_t k) const noexcept {
    return dim() == 1 ? k + 1 : (k + 1) * (k + 1);
}

void LatticeModel::node_prices(std::size_t k, std::size_t node, std::span<double> out) const noexcept {
    const std::size_t width = k + 1;
    std::size_t rest = node;
    for (std::size_t i = 0; i < dim(); ++i) {
        const std::size_t downs = rest % width;
        rest /= width;
        // sigma = 0 uses a pure drift tree (no down moves reachable).
        const double e = model_.sigma == 0.0 ? static_cast<double>(k)
                                             : static_cast<double>(k) - 2.0 * static_cast<double>(downs);
        out[i] = model_.s0[i] * std::pow(up_, e);
    }
}

std::vector<double> LatticeModel::payoffs(std::size_t k, const Payoff& payoff) const {
    payoff.check_dim(dim());
    std::vector<double> out(nodes(k));
    double s[2];
    for (std::size_t n = 0; n < out.size(); ++n) {
        node_prices(k, n, {s, dim()});
        out[n] = payoff({s, dim()});
    }
    return out;
}

void LatticeModel::expectation(std::size_t k, std::span<const double> next, std::span<double> out,
                               Exec exec) const {
    const double p = p_;
    const double q = 1.0 - p_;
    const std::size_t w = k + 1;
    const std::size_t wn = k + 2;
    if (dim() == 1) {
        for (std::size_t j = 0; j < w; ++j) out[j] = p * next[j] + q * next[j + 1];
        return;
    }
    parallel_for(w, exec, [&](std::size_t j2) {
        for (std::size_t j1 = 0; j1 < w; ++j1) {
            const std::size_t a = j1 + wn * j2;
            out[j1 + w * j2] = p * (p * next[a] + q * next[a + 1]) +
                               q * (p * next[a + wn] + q * next[a + wn + 1]);
        }
    });
}

namespace {

template <class NodeRule>
NodeValues backward(const LatticeModel& lat, const Payoff& payoff, NodeRule&& rule, Exec exec) {
    const std::size_t n = lat.steps();
    NodeValues v(n, lat.dim());
    const auto terminal = lat.payoffs(n, payoff);
    std::copy(terminal.begin(), terminal.end(), v.at(n).begin());
    std::vector<double> cont;
    for (std::size_t k = n; k-- > 0;) {
        const auto pay = lat.payoffs(k, payoff);
        cont.resize(lat.nodes(k));
        lat.expectation(k, v.at(k + 1), cont, exec);
        auto out = v.at(k);
        parallel_for(out.size(), exec, [&](std::size_t j) { out[j] = rule(cont[j], pay[j]); });
    }
    return v;
}

} // namespace

NodeValues american_value(const LatticeModel& lat, const Payoff& payoff) {
    const double disc = discount_factor(lat.rate(), lat.dt());
    return backward(
        lat, payoff, [disc](double c, double p) { return std::max(p, disc * c); }, Exec::Parallel);
}

NodeValues european_value(const LatticeModel& lat, const Payoff& payoff) {
    const double disc = discount_factor(lat.rate(), lat.dt());
    return backward(
        lat, payoff, [disc](double c, double) { return disc * c; }, Exec::Parallel);
}

NodeValues entropy_value_exact(const LatticeModel& lat, const Payoff& payoff, double lambda,
                               StepRule rule, Exec exec) {
    if (!(lambda > 0.0)) throw ConfigError("entropy value: lambda must be > 0");
    const double r = lat.rate();
    const double dt = lat.dt();
    return backward(
        lat, payoff,
        [=](double c, double p) { return entropy_fixed_point(rule, c, p, lambda, r, dt); }, exec);
}

} // namespace erpia
