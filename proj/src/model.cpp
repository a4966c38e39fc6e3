#include "erpia/model.hpp"

#include <algorithm>
#include <cmath>

namespace erpia {

MarketModel::MarketModel(std::vector<double> spot, double rate, double dividend, double vol)
    : s0(std::move(spot)), r(rate), delta(dividend), sigma(vol) {
    validate();
}

void MarketModel::validate() const {
    if (s0.empty()) throw ConfigError("model: at least one asset required");
    for (double s : s0)
        if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("model: s0 entries must be positive");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("model: sigma must be >= 0");
    if (!std::isfinite(r) || !std::isfinite(delta)) throw ConfigError("model: r and delta must be finite");
}

void Payoff::check_dim(std::size_t d) const {
    if (kind == PayoffKind::Put && d != 1)
        throw ConfigError("payoff: put requires exactly one asset, got " + std::to_string(d));
    if (d == 0) throw ConfigError("payoff: empty price vector");
}

double Payoff::operator()(std::span<const double> prices) const {
    double value = 0.0;
    switch (kind) {
    case PayoffKind::MaxCall:
        value = std::max(*std::max_element(prices.begin(), prices.end()) - strike, 0.0);
        break;
    case PayoffKind::Put:
        value = std::max(strike - prices[0], 0.0);
        break;
    case PayoffKind::Zero:
        break;
    }
    return cap > 0.0 ? std::min(value, cap) : value;
}

double evaluate_payoff(const Payoff& payoff, std::span<const double> prices) {
    payoff.check_dim(prices.size());
    return payoff(prices);
}

double discount_factor(double r, double dt) { return std::exp(-r * dt); }

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("grid: horizon must be > 0");
    if (steps < 1) throw ConfigError("grid: at least one step required");
}

LambdaSchedule::LambdaSchedule(std::vector<ScheduleStage> stages) : stages_(std::move(stages)) {
    if (stages_.empty()) throw ConfigError("schedule: no stages");
    for (std::size_t i = 0; i < stages_.size(); ++i) {
        const auto& s = stages_[i];
        if (!(s.lambda > 0.0) || !std::isfinite(s.lambda))
            throw ConfigError("schedule: lambda must be > 0");
        if (s.iters < 1) throw ConfigError("schedule: each stage needs at least one iteration");
        if (i > 0 && !(s.lambda < stages_[i - 1].lambda))
            throw ConfigError("schedule: lambdas must be strictly decreasing");
    }
}

LambdaSchedule LambdaSchedule::fixed(double lambda, std::size_t iters) {
    return LambdaSchedule({{lambda, iters}});
}

LambdaSchedule LambdaSchedule::ladder(std::span<const double> ladder, double target,
                                      std::size_t iters_per_stage) {
    std::vector<ScheduleStage> stages;
    for (double l : ladder)
        if (l > target) stages.push_back({l, iters_per_stage});
    stages.push_back({target, iters_per_stage});
    return LambdaSchedule(std::move(stages));
}

std::size_t LambdaSchedule::total_iters() const noexcept {
    std::size_t n = 0;
    for (const auto& s : stages_) n += s.iters;
    return n;
}

void RunConfig::validate() const {
    model.validate();
    payoff.check_dim(model.dim());
    if (paths < 1) throw ConfigError("paths must be >= 1");
    if (method == Method::PIA || method == Method::ClassicalPenalization) {
        if (schedule.empty()) throw ConfigError("schedule: required for this method");
    }
    if (penalty < 0.0) throw ConfigError("penalty must be >= 0");
}

std::string to_string(Method m) {
    switch (m) {
    case Method::PIA: return "pia";
    case Method::ClassicalPenalization: return "classical";
    case Method::Lattice: return "lattice";
    case Method::European: return "european";
    }
    return "?";
}

std::string to_string(PayoffKind k) {
    switch (k) {
    case PayoffKind::MaxCall: return "maxcall";
    case PayoffKind::Put: return "put";
    case PayoffKind::Zero: return "zero";
    }
    return "?";
}

std::string to_string(StepRule s) {
    return s == StepRule::Exponential ? "exponential" : "backward_euler";
}

} // namespace erpia
