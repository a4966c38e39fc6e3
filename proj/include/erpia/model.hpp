#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace erpia {

/// Malformed or inconsistent input (dimension mismatch, bad parameter).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine produced a non-finite value or failed to converge.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// d-asset Black-Scholes model with a common dividend yield and volatility.
struct MarketModel {
    std::vector<double> s0;
    double r = 0.0;
    double delta = 0.0;
    double sigma = 0.0;

    MarketModel() = default;
    MarketModel(std::vector<double> spot, double rate, double dividend, double vol);

    [[nodiscard]] std::size_t dim() const noexcept { return s0.size(); }
    void validate() const;
};

enum class PayoffKind { MaxCall, Put, Zero };

/// Exercise payoff. `cap` > 0 truncates the payoff at that level (bounded-payoff
/// variant used by some invariant checks); 0 means uncapped.
struct Payoff {
    PayoffKind kind = PayoffKind::MaxCall;
    double strike = 100.0;
    double cap = 0.0;

    friend bool operator==(const Payoff&, const Payoff&) = default;

    static Payoff max_call(double k) { return {PayoffKind::MaxCall, k, 0.0}; }
    static Payoff put(double k) { return {PayoffKind::Put, k, 0.0}; }
    static Payoff zero() { return {PayoffKind::Zero, 0.0, 0.0}; }

    /// Checks that the payoff can be evaluated on `d`-dimensional prices.
    void check_dim(std::size_t d) const;
    [[nodiscard]] double operator()(std::span<const double> prices) const;
};

[[nodiscard]] double evaluate_payoff(const Payoff& payoff, std::span<const double> prices);

/// e^{-r dt}
[[nodiscard]] double discount_factor(double r, double dt);

/// Uniform grid t_k = k T / N, k = 0..N.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t steps);

    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
    [[nodiscard]] double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
    [[nodiscard]] double time(std::size_t k) const noexcept {
        return static_cast<double>(k) * horizon_ / static_cast<double>(steps_);
    }

private:
    double horizon_;
    std::size_t steps_;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

struct ScheduleStage {
    double lambda;
    std::size_t iters;
};

/// Temperatures applied in order, each for a fixed number of PIA sweeps.
class LambdaSchedule {
public:
    LambdaSchedule() = default;
    explicit LambdaSchedule(std::vector<ScheduleStage> stages);

    /// Single fixed temperature.
    static LambdaSchedule fixed(double lambda, std::size_t iters);
    /// The large-to-small warm start: every temperature of `ladder` above
    /// `target`, then `target` itself, each run for `iters_per_stage` sweeps.
    static LambdaSchedule ladder(std::span<const double> ladder, double target,
                                 std::size_t iters_per_stage);

    [[nodiscard]] const std::vector<ScheduleStage>& stages() const noexcept { return stages_; }
    [[nodiscard]] double final_lambda() const { return stages_.back().lambda; }
    [[nodiscard]] std::size_t total_iters() const noexcept;
    [[nodiscard]] bool empty() const noexcept { return stages_.empty(); }

private:
    std::vector<ScheduleStage> stages_;
};

/// Temperatures used for warm-starting small-lambda runs.
inline constexpr double kDefaultLadder[] = {0.1, 0.05, 0.01, 0.001};

enum class BasisKind { AndersenBroadie13, Polynomial };

struct BasisSpec {
    BasisKind kind = BasisKind::Polynomial;
    std::size_t degree = 3;
    bool payoff_feature = false;
};

enum class Method { PIA, ClassicalPenalization, Lattice, European };

/// One-step treatment of the linear policy-evaluation equation between grid
/// dates. Exponential freezes the coefficients over the step and integrates
/// exactly; BackwardEuler is the implicit first-order step whose fixed point
/// coincides with the lattice entropy solver.
enum class StepRule { Exponential, BackwardEuler };

/// Starting surface for Monte Carlo policy improvement.
enum class SurfaceInit { European, NeverStop };

struct RunConfig {
    MarketModel model;
    Payoff payoff;
    TimeGrid grid{1.0, 1};
    std::size_t paths = 10000;
    std::uint64_t seed = 1;
    LambdaSchedule schedule;
    BasisSpec basis;
    Method method = Method::PIA;
    StepRule step_rule = StepRule::Exponential;
    SurfaceInit init = SurfaceInit::European;
    /// Penalty intensity for classical penalization; 0 means 1/lambda.
    double penalty = 0.0;
    /// Lattice steps used by Method::Lattice (0 means grid.steps()).
    std::size_t lattice_steps = 0;
    bool antithetic = false;
    bool out_of_sample = false;
    bool dual_bound = false;
    std::uint64_t fresh_seed = 0;

    void validate() const;
};

[[nodiscard]] std::string to_string(Method m);
[[nodiscard]] std::string to_string(PayoffKind k);
[[nodiscard]] std::string to_string(StepRule s);

} // namespace erpia
