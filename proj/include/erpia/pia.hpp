#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "erpia/exec.hpp"
#include "erpia/model.hpp"
#include "erpia/paths.hpp"
#include "erpia/regression.hpp"

namespace erpia {

/// Path-wise value estimates v[k][path], stored date-major, together with the
/// temperature and sweep count that produced them.
class ValueSurface {
public:
    ValueSurface(std::size_t paths, std::size_t steps, double lambda);

    [[nodiscard]] std::size_t paths() const noexcept { return paths_; }
    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
    [[nodiscard]] std::span<double> at(std::size_t k) noexcept { return {v_.data() + k * paths_, paths_}; }
    [[nodiscard]] std::span<const double> at(std::size_t k) const noexcept {
        return {v_.data() + k * paths_, paths_};
    }
    /// Mean of the date-0 row.
    [[nodiscard]] double price() const noexcept;

    double lambda;
    std::size_t iteration = 0;
    /// Continuation-regression coefficients of the last sweep, one vector per
    /// date 0..N-1 (empty before the first sweep).
    std::vector<std::vector<double>> continuation;

private:
    std::size_t paths_;
    std::size_t steps_;
    std::vector<double> v_;
};

/// Policy intensities exp((P - v) / lambda) on dates 0..N-1.
struct PolicyView {
    std::size_t paths = 0;
    std::size_t steps = 0;
    std::vector<double> pi;  // date-major
    [[nodiscard]] double at(std::size_t k, std::size_t path) const { return pi[k * paths + path]; }
};

struct PriceReport {
    std::string method;
    double price = 0.0;
    double stderr_ = 0.0;
    double lower = 0.0;  // the regularized price, a lower price for the American value
    double lower_stderr = 0.0;
    bool has_policy_lower = false;
    double policy_lower = 0.0;
    double policy_lower_stderr = 0.0;
    bool has_upper = false;
    double upper = 0.0;
    double upper_stderr = 0.0;
    bool has_out_of_sample = false;
    double out_of_sample = 0.0;
    double out_of_sample_stderr = 0.0;
    double lambda = 0.0;
    std::size_t iterations = 0;
    double wall_seconds = 0.0;
};

struct TraceRow {
    std::size_t iteration;
    double lambda;
    double price;
    double wall_seconds;
};

/// Price at the end of each schedule stage.
struct StageResult {
    double lambda;
    std::size_t iterations;
    double price;
    double stderr_;
};

struct SweepOptions {
    StepRule rule = StepRule::Exponential;
    Exec exec = Exec::Parallel;
};

/// European initialization: v_k = E[e^{-r(T - t_k)} P_T | F_k] by regression,
/// v_N = P_N. NeverStop subtracts the entropy cost of pi = 0 over [t_k, T], which
/// makes v the regularized value of the never-stop policy.
[[nodiscard]] ValueSurface init_surface(const PathBatch& batch, const RegressionPlan& plan,
                                        double r, double lambda, Exec exec = Exec::Parallel,
                                        SurfaceInit init = SurfaceInit::European);

/// One policy-improvement sweep, in place, backward over k = N-1..0. Throws
/// NumericalError on a non-finite value.
void pia_sweep(ValueSurface& surface, const PathBatch& batch, const RegressionPlan& plan,
               double lambda, double r, SweepOptions options = {});

[[nodiscard]] PolicyView policy_view(const ValueSurface& surface, const PathBatch& batch,
                                     double lambda);

/// Standard error attached to a path-wise price: the date-1 sample spread
/// discounted over one step.
[[nodiscard]] double surface_stderr(const ValueSurface& surface, double r, double dt);

struct PiaResult {
    PriceReport report;
    ValueSurface surface;
    std::vector<TraceRow> trace;
    std::vector<StageResult> stages;
};

/// Runs every schedule stage on an existing batch and plan.
[[nodiscard]] PiaResult run_pia(const PathBatch& batch, const RegressionPlan& plan,
                                const RunConfig& config, Exec exec = Exec::Parallel);
/// Simulates, builds the plan and runs the schedule; adds the dual bound and
/// the out-of-sample price when the configuration asks for them.
[[nodiscard]] PiaResult run_pia(const RunConfig& config);

/// Single backward pass of v = c + dt (n (P - v)^+ - r v) with regression
/// continuation values.
[[nodiscard]] PriceReport run_classical_penalization(const PathBatch& batch,
                                                     const RegressionPlan& plan, double r,
                                                     double penalty, Exec exec = Exec::Parallel);
[[nodiscard]] PriceReport run_classical_penalization(const RunConfig& config, double penalty);

/// Value at an arbitrary state implied by a converged surface: the node fixed
/// point with the surface's continuation regression at date k.
[[nodiscard]] double state_value(const ValueSurface& surface, const RegressionPlan& plan,
                                 std::size_t k, std::span<const double> prices, double payoff,
                                 double r, StepRule rule);

/// Dual upper bound from regression-residual martingale increments of the
/// discounted state value on a fresh batch.
[[nodiscard]] Estimate dual_upper_bound(const ValueSurface& surface, const MarketModel& model,
                                        const Payoff& payoff, const TimeGrid& grid,
                                        const RegressionPlan& plan, std::size_t paths,
                                        std::uint64_t fresh_seed,
                                        StepRule rule = StepRule::Exponential);

/// Value of the final randomized stopping rule on a fresh batch: stop during
/// [t_k, t_{k+1}) with probability 1 - exp(-pi dt), pi taken from the state value,
/// and collect the discounted payoff. The randomization is integrated out path
/// by path, so this is a lower bound on the exercise value up to sampling error.
[[nodiscard]] Estimate policy_lower_bound(const ValueSurface& surface, const MarketModel& model,
                                          const Payoff& payoff, const TimeGrid& grid,
                                          const RegressionPlan& plan, std::size_t paths,
                                          std::uint64_t fresh_seed,
                                          StepRule rule = StepRule::Exponential);

/// Re-evaluates the final policy on a fresh batch: one linear sweep whose
/// policy comes from the state value of the training surface.
[[nodiscard]] Estimate out_of_sample_price(const ValueSurface& surface, const MarketModel& model,
                                           const Payoff& payoff, const TimeGrid& grid,
                                           const RegressionPlan& plan, std::size_t paths,
                                           std::uint64_t fresh_seed,
                                           StepRule rule = StepRule::Exponential);

} // namespace erpia
