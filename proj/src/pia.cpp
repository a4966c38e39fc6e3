#include "erpia/pia.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "erpia/driver.hpp"
#include "erpia/stats.hpp"

namespace erpia {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_shapes(const ValueSurface& surface, const PathBatch& batch, const RegressionPlan& plan) {
    if (surface.paths() != batch.paths() || surface.steps() != batch.steps())
        throw ConfigError("surface shape does not match the path batch");
    if (&plan.batch() != &batch) throw ConfigError("regression plan was built on a different batch");
}

// Vectorized policy step over fixed blocks of paths; same arithmetic as
// policy_step up to rounding. Returns the first path with a non-finite value,
// or v.size() if there is none.
std::size_t step_blocks(StepRule rule, std::span<const double> cont, std::span<const double> pay,
                        std::span<double> v, double lambda, double r, double dt) {
    using Arr = Eigen::ArrayXd;
    using CMap = Eigen::Map<const Arr>;
    const std::size_t m = v.size();
    const std::size_t blocks = (m + kReduceBlock - 1) / kReduceBlock;
    std::vector<std::size_t> first_bad(blocks, m);
    const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < nb; ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
        const auto len = static_cast<Eigen::Index>(std::min(m, lo + kReduceBlock) - lo);
        const CMap c(cont.data() + lo, len);
        const CMap p(pay.data() + lo, len);
        Eigen::Map<Arr> val(v.data() + lo, len);
        // the lower clamp keeps exp off its slow underflow path; e^-700 is zero next to r
        const Arr pi = ((p - val) / lambda).max(-kExponentClamp).min(kExponentClamp).exp();
        Arr out(len);
        if (rule == StepRule::BackwardEuler) {
            const Arr s = 1.0 / (1.0 + dt * pi);
            out = (s * c + dt * pi * s * (val + lambda) - s * (dt * lambda)) / (1.0 + s * (dt * r));
        } else {
            const Arr a = pi + r;
            const Arr e = (-a * dt).exp();
            const Arr b_over_a = (pi * (val + lambda) - lambda) / a;
            out = e * c - b_over_a * (e - 1.0);
            if (!(r > 0.0)) {
                const Arr small = c + dt * (pi * val + lambda * (pi - 1.0));
                out = (a * dt > 1e-300).select(out, small);
            }
        }
        val = out;
        for (Eigen::Index i = 0; i < len; ++i)
            if (!std::isfinite(out(i))) {
                first_bad[static_cast<std::size_t>(b)] = lo + static_cast<std::size_t>(i);
                break;
            }
    }
    for (auto i : first_bad)
        if (i < m) return i;
    return m;
}

// Lower bound of v at t: the never-stop policy is worth at least -lambda (T - t).
// A fitted continuation below it is regression error in the tails, and left
// alone it drags the node into the clamped regime where it recovers by only
// lambda per sweep.
double value_floor(const TimeGrid& grid, std::size_t k, double lambda) noexcept {
    return -lambda * (grid.horizon() - grid.time(k));
}

void floor_at(std::span<double> values, double floor) noexcept {
    for (double& v : values) v = std::max(v, floor);
}

std::uint64_t default_fresh_seed(const RunConfig& config) {
    return config.fresh_seed != 0 ? config.fresh_seed : mix_seed(config.seed, 0xF2E5);
}

} // namespace

ValueSurface::ValueSurface(std::size_t paths, std::size_t steps, double lam)
    : lambda(lam), paths_(paths), steps_(steps), v_((steps + 1) * paths, 0.0) {}

double ValueSurface::price() const noexcept { return sample_moments(at(0)).mean; }

ValueSurface init_surface(const PathBatch& batch, const RegressionPlan& plan, double r,
                          double lambda, Exec exec, SurfaceInit init) {
    const std::size_t n = batch.steps();
    ValueSurface surface(batch.paths(), n, lambda);
    const auto terminal = batch.payoffs_at(n);
    std::copy(terminal.begin(), terminal.end(), surface.at(n).begin());
    std::vector<double> target(batch.paths());
    for (std::size_t k = 0; k < n; ++k) {
        const double disc = discount_factor(r, batch.grid().horizon() - batch.grid().time(k));
        std::transform(terminal.begin(), terminal.end(), target.begin(),
                       [disc](double p) { return disc * p; });
        plan.cond_exp(k, target, surface.at(k), exec);
        if (init == SurfaceInit::NeverStop) {
            const double tau = batch.grid().horizon() - batch.grid().time(k);
            const double cost = r == 0.0 ? lambda * tau : lambda * (1.0 - discount_factor(r, tau)) / r;
            for (double& v : surface.at(k)) v -= cost;
        }
        floor_at(surface.at(k), value_floor(batch.grid(), k, lambda));
    }
    return surface;
}

void pia_sweep(ValueSurface& surface, const PathBatch& batch, const RegressionPlan& plan,
               double lambda, double r, SweepOptions options) {
    check_shapes(surface, batch, plan);
    if (!(lambda > 0.0)) throw ConfigError("pia sweep: lambda must be > 0");
    const std::size_t n = batch.steps();
    const double dt = batch.grid().dt();
    const std::size_t m = surface.iteration;
    surface.lambda = lambda;
    surface.continuation.resize(n);
    std::vector<double> cont(batch.paths());
    for (std::size_t k = n; k-- > 0;) {
        auto beta = plan.coefficients(k, surface.at(k + 1), options.exec);
        auto row = surface.at(k);
        const auto pay = batch.payoffs_at(k);
        plan.fit(k, beta, cont, options.exec);
        floor_at(cont, value_floor(batch.grid(), k + 1, lambda));
        std::size_t bad = row.size();
        if (options.exec == Exec::Serial) {
            for (std::size_t i = 0; i < row.size() && bad == row.size(); ++i) {
                row[i] = policy_step(options.rule, cont[i], pay[i], row[i], lambda, r, dt);
                if (!std::isfinite(row[i])) bad = i;
            }
        } else {
            bad = step_blocks(options.rule, cont, pay, row, lambda, r, dt);
        }
        if (bad < row.size())
            throw NumericalError("pia sweep: non-finite value at path " + std::to_string(bad) +
                                 ", date " + std::to_string(k) + ", iteration " +
                                 std::to_string(m + 1));
        surface.continuation[k] = std::move(beta);
    }
    surface.iteration = m + 1;
}

PolicyView policy_view(const ValueSurface& surface, const PathBatch& batch, double lambda) {
    PolicyView view;
    view.paths = surface.paths();
    view.steps = surface.steps();
    view.pi.resize(view.paths * view.steps);
    for (std::size_t k = 0; k < view.steps; ++k) {
        const auto row = surface.at(k);
        const auto pay = batch.payoffs_at(k);
        for (std::size_t i = 0; i < view.paths; ++i)
            view.pi[k * view.paths + i] = policy(pay[i], row[i], lambda);
    }
    return view;
}

double surface_stderr(const ValueSurface& surface, double r, double dt) {
    if (surface.steps() < 1) return 0.0;
    return discount_factor(r, dt) * sample_moments(surface.at(1)).stderr_();
}

PiaResult run_pia(const PathBatch& batch, const RegressionPlan& plan, const RunConfig& config,
                  Exec exec) {
    const auto& stages = config.schedule.stages();
    if (stages.empty()) throw ConfigError("pia: empty schedule");
    const auto t0 = Clock::now();
    const double r = config.model.r;
    const double dt = batch.grid().dt();

    PiaResult result{{}, init_surface(batch, plan, r, stages.front().lambda, exec, config.init), {}, {}};
    auto& surface = result.surface;
    result.trace.push_back({0, stages.front().lambda, surface.price(), seconds_since(t0)});
    const SweepOptions options{config.step_rule, exec};
    for (const auto& stage : stages) {
        for (std::size_t i = 0; i < stage.iters; ++i) {
            pia_sweep(surface, batch, plan, stage.lambda, r, options);
            result.trace.push_back({surface.iteration, stage.lambda, surface.price(), seconds_since(t0)});
        }
        result.stages.push_back({stage.lambda, surface.iteration, surface.price(),
                                 surface_stderr(surface, r, dt)});
    }

    auto& rep = result.report;
    rep.method = to_string(Method::PIA);
    rep.price = surface.price();
    rep.stderr_ = surface_stderr(surface, r, dt);
    rep.lower = rep.price;
    rep.lower_stderr = rep.stderr_;
    rep.lambda = stages.back().lambda;
    rep.iterations = surface.iteration;
    rep.wall_seconds = seconds_since(t0);
    return result;
}

PiaResult run_pia(const RunConfig& config) {
    config.validate();
    const auto t0 = Clock::now();
    const auto batch = simulate(config.model, config.payoff, config.grid, config.paths, config.seed,
                                {config.antithetic});
    const auto basis = Basis::from_spec(config.basis, config.model.dim(),
                                        basis_scale(config.model, config.payoff));
    const auto plan = build_plan(batch, basis);
    auto result = run_pia(batch, plan, config);
    auto& rep = result.report;
    if (config.dual_bound) {
        const auto up = dual_upper_bound(result.surface, config.model, config.payoff, config.grid,
                                         plan, config.paths, default_fresh_seed(config),
                                         config.step_rule);
        rep.has_upper = true;
        rep.upper = up.value;
        rep.upper_stderr = up.stderr_;
        // the stopping rule itself, valued on other fresh paths
        const auto low = policy_lower_bound(result.surface, config.model, config.payoff,
                                            config.grid, plan, config.paths,
                                            mix_seed(default_fresh_seed(config), 2), config.step_rule);
        rep.has_policy_lower = true;
        rep.policy_lower = low.value;
        rep.policy_lower_stderr = low.stderr_;
    }
    if (config.out_of_sample) {
        const auto oos = out_of_sample_price(result.surface, config.model, config.payoff,
                                             config.grid, plan, config.paths,
                                             mix_seed(default_fresh_seed(config), 1),
                                             config.step_rule);
        rep.has_out_of_sample = true;
        rep.out_of_sample = oos.value;
        rep.out_of_sample_stderr = oos.stderr_;
    }
    rep.wall_seconds = seconds_since(t0);
    return result;
}

PriceReport run_classical_penalization(const PathBatch& batch, const RegressionPlan& plan, double r,
                                       double penalty, Exec exec) {
    if (!(penalty >= 0.0)) throw ConfigError("classical penalization: penalty must be >= 0");
    if (&plan.batch() != &batch) throw ConfigError("regression plan was built on a different batch");
    const auto t0 = Clock::now();
    const std::size_t n = batch.steps();
    const double dt = batch.grid().dt();
    ValueSurface surface(batch.paths(), n, 0.0);
    const auto terminal = batch.payoffs_at(n);
    std::copy(terminal.begin(), terminal.end(), surface.at(n).begin());
    std::vector<double> cont(batch.paths());
    for (std::size_t k = n; k-- > 0;) {
        plan.cond_exp(k, surface.at(k + 1), cont, exec);
        auto row = surface.at(k);
        const auto pay = batch.payoffs_at(k);
        parallel_for(row.size(), exec,
                     [&](std::size_t i) { row[i] = penalized_step(cont[i], pay[i], penalty, r, dt); });
    }
    PriceReport rep;
    rep.method = to_string(Method::ClassicalPenalization);
    rep.price = surface.price();
    rep.stderr_ = surface_stderr(surface, r, dt);
    rep.lower = rep.price;
    rep.lower_stderr = rep.stderr_;
    rep.lambda = penalty > 0.0 ? 1.0 / penalty : 0.0;
    rep.iterations = 1;
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

PriceReport run_classical_penalization(const RunConfig& config, double penalty) {
    config.validate();
    const auto batch = simulate(config.model, config.payoff, config.grid, config.paths, config.seed,
                                {config.antithetic});
    const auto basis = Basis::from_spec(config.basis, config.model.dim(),
                                        basis_scale(config.model, config.payoff));
    const auto plan = build_plan(batch, basis);
    if (penalty <= 0.0) penalty = 1.0 / config.schedule.final_lambda();
    return run_classical_penalization(batch, plan, config.model.r, penalty);
}

double state_value(const ValueSurface& surface, const RegressionPlan& plan, std::size_t k,
                   std::span<const double> prices, double payoff, double r, StepRule rule) {
    if (k == surface.steps()) return payoff;
    if (surface.continuation.size() != surface.steps())
        throw ConfigError("state value: surface has not been swept yet");
    const double c = std::max(plan.evaluate(k, surface.continuation[k], prices, payoff),
                              value_floor(plan.batch().grid(), k + 1, surface.lambda));
    return entropy_fixed_point(rule, c, payoff, surface.lambda, r,
                               plan.batch().grid().dt());
}

Estimate dual_upper_bound(const ValueSurface& surface, const MarketModel& model,
                          const Payoff& payoff, const TimeGrid& grid, const RegressionPlan& plan,
                          std::size_t paths, std::uint64_t fresh_seed, StepRule rule) {
    const auto fresh = simulate(model, payoff, grid, paths, fresh_seed);
    const auto fresh_plan = build_plan(fresh, plan.basis());
    const std::size_t n = grid.steps();
    const double r = model.r;

    // Discounted state value on the fresh paths.
    std::vector<double> y((n + 1) * paths);
    for (std::size_t k = 0; k <= n; ++k) {
        const double disc = discount_factor(r, grid.time(k));
        const auto pay = fresh.payoffs_at(k);
        parallel_for(paths, Exec::Parallel, [&](std::size_t i) {
            y[k * paths + i] =
                disc * state_value(surface, plan, k, fresh.prices(k, i), pay[i], r, rule);
        });
    }

    std::vector<double> mart(paths, 0.0);
    std::vector<double> best(paths);
    {
        const auto pay = fresh.payoffs_at(0);
        for (std::size_t i = 0; i < paths; ++i) best[i] = pay[i];
    }
    std::vector<double> fitted(paths);
    for (std::size_t k = 0; k < n; ++k) {
        const std::span<const double> next(y.data() + (k + 1) * paths, paths);
        fresh_plan.cond_exp(k, next, fitted);
        const double disc = discount_factor(r, grid.time(k + 1));
        const auto pay = fresh.payoffs_at(k + 1);
        for (std::size_t i = 0; i < paths; ++i) {
            mart[i] += next[i] - fitted[i];
            best[i] = std::max(best[i], disc * pay[i] - mart[i]);
        }
    }
    const auto mom = sample_moments(best);
    return {mom.mean, mom.stderr_()};
}

Estimate policy_lower_bound(const ValueSurface& surface, const MarketModel& model,
                            const Payoff& payoff, const TimeGrid& grid, const RegressionPlan& plan,
                            std::size_t paths, std::uint64_t fresh_seed, StepRule rule) {
    const auto fresh = simulate(model, payoff, grid, paths, fresh_seed);
    const std::size_t n = grid.steps();
    const double dt = grid.dt();
    std::vector<double> collected(paths, 0.0);
    std::vector<double> alive(paths, 1.0);
    for (std::size_t k = 0; k <= n; ++k) {
        const double disc = discount_factor(model.r, grid.time(k));
        const auto pay = fresh.payoffs_at(k);
        parallel_for(paths, Exec::Parallel, [&](std::size_t i) {
            if (k == n) {
                collected[i] += alive[i] * disc * pay[i];
                return;
            }
            const double v = state_value(surface, plan, k, fresh.prices(k, i), pay[i], model.r, rule);
            const double stop = -std::expm1(-policy(pay[i], v, surface.lambda) * dt);
            collected[i] += alive[i] * stop * disc * pay[i];
            alive[i] *= 1.0 - stop;
        });
    }
    const auto mom = sample_moments(collected);
    return {mom.mean, mom.stderr_()};
}

Estimate out_of_sample_price(const ValueSurface& surface, const MarketModel& model,
                             const Payoff& payoff, const TimeGrid& grid,
                             const RegressionPlan& plan, std::size_t paths,
                             std::uint64_t fresh_seed, StepRule rule) {
    const auto fresh = simulate(model, payoff, grid, paths, fresh_seed);
    const auto fresh_plan = build_plan(fresh, plan.basis());
    const std::size_t n = grid.steps();
    ValueSurface replay(paths, n, surface.lambda);
    for (std::size_t k = 0; k <= n; ++k) {
        const auto pay = fresh.payoffs_at(k);
        auto row = replay.at(k);
        parallel_for(paths, Exec::Parallel, [&](std::size_t i) {
            row[i] = state_value(surface, plan, k, fresh.prices(k, i), pay[i], model.r, rule);
        });
    }
    pia_sweep(replay, fresh, fresh_plan, surface.lambda, model.r, {rule, Exec::Parallel});
    return {replay.price(), surface_stderr(replay, model.r, grid.dt())};
}

} // namespace erpia
