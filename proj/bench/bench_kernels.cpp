#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "erpia/basis.hpp"
#include "erpia/exec.hpp"
#include "erpia/lattice.hpp"
#include "erpia/pia.hpp"
#include "erpia/regression.hpp"

using namespace erpia;

namespace {

// Max-call setup at reduced size, shared by the Monte Carlo benchmarks.
struct Setup {
    MarketModel model{{100.0, 100.0}, 0.05, 0.1, 0.2};
    Payoff payoff = Payoff::max_call(100.0);
    TimeGrid grid{3.0, 100};
    PathBatch batch = simulate(model, payoff, grid, 20000, 1);
    RegressionPlan plan{batch, Basis::andersen_broadie13(100.0)};
    ValueSurface surface = init_surface(batch, plan, 0.05, 0.01);
};

Setup& setup() {
    static auto s = std::make_unique<Setup>();
    return *s;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_Simulate(benchmark::State& state) {
    const auto& s = setup();
    for (auto _ : state) {
        // the serial reference is a single thread running the same kernel
        const int saved = max_threads();
        if (!state.range(0)) set_threads(1);
        auto batch = simulate(s.model, s.payoff, s.grid, 20000, 2);
        set_threads(saved);
        benchmark::DoNotOptimize(batch);
    }
}

void BM_CondExp(benchmark::State& state) {
    const auto& s = setup();
    std::vector<double> out(s.batch.paths());
    const auto target = s.surface.at(51);
    for (auto _ : state) {
        s.plan.cond_exp(50, target, out, exec_of(state));
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(out.size()));
}

void BM_Sweep(benchmark::State& state) {
    auto& s = setup();
    const StepRule rule = state.range(1) ? StepRule::BackwardEuler : StepRule::Exponential;
    ValueSurface v = s.surface;
    for (auto _ : state) pia_sweep(v, s.batch, s.plan, 0.01, 0.05, {rule, exec_of(state)});
    state.SetItemsProcessed(state.iterations() * static_cast<long>(s.batch.paths() * s.grid.steps()));
}

void BM_LatticeEntropy(benchmark::State& state) {
    const LatticeModel lat(MarketModel({100.0, 100.0}, 0.05, 0.1, 0.2), 3.0, 150);
    const Payoff payoff = Payoff::max_call(100.0);
    for (auto _ : state) {
        auto v = entropy_value_exact(lat, payoff, 0.01, StepRule::BackwardEuler, exec_of(state));
        benchmark::DoNotOptimize(v);
    }
}

} // namespace

BENCHMARK(BM_Simulate)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CondExp)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Sweep)
    ->ArgNames({"parallel", "euler"})
    ->ArgsProduct({{0, 1}, {0, 1}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LatticeEntropy)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
