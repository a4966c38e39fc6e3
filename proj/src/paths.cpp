#include "erpia/paths.hpp"

#include <cmath>
#include <ostream>

#include "erpia/stats.hpp"

namespace erpia {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(mix_seed(seed, index));
}

PathBatch::PathBatch(std::size_t paths, TimeGrid grid, std::size_t dim)
    : paths_(paths), grid_(grid), dim_(dim), payoff_(Payoff::zero()),
      prices_((grid.steps() + 1) * paths * dim), payoffs_((grid.steps() + 1) * paths) {
    if (paths < 1) throw ConfigError("path batch: at least one path required");
    if (dim < 1) throw ConfigError("path batch: at least one asset required");
}

void PathBatch::set_payoff(const Payoff& payoff) {
    payoff.check_dim(dim_);
    payoff_ = payoff;
    const auto total = static_cast<std::ptrdiff_t>((steps() + 1) * paths_);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < total; ++j)
        payoffs_[j] = payoff({prices_.data() + j * dim_, dim_});
}

PathBatch simulate(const MarketModel& model, const Payoff& payoff, const TimeGrid& grid,
                   std::size_t paths, std::uint64_t seed, SimulationOptions options) {
    model.validate();
    const std::size_t d = model.dim();
    const std::size_t n = grid.steps();
    PathBatch batch(paths, grid, d);

    const double dt = grid.dt();
    const double drift = (model.r - model.delta - 0.5 * model.sigma * model.sigma) * dt;
    const double vol = model.sigma * std::sqrt(dt);

    const auto m = static_cast<std::ptrdiff_t>(paths);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < m; ++p) {
        // Antithetic pairs share the stream of the even member.
        const bool mirror = options.antithetic && (p % 2 == 1);
        auto engine = path_engine(seed, static_cast<std::uint64_t>(mirror ? p - 1 : p));
        std::normal_distribution<double> normal;
        const double sign = mirror ? -1.0 : 1.0;

        auto start = batch.prices(0, static_cast<std::size_t>(p));
        for (std::size_t i = 0; i < d; ++i) start[i] = model.s0[i];
        std::vector<double> log_s(d);
        for (std::size_t i = 0; i < d; ++i) log_s[i] = std::log(model.s0[i]);
        for (std::size_t k = 0; k < n; ++k) {
            auto next = batch.prices(k + 1, static_cast<std::size_t>(p));
            for (std::size_t i = 0; i < d; ++i) {
                log_s[i] += drift + vol * sign * normal(engine);
                next[i] = std::exp(log_s[i]);
            }
        }
    }
    batch.set_payoff(payoff);
    return batch;
}

Estimate european_price(const PathBatch& batch, double r) {
    const double disc = discount_factor(r, batch.grid().horizon());
    auto terminal = batch.payoffs_at(batch.steps());
    const auto moments = sample_moments(terminal);
    return {disc * moments.mean, disc * moments.stderr_()};
}

Estimate european_price(const MarketModel& model, const Payoff& payoff, const TimeGrid& grid,
                        std::size_t paths, std::uint64_t seed) {
    return european_price(simulate(model, payoff, grid, paths, seed), model.r);
}

void dump_paths(const PathBatch& batch, std::ostream& out) {
    out << "path_id,k,asset,price\n";
    for (std::size_t p = 0; p < batch.paths(); ++p)
        for (std::size_t k = 0; k <= batch.steps(); ++k) {
            auto s = batch.prices(k, p);
            for (std::size_t i = 0; i < s.size(); ++i)
                out << p << ',' << k << ',' << i << ',' << s[i] << '\n';
        }
}

} // namespace erpia
