#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "erpia/model.hpp"

namespace erpia {

/// splitmix64 finalizer; used to derive independent per-path seeds.
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Generator for path `index` of a batch seeded with `seed`. The draw sequence
/// is a pure function of (seed, index), independent of how paths are scheduled.
[[nodiscard]] std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t index);

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

/// Asset paths sampled on a uniform grid, stored time-major so that all paths
/// at one date are contiguous.
class PathBatch {
public:
    PathBatch(std::size_t paths, TimeGrid grid, std::size_t dim);

    [[nodiscard]] std::size_t paths() const noexcept { return paths_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t steps() const noexcept { return grid_.steps(); }

    [[nodiscard]] std::span<const double> prices(std::size_t k, std::size_t path) const noexcept {
        return {prices_.data() + (k * paths_ + path) * dim_, dim_};
    }
    [[nodiscard]] std::span<double> prices(std::size_t k, std::size_t path) noexcept {
        return {prices_.data() + (k * paths_ + path) * dim_, dim_};
    }
    /// All prices at date k, path-major with `dim()` entries per path.
    [[nodiscard]] std::span<const double> prices_at(std::size_t k) const noexcept {
        return {prices_.data() + k * paths_ * dim_, paths_ * dim_};
    }
    [[nodiscard]] std::span<const double> payoffs_at(std::size_t k) const noexcept {
        return {payoffs_.data() + k * paths_, paths_};
    }

    /// Recomputes the cached payoff table from prices.
    void set_payoff(const Payoff& payoff);
    [[nodiscard]] const Payoff& payoff() const noexcept { return payoff_; }

    friend bool operator==(const PathBatch&, const PathBatch&) = default;

private:
    std::size_t paths_;
    TimeGrid grid_;
    std::size_t dim_;
    Payoff payoff_;
    std::vector<double> prices_;
    std::vector<double> payoffs_;
};

struct SimulationOptions {
    bool antithetic = false;
};

/// Exact log-normal stepping of the dividend-paying Black-Scholes model.
[[nodiscard]] PathBatch simulate(const MarketModel& model, const Payoff& payoff,
                                 const TimeGrid& grid, std::size_t paths, std::uint64_t seed,
                                 SimulationOptions options = {});

/// Monte Carlo mean of e^{-rT} P_T with its standard error.
[[nodiscard]] Estimate european_price(const MarketModel& model, const Payoff& payoff,
                                      const TimeGrid& grid, std::size_t paths,
                                      std::uint64_t seed);
[[nodiscard]] Estimate european_price(const PathBatch& batch, double r);

/// Debug dump: one `path_id,k,asset,price` row per sample.
void dump_paths(const PathBatch& batch, std::ostream& out);

} // namespace erpia
