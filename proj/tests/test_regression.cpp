#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "erpia/basis.hpp"
#include "erpia/exec.hpp"
#include "erpia/regression.hpp"
#include "erpia/stats.hpp"

using namespace erpia;

namespace {

struct Fixture {
    MarketModel model{{100.0, 100.0}, 0.05, 0.1, 0.2};
    TimeGrid grid{3.0, 6};
    Payoff payoff = Payoff::max_call(100.0);
    PathBatch batch = simulate(model, payoff, grid, 20000, 11);
    RegressionPlan plan{batch, Basis::andersen_broadie13(100.0)};
};

std::vector<double> noisy_target(const PathBatch& batch, std::size_t k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> eps(0.0, 3.0);
    std::vector<double> y(batch.paths());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto s = batch.prices(k + 1, i);
        y[i] = std::max(s[0], s[1]) + eps(rng);
    }
    return y;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

} // namespace

TEST_CASE("basis sizes") {
    CHECK(Basis::andersen_broadie13(100.0).dimension() == 13);
    CHECK(Basis::polynomial(3, 1, 100.0).dimension() == 4);
    CHECK(Basis::polynomial(3, 1, 100.0, true).dimension() == 5);
    CHECK(Basis::polynomial(2, 2, 100.0).dimension() == 6);
    CHECK(Basis::polynomial(3, 2, 100.0).dimension() == 10);
    CHECK_THROWS_AS(Basis::polynomial(40, 2, 100.0), ConfigError);
}

TEST_CASE("basis features") {
    const Basis b = Basis::andersen_broadie13(10.0);
    const std::vector<double> s{20.0, 30.0};
    double phi[13];
    b.evaluate(s, 5.0, phi);
    const double expected[13] = {1, 2, 3, 4, 9, 6, 3, 9, 27, 0.5, 0.25, 0.125, 2};
    for (int j = 0; j < 13; ++j) CHECK(phi[j] == doctest::Approx(expected[j]).epsilon(1e-14));
}

TEST_CASE("projection is idempotent") {
    Fixture f;
    for (std::size_t k : {1u, 3u, 5u}) {
        const auto y = noisy_target(f.batch, k, 100 + k);
        const auto once = f.plan.cond_exp(k, y);
        const auto twice = f.plan.cond_exp(k, once);
        CHECK(max_abs_diff(once, twice) < 1e-8);
    }
}

TEST_CASE("projection is linear") {
    Fixture f;
    const std::size_t k = 2;
    const auto y = noisy_target(f.batch, k, 1);
    const auto z = noisy_target(f.batch, k, 2);
    std::vector<double> combo(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) combo[i] = 2.5 * y[i] - 0.75 * z[i];
    const auto py = f.plan.cond_exp(k, y);
    const auto pz = f.plan.cond_exp(k, z);
    const auto pc = f.plan.cond_exp(k, combo);
    double worst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        worst = std::max(worst, std::abs(pc[i] - (2.5 * py[i] - 0.75 * pz[i])));
    CHECK(worst < 1e-8);
}

TEST_CASE("projection preserves the mean") {
    Fixture f;
    for (std::size_t k : {1u, 4u}) {
        const auto y = noisy_target(f.batch, k, 7);
        const auto fitted = f.plan.cond_exp(k, y);
        CHECK(std::abs(sample_moments(fitted).mean - sample_moments(y).mean) < 1e-10);
    }
}

TEST_CASE("constant targets are reproduced") {
    Fixture f;
    const std::vector<double> y(f.batch.paths(), 3.25);
    for (std::size_t k : {0u, 2u, 5u})
        for (double v : f.plan.cond_exp(k, y)) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("payoff feature target is reproduced") {
    const MarketModel model{{100.0}, 0.05, 0.0, 0.3};
    const Payoff put = Payoff::put(100.0);
    const PathBatch batch = simulate(model, put, TimeGrid(1.0, 4), 5000, 2);
    const RegressionPlan plan{batch, Basis::polynomial(3, 1, 100.0, true)};
    for (std::size_t k : {1u, 3u}) {
        const auto pay = batch.payoffs_at(k);
        const std::vector<double> y(pay.begin(), pay.end());
        const auto fitted = plan.cond_exp(k, y);
        double worst = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            worst = std::max(worst, std::abs(fitted[i] - y[i]));
            scale = std::max(scale, std::abs(y[i]));
        }
        CHECK(worst <= 1e-8 * scale);
    }
}

TEST_CASE("least-squares map against normal equations and an SVD solve") {
    Fixture f;
    const std::size_t k = 2;
    const std::size_t m = f.batch.paths();
    const auto pay = f.batch.payoffs_at(k);
    Eigen::MatrixXd design(m, 13);
    double phi[13];
    for (std::size_t i = 0; i < m; ++i) {
        f.plan.basis().evaluate(f.batch.prices(k, i), pay[i], phi);
        for (int j = 0; j < 13; ++j) design(i, j) = phi[j];
    }
    // min(S1, S2) = S1 + S2 - max(S1, S2), so the design has rank 12
    CHECK(f.plan.factor(k).rank == 12);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto y = noisy_target(f.batch, k, seed);
        const Eigen::Map<const Eigen::VectorXd> ty(y.data(), m);
        const auto fitted = f.plan.cond_exp(k, y);
        const Eigen::Map<const Eigen::VectorXd> fy(fitted.data(), m);
        // the residual is orthogonal to every column of the design
        using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
        const LVec res = ty.cast<long double>() - fy.cast<long double>();
        for (int j = 0; j < 13; ++j) {
            const LVec col = design.col(j).cast<long double>();
            CHECK(static_cast<double>(std::abs(col.dot(res)) / (col.norm() * res.norm())) < 1e-8);
        }
        Eigen::VectorXd sv_fit(m);
        {
            Eigen::JacobiSVD<Eigen::MatrixXd> trimmed = svd;
            trimmed.setThreshold(1e-10);
            sv_fit = design * trimmed.solve(ty);
        }
        CHECK((sv_fit - fy).norm() / sv_fit.norm() < 1e-8);
    }
}

TEST_CASE("regressing the next price recovers the forward") {
    const MarketModel model{{100.0}, 0.05, 0.02, 0.25};
    const TimeGrid grid(1.0, 5);
    const double growth = std::exp((0.05 - 0.02) * grid.dt());
    auto error = [&](std::size_t paths) {
        const PathBatch batch = simulate(model, Payoff::put(100.0), grid, paths, 8);
        const RegressionPlan plan{batch, Basis::polynomial(2, 1, 100.0, false)};
        const std::size_t k = 2;
        std::vector<double> y(paths);
        for (std::size_t i = 0; i < paths; ++i) y[i] = batch.prices(k + 1, i)[0];
        const auto fitted = plan.cond_exp(k, y);
        double e = 0.0;
        for (std::size_t i = 0; i < paths; ++i) e += std::abs(fitted[i] - batch.prices(k, i)[0] * growth);
        return e / static_cast<double>(paths);
    };
    const double coarse = error(1000), fine = error(64000);
    CHECK(fine < coarse / 3.0);
    CHECK(fine < 0.1);
}

TEST_CASE("functions in the span are reproduced") {
    Fixture f;
    const std::size_t k = 3;
    std::vector<double> y(f.batch.paths());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto s = f.batch.prices(k, i);
        const double mx = std::max(s[0], s[1]) / 100.0;
        y[i] = 4.0 - 2.0 * s[0] / 100.0 + mx * mx * mx;
    }
    CHECK(max_abs_diff(f.plan.cond_exp(k, y), y) < 1e-8);
}

TEST_CASE("degenerate date with identical states") {
    // At date 0 every path sits at s0, so only the constant survives.
    Fixture f;
    CHECK(f.plan.factor(0).rank == 1);
    const auto y = noisy_target(f.batch, 0, 3);
    const auto fitted = f.plan.cond_exp(0, y);
    const double mean = sample_moments(y).mean;
    for (double v : fitted) REQUIRE(v == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("a feature with no spread is dropped") {
    // With a zero payoff the payoff feature is constant.
    const MarketModel model({100.0}, 0.05, 0.0, 0.2);
    const TimeGrid grid(1.0, 4);
    const PathBatch batch = simulate(model, Payoff::zero(), grid, 5000, 4);
    const RegressionPlan plan(batch, Basis::polynomial(2, 1, 100.0, false));
    const RegressionPlan with_payoff(batch, Basis::polynomial(2, 1, 100.0, true));
    CHECK(with_payoff.factor(2).rank == 3);
    std::vector<double> y(batch.paths());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::exp(batch.prices(3, i)[0] / 100.0);
    CHECK(max_abs_diff(plan.cond_exp(2, y), with_payoff.cond_exp(2, y)) < 1e-8);
}

TEST_CASE("serial and parallel agree") {
    Fixture f;
    const RegressionPlan serial(f.batch, Basis::andersen_broadie13(100.0), Exec::Serial);
    for (std::size_t k = 0; k < 6; ++k) {
        const auto y = noisy_target(f.batch, k, 50 + k);
        CHECK(max_abs_diff(serial.cond_exp(k, y, Exec::Serial), f.plan.cond_exp(k, y)) < 1e-9);
    }
}

TEST_CASE("parallel result does not depend on thread count") {
    Fixture f;
    const int saved = max_threads();
    const auto y = noisy_target(f.batch, 2, 9);
    set_threads(1);
    const auto a = f.plan.cond_exp(2, y);
    set_threads(3);
    const auto b = f.plan.cond_exp(2, y);
    set_threads(saved);
    CHECK(a == b);
}

TEST_CASE("evaluate matches fitted values") {
    Fixture f;
    const std::size_t k = 4;
    const auto y = noisy_target(f.batch, k, 21);
    const auto beta = f.plan.coefficients(k, y);
    const auto fitted = f.plan.cond_exp(k, y);
    const auto payoff = f.batch.payoffs_at(k);
    for (std::size_t i = 0; i < 100; ++i)
        CHECK(f.plan.evaluate(k, beta, f.batch.prices(k, i), payoff[i]) ==
              doctest::Approx(fitted[i]).epsilon(1e-12));
}

TEST_CASE("bad inputs are rejected") {
    Fixture f;
    std::vector<double> y(f.batch.paths(), 1.0);
    CHECK_THROWS_AS((void)f.plan.cond_exp(6, y), std::out_of_range);
    y[17] = std::nan("");
    CHECK_THROWS_AS((void)f.plan.cond_exp(1, y), std::invalid_argument);
    std::vector<double> short_y(10, 1.0);
    CHECK_THROWS_AS((void)f.plan.cond_exp(1, short_y), std::invalid_argument);
    const PathBatch tiny = simulate(f.model, f.payoff, f.grid, 5, 1);
    CHECK_THROWS_AS(RegressionPlan(tiny, Basis::andersen_broadie13(100.0)), ConfigError);
}
