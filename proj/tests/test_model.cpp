#include <doctest.h>

#include <random>
#include <vector>

#include "erpia/model.hpp"

using namespace erpia;

TEST_CASE("payoff evaluation") {
    const std::vector<double> itm{90.0, 110.0};
    const std::vector<double> otm{90.0, 95.0};
    const std::vector<double> low{80.0};
    CHECK(evaluate_payoff(Payoff::max_call(100.0), itm) == 10.0);
    CHECK(evaluate_payoff(Payoff::max_call(100.0), otm) == 0.0);
    CHECK(evaluate_payoff(Payoff::put(100.0), low) == 20.0);
    CHECK_THROWS_AS((void)evaluate_payoff(Payoff::put(100.0), itm), ConfigError);

    Payoff capped = Payoff::max_call(100.0);
    capped.cap = 5.0;
    CHECK(evaluate_payoff(capped, itm) == 5.0);
}

TEST_CASE("payoff is nonnegative on random prices") {
    std::mt19937_64 rng(7);
    std::lognormal_distribution<double> price(std::log(100.0), 0.5);
    const Payoff call = Payoff::max_call(100.0);
    const Payoff put = Payoff::put(100.0);
    for (int i = 0; i < 10000; ++i) {
        const std::vector<double> two{price(rng), price(rng)};
        const std::vector<double> one{price(rng)};
        REQUIRE(evaluate_payoff(call, two) >= 0.0);
        REQUIRE(evaluate_payoff(put, one) >= 0.0);
    }
}

TEST_CASE("discount factor") {
    CHECK(discount_factor(0.0, 1.0) == 1.0);
    CHECK(discount_factor(0.05, 0.0) == 1.0);
    CHECK(discount_factor(0.05, 3.0) == doctest::Approx(0.860707976425057807).epsilon(1e-15));
}

TEST_CASE("time grid is uniform by construction") {
    const TimeGrid grid(3.0, 100);
    CHECK(grid.time(0) == 0.0);
    CHECK(grid.time(100) == 3.0);
    for (std::size_t k = 0; k < 100; ++k) {
        CHECK(grid.time(k + 1) > grid.time(k));
        CHECK(grid.time(k + 1) - grid.time(k) == doctest::Approx(grid.dt()).epsilon(1e-13));
    }
    CHECK_THROWS_AS(TimeGrid(0.0, 10), ConfigError);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), ConfigError);
}

TEST_CASE("market model validation") {
    CHECK_THROWS_AS(MarketModel({}, 0.05, 0.0, 0.2), ConfigError);
    CHECK_THROWS_AS(MarketModel({100.0, -1.0}, 0.05, 0.0, 0.2), ConfigError);
    CHECK_THROWS_AS(MarketModel({100.0}, 0.05, 0.0, -0.1), ConfigError);
    CHECK(MarketModel({100.0, 90.0}, 0.05, 0.1, 0.2).dim() == 2);
}

TEST_CASE("lambda schedule") {
    CHECK_THROWS_AS(LambdaSchedule({{0.1, 10}, {0.1, 10}}), ConfigError);
    CHECK_THROWS_AS(LambdaSchedule({{0.01, 10}, {0.1, 10}}), ConfigError);
    CHECK_THROWS_AS(LambdaSchedule({{0.0, 10}}), ConfigError);
    CHECK_THROWS_AS(LambdaSchedule({{0.1, 0}}), ConfigError);
    CHECK_THROWS_AS(LambdaSchedule(std::vector<ScheduleStage>{}), ConfigError);

    const auto s = LambdaSchedule::ladder(kDefaultLadder, 0.001, 500);
    REQUIRE(s.stages().size() == 4);
    CHECK(s.stages()[0].lambda == 0.1);
    CHECK(s.stages()[3].lambda == 0.001);
    CHECK(s.total_iters() == 2000);
    CHECK(LambdaSchedule::ladder(kDefaultLadder, 0.1, 7).stages().size() == 1);
    CHECK(LambdaSchedule::ladder(kDefaultLadder, 0.02, 7).final_lambda() == 0.02);
}
