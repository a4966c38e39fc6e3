#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "erpia/driver.hpp"
#include "erpia/lattice.hpp"
#include "erpia/lattice_pia.hpp"
#include "oracles.hpp"

using namespace erpia;

namespace {

// Values from an independent numpy implementation of the same lattice.
constexpr double kPutAmerican = 6.086382749916101;
constexpr double kPutEntropy[] = {5.89419276409761, 5.97196338048364, 6.0304945078503875,
                                  6.054537808099319, 6.068578632656053, 6.082046196085354};
constexpr double kPutLambdas[] = {0.1, 0.05, 0.02, 0.01, 0.005, 0.001};

LatticeModel put_lattice() {
    return LatticeModel(MarketModel({100.0}, 0.05, 0.0, 0.2), 1.0, 200);
}

} // namespace

TEST_CASE("lattice construction") {
    const LatticeModel lat = put_lattice();
    CHECK(lat.nodes(0) == 1);
    CHECK(lat.nodes(200) == 201);
    CHECK(lat.prob_up() > 0.0);
    CHECK(lat.prob_up() < 1.0);
    const LatticeModel two(MarketModel({100.0, 90.0}, 0.05, 0.1, 0.2), 3.0, 10);
    CHECK(two.nodes(4) == 25);
    std::vector<double> s(2);
    two.node_prices(0, 0, s);
    CHECK(s[0] == doctest::Approx(100.0));
    CHECK(s[1] == doctest::Approx(90.0));
    CHECK_THROWS_AS(LatticeModel(MarketModel({1.0, 1.0, 1.0}, 0.05, 0.0, 0.2), 1.0, 10), ConfigError);
    CHECK_THROWS_AS(LatticeModel(MarketModel({1.0, 1.0}, 0.05, 0.0, 0.2), 1.0, 301), ConfigError);
    // up move probability outside (0, 1)
    CHECK_THROWS_AS(LatticeModel(MarketModel({100.0}, 5.0, 0.0, 0.01), 1.0, 2), ConfigError);
}

TEST_CASE("expectation preserves the discounted forward") {
    const LatticeModel lat(MarketModel({100.0, 80.0}, 0.05, 0.1, 0.2), 3.0, 20);
    const std::size_t k = 7;
    std::vector<double> next(lat.nodes(k + 1)), out(lat.nodes(k));
    std::vector<double> s(2);
    for (std::size_t i = 0; i < next.size(); ++i) {
        lat.node_prices(k + 1, i, s);
        next[i] = s[1];
    }
    lat.expectation(k, next, out);
    for (std::size_t i = 0; i < out.size(); ++i) {
        lat.node_prices(k, i, s);
        CHECK(out[i] == doctest::Approx(s[1] * std::exp((0.05 - 0.1) * lat.dt())).epsilon(1e-12));
    }
}

TEST_CASE("European values converge to closed forms") {
    const double put_exact = oracle::black_scholes_call(100.0, 100.0, 0.05, 0.0, 0.2, 1.0) - 100.0 +
                             100.0 * std::exp(-0.05);
    const LatticeModel fine(MarketModel({100.0}, 0.05, 0.0, 0.2), 1.0, 2000);
    CHECK(std::abs(european_value(fine, Payoff::put(100.0)).root() - put_exact) < 2e-3);

    const double mc_exact = oracle::max_call_two_iid(100.0, 100.0, 0.05, 0.1, 0.2, 3.0);
    const LatticeModel two(MarketModel({100.0, 100.0}, 0.05, 0.1, 0.2), 3.0, 300);
    CHECK(std::abs(european_value(two, Payoff::max_call(100.0)).root() - mc_exact) < 0.02);
}

TEST_CASE("American put value") {
    const LatticeModel lat = put_lattice();
    const NodeValues v = american_value(lat, Payoff::put(100.0));
    CHECK(v.root() == doctest::Approx(kPutAmerican).epsilon(1e-12));
    const auto p0 = lat.payoffs(50, Payoff::put(100.0));
    for (std::size_t i = 0; i < p0.size(); ++i) CHECK(v.at(50)[i] >= p0[i]);
}

TEST_CASE("zero volatility lattice") {
    const LatticeModel lat(MarketModel({100.0}, 0.05, 0.0, 0.0), 1.0, 10);
    // (110 - 100 e^{rt}) e^{-rt} is largest at t = 0
    CHECK(american_value(lat, Payoff::put(110.0)).root() == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(european_value(lat, Payoff::put(110.0)).root() ==
          doctest::Approx(110.0 * std::exp(-0.05) - 100.0).epsilon(1e-12));
}

TEST_CASE("entropy values against frozen reference") {
    const LatticeModel lat = put_lattice();
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(entropy_value_exact(lat, Payoff::put(100.0), kPutLambdas[i]).root() ==
              doctest::Approx(kPutEntropy[i]).epsilon(1e-9));
}

TEST_CASE("entropy nodes solve the implicit equation") {
    const LatticeModel lat = put_lattice();
    const double lam = 0.01;
    const NodeValues v = entropy_value_exact(lat, Payoff::put(100.0), lam);
    for (std::size_t k : {0u, 37u, 199u}) {
        std::vector<double> c(lat.nodes(k));
        lat.expectation(k, v.at(k + 1), c);
        const auto p = lat.payoffs(k, Payoff::put(100.0));
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double x = v.at(k)[i];
            CHECK(std::abs(x - c[i] - lat.dt() * (entropy_driver(p[i], x, lam) - 0.05 * x)) < 1e-11);
        }
    }
}

TEST_CASE("entropy values increase as lambda decreases and stay below the American value") {
    const LatticeModel lat = put_lattice();
    const NodeValues am = american_value(lat, Payoff::put(100.0));
    std::vector<NodeValues> vs;
    for (double lam : {0.1, 0.05, 0.01, 0.001}) vs.push_back(entropy_value_exact(lat, Payoff::put(100.0), lam));
    double worst_order = -1e300, worst_cap = -1e300;
    for (std::size_t k = 0; k <= 200; ++k)
        for (std::size_t i = 0; i < lat.nodes(k); ++i) {
            for (std::size_t j = 0; j + 1 < vs.size(); ++j)
                worst_order = std::max(worst_order, vs[j].at(k)[i] - vs[j + 1].at(k)[i]);
            for (const auto& v : vs) worst_cap = std::max(worst_cap, v.at(k)[i] - am.at(k)[i]);
        }
    CHECK(worst_order <= 1e-10);
    CHECK(worst_cap <= 1e-10);
}

TEST_CASE("two-asset entropy lattice, serial and parallel identical") {
    const LatticeModel lat(MarketModel({100.0, 100.0}, 0.05, 0.1, 0.2), 3.0, 40);
    const auto a = entropy_value_exact(lat, Payoff::max_call(100.0), 0.01, StepRule::BackwardEuler, Exec::Serial);
    const auto b = entropy_value_exact(lat, Payoff::max_call(100.0), 0.01, StepRule::BackwardEuler, Exec::Parallel);
    for (std::size_t k = 0; k <= 40; ++k)
        for (std::size_t i = 0; i < lat.nodes(k); ++i) REQUIRE(a.at(k)[i] == b.at(k)[i]);
    const double am = american_value(lat, Payoff::max_call(100.0)).root();
    CHECK(a.root() < am);
    CHECK(a.root() > am - 0.2);
}

TEST_CASE("lattice policy improvement converges to the exact solution") {
    const LatticeModel lat = put_lattice();
    const Payoff put = Payoff::put(100.0);
    const double exact = entropy_value_exact(lat, put, 0.1).root();
    for (auto init : {LatticeInit::European, LatticeInit::NeverStop}) {
        NodeValues v = lattice_pia_init(lat, put, 0.1, init);
        for (int m = 0; m < 60; ++m) lattice_pia_sweep(v, lat, put, 0.1);
        CHECK(v.root() == doctest::Approx(exact).epsilon(1e-9));
    }
}

TEST_CASE("lattice policy improvement is monotone from a policy value") {
    const LatticeModel lat = put_lattice();
    const Payoff put = Payoff::put(100.0);
    NodeValues v = lattice_pia_init(lat, put, 0.05, LatticeInit::NeverStop);
    double worst = 0.0;
    for (int m = 0; m < 15; ++m) {
        const NodeValues old = v;
        lattice_pia_sweep(v, lat, put, 0.05);
        for (std::size_t k = 0; k <= 200; ++k)
            for (std::size_t i = 0; i < lat.nodes(k); ++i)
                worst = std::min(worst, v.at(k)[i] - old.at(k)[i]);
    }
    CHECK(worst >= -1e-10);
}

TEST_CASE("exact entropy values are a fixed point of the lattice sweep") {
    const LatticeModel lat = put_lattice();
    const Payoff put = Payoff::put(100.0);
    for (double lam : {0.1, 0.01, 0.001}) {
        NodeValues v = entropy_value_exact(lat, put, lam);
        const NodeValues before = v;
        lattice_pia_sweep(v, lat, put, lam);
        double worst = 0.0;
        for (std::size_t k = 0; k <= 200; ++k)
            for (std::size_t i = 0; i < lat.nodes(k); ++i)
                worst = std::max(worst, std::abs(v.at(k)[i] - before.at(k)[i]));
        CHECK(worst <= 1e-8);
    }
}
