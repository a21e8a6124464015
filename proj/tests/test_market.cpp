#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bsdelab/errors.hpp"
#include "bsdelab/market.hpp"
#include "oracles.hpp"

using namespace bsdelab;

TEST_CASE("bond grows at the deterministic rate, assets carry rate plus excess") {
    // With zero rate and zero excess nothing moves; with sigma = 0 the risky
    // asset compounds at rate + excess like a second bank account.
    TimeGrid grid = make_time_grid(1.0, 10);
    PathBundle bundle = sample_brownian(grid, 1, 4, 1);

    MarketModel still = MarketModel::black_scholes(0.0, 0.0, 0.0, 100.0);
    // sigma = 0 kills ellipticity; set nominal constants so validate() is
    // not exercised here.
    DiscreteProcess flat = simulate_prices(still, bundle);
    for (std::size_t p = 0; p < 4; ++p) {
        for (std::size_t k = 0; k <= 10; ++k) {
            CHECK(flat.at(p, k, 0) == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(flat.at(p, k, 1) == doctest::Approx(100.0).epsilon(1e-14));
        }
    }

    MarketModel drifting = MarketModel::black_scholes(0.05, 0.02, 0.0, 50.0);
    DiscreteProcess grown = simulate_prices(drifting, bundle);
    for (std::size_t p = 0; p < 4; ++p) {
        for (std::size_t k = 0; k <= 10; ++k) {
            double t = grid.node(k);
            CHECK(grown.at(p, k, 0) == doctest::Approx(std::exp(0.05 * t)).epsilon(1e-12));
            CHECK(grown.at(p, k, 1) ==
                  doctest::Approx(50.0 * std::exp(0.07 * t)).epsilon(1e-12));
        }
    }
}

TEST_CASE("discounted risky asset has unit Q-mean under the emm weights") {
    TimeGrid grid = make_time_grid(1.0, 25);
    const std::size_t n_paths = 100000;
    PathBundle bundle = sample_brownian(grid, 1, n_paths, 2);
    MarketModel model = MarketModel::black_scholes(0.05, 0.06, 0.2, 100.0);
    DiscreteProcess prices = simulate_prices(model, bundle);
    std::vector<double> weights = emm_weights(model, bundle);

    std::vector<double> discounted(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        discounted[p] = weights[p] * prices.at(p, 25, 1) / prices.at(p, 25, 0) / 100.0;
    }
    auto stats = oracle::mean_and_error(discounted);
    CHECK(std::abs(stats.mean - 1.0) < 4.0 * stats.std_error);

    auto weight_stats = oracle::mean_and_error(weights);
    CHECK(std::abs(weight_stats.mean - 1.0) < 4.0 * weight_stats.std_error);
}

TEST_CASE("risk premium solves vol * theta = excess") {
    SUBCASE("square invertible case") {
        MarketModel model = MarketModel::black_scholes(0.05, 0.06, 0.2, 100.0);
        std::vector<double> state = {1.0, 100.0};
        Eigen::VectorXd theta = model.risk_premium_at(0.0, state);
        REQUIRE(theta.size() == 1);
        CHECK(theta[0] == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("zero excess means zero premium") {
        MarketModel model = MarketModel::black_scholes(0.05, 0.0, 0.2, 100.0);
        std::vector<double> state = {1.0, 100.0};
        Eigen::VectorXd theta = model.risk_premium_at(0.0, state);
        CHECK(theta[0] == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("redundant Brownian dimension gets the minimal-norm solution") {
        Eigen::VectorXd excess(1);
        excess << 0.2;
        Eigen::MatrixXd sigma(1, 2);
        sigma << 1.0, 0.0;
        Eigen::VectorXd spot(1);
        spot << 1.0;
        MarketModel model = MarketModel::constants(0.0, excess, sigma, spot);
        std::vector<double> state = {1.0, 1.0};
        Eigen::VectorXd theta = model.risk_premium_at(0.0, state);
        REQUIRE(theta.size() == 2);
        CHECK(theta[0] == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(theta[1] == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("d = n premium equals the direct solve") {
        Eigen::VectorXd excess(2);
        excess << 0.05, -0.03;
        Eigen::MatrixXd sigma(2, 2);
        sigma << 0.3, 0.1, -0.05, 0.25;
        Eigen::VectorXd spot(2);
        spot << 10.0, 20.0;
        MarketModel model = MarketModel::constants(0.01, excess, sigma, spot);
        std::vector<double> state = {1.0, 10.0, 20.0};
        Eigen::VectorXd theta = model.risk_premium_at(0.0, state);
        Eigen::VectorXd direct = sigma.fullPivLu().solve(excess);
        CHECK((theta - direct).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("risk premium along paths is constant for constant models") {
    TimeGrid grid = make_time_grid(1.0, 5);
    PathBundle bundle = sample_brownian(grid, 1, 16, 3);
    MarketModel model = MarketModel::black_scholes(0.05, 0.06, 0.2, 100.0);
    DiscreteProcess prices = simulate_prices(model, bundle);
    DiscreteProcess theta = risk_premium(model, prices);
    for (std::size_t p = 0; p < 16; ++p) {
        for (std::size_t k = 0; k <= 5; ++k) {
            CHECK(theta.at(p, k) == doctest::Approx(0.3).epsilon(1e-12));
        }
    }
}

TEST_CASE("degenerate vol matrix raises a degeneracy error") {
    Eigen::VectorXd excess(2);
    excess << 0.1, 0.1;
    Eigen::MatrixXd sigma(2, 2);
    sigma << 0.2, 0.2, 0.2, 0.2;  // rank one
    Eigen::VectorXd spot(2);
    spot << 1.0, 1.0;
    MarketModel model = MarketModel::constants(0.0, excess, sigma, spot);
    std::vector<double> state = {1.0, 1.0, 1.0};
    CHECK_THROWS_AS(model.risk_premium_at(0.0, state), DegeneracyError);
}

TEST_CASE("deflator restarted at node s equals the ratio of time-zero deflators") {
    TimeGrid grid = make_time_grid(1.0, 20);
    const std::size_t n_paths = 200;
    PathBundle bundle = sample_brownian(grid, 1, n_paths, 4);
    MarketModel model = MarketModel::black_scholes(0.05, 0.06, 0.2, 100.0);
    DiscreteProcess prices = simulate_prices(model, bundle);

    DeflatorPaths from_zero = deflator(model, prices, bundle, 0);
    const std::size_t s = 7;
    DeflatorPaths restarted = deflator(model, prices, bundle, s);
    CHECK(restarted.base_node == s);
    for (std::size_t p = 0; p < n_paths; ++p) {
        for (std::size_t k = 0; k < s; ++k) {
            CHECK(restarted.values.at(p, k) == 1.0);
        }
        CHECK(restarted.values.at(p, s) == 1.0);
        for (std::size_t k = s; k <= 20; ++k) {
            double ratio = from_zero.values.at(p, k) / from_zero.values.at(p, s);
            CHECK(std::abs(restarted.values.at(p, k) - ratio) < 1e-12);
        }
    }
}

TEST_CASE("deflator with zero premium discounts the bond exactly") {
    TimeGrid grid = make_time_grid(2.0, 8);
    PathBundle bundle = sample_brownian(grid, 1, 8, 5);
    MarketModel model = MarketModel::black_scholes(0.03, 0.0, 0.2, 100.0);
    DeflatorPaths h = deflator(model, bundle, 0);
    for (std::size_t p = 0; p < 8; ++p) {
        for (std::size_t k = 0; k <= 8; ++k) {
            CHECK(h.values.at(p, k) ==
                  doctest::Approx(std::exp(-0.03 * grid.node(k))).epsilon(1e-12));
        }
    }
}

TEST_CASE("model validation accepts consistent constants and rejects bad bounds") {
    MarketModel good = MarketModel::black_scholes(0.05, 0.06, 0.2, 100.0);
    CHECK_NOTHROW(good.validate(1.0));

    MarketModel lying = MarketModel::black_scholes(0.05, 0.06, 0.2, 100.0);
    lying.rate_bound = 0.01;  // claims |r| <= 0.01 while r = 0.05
    CHECK_THROWS_AS(lying.validate(1.0), std::invalid_argument);

    MarketModel degenerate = MarketModel::black_scholes(0.0, 0.0, 0.0, 1.0);
    CHECK_THROWS_AS(degenerate.validate(1.0), std::invalid_argument);

    MarketModel widened = MarketModel::black_scholes(0.05, 0.06, 0.2, 100.0);
    widened.ellip_lo = 0.3;  // claims |sigma^T x| >= 0.3 |x| while sigma = 0.2
    CHECK_THROWS_AS(widened.validate(1.0), std::invalid_argument);
}

TEST_CASE("constants factory rejects inconsistent shapes") {
    Eigen::VectorXd excess(2);
    excess << 0.1, 0.1;
    Eigen::MatrixXd sigma(1, 1);
    sigma << 0.2;
    Eigen::VectorXd spot(2);
    spot << 1.0, 1.0;
    CHECK_THROWS_AS(MarketModel::constants(0.0, excess, sigma, spot), std::invalid_argument);

    Eigen::MatrixXd wide(2, 1);  // d ( = 2 ) > n ( = 1 )
    wide << 0.2, 0.3;
    CHECK_THROWS_AS(MarketModel::constants(0.0, excess, wide, spot), std::invalid_argument);
}

TEST_CASE("lognormal terminal price matches the closed-form mean") {
    TimeGrid grid = make_time_grid(1.0, 50);
    const std::size_t n_paths = 100000;
    PathBundle bundle = sample_brownian(grid, 1, n_paths, 6);
    MarketModel model = MarketModel::black_scholes(0.05, 0.06, 0.2, 100.0);
    DiscreteProcess prices = simulate_prices(model, bundle);
    std::vector<double> terminal(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) terminal[p] = prices.at(p, 50, 1);
    auto stats = oracle::mean_and_error(terminal);
    // E S_T = S_0 exp((r + excess) T)
    CHECK(std::abs(stats.mean - 100.0 * std::exp(0.11)) < 4.0 * stats.std_error);
}
