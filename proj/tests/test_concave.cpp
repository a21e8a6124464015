#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bsdelab/bsde.hpp"
#include "bsdelab/concave.hpp"
#include "bsdelab/errors.hpp"
#include "oracles.hpp"

using namespace bsdelab;

namespace {

FrozenDriver neg_abs_y() {
    return [](double y, std::span<const double>) { return -std::abs(y); };
}

YzGrid y_only_grid() { return YzGrid::box(3.0, std::span<const double>{}, 41); }

Eigen::VectorXd vec1(double x) {
    Eigen::VectorXd v(1);
    v << x;
    return v;
}

MarketModel test_market() { return MarketModel::black_scholes(0.05, 0.06, 0.2, 100.0); }

RegressionBasis default_basis() {
    Eigen::VectorXd ref(1);
    ref << 100.0;
    return RegressionBasis::log_price_monomials(4, ref);
}

Payoff capped_ratio() {
    return [](std::span<const double> prices) { return std::min(prices[1] / 100.0, 2.0); };
}

// min of two affine drivers; concave by construction.
constexpr double kPhi1 = 0.05, kBeta1 = 0.1, kGamma1 = 0.2;
constexpr double kPhi2 = 0.30, kBeta2 = -0.3, kGamma2 = -0.1;

ControlGrid two_control_grid() {
    std::vector<ControlPoint> points(2);
    points[0] = ControlPoint{kBeta1, vec1(kGamma1), kPhi1};
    points[1] = ControlPoint{kBeta2, vec1(kGamma2), kPhi2};
    return ControlGrid::from_points(std::move(points), 0.3);
}

}  // namespace

TEST_CASE("polar of an affine driver at its own slopes is the intercept") {
    const double a = 0.7, beta0 = 0.4, gamma0 = -0.6;
    FrozenDriver f = [=](double y, std::span<const double> z) {
        return a + beta0 * y + gamma0 * z[0];
    };
    std::vector<double> z_radii{2.0};
    YzGrid grid = YzGrid::box(2.0, z_radii, 41);
    PolarValue value = polar(f, beta0, vec1(gamma0), grid);
    CHECK_FALSE(value.infinite);
    CHECK(value.value == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("polar of -|y| is zero inside the unit slope band and diverges outside") {
    YzGrid grid = y_only_grid();
    Eigen::VectorXd empty(0);
    for (double beta : {-1.0, -0.6, 0.0, 0.6, 1.0}) {
        PolarValue value = polar(neg_abs_y(), beta, empty, grid);
        CHECK_FALSE(value.infinite);
        CHECK(value.value == doctest::Approx(0.0).epsilon(1e-12));
    }
    for (double beta : {-1.2, 1.2, 2.0}) {
        PolarValue value = polar(neg_abs_y(), beta, empty, grid);
        CHECK(value.infinite);
    }
}

TEST_CASE("polar against a brute-force enumeration oracle") {
    // Smooth concave driver; the polar is a plain maximum over the same box.
    FrozenDriver f = [](double y, std::span<const double> z) {
        return -0.5 * y * y - 0.25 * z[0] * z[0] + 0.3 * y;
    };
    std::vector<double> z_radii{2.5};
    YzGrid grid = YzGrid::box(2.5, z_radii, 41);
    const double beta = 0.2, gamma = -0.4;
    double best = -1e300;
    for (double y : grid.y_points()) {
        for (double z : grid.z_points()[0]) {
            std::vector<double> zz{z};
            best = std::max(best, f(y, zz) - beta * y - gamma * z);
        }
    }
    PolarValue value = polar(f, beta, vec1(gamma), grid);
    CHECK_FALSE(value.infinite);
    CHECK(value.value == doctest::Approx(best).epsilon(1e-14));
}

TEST_CASE("mirrored borrowing driver has polar zero exactly on the admissible family") {
    const double r = 0.04, big_r = 0.06, sigma = 0.2, theta = 0.3;
    // Mirror -b(-y,-z) of the convex borrowing driver
    //   b(y, z) = -r y - theta z + (R - r) max(z / sigma - y, 0).
    FrozenDriver mirrored = [=](double y, std::span<const double> z) {
        return -r * y - theta * z[0] - (big_r - r) * std::max(y - z[0] / sigma, 0.0);
    };
    std::vector<double> z_radii{2.0};
    YzGrid grid = YzGrid::box(2.0, z_radii, 41);
    for (double beta : {-big_r, -0.05, -0.045, -r}) {
        double gamma = -theta - (beta + r) / sigma;
        PolarValue value = polar(mirrored, beta, vec1(gamma), grid);
        CHECK_FALSE(value.infinite);
        CHECK(value.value == doctest::Approx(0.0).epsilon(1e-12));
    }
    // Outside the band the sup diverges.
    PolarValue outside = polar(mirrored, 0.0, vec1(-theta - r / sigma), grid);
    CHECK(outside.infinite);
}

TEST_CASE("linear family member reproduces the affine driver and rejects infinity") {
    LinearDriverSpec spec = linear_family_driver(0.7, 0.4, vec1(-0.6));
    std::vector<double> state{1.0, 100.0};
    std::vector<double> z{0.5};
    double phi = spec.intercept(0.0, state);
    double slope_y = spec.slope_y(0.0, state);
    std::vector<double> gamma(1);
    spec.slope_z(0.0, state, gamma);
    CHECK(phi + slope_y * 1.3 + gamma[0] * z[0] ==
          doctest::Approx(0.7 + 0.4 * 1.3 - 0.6 * 0.5).epsilon(1e-15));

    PolarValue inf_value;
    inf_value.infinite = true;
    CHECK_THROWS_AS(linear_family_driver(inf_value, 0.0, vec1(0.0)), std::invalid_argument);
}

TEST_CASE("conjugate reconstruction recovers -|y| with slope endpoints in the grid") {
    ControlGrid controls = ControlGrid::uniform_beta(-1.0, 1.0, 5, 0);
    PolarTable table = tabulate_polar(neg_abs_y(), controls, y_only_grid());
    for (double y : {-2.0, -1.3, 0.0, 0.7, 2.0}) {
        double rebuilt = conjugate_reconstruct(table, y, {});
        CHECK(rebuilt == doctest::Approx(-std::abs(y)).epsilon(1e-14));
    }
}

TEST_CASE("coarse control grids approximate a concave driver from above") {
    ControlGrid controls = ControlGrid::uniform_beta(-0.5, 0.5, 3, 0);
    PolarTable table = tabulate_polar(neg_abs_y(), controls, y_only_grid());
    for (double y : {-2.0, -0.9, 0.4, 1.7}) {
        double rebuilt = conjugate_reconstruct(table, y, {});
        CHECK(rebuilt >= -std::abs(y) - 1e-12);                       // Fenchel direction
        CHECK(rebuilt - (-std::abs(y)) <= 0.5 * std::abs(y) + 1e-12); // resolution bound
    }
}

TEST_CASE("reconstruction with no finite polar entries is rejected") {
    std::vector<ControlPoint> points(2);
    points[0] = ControlPoint{-2.0, Eigen::VectorXd(0), 0.0};
    points[1] = ControlPoint{2.0, Eigen::VectorXd(0), 0.0};
    ControlGrid controls = ControlGrid::from_points(std::move(points), 2.0);
    PolarTable table = tabulate_polar(neg_abs_y(), controls, y_only_grid());
    CHECK(table.values[0].infinite);
    CHECK(table.values[1].infinite);
    CHECK_THROWS_AS(conjugate_reconstruct(table, 0.5, {}), std::invalid_argument);
}

TEST_CASE("Fenchel inequality holds on every sampled grid pair") {
    FrozenDriver f = [](double y, std::span<const double> z) {
        return std::min(kPhi1 + kBeta1 * y + kGamma1 * z[0],
                        kPhi2 + kBeta2 * y + kGamma2 * z[0]);
    };
    std::vector<double> z_radii{2.0};
    YzGrid yz = YzGrid::box(2.0, z_radii, 21);
    ControlGrid attached = two_control_grid().with_intercepts(f, yz);
    REQUIRE(attached.size() == 2);
    for (const ControlPoint& point : attached.points()) {
        for (double y : yz.y_points()) {
            for (double z : yz.z_points()[0]) {
                std::vector<double> zz{z};
                CHECK(f(y, zz) <= point.phi + point.beta * y + point.gamma[0] * z + 1e-12);
            }
        }
    }
    // The attached intercepts are the original affine intercepts.
    CHECK(attached.points()[0].phi == doctest::Approx(kPhi1).epsilon(1e-12));
    CHECK(attached.points()[1].phi == doctest::Approx(kPhi2).epsilon(1e-12));
}

TEST_CASE("intercept attachment drops divergent controls") {
    ControlGrid controls = ControlGrid::uniform_beta(-2.0, 2.0, 5, 0);
    ControlGrid attached = controls.with_intercepts(neg_abs_y(), y_only_grid());
    CHECK(attached.size() == 3);  // -1, 0, 1 survive
    CHECK(attached.dropped_infinite() == 2);
    for (const ControlPoint& point : attached.points()) {
        CHECK(std::abs(point.beta) <= 1.0 + 1e-12);
        CHECK(point.phi == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("controls outside the declared box are rejected") {
    std::vector<ControlPoint> points(1);
    points[0] = ControlPoint{0.5, vec1(0.9), 0.0};
    CHECK_THROWS_AS(ControlGrid::from_points(std::move(points), 0.6), std::invalid_argument);
}

TEST_CASE("single-control envelope is that control's linear solution") {
    TimeGrid grid = make_time_grid(1.0, 20);
    PathBundle bundle = sample_brownian(grid, 1, 5000, 71);
    MarketModel model = test_market();
    RegressionBasis basis = default_basis();

    std::vector<ControlPoint> points(1);
    points[0] = ControlPoint{kBeta1, vec1(kGamma1), kPhi1};
    ControlGrid controls = ControlGrid::from_points(std::move(points), 0.3);
    EnvelopeResult envelope = essinf_envelope(capped_ratio(), controls, model, bundle, basis);
    BsdeSolution direct = solve_linear(linear_family_driver(kPhi1, kBeta1, vec1(kGamma1)),
                                       capped_ratio(), model, bundle, basis);
    for (std::size_t p = 0; p < 100; ++p) {
        for (std::size_t k = 0; k <= 20; ++k) {
            CHECK(envelope.y.at(p, k) == direct.y.at(p, k));
            CHECK(envelope.control_at(p, k) == 0);
        }
    }
}

TEST_CASE("two-control envelope matches the nonlinear solver on the min driver") {
    TimeGrid grid = make_time_grid(1.0, 25);
    PathBundle bundle = sample_brownian(grid, 1, 20000, 72);
    MarketModel model = test_market();
    RegressionBasis basis = default_basis();

    EnvelopeResult envelope =
        essinf_envelope(capped_ratio(), two_control_grid(), model, bundle, basis);

    BsdeProblem problem;
    problem.driver = [](double, std::span<const double>, double y, std::span<const double> z) {
        return std::min(kPhi1 + kBeta1 * y + kGamma1 * z[0],
                        kPhi2 + kBeta2 * y + kGamma2 * z[0]);
    };
    problem.terminal = capped_ratio();
    problem.lipschitz = 0.3;
    problem.driver_zero_bound = 0.3;
    BsdeSolution euler = solve_backward_euler(problem, model, bundle, basis);

    double y0_env = envelope.y.at(0, 0);
    double y0_euler = euler.y.at(0, 0);
    CHECK(std::abs(y0_env - y0_euler) / std::abs(y0_euler) < 0.01);
    // Envelope never falls materially below the nonlinear solution.
    CHECK(y0_env >= y0_euler - 0.01 * std::abs(y0_euler));

    // Both controls are genuinely active somewhere.
    std::size_t active[2] = {0, 0};
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
        for (std::size_t k = 0; k < 25; ++k) {
            ++active[envelope.control_at(p, k)];
        }
    }
    CHECK(active[0] > 0);
    CHECK(active[1] > 0);
}

TEST_CASE("enlarging the control grid never raises the envelope") {
    TimeGrid grid = make_time_grid(1.0, 15);
    PathBundle bundle = sample_brownian(grid, 1, 5000, 73);
    MarketModel model = test_market();
    RegressionBasis basis = default_basis();

    ControlGrid small = two_control_grid();
    std::vector<ControlPoint> more = small.points();
    more.push_back(ControlPoint{0.5 * (kBeta1 + kBeta2), vec1(0.5 * (kGamma1 + kGamma2)),
                                0.5 * (kPhi1 + kPhi2)});
    more.push_back(ControlPoint{0.0, vec1(0.0), 0.2});
    ControlGrid large = ControlGrid::from_points(std::move(more), 0.3);

    EnvelopeResult env_small = essinf_envelope(capped_ratio(), small, model, bundle, basis);
    EnvelopeResult env_large = essinf_envelope(capped_ratio(), large, model, bundle, basis);
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
        for (std::size_t k = 0; k <= 15; ++k) {
            CHECK(env_large.y.at(p, k) <= env_small.y.at(p, k));
        }
    }
}

TEST_CASE("sup envelope of the mirrored family is the exact negation") {
    TimeGrid grid = make_time_grid(1.0, 15);
    PathBundle bundle = sample_brownian(grid, 1, 5000, 74);
    MarketModel model = test_market();
    RegressionBasis basis = default_basis();

    ControlGrid family = two_control_grid();
    std::vector<ControlPoint> mirrored_points = family.points();
    for (ControlPoint& point : mirrored_points) point.phi = -point.phi;
    ControlGrid mirrored = ControlGrid::from_points(std::move(mirrored_points), 0.3);
    Payoff negated = [](std::span<const double> prices) {
        return -std::min(prices[1] / 100.0, 2.0);
    };

    EnvelopeResult inf_env = essinf_envelope(capped_ratio(), family, model, bundle, basis);
    EnvelopeResult sup_env = esssup_envelope(negated, mirrored, model, bundle, basis);
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
        for (std::size_t k = 0; k <= 15; ++k) {
            CHECK(sup_env.y.at(p, k) == -inf_env.y.at(p, k));
            CHECK(sup_env.control_at(p, k) == inf_env.control_at(p, k));
        }
    }
}

TEST_CASE("empty control grids are rejected") {
    TimeGrid grid = make_time_grid(1.0, 5);
    PathBundle bundle = sample_brownian(grid, 1, 50, 75);
    ControlGrid empty = ControlGrid::from_points({}, 1.0);
    CHECK_THROWS_AS(
        essinf_envelope(capped_ratio(), empty, test_market(), bundle, default_basis()),
        std::invalid_argument);
}

TEST_CASE("pilot-sized boxes are symmetric and non-degenerate") {
    TimeGrid grid = make_time_grid(1.0, 10);
    PathBundle bundle = sample_brownian(grid, 1, 2000, 76);
    MarketModel model = test_market();
    BsdeSolution pilot = solve_linear(linear_family_driver(0.0, -0.05, vec1(-0.3)),
                                      capped_ratio(), model, bundle, default_basis());
    YzGrid yz = YzGrid::from_pilot(pilot, 5.0, 41);
    CHECK(yz.y_points().size() == 41);
    CHECK(yz.z_points().size() == 1);
    CHECK(yz.y_points().front() == doctest::Approx(-yz.y_points().back()));
    CHECK(yz.y_points().back() > 0.0);
    // 41 odd: zero sits on the grid.
    CHECK(std::abs(yz.y_points()[20]) < 1e-12);
}
