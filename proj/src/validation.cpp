#include "bsdelab/validation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "bsdelab/bsde.hpp"
#include "bsdelab/claim_expr.hpp"

namespace bsdelab {

namespace {

constexpr double kReferencePaths = 1e5;

struct Harness {
    const ExperimentConfig& cfg;
    TimeGrid grid;
    PathBundle bundle;
    RegressionBasis basis;
    std::vector<double> state0;  // (bond, spots) at time zero
    double r0 = 0.0;
    Eigen::VectorXd theta0;
    Eigen::MatrixXd sigma0;
    double spot1 = 0.0;
    double scale = 1.0;

    explicit Harness(const ExperimentConfig& config)
        : cfg(config),
          grid(make_time_grid(config.horizon, config.steps)),
          bundle(sample_brownian(grid, config.model.n, config.paths, config.seed)),
          basis(RegressionBasis::log_price_monomials(config.degree,
                                                     config.model.initial_prices)) {
        const MarketModel& m = config.model;
        state0.assign(m.d + 1, 1.0);
        for (std::size_t i = 0; i < m.d; ++i) {
            state0[i + 1] = m.initial_prices(static_cast<Eigen::Index>(i));
        }
        r0 = m.rate(0.0, state0);
        theta0 = m.risk_premium_at(0.0, state0);
        sigma0.resize(static_cast<Eigen::Index>(m.d), static_cast<Eigen::Index>(m.n));
        std::vector<double> entries(m.d * m.n);
        m.vol(0.0, state0, entries);
        for (std::size_t i = 0; i < m.d; ++i) {
            for (std::size_t j = 0; j < m.n; ++j) {
                sigma0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    entries[i * m.n + j];
            }
        }
        spot1 = m.initial_prices(0);
        scale = std::max(1.0, std::sqrt(kReferencePaths / static_cast<double>(config.paths)));
    }

    double borrow_rate() const { return cfg.borrow_rate.value_or(r0 + 0.02); }
};

void run_check(ValidationReport& report, const std::string& name,
               const std::function<CheckResult()>& body) {
    CheckResult result;
    try {
        result = body();
        result.passed = result.measured <= result.allowed;
    } catch (const std::exception& e) {
        result.passed = false;
        result.measured = std::numeric_limits<double>::quiet_NaN();
        result.detail = e.what();
        if (std::string(e.what()).find("stability") != std::string::npos) {
            report.numerical_failure = true;
        }
    }
    result.name = name;
    report.checks.push_back(result);
}

CheckResult prices_positive(const Harness& h) {
    DiscreteProcess prices = simulate_prices(h.cfg.model, h.bundle);
    double least = std::numeric_limits<double>::infinity();
    for (double v : prices.raw()) least = std::min(least, v);
    // pass iff every simulated price is strictly positive
    return {"", false, -least, 0.0, "negated minimum of all simulated prices"};
}

CheckResult deterministic_reprice(const Harness& h) {
    ClaimSpec claim = ClaimSpec::call(h.spot1, 1);
    PathBundle again = sample_brownian(h.grid, h.cfg.model.n, h.cfg.paths, h.cfg.seed);
    PriceReport first = fair_price(claim, h.cfg.model, h.bundle, h.basis);
    PriceReport second = fair_price(claim, h.cfg.model, again, h.basis);
    double gap = std::max(std::abs(first.price - second.price),
                          std::abs(first.std_error - second.std_error));
    return {"", false, gap, 0.0, "reprice with a fresh bundle from the same seed"};
}

CheckResult bond_discount(const Harness& h) {
    PriceReport report = fair_price(ClaimSpec::bond(), h.cfg.model, h.bundle, h.basis);
    double target = std::exp(-h.r0 * h.cfg.horizon);
    return {"", false, std::abs(report.price - target), 3.0 * report.std_error,
            "unit claim against the discount factor, 3 standard errors"};
}

CheckResult martingale_spot(const Harness& h) {
    PriceReport report = fair_price(ClaimSpec::asset(1), h.cfg.model, h.bundle, h.basis);
    return {"", false, std::abs(report.price - h.spot1), 3.0 * report.std_error,
            "deflated first asset against its spot, 3 standard errors"};
}

CheckResult emm_agreement(const Harness& h) {
    ClaimSpec claim = ClaimSpec::call(h.spot1, 1);
    PriceReport via_deflator = fair_price(claim, h.cfg.model, h.bundle, h.basis);
    PriceReport via_emm = emm_price(claim, h.cfg.model, h.bundle);
    return {"", false, std::abs(via_deflator.price - via_emm.price),
            1e-10 * (1.0 + std::abs(via_deflator.price)),
            "measure-change route against the deflator route"};
}

CheckResult claim_monotonicity(const Harness& h) {
    PriceReport low = fair_price(ClaimSpec::call(0.9 * h.spot1, 1), h.cfg.model, h.bundle,
                                 h.basis);
    PriceReport high = fair_price(ClaimSpec::call(1.1 * h.spot1, 1), h.cfg.model, h.bundle,
                                  h.basis);
    return {"", false, high.price - low.price, 0.0,
            "higher strike must not price above lower strike"};
}

CheckResult claim_positivity(const Harness& h) {
    PriceReport report = fair_price(ClaimSpec::call(h.spot1, 1), h.cfg.model, h.bundle,
                                    h.basis);
    return {"", false, -report.price, 3.0 * report.std_error,
            "non-negative claim prices non-negative within 3 standard errors"};
}

// Linear test problem with nonzero intercept and slopes, shared by the
// solver-agreement and terminal-consistency checks.
struct LinearCase {
    LinearDriverSpec spec;
    BsdeProblem problem;
    Payoff terminal;
    double lipschitz;
};

LinearCase linear_case(const Harness& h, double phi) {
    LinearCase c;
    double beta = -0.03;
    Eigen::VectorXd gamma =
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(h.cfg.model.n), 0.1);
    c.spec = LinearDriverSpec::constants(phi, beta, gamma);
    c.terminal = ClaimSpec::call(h.spot1, 1).payoff;
    c.lipschitz = std::max(std::abs(beta), gamma.norm());
    c.problem.terminal = c.terminal;
    c.problem.lipschitz = c.lipschitz;
    c.problem.driver_zero_bound = std::abs(phi);
    c.problem.driver = [phi, beta, gamma](double, std::span<const double>, double y,
                                          std::span<const double> z) {
        double gz = 0.0;
        for (Eigen::Index j = 0; j < gamma.size(); ++j) gz += gamma(j) * z[j];
        return phi + beta * y + gz;
    };
    return c;
}

CheckResult solver_agreement(const Harness& h) {
    LinearCase c = linear_case(h, 0.05);
    BsdeSolution linear = solve_linear(c.spec, c.terminal, h.cfg.model, h.bundle, h.basis);
    BsdeSolution euler = solve_backward_euler(c.problem, h.cfg.model, h.bundle, h.basis);
    double cc = c.lipschitz;
    PicardConfig picard_config;
    picard_config.beta_weight = 4.0 * (2.0 + h.cfg.horizon) * cc * cc + 1.0;
    BsdeSolution picard =
        solve_picard(c.problem, h.cfg.model, h.bundle, h.basis, picard_config);
    double y0 = linear.y.at(0, 0);
    double gap = std::max(std::abs(euler.y.at(0, 0) - y0), std::abs(picard.y.at(0, 0) - y0));
    return {"", false, gap / std::max(std::abs(y0), 1e-12), 0.005 * h.scale,
            "three solver routes on one affine problem, relative"};
}

CheckResult comparison_order(const Harness& h) {
    LinearCase low = linear_case(h, 0.05);
    LinearCase high = linear_case(h, 0.07);
    BsdeSolution y_low = solve_backward_euler(low.problem, h.cfg.model, h.bundle, h.basis);
    BsdeSolution y_high = solve_backward_euler(high.problem, h.cfg.model, h.bundle, h.basis);
    const std::size_t n_paths = h.cfg.paths;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= h.grid.steps(); ++k) {
        double mean = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) {
            mean += y_low.y.at(p, k) - y_high.y.at(p, k);
        }
        mean /= static_cast<double>(n_paths);
        double var = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) {
            double d = y_low.y.at(p, k) - y_high.y.at(p, k) - mean;
            var += d * d;
        }
        double se = std::sqrt(var) / static_cast<double>(n_paths);
        worst = std::max(worst, mean - 3.0 * se);
    }
    return {"", false, worst, 0.0,
            "larger driver must dominate node-wise within 3 standard errors"};
}

CheckResult terminal_consistency(const Harness& h) {
    LinearCase c = linear_case(h, 0.05);
    BsdeSolution euler = solve_backward_euler(c.problem, h.cfg.model, h.bundle, h.basis);
    DiscreteProcess prices = simulate_prices(h.cfg.model, h.bundle);
    const std::size_t terminal = h.grid.steps();
    double worst = 0.0;
    for (std::size_t p = 0; p < h.cfg.paths; ++p) {
        double xi = c.terminal(prices.node_values(p, terminal));
        worst = std::max(worst, std::abs(euler.y.at(p, terminal) - xi));
    }
    return {"", false, worst, 0.0, "terminal solution values must equal the payoff"};
}

CheckResult dual_dominance(const Harness& h) {
    ClaimSpec claim = ClaimSpec::call(h.spot1, 1);
    auto borrow = [rate = h.borrow_rate()](double, std::span<const double>) { return rate; };
    PriceReport primal = borrowing_price(claim, h.cfg.model, borrow, h.bundle, h.basis);
    std::vector<double> grid = uniform_beta_grid(h.r0, h.borrow_rate(), 21);
    PriceReport dual = borrowing_price_dual(claim, h.cfg.model, borrow, grid, h.bundle);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dual.dual->prices.size(); ++i) {
        double slack = 3.0 * (primal.std_error + dual.dual->std_errors[i]);
        worst = std::max(worst, dual.dual->prices[i] - primal.price - slack);
    }
    return {"", false, worst, 0.0,
            "every dual lower bound stays below the nonlinear price"};
}

CheckResult dual_grid_monotone(const Harness& h) {
    ClaimSpec claim = ClaimSpec::call(h.spot1, 1);
    auto borrow = [rate = h.borrow_rate()](double, std::span<const double>) { return rate; };
    std::vector<double> coarse = uniform_beta_grid(h.r0, h.borrow_rate(), 3);
    std::vector<double> fine = uniform_beta_grid(h.r0, h.borrow_rate(), 21);
    PriceReport on_coarse = borrowing_price_dual(claim, h.cfg.model, borrow, coarse, h.bundle);
    PriceReport on_fine = borrowing_price_dual(claim, h.cfg.model, borrow, fine, h.bundle);
    return {"", false, on_coarse.price - on_fine.price, 0.0,
            "dual value must not drop when the control grid is refined"};
}

CheckResult borrowing_reduction(const Harness& h) {
    ClaimSpec claim = ClaimSpec::call(h.spot1, 1);
    auto borrow = [rate = h.r0](double, std::span<const double>) { return rate; };
    PriceReport equal_rates = borrowing_price(claim, h.cfg.model, borrow, h.bundle, h.basis);
    PriceReport fair = fair_price(claim, h.cfg.model, h.bundle, h.basis);
    double rel = std::abs(equal_rates.price - fair.price) / std::max(std::abs(fair.price), 1e-12);
    return {"", false, rel, 0.005 * h.scale,
            "equal borrowing and lending rates reduce to the linear price"};
}

CheckResult projection_box_feasible(const Harness& h) {
    const std::size_t d = h.cfg.model.d;
    BoxSet box{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)),
               Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), 0.5)};
    Projection proj = constraint_distance(h.theta0, h.sigma0, box);
    double violation = 0.0;
    for (Eigen::Index i = 0; i < proj.fraction.size(); ++i) {
        violation = std::max(violation, box.lower(i) - proj.fraction(i));
        violation = std::max(violation, proj.fraction(i) - box.upper(i));
    }
    // Zero is feasible, so the distance can never exceed |theta|.
    violation = std::max(violation, proj.distance - h.theta0.norm());
    return {"", false, violation, 1e-12,
            "projected fraction feasible; distance bounded by the premium norm"};
}

CheckResult fullspace_distance(const Harness& h) {
    Projection proj = constraint_distance(h.theta0, h.sigma0, FullSpace{});
    return {"", false, proj.distance, 1e-8 * (1.0 + h.theta0.norm()),
            "unconstrained projection must absorb the premium"};
}

CheckResult utility_additivity(const Harness& h) {
    ConstraintSet constraint = h.cfg.constraint.value_or(ConstraintSet{FullSpace{}});
    UtilityReport one = log_utility_value(1.0, h.cfg.model, constraint, h.bundle);
    UtilityReport two = log_utility_value(2.0, h.cfg.model, constraint, h.bundle);
    return {"", false, std::abs((two.value - one.value) - std::log(2.0)), 1e-12,
            "doubling initial wealth adds log 2 exactly"};
}

}  // namespace

ValidationReport run_validation_suite(const ExperimentConfig& config) {
    Harness h(config);
    ValidationReport report;
    run_check(report, "prices-positive", [&] { return prices_positive(h); });
    run_check(report, "deterministic-reprice", [&] { return deterministic_reprice(h); });
    run_check(report, "bond-discount", [&] { return bond_discount(h); });
    run_check(report, "martingale-spot", [&] { return martingale_spot(h); });
    run_check(report, "emm-deflator-agreement", [&] { return emm_agreement(h); });
    run_check(report, "claim-monotonicity", [&] { return claim_monotonicity(h); });
    run_check(report, "claim-positivity", [&] { return claim_positivity(h); });
    run_check(report, "solver-agreement", [&] { return solver_agreement(h); });
    run_check(report, "comparison-order", [&] { return comparison_order(h); });
    run_check(report, "terminal-consistency", [&] { return terminal_consistency(h); });
    if (config.model.d == config.model.n) {
        run_check(report, "dual-dominance", [&] { return dual_dominance(h); });
        run_check(report, "dual-grid-monotone", [&] { return dual_grid_monotone(h); });
        run_check(report, "borrowing-reduction", [&] { return borrowing_reduction(h); });
        run_check(report, "fullspace-distance", [&] { return fullspace_distance(h); });
    }
    run_check(report, "projection-box-feasible", [&] { return projection_box_feasible(h); });
    run_check(report, "utility-additivity", [&] { return utility_additivity(h); });
    return report;
}

}  // namespace bsdelab
