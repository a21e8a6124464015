#include "bsdelab/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bsdelab/errors.hpp"
#include "bsdelab/parallel.hpp"

namespace bsdelab {

namespace {

struct Sample {
    double mean = 0.0;
    double std_error = 0.0;
};

Sample mean_and_se(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    double mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    double var = sq / static_cast<double>(values.size());
    return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

std::vector<double> evaluate_claim(const ClaimSpec& claim, const DiscreteProcess& prices) {
    if (!claim.payoff) {
        throw std::invalid_argument("claim '" + claim.label + "': payoff must be set");
    }
    const std::size_t terminal = prices.grid().steps();
    std::vector<double> xi(prices.n_paths());
    double sum_sq = 0.0;
    for (std::size_t p = 0; p < prices.n_paths(); ++p) {
        double v = claim.payoff(prices.node_values(p, terminal));
        if (!std::isfinite(v)) {
            throw std::invalid_argument("claim '" + claim.label + "': non-finite payoff sample");
        }
        if (v < 0.0) {
            throw std::invalid_argument("claim '" + claim.label + "': payoff must be non-negative");
        }
        xi[p] = v;
        sum_sq += v * v;
    }
    if (!std::isfinite(sum_sq)) {
        throw std::invalid_argument("claim '" + claim.label +
                                    "': second moment estimate is not finite");
    }
    return xi;
}

// sigma^{-1} 1 for the borrowing penalty; requires d = n.
Eigen::VectorXd inverse_vol_ones(const Eigen::MatrixXd& sigma) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sigma);
    return lu.solve(Eigen::VectorXd::Ones(sigma.rows()));
}

Eigen::MatrixXd vol_matrix(const MarketModel& model, double t, std::span<const double> state) {
    std::vector<double> entries(model.d * model.n);
    model.vol(t, state, entries);
    Eigen::MatrixXd sigma(model.d, model.n);
    for (std::size_t i = 0; i < model.d; ++i) {
        for (std::size_t j = 0; j < model.n; ++j) {
            sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                entries[i * model.n + j];
        }
    }
    return sigma;
}

}  // namespace

ClaimSpec ClaimSpec::call(double strike, std::size_t asset) {
    return {[strike, asset](std::span<const double> prices) {
                return std::max(prices[asset] - strike, 0.0);
            },
            "call"};
}

ClaimSpec ClaimSpec::put(double strike, std::size_t asset) {
    return {[strike, asset](std::span<const double> prices) {
                return std::max(strike - prices[asset], 0.0);
            },
            "put"};
}

ClaimSpec ClaimSpec::digital(double strike, std::size_t asset) {
    return {[strike, asset](std::span<const double> prices) {
                return prices[asset] >= strike ? 1.0 : 0.0;
            },
            "digital"};
}

ClaimSpec ClaimSpec::bond() {
    return {[](std::span<const double>) { return 1.0; }, "bond"};
}

ClaimSpec ClaimSpec::asset(std::size_t index) {
    return {[index](std::span<const double> prices) { return prices[index]; }, "asset"};
}

PriceReport fair_price(const ClaimSpec& claim, const MarketModel& model,
                       const PathBundle& bundle, const RegressionBasis& basis) {
    DiscreteProcess prices = simulate_prices(model, bundle);
    std::vector<double> xi = evaluate_claim(claim, prices);
    DeflatorPaths h = deflator(model, prices, bundle, 0);

    const std::size_t terminal = bundle.grid().steps();
    std::vector<double> deflated(bundle.n_paths());
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
        deflated[p] = xi[p] * h.values.at(p, terminal);
    }
    Sample stats = mean_and_se(deflated);

    PriceReport report;
    report.price = stats.mean;
    report.std_error = stats.std_error;
    report.method = "deflator-mc";

    // Wealth via the linear equation phi = 0, beta = -r, gamma = -theta.
    LinearDriverSpec spec;
    spec.intercept = [](double, std::span<const double>) { return 0.0; };
    spec.slope_y = [&model](double t, std::span<const double> state) {
        return -model.rate(t, state);
    };
    spec.slope_z = [&model](double t, std::span<const double> state, std::span<double> out) {
        Eigen::VectorXd theta = model.risk_premium_at(t, state);
        for (std::size_t j = 0; j < static_cast<std::size_t>(theta.size()); ++j) {
            out[j] = -theta[static_cast<Eigen::Index>(j)];
        }
    };
    spec.slope_y_bound = model.rate_bound;
    spec.slope_z_bound = model.constant_coefficients
                             ? model.risk_premium_at(0.0, prices.node_values(0, 0)).norm()
                             : model.excess_bound / model.ellip_lo;
    BsdeSolution sol = solve_linear(spec, claim.payoff, model, bundle, basis);

    if (model.d == model.n) {
        DiscreteProcess hedge(bundle.grid(), model.d, bundle.n_paths());
        const bool hoist = model.constant_coefficients;
        Eigen::PartialPivLU<Eigen::MatrixXd> const_lu;
        if (hoist) {
            const_lu.compute(vol_matrix(model, bundle.grid().node(0),
                                        prices.node_values(0, 0))
                                 .transpose());
        }
        detail::parallel_for(bundle.n_paths(), [&](std::size_t begin, std::size_t end) {
            Eigen::VectorXd z(static_cast<Eigen::Index>(model.n));
            for (std::size_t p = begin; p < end; ++p) {
                for (std::size_t k = 0; k < terminal; ++k) {
                    for (std::size_t j = 0; j < model.n; ++j) {
                        z[static_cast<Eigen::Index>(j)] = sol.z.at(p, k, j);
                    }
                    Eigen::VectorXd pi;
                    if (hoist) {
                        pi = const_lu.solve(z);
                    } else {
                        pi = vol_matrix(model, bundle.grid().node(k), prices.node_values(p, k))
                                 .transpose()
                                 .partialPivLu()
                                 .solve(z);
                    }
                    for (std::size_t i = 0; i < model.d; ++i) {
                        hedge.at(p, k, i) = pi[static_cast<Eigen::Index>(i)];
                    }
                }
            }
        });
        report.hedge = std::move(hedge);
    }
    report.wealth = std::move(sol.y);
    return report;
}

PriceReport emm_price(const ClaimSpec& claim, const MarketModel& model,
                      const PathBundle& bundle) {
    DiscreteProcess prices = simulate_prices(model, bundle);
    std::vector<double> xi = evaluate_claim(claim, prices);
    std::vector<double> weights = emm_weights(model, bundle);

    const TimeGrid& grid = bundle.grid();
    const bool hoist = model.constant_coefficients;
    double const_r = hoist ? model.rate(grid.node(0), prices.node_values(0, 0)) : 0.0;

    std::vector<double> discounted(bundle.n_paths());
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
        double acc = 0.0;
        for (std::size_t k = 0; k < grid.steps(); ++k) {
            double r = hoist ? const_r : model.rate(grid.node(k), prices.node_values(p, k));
            acc -= r * grid.dt(k);
        }
        discounted[p] = weights[p] * std::exp(acc) * xi[p];
    }
    Sample stats = mean_and_se(discounted);

    PriceReport report;
    report.price = stats.mean;
    report.std_error = stats.std_error;
    report.method = "emm-mc";
    return report;
}

PriceReport borrowing_price(const ClaimSpec& claim, const MarketModel& model,
                            const ScalarField& borrow_rate, const PathBundle& bundle,
                            const RegressionBasis& basis) {
    if (model.d != model.n) {
        throw std::invalid_argument("borrowing_price: needs d = n with invertible vol");
    }
    if (!borrow_rate) {
        throw std::invalid_argument("borrowing_price: borrow rate field must be set");
    }
    DiscreteProcess prices = simulate_prices(model, bundle);
    evaluate_claim(claim, prices);  // claim sanity before the expensive solve

    const TimeGrid& grid = bundle.grid();
    double max_spread = 0.0;
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
        for (std::size_t k = 0; k < grid.steps(); ++k) {
            double t = grid.node(k);
            auto state = prices.node_values(p, k);
            double spread = borrow_rate(t, state) - model.rate(t, state);
            if (spread < 0.0) {
                throw std::invalid_argument(
                    "borrowing_price: borrow rate below the lending rate along a path");
            }
            max_spread = std::max(max_spread, spread);
        }
    }

    const bool hoist = model.constant_coefficients;
    double const_r = 0.0;
    Eigen::VectorXd const_theta;
    Eigen::VectorXd const_s;
    if (hoist) {
        auto state0 = prices.node_values(0, 0);
        const_r = model.rate(grid.node(0), state0);
        const_theta = model.risk_premium_at(grid.node(0), state0);
        const_s = inverse_vol_ones(vol_matrix(model, grid.node(0), state0));
    }

    double theta_bound =
        hoist ? const_theta.norm() : model.excess_bound / model.ellip_lo;
    double s_bound = hoist ? const_s.norm()
                           : std::sqrt(static_cast<double>(model.d)) / model.ellip_lo;

    BsdeProblem problem;
    problem.terminal = claim.payoff;
    problem.lipschitz = std::max(model.rate_bound + max_spread,
                                 theta_bound + max_spread * s_bound);
    problem.driver_zero_bound = 0.0;
    problem.driver = [&model, &borrow_rate, hoist, const_r, const_theta,
                      const_s](double t, std::span<const double> state, double y,
                               std::span<const double> z) {
        double r = hoist ? const_r : model.rate(t, state);
        Eigen::VectorXd theta = hoist ? const_theta : model.risk_premium_at(t, state);
        Eigen::VectorXd s = hoist ? const_s : inverse_vol_ones(vol_matrix(model, t, state));
        double theta_z = 0.0;
        double s_z = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) {
            theta_z += theta[static_cast<Eigen::Index>(j)] * z[j];
            s_z += s[static_cast<Eigen::Index>(j)] * z[j];
        }
        double penalty = std::max(s_z - y, 0.0);
        return -r * y - theta_z + (borrow_rate(t, state) - r) * penalty;
    };

    BsdeSolution sol = solve_backward_euler(problem, model, bundle, basis);

    // Standard error of the final averaging step: the root value is a plain
    // mean of next-node values plus a deterministic driver correction.
    std::vector<double> next(bundle.n_paths());
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) next[p] = sol.y.at(p, 1);
    Sample stats = mean_and_se(next);

    PriceReport report;
    report.price = sol.y.at(0, 0);
    report.std_error = stats.std_error;
    report.method = "borrowing-euler";
    report.wealth = std::move(sol.y);
    return report;
}

PriceReport borrowing_price_dual(const ClaimSpec& claim, const MarketModel& model,
                                 const ScalarField& borrow_rate,
                                 std::span<const double> beta_grid,
                                 const PathBundle& bundle) {
    if (beta_grid.empty()) {
        throw std::invalid_argument("borrowing_price_dual: beta grid is empty");
    }
    if (model.d != model.n) {
        throw std::invalid_argument("borrowing_price_dual: needs d = n with invertible vol");
    }
    DiscreteProcess prices = simulate_prices(model, bundle);
    std::vector<double> xi = evaluate_claim(claim, prices);

    const TimeGrid& grid = bundle.grid();
    const std::size_t steps = grid.steps();
    const std::size_t n = model.n;

    // Admissibility: -R <= beta <= -r point-wise along the sampled paths.
    constexpr double kSlack = 1e-12;
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
        for (std::size_t k = 0; k < steps; ++k) {
            double t = grid.node(k);
            auto state = prices.node_values(p, k);
            double r = model.rate(t, state);
            double big = borrow_rate ? borrow_rate(t, state) : r;
            for (double beta : beta_grid) {
                if (beta > -r + kSlack || beta < -big - kSlack) {
                    throw std::invalid_argument(
                        "borrowing_price_dual: beta outside [-R, -r] along a path");
                }
            }
        }
        if (!model.constant_coefficients) continue;
        break;  // constant coefficients: one path suffices
    }

    const bool hoist = model.constant_coefficients;
    double const_r = 0.0;
    Eigen::VectorXd const_theta;
    Eigen::VectorXd const_s;
    if (hoist) {
        auto state0 = prices.node_values(0, 0);
        const_r = model.rate(grid.node(0), state0);
        const_theta = model.risk_premium_at(grid.node(0), state0);
        const_s = inverse_vol_ones(vol_matrix(model, grid.node(0), state0));
    }

    DualDiagnostics diagnostics;
    diagnostics.beta_grid.assign(beta_grid.begin(), beta_grid.end());

    std::vector<double> products(bundle.n_paths());
    std::vector<double> terminal_gamma(bundle.n_paths());
    for (double beta : beta_grid) {
        detail::parallel_for(bundle.n_paths(), [&](std::size_t begin, std::size_t end) {
            Eigen::VectorXd gamma(static_cast<Eigen::Index>(n));
            for (std::size_t p = begin; p < end; ++p) {
                double log_acc = 0.0;
                for (std::size_t k = 0; k < steps; ++k) {
                    double t = grid.node(k);
                    auto state = prices.node_values(p, k);
                    double r = hoist ? const_r : model.rate(t, state);
                    Eigen::VectorXd theta =
                        hoist ? const_theta : model.risk_premium_at(t, state);
                    Eigen::VectorXd s =
                        hoist ? const_s : inverse_vol_ones(vol_matrix(model, t, state));
                    double shift = beta + r;
                    for (std::size_t j = 0; j < n; ++j) {
                        gamma[static_cast<Eigen::Index>(j)] =
                            -theta[static_cast<Eigen::Index>(j)] -
                            shift * s[static_cast<Eigen::Index>(j)];
                    }
                    auto dw = bundle.increment(p, k);
                    double gamma_sq = gamma.squaredNorm();
                    double gamma_dw = 0.0;
                    for (std::size_t j = 0; j < n; ++j) gamma_dw += gamma[j] * dw[j];
                    log_acc += (beta - 0.5 * gamma_sq) * grid.dt(k) + gamma_dw;
                }
                terminal_gamma[p] = std::exp(log_acc);
            }
        });
        for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
            products[p] = xi[p] * terminal_gamma[p];
        }
        Sample stats = mean_and_se(products);
        diagnostics.prices.push_back(stats.mean);
        diagnostics.std_errors.push_back(stats.std_error);
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < diagnostics.prices.size(); ++i) {
        if (diagnostics.prices[i] > diagnostics.prices[best]) best = i;
    }
    diagnostics.argmax_beta = diagnostics.beta_grid[best];

    PriceReport report;
    report.price = diagnostics.prices[best];
    report.std_error = diagnostics.std_errors[best];
    report.method = "borrowing-dual";
    report.dual = std::move(diagnostics);
    return report;
}

std::vector<double> uniform_beta_grid(double rate, double borrow_rate, std::size_t count) {
    if (count < 1) {
        throw std::invalid_argument("uniform_beta_grid: need at least one point");
    }
    if (borrow_rate < rate) {
        throw std::invalid_argument("uniform_beta_grid: borrow rate below lending rate");
    }
    double lo = -borrow_rate;
    double hi = -rate;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    grid.front() = lo;
    grid.back() = hi;  // exact endpoints; beta = -r must reproduce fair_price
    if (count == 1) grid[0] = hi;
    return grid;
}

ReplayReport hedge_replay(const PriceReport& report, const ClaimSpec& claim,
                          const MarketModel& model, const PathBundle& bundle) {
    if (!report.hedge.has_value()) {
        throw std::invalid_argument("hedge_replay: report carries no hedge");
    }
    const DiscreteProcess& hedge = *report.hedge;
    const TimeGrid& grid = bundle.grid();
    if (!(hedge.grid() == grid)) {
        throw std::invalid_argument("hedge_replay: hedge grid does not match the bundle");
    }
    DiscreteProcess prices = simulate_prices(model, bundle);
    std::vector<double> xi = evaluate_claim(claim, prices);

    const std::size_t steps = grid.steps();
    const bool hoist = model.constant_coefficients;
    double const_r = 0.0;
    Eigen::MatrixXd const_sigma_t;
    Eigen::VectorXd const_theta;
    if (hoist) {
        auto state0 = prices.node_values(0, 0);
        const_r = model.rate(grid.node(0), state0);
        const_sigma_t = vol_matrix(model, grid.node(0), state0).transpose();
        const_theta = model.risk_premium_at(grid.node(0), state0);
    }

    DiscreteProcess wealth(grid, 1, bundle.n_paths());
    detail::parallel_for(bundle.n_paths(), [&](std::size_t begin, std::size_t end) {
        Eigen::VectorXd pi(static_cast<Eigen::Index>(model.d));
        for (std::size_t p = begin; p < end; ++p) {
            double v = report.price;
            wealth.at(p, 0) = v;
            for (std::size_t k = 0; k < steps; ++k) {
                double t = grid.node(k);
                auto state = prices.node_values(p, k);
                double r = hoist ? const_r : model.rate(t, state);
                Eigen::VectorXd theta = hoist ? const_theta : model.risk_premium_at(t, state);
                Eigen::MatrixXd sigma_t =
                    hoist ? const_sigma_t : vol_matrix(model, t, state).transpose();
                for (std::size_t i = 0; i < model.d; ++i) {
                    pi[static_cast<Eigen::Index>(i)] = hedge.at(p, k, i);
                }
                Eigen::VectorXd exposure = sigma_t * pi;  // sigma^* pi
                auto dw = bundle.increment(p, k);
                double gain = r * v * grid.dt(k);
                for (std::size_t j = 0; j < model.n; ++j) {
                    gain += exposure[static_cast<Eigen::Index>(j)] *
                            (theta[static_cast<Eigen::Index>(j)] * grid.dt(k) + dw[j]);
                }
                v += gain;
                wealth.at(p, k + 1) = v;
            }
        }
    });

    double sq = 0.0;
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
        double err = wealth.at(p, steps) - xi[p];
        sq += err * err;
    }
    ReplayReport out{std::sqrt(sq / static_cast<double>(bundle.n_paths())), std::move(wealth)};
    return out;
}

}  // namespace bsdelab
