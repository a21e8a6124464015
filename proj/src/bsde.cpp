#include "bsdelab/bsde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bsdelab/errors.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/rng.hpp"
#include "bsdelab/stochastic.hpp"

namespace bsdelab {
namespace {

constexpr double kBoundSlack = 1e-9;

// Per-node generator view used by the shared backward pass; implementations
// wrap the problem driver, a frozen iterate, or a consumption add-on.
using NodeDriver =
    std::function<double(std::size_t, std::size_t, double, std::span<const double>)>;

void build_design(const RegressionBasis& basis, const DiscreteProcess& prices, std::size_t k,
                  Eigen::MatrixXd& design) {
    const std::size_t n_paths = prices.n_paths();
    const double t = prices.grid().node(k);
    design.resize(static_cast<Eigen::Index>(n_paths), static_cast<Eigen::Index>(basis.count));
    detail::parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        std::vector<double> row(basis.count);
        for (std::size_t p = begin; p < end; ++p) {
            basis.features(t, prices.node_values(p, k), row);
            for (std::size_t j = 0; j < basis.count; ++j) {
                design(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) = row[j];
            }
        }
    });
}

// Spot check of the declared standard-data constants: |f(t,x,0,0)| within its
// bound and sampled difference quotients within 1.05 * lipschitz.
void check_standard_data(const BsdeProblem& problem, const DiscreteProcess& prices,
                         std::size_t z_dim, std::uint64_t seed) {
    if (!problem.driver || !problem.terminal) {
        throw std::invalid_argument("bsde problem: driver and terminal payoff must be set");
    }
    if (problem.lipschitz < 0.0) {
        throw std::invalid_argument("bsde problem: Lipschitz constant must be non-negative");
    }
    GaussianStream stream(seed, 0x62736465ULL);
    std::uint64_t draw = 0;
    const std::size_t samples = 128;
    const std::size_t nodes = prices.grid().nodes();
    std::vector<double> z_zero(z_dim, 0.0);
    std::vector<double> z1(z_dim);
    std::vector<double> z2(z_dim);
    for (std::size_t s = 0; s < samples; ++s) {
        std::size_t p = (s * 2654435761ULL) % prices.n_paths();
        std::size_t k = (s * 40503ULL) % nodes;
        double t = prices.grid().node(k);
        auto state = prices.node_values(p, k);

        double at_zero = problem.driver(t, state, 0.0, z_zero);
        if (std::abs(at_zero) > problem.driver_zero_bound + kBoundSlack) {
            throw std::invalid_argument("bsde problem: declared driver-at-zero bound violated");
        }

        double y1 = 2.0 * stream.normal(draw++);
        double y2 = 2.0 * stream.normal(draw++);
        double dz_sq = 0.0;
        for (std::size_t j = 0; j < z_dim; ++j) {
            z1[j] = 2.0 * stream.normal(draw++);
            z2[j] = 2.0 * stream.normal(draw++);
            dz_sq += (z1[j] - z2[j]) * (z1[j] - z2[j]);
        }
        double gap = std::abs(problem.driver(t, state, y1, z1) -
                              problem.driver(t, state, y2, z2));
        double allowed = 1.05 * problem.lipschitz * (std::abs(y1 - y2) + std::sqrt(dz_sq));
        if (gap > allowed + kBoundSlack) {
            throw std::invalid_argument("bsde problem: declared Lipschitz constant violated");
        }
    }
}

struct BackwardPassResult {
    DiscreteProcess y;
    DiscreteProcess z;
    double max_condition = 0.0;
};

// Regression backward induction shared by the explicit scheme, the frozen
// Picard step, and the consumption variant:
//   E_k = condexp[Y_{k+1}],  Z_k = condexp[Y_{k+1} dW_k] / dt_k,
//   Y_k = E_k + driver(p, k, E_k, Z_k) dt_k,
// with plain means at node 0 where the sigma-field is trivial.
BackwardPassResult backward_pass(const NodeDriver& driver, const Payoff& terminal,
                                 const DiscreteProcess& prices, const PathBundle& bundle,
                                 const RegressionBasis& basis) {
    const TimeGrid& grid = bundle.grid();
    const std::size_t steps = grid.steps();
    const std::size_t n = bundle.dim();
    const std::size_t n_paths = bundle.n_paths();
    const double ridge = basis.resolve_ridge(n_paths);

    BackwardPassResult result{DiscreteProcess(grid, 1, n_paths),
                              DiscreteProcess(grid, n, n_paths), 0.0};
    detail::parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            result.y.at(p, steps) = terminal(prices.node_values(p, steps));
        }
    });

    Eigen::MatrixXd design;
    Eigen::MatrixXd y_target(static_cast<Eigen::Index>(n_paths), 1);
    Eigen::MatrixXd z_target(static_cast<Eigen::Index>(n_paths),
                             static_cast<Eigen::Index>(n));
    Eigen::VectorXd ey_all(static_cast<Eigen::Index>(n_paths));
    for (std::size_t k = steps; k-- > 0;) {
        const double dt = grid.dt(k);
        detail::parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                y_target(static_cast<Eigen::Index>(p), 0) = result.y.at(p, k + 1);
            }
        });

        if (k == 0) {
            ey_all.setConstant(y_target.col(0).mean());
        } else {
            build_design(basis, prices, k, design);
            RegressionFit fit = condexp_regress(y_target, design, ridge);
            result.max_condition = std::max(result.max_condition, fit.condition);
            ey_all = fit.fitted.col(0);
        }

        // Martingale-increment targets centered by the fitted conditional mean:
        // same conditional expectation, O(1) variance instead of O(1/dt).
        detail::parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                const auto row = static_cast<Eigen::Index>(p);
                double centered = result.y.at(p, k + 1) - ey_all(row);
                auto dw = bundle.increment(p, k);
                for (std::size_t j = 0; j < n; ++j) {
                    z_target(row, static_cast<Eigen::Index>(j)) = centered * dw[j] / dt;
                }
            }
        });

        Eigen::VectorXd z_mean(static_cast<Eigen::Index>(n));
        Eigen::MatrixXd z_fitted;
        if (k == 0) {
            z_mean = z_target.colwise().mean();
        } else {
            RegressionFit fit = condexp_regress(z_target, design, ridge);
            result.max_condition = std::max(result.max_condition, fit.condition);
            z_fitted = std::move(fit.fitted);
        }

        detail::parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                const auto row = static_cast<Eigen::Index>(p);
                double ey = ey_all(row);
                auto z_row = result.z.node_values(p, k);
                for (std::size_t j = 0; j < n; ++j) {
                    z_row[j] = (k == 0) ? z_mean(static_cast<Eigen::Index>(j))
                                        : z_fitted(row, static_cast<Eigen::Index>(j));
                }
                result.y.at(p, k) =
                    ey + driver(p, k, ey, std::span<const double>(z_row.data(), n)) * dt;
            }
        });
    }
    return result;
}

// Discrete weighted norm  sum_k exp(beta t_k) mean_p |x_k|^2 dt_k over left
// endpoints k = 0..K-1.
double weighted_norm_sq(const DiscreteProcess& x, double beta) {
    const TimeGrid& grid = x.grid();
    const std::size_t n_paths = x.n_paths();
    double total = 0.0;
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        double acc = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) {
            auto v = x.node_values(p, k);
            for (std::size_t j = 0; j < x.dim(); ++j) acc += v[j] * v[j];
        }
        total += std::exp(beta * grid.node(k)) * (acc / static_cast<double>(n_paths)) *
                 grid.dt(k);
    }
    return total;
}

DiscreteProcess difference(const DiscreteProcess& a, const DiscreteProcess& b) {
    DiscreteProcess out = a;
    auto raw_out = out.raw();
    auto raw_b = b.raw();
    for (std::size_t i = 0; i < raw_out.size(); ++i) raw_out[i] -= raw_b[i];
    return out;
}

}  // namespace

LinearDriverSpec LinearDriverSpec::constants(double phi, double beta,
                                             const Eigen::VectorXd& gamma) {
    LinearDriverSpec spec;
    spec.intercept = [phi](double, std::span<const double>) { return phi; };
    spec.slope_y = [beta](double, std::span<const double>) { return beta; };
    spec.slope_z = [gamma](double, std::span<const double>, std::span<double> out) {
        for (Eigen::Index j = 0; j < gamma.size(); ++j) out[j] = gamma[j];
    };
    spec.slope_y_bound = std::abs(beta);
    spec.slope_z_bound = gamma.norm();
    return spec;
}

BsdeSolution solve_linear(const LinearDriverSpec& driver, const Payoff& terminal,
                          const MarketModel& model, const PathBundle& bundle,
                          const RegressionBasis& basis) {
    if (!driver.intercept || !driver.slope_y || !driver.slope_z) {
        throw std::invalid_argument("linear driver: coefficient fields must be set");
    }
    if (!terminal) {
        throw std::invalid_argument("solve_linear: terminal payoff must be set");
    }
    const TimeGrid& grid = bundle.grid();
    const std::size_t steps = grid.steps();
    const std::size_t n = bundle.dim();
    const std::size_t n_paths = bundle.n_paths();
    const double ridge = basis.resolve_ridge(n_paths);

    DiscreteProcess prices = simulate_prices(model, bundle);

    // Adjoint coefficients along the paths, with declared-bound spot checks.
    DiscreteProcess drift(grid, 1, n_paths);
    DiscreteProcess vol(grid, n, n_paths);
    std::vector<char> violation(n_paths, 0);
    detail::parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        std::vector<double> gamma(n);
        for (std::size_t p = begin; p < end; ++p) {
            for (std::size_t k = 0; k < grid.nodes(); ++k) {
                double t = grid.node(k);
                auto state = prices.node_values(p, k);
                double beta = driver.slope_y(t, state);
                driver.slope_z(t, state, gamma);
                drift.at(p, k) = beta;
                auto vv = vol.node_values(p, k);
                double gamma_sq = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    vv[j] = gamma[j];
                    gamma_sq += gamma[j] * gamma[j];
                }
                if (std::abs(beta) > driver.slope_y_bound + kBoundSlack ||
                    std::sqrt(gamma_sq) > driver.slope_z_bound + kBoundSlack) {
                    violation[p] = 1;
                }
            }
        }
    });
    if (std::find(violation.begin(), violation.end(), 1) != violation.end()) {
        throw std::invalid_argument("linear driver: declared slope bound violated along paths");
    }

    DiscreteProcess adjoint = stochastic_exponential(drift, vol, bundle);

    // Backward accumulation of (xi Gamma_T + sum_j Gamma_j phi_j dt_j) / Gamma_k.
    DiscreteProcess cond_target(grid, 1, n_paths);
    detail::parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            double xi = terminal(prices.node_values(p, steps));
            double acc = xi * adjoint.at(p, steps);
            cond_target.at(p, steps) = xi;
            for (std::size_t k = steps; k-- > 0;) {
                double phi = driver.intercept(grid.node(k), prices.node_values(p, k));
                acc += adjoint.at(p, k) * phi * grid.dt(k);
                cond_target.at(p, k) = acc / adjoint.at(p, k);
            }
        }
    });

    BsdeSolution solution{DiscreteProcess(grid, 1, n_paths), DiscreteProcess(grid, n, n_paths),
                          SolveDiagnostics{"linear_adjoint", 0, {}, 0.0}};
    detail::parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            solution.y.at(p, steps) = cond_target.at(p, steps);
        }
    });

    Eigen::MatrixXd design;
    Eigen::MatrixXd y_target(static_cast<Eigen::Index>(n_paths), 1);
    Eigen::MatrixXd z_target(static_cast<Eigen::Index>(n_paths),
                             static_cast<Eigen::Index>(n));
    Eigen::VectorXd ey_all(static_cast<Eigen::Index>(n_paths));
    for (std::size_t k = steps; k-- > 0;) {
        const double dt = grid.dt(k);
        detail::parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                y_target(static_cast<Eigen::Index>(p), 0) = cond_target.at(p, k);
            }
        });

        if (k == 0) {
            ey_all.setConstant(y_target.col(0).mean());
        } else {
            build_design(basis, prices, k, design);
            RegressionFit fit = condexp_regress(y_target, design, ridge);
            solution.diagnostics.max_condition =
                std::max(solution.diagnostics.max_condition, fit.condition);
            ey_all = fit.fitted.col(0);
        }

        // Centered martingale-increment targets (the fitted value at this node
        // is conditionally known, so subtracting it leaves the projection
        // unchanged and removes the O(1/dt) variance blow-up).
        detail::parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                const auto row = static_cast<Eigen::Index>(p);
                double centered = solution.y.at(p, k + 1) - ey_all(row);
                auto dw = bundle.increment(p, k);
                for (std::size_t j = 0; j < n; ++j) {
                    z_target(row, static_cast<Eigen::Index>(j)) = centered * dw[j] / dt;
                }
            }
        });

        Eigen::VectorXd z_mean(static_cast<Eigen::Index>(n));
        Eigen::MatrixXd z_fitted;
        if (k == 0) {
            z_mean = z_target.colwise().mean();
        } else {
            RegressionFit fit = condexp_regress(z_target, design, ridge);
            solution.diagnostics.max_condition =
                std::max(solution.diagnostics.max_condition, fit.condition);
            z_fitted = std::move(fit.fitted);
        }

        detail::parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                const auto row = static_cast<Eigen::Index>(p);
                solution.y.at(p, k) = ey_all(row);
                auto z_row = solution.z.node_values(p, k);
                for (std::size_t j = 0; j < n; ++j) {
                    z_row[j] = (k == 0) ? z_mean(static_cast<Eigen::Index>(j))
                                        : z_fitted(row, static_cast<Eigen::Index>(j));
                }
            }
        });
    }
    return solution;
}

BsdeSolution solve_backward_euler(const BsdeProblem& problem, const MarketModel& model,
                                  const PathBundle& bundle, const RegressionBasis& basis) {
    const TimeGrid& grid = bundle.grid();
    double max_dt = 0.0;
    for (std::size_t k = 0; k < grid.steps(); ++k) max_dt = std::max(max_dt, grid.dt(k));
    if (max_dt * problem.lipschitz >= 1.0) {
        throw std::invalid_argument(
            "solve_backward_euler: stability requires dt * lipschitz < 1; refine the grid");
    }

    DiscreteProcess prices = simulate_prices(model, bundle);
    check_standard_data(problem, prices, bundle.dim(), bundle.seed());

    NodeDriver node_driver = [&](std::size_t p, std::size_t k, double ey,
                                 std::span<const double> z) {
        return problem.driver(grid.node(k), prices.node_values(p, k), ey, z);
    };
    BackwardPassResult pass = backward_pass(node_driver, problem.terminal, prices, bundle, basis);
    return BsdeSolution{std::move(pass.y), std::move(pass.z),
                        SolveDiagnostics{"backward_euler", 0, {}, pass.max_condition}};
}

BsdeSolution solve_picard(const BsdeProblem& problem, const MarketModel& model,
                          const PathBundle& bundle, const RegressionBasis& basis,
                          const PicardConfig& config) {
    const TimeGrid& grid = bundle.grid();
    const double horizon = grid.horizon();
    const double c = problem.lipschitz;
    const double threshold = 2.0 * (2.0 + horizon) * c * c;
    if (!(config.beta_weight > threshold)) {
        throw std::invalid_argument(
            "solve_picard: beta_weight must exceed 2 (2 + T) C^2 for contraction");
    }
    if (config.max_iterations < 1) {
        throw std::invalid_argument("solve_picard: need at least one iteration");
    }

    DiscreteProcess prices = simulate_prices(model, bundle);
    check_standard_data(problem, prices, bundle.dim(), bundle.seed());

    const std::size_t n = bundle.dim();
    DiscreteProcess frozen_y(grid, 1, bundle.n_paths());
    DiscreteProcess frozen_z(grid, n, bundle.n_paths());

    NodeDriver frozen_driver = [&](std::size_t p, std::size_t k, double, std::span<const double>) {
        auto z_row = frozen_z.node_values(p, k);
        return problem.driver(grid.node(k), prices.node_values(p, k), frozen_y.at(p, k),
                              std::span<const double>(z_row.data(), n));
    };

    SolveDiagnostics diagnostics{"picard", 0, {}, 0.0};

    // Iterate 0: driver frozen at the zero guess.
    BackwardPassResult current =
        backward_pass(frozen_driver, problem.terminal, prices, bundle, basis);
    diagnostics.max_condition = current.max_condition;

    double previous_delta = -1.0;
    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        frozen_y = current.y;
        frozen_z = current.z;
        current = backward_pass(frozen_driver, problem.terminal, prices, bundle, basis);
        diagnostics.max_condition = std::max(diagnostics.max_condition, current.max_condition);
        diagnostics.iterations = iter;

        double delta = weighted_norm_sq(difference(current.y, frozen_y), config.beta_weight) +
                       weighted_norm_sq(difference(current.z, frozen_z), config.beta_weight);
        if (previous_delta > 0.0) {
            diagnostics.contraction_ratios.push_back(delta / previous_delta);
        }
        previous_delta = delta;
        if (delta < config.tolerance) {
            return BsdeSolution{std::move(current.y), std::move(current.z),
                                std::move(diagnostics)};
        }
    }
    throw ConvergenceError(diagnostics.iterations, previous_delta,
                           "solve_picard: fixed-point iteration did not reach tolerance");
}

ResidualStats residual_check(const BsdeProblem& problem, const BsdeSolution& solution,
                             const DiscreteProcess& prices, const PathBundle& bundle) {
    const TimeGrid& grid = bundle.grid();
    if (!(solution.y.grid() == grid) || !(prices.grid() == grid)) {
        throw std::invalid_argument("residual_check: time grid mismatch");
    }
    const std::size_t steps = grid.steps();
    const std::size_t n = bundle.dim();
    const std::size_t n_paths = bundle.n_paths();

    ResidualStats stats;
    stats.per_node_rms.assign(steps, 0.0);
    double total_sq = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        double node_sq = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) {
            auto z_row = solution.z.node_values(p, k);
            auto dw = bundle.increment(p, k);
            double z_dw = 0.0;
            for (std::size_t j = 0; j < n; ++j) z_dw += z_row[j] * dw[j];
            double f = problem.driver(grid.node(k), prices.node_values(p, k),
                                      solution.y.at(p, k),
                                      std::span<const double>(z_row.data(), n));
            double residual = solution.y.at(p, k + 1) - solution.y.at(p, k) +
                              f * grid.dt(k) - z_dw;
            node_sq += residual * residual;
            stats.max_abs = std::max(stats.max_abs, std::abs(residual));
        }
        stats.per_node_rms[k] = std::sqrt(node_sq / static_cast<double>(n_paths));
        total_sq += node_sq;
    }
    stats.rms = std::sqrt(total_sq / static_cast<double>(n_paths * steps));
    return stats;
}

BsdeSolution supersolution_from_consumption(const BsdeProblem& problem,
                                            const DiscreteProcess& consumption,
                                            const MarketModel& model, const PathBundle& bundle,
                                            const RegressionBasis& basis) {
    const TimeGrid& grid = bundle.grid();
    if (!(consumption.grid() == grid)) {
        throw std::invalid_argument("supersolution_from_consumption: time grid mismatch");
    }
    if (consumption.dim() != 1 || consumption.n_paths() != bundle.n_paths()) {
        throw std::invalid_argument(
            "supersolution_from_consumption: consumption must be scalar on the bundle paths");
    }
    for (double v : consumption.raw()) {
        if (v < 0.0) {
            throw std::invalid_argument(
                "supersolution_from_consumption: consumption rate must be non-negative");
        }
    }
    double max_dt = 0.0;
    for (std::size_t k = 0; k < grid.steps(); ++k) max_dt = std::max(max_dt, grid.dt(k));
    if (max_dt * problem.lipschitz >= 1.0) {
        throw std::invalid_argument(
            "supersolution_from_consumption: stability requires dt * lipschitz < 1");
    }

    DiscreteProcess prices = simulate_prices(model, bundle);
    check_standard_data(problem, prices, bundle.dim(), bundle.seed());

    NodeDriver node_driver = [&](std::size_t p, std::size_t k, double ey,
                                 std::span<const double> z) {
        return problem.driver(grid.node(k), prices.node_values(p, k), ey, z) +
               consumption.at(p, k);
    };
    BackwardPassResult pass = backward_pass(node_driver, problem.terminal, prices, bundle, basis);
    return BsdeSolution{std::move(pass.y), std::move(pass.z),
                        SolveDiagnostics{"euler_consumption", 0, {}, pass.max_condition}};
}

AprioriReport apriori_gap(const BsdeSolution& solution_a, const BsdeSolution& solution_b,
                          const BsdeProblem& problem_a, const BsdeProblem& problem_b,
                          const DiscreteProcess& prices, double beta_weight) {
    const TimeGrid& grid = prices.grid();
    if (!(solution_a.y.grid() == grid) || !(solution_b.y.grid() == grid)) {
        throw std::invalid_argument("apriori_gap: time grid mismatch");
    }
    const double c = problem_a.lipschitz;
    if (!(beta_weight > c * (2.0 + c))) {
        throw std::invalid_argument("apriori_gap: beta_weight must exceed C (2 + C)");
    }
    const double horizon = grid.horizon();
    const std::size_t steps = grid.steps();
    const std::size_t n_paths = prices.n_paths();
    const std::size_t n = solution_b.z.dim();

    double y_norm_sq = 0.0;
    double z_norm_sq = 0.0;
    double driver_gap_sq = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        double weight = std::exp(beta_weight * grid.node(k)) * grid.dt(k);
        double y_acc = 0.0;
        double z_acc = 0.0;
        double f_acc = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) {
            double dy = solution_a.y.at(p, k) - solution_b.y.at(p, k);
            y_acc += dy * dy;
            auto za = solution_a.z.node_values(p, k);
            auto zb = solution_b.z.node_values(p, k);
            double dz_sq = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double dz = za[j] - zb[j];
                dz_sq += dz * dz;
            }
            z_acc += dz_sq;
            std::span<const double> zb_span(zb.data(), n);
            double t = grid.node(k);
            auto state = prices.node_values(p, k);
            double df = problem_a.driver(t, state, solution_b.y.at(p, k), zb_span) -
                        problem_b.driver(t, state, solution_b.y.at(p, k), zb_span);
            f_acc += df * df;
        }
        y_norm_sq += weight * y_acc / static_cast<double>(n_paths);
        z_norm_sq += weight * z_acc / static_cast<double>(n_paths);
        driver_gap_sq += weight * f_acc / static_cast<double>(n_paths);
    }

    double terminal_acc = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
        double dy = solution_a.y.at(p, steps) - solution_b.y.at(p, steps);
        terminal_acc += dy * dy;
    }
    double terminal_mean_sq = terminal_acc / static_cast<double>(n_paths);

    double bracket = std::exp(beta_weight * horizon) * terminal_mean_sq +
                     driver_gap_sq / (beta_weight - 2.0 * c - c * c);
    AprioriReport report;
    report.y_norm_sq = y_norm_sq;
    report.y_bound = horizon * bracket;
    report.z_norm_sq = z_norm_sq;
    report.z_bound = (2.0 + 2.0 * c * c * horizon) * bracket;
    report.y_satisfied = y_norm_sq <= report.y_bound;
    report.z_satisfied = z_norm_sq <= report.z_bound;
    return report;
}

}  // namespace bsdelab
