#include "bsdelab/utility.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bsdelab/bsde.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/stochastic.hpp"

namespace bsdelab {

namespace {

constexpr std::size_t kMaxProjectedGradient = 500;
constexpr double kProjectedGradientTol = 1e-10;
constexpr std::size_t kPowerIterations = 20;

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

bool all_finite(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) return false;
    }
    return true;
}

Eigen::VectorXd clamp_to_box(const BoxSet& box, Eigen::VectorXd c) {
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        c[i] = std::min(std::max(c[i], box.lower[i]), box.upper[i]);
    }
    return c;
}

Eigen::VectorXd clamp_to_ball(const BallSet& ball, Eigen::VectorXd c) {
    Eigen::VectorXd shift = c - ball.center;
    double norm = shift.norm();
    if (norm <= ball.radius) return c;
    return ball.center + shift * (ball.radius / norm);
}

// Largest eigenvalue of the SPD matrix A by plain power iteration.
double top_eigenvalue(const Eigen::MatrixXd& a) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(a.rows());
    v /= v.norm();
    for (std::size_t it = 0; it < kPowerIterations; ++it) {
        Eigen::VectorXd w = a * v;
        double norm = w.norm();
        if (!(norm > 0.0)) break;
        v = w / norm;
    }
    return v.dot(a * v);
}

template <typename Projector>
Projection projected_gradient(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const Eigen::MatrixXd& sigma, const Eigen::VectorXd& theta,
                              const Projector& project) {
    double step_scale = top_eigenvalue(a);
    if (!(step_scale > 0.0)) {
        throw std::invalid_argument("constraint_distance: vol matrix is degenerate");
    }
    Projection result;
    Eigen::VectorXd c = project(a.ldlt().solve(b));
    result.converged = false;
    for (std::size_t it = 0; it < kMaxProjectedGradient; ++it) {
        Eigen::VectorXd gradient = a * c - b;
        Eigen::VectorXd next = project(c - gradient / step_scale);
        double residual = step_scale * (next - c).norm();
        c = std::move(next);
        if (residual < kProjectedGradientTol) {
            result.converged = true;
            break;
        }
    }
    result.fraction = std::move(c);
    result.rho = sigma.transpose() * result.fraction;
    result.distance = (theta - result.rho).norm();
    return result;
}

struct DriverPaths {
    DiscreteProcess f;
    DiscreteProcess rho;
    bool converged = true;
};

DriverPaths driver_paths(const MarketModel& model, const ConstraintSet& constraint,
                         const PathBundle& bundle) {
    validate_constraint(constraint, model.d);
    const TimeGrid& grid = bundle.grid();
    const std::size_t steps = grid.steps();
    const std::size_t n = model.n;
    DiscreteProcess prices = simulate_prices(model, bundle);
    DriverPaths out{DiscreteProcess(grid, 1, bundle.n_paths()),
                    DiscreteProcess(grid, n, bundle.n_paths()), true};

    auto node_value = [&](double t, std::span<const double> state, Projection& proj) {
        double r = model.rate(t, state);
        Eigen::VectorXd theta = model.risk_premium_at(t, state);
        proj = constraint_distance(theta, vol_matrix(model, t, state), constraint);
        return r + 0.5 * theta.squaredNorm() - 0.5 * proj.distance * proj.distance;
    };

    if (model.constant_coefficients) {
        Projection proj;
        double f0 = node_value(grid.node(0), prices.node_values(0, 0), proj);
        out.converged = proj.converged;
        detail::parallel_for(bundle.n_paths(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                for (std::size_t k = 0; k < steps; ++k) {
                    out.f.at(p, k) = f0;
                    auto row = out.rho.node_values(p, k);
                    for (std::size_t j = 0; j < n; ++j) {
                        row[j] = proj.rho[static_cast<Eigen::Index>(j)];
                    }
                }
            }
        });
        return out;
    }

    std::vector<char> failed(bundle.n_paths(), 0);
    detail::parallel_for(bundle.n_paths(), [&](std::size_t begin, std::size_t end) {
        Projection proj;
        for (std::size_t p = begin; p < end; ++p) {
            for (std::size_t k = 0; k < steps; ++k) {
                out.f.at(p, k) =
                    node_value(grid.node(k), prices.node_values(p, k), proj);
                auto row = out.rho.node_values(p, k);
                for (std::size_t j = 0; j < n; ++j) {
                    row[j] = proj.rho[static_cast<Eigen::Index>(j)];
                }
                if (!proj.converged) failed[p] = 1;
            }
        }
    });
    for (char flag : failed) {
        if (flag) out.converged = false;
    }
    return out;
}

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

}  // namespace

void validate_constraint(const ConstraintSet& constraint, std::size_t d) {
    const auto dim = static_cast<Eigen::Index>(d);
    if (const auto* box = std::get_if<BoxSet>(&constraint)) {
        if (box->lower.size() != dim || box->upper.size() != dim) {
            throw std::invalid_argument("constraint: box bounds must have one entry per asset");
        }
        if (!all_finite(box->lower) || !all_finite(box->upper)) {
            throw std::invalid_argument("constraint: box bounds must be finite");
        }
        for (Eigen::Index i = 0; i < dim; ++i) {
            if (box->lower[i] > box->upper[i]) {
                throw std::invalid_argument("constraint: box lower bound exceeds upper bound");
            }
        }
    } else if (const auto* points = std::get_if<FinitePointSet>(&constraint)) {
        if (points->points.empty()) {
            throw std::invalid_argument("constraint: point set must be non-empty");
        }
        for (const Eigen::VectorXd& p : points->points) {
            if (p.size() != dim || !all_finite(p)) {
                throw std::invalid_argument(
                    "constraint: every point needs one finite entry per asset");
            }
        }
    } else if (const auto* ball = std::get_if<BallSet>(&constraint)) {
        if (ball->center.size() != dim || !all_finite(ball->center)) {
            throw std::invalid_argument("constraint: ball center must be finite with one "
                                        "entry per asset");
        }
        if (!(ball->radius >= 0.0) || !std::isfinite(ball->radius)) {
            throw std::invalid_argument("constraint: ball radius must be non-negative");
        }
    }
}

Projection constraint_distance(const Eigen::VectorXd& theta, const Eigen::MatrixXd& sigma,
                               const ConstraintSet& constraint) {
    if (sigma.rows() < 1 || sigma.cols() != theta.size()) {
        throw std::invalid_argument(
            "constraint_distance: vol must be d x n with n matching theta");
    }
    validate_constraint(constraint, static_cast<std::size_t>(sigma.rows()));
    Eigen::MatrixXd a = sigma * sigma.transpose();
    Eigen::VectorXd b = sigma * theta;

    if (std::holds_alternative<FullSpace>(constraint)) {
        Projection result;
        result.fraction = a.ldlt().solve(b);
        result.rho = sigma.transpose() * result.fraction;
        result.distance = (theta - result.rho).norm();
        return result;
    }
    if (const auto* box = std::get_if<BoxSet>(&constraint)) {
        return projected_gradient(a, b, sigma, theta, [box](Eigen::VectorXd c) {
            return clamp_to_box(*box, std::move(c));
        });
    }
    if (const auto* ball = std::get_if<BallSet>(&constraint)) {
        return projected_gradient(a, b, sigma, theta, [ball](Eigen::VectorXd c) {
            return clamp_to_ball(*ball, std::move(c));
        });
    }

    const auto& points = std::get<FinitePointSet>(constraint).points;
    Projection result;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double d2 = (theta - sigma.transpose() * points[i]).squaredNorm();
        if (d2 < best) {
            best = d2;
            best_index = i;
        }
    }
    result.fraction = points[best_index];
    result.rho = sigma.transpose() * result.fraction;
    result.distance = (theta - result.rho).norm();
    return result;
}

DiscreteProcess log_utility_driver(const MarketModel& model, const ConstraintSet& constraint,
                                   const PathBundle& bundle, bool* all_converged) {
    DriverPaths paths = driver_paths(model, constraint, bundle);
    if (all_converged != nullptr) *all_converged = paths.converged;
    return std::move(paths.f);
}

UtilityReport log_utility_value(double x, const MarketModel& model,
                                const ConstraintSet& constraint, const PathBundle& bundle) {
    if (!(x > 0.0)) {
        throw std::invalid_argument("log_utility_value: initial wealth must be positive");
    }
    DriverPaths paths = driver_paths(model, constraint, bundle);
    const TimeGrid& grid = bundle.grid();

    std::vector<double> integrals(bundle.n_paths());
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
        double acc = 0.0;
        for (std::size_t k = 0; k < grid.steps(); ++k) {
            acc += paths.f.at(p, k) * grid.dt(k);
        }
        integrals[p] = acc;
    }
    Sample stats = mean_and_se(integrals);

    return UtilityReport{std::log(x) + stats.mean, stats.std_error, std::move(paths.f),
                         std::move(paths.rho), paths.converged};
}

double log_utility_value_solver(double x, const MarketModel& model,
                                const ConstraintSet& constraint, const PathBundle& bundle,
                                const RegressionBasis& basis) {
    if (!(x > 0.0)) {
        throw std::invalid_argument("log_utility_value_solver: initial wealth must be positive");
    }
    validate_constraint(constraint, model.d);

    const bool hoist = model.constant_coefficients;
    double const_f = 0.0;
    double zero_bound = 0.0;
    if (hoist) {
        DiscreteProcess prices = simulate_prices(model, bundle);
        double t0 = bundle.grid().node(0);
        auto state0 = prices.node_values(0, 0);
        Eigen::VectorXd theta = model.risk_premium_at(t0, state0);
        Projection proj = constraint_distance(theta, vol_matrix(model, t0, state0), constraint);
        const_f = model.rate(t0, state0) + 0.5 * theta.squaredNorm() -
                  0.5 * proj.distance * proj.distance;
        zero_bound = std::abs(const_f);
    } else {
        // dist <= |theta| + |sigma^* c_ref| for any feasible reference point.
        double theta_bound = model.excess_bound / model.ellip_lo;
        double ref_norm = 0.0;
        if (const auto* box = std::get_if<BoxSet>(&constraint)) {
            ref_norm = clamp_to_box(*box, Eigen::VectorXd::Zero(box->lower.size())).norm();
        } else if (const auto* ball = std::get_if<BallSet>(&constraint)) {
            ref_norm = clamp_to_ball(*ball, Eigen::VectorXd::Zero(ball->center.size())).norm();
        } else if (const auto* points = std::get_if<FinitePointSet>(&constraint)) {
            ref_norm = points->points.front().norm();
        }
        double dist_bound = theta_bound + model.ellip_hi * ref_norm;
        zero_bound = model.rate_bound + 0.5 * theta_bound * theta_bound +
                     0.5 * dist_bound * dist_bound;
    }

    BsdeProblem problem;
    problem.terminal = [](std::span<const double>) { return 0.0; };
    problem.lipschitz = 0.0;
    problem.driver_zero_bound = zero_bound;
    problem.driver = [&model, &constraint, hoist, const_f](
                         double t, std::span<const double> state, double,
                         std::span<const double>) {
        if (hoist) return const_f;
        Eigen::VectorXd theta = model.risk_premium_at(t, state);
        Projection proj =
            constraint_distance(theta, vol_matrix(model, t, state), constraint);
        return model.rate(t, state) + 0.5 * theta.squaredNorm() -
               0.5 * proj.distance * proj.distance;
    };

    BsdeSolution sol = solve_backward_euler(problem, model, bundle, basis);
    return std::log(x) + sol.y.at(0, 0);
}

DiscreteProcess wealth_from_fraction(double x, const DiscreteProcess& rho,
                                     const MarketModel& model, const PathBundle& bundle) {
    if (!(x > 0.0)) {
        throw std::invalid_argument("wealth_from_fraction: initial wealth must be positive");
    }
    const TimeGrid& grid = bundle.grid();
    if (!(rho.grid() == grid)) {
        throw std::invalid_argument("wealth_from_fraction: fraction grid does not match");
    }
    if (rho.dim() != model.n || rho.n_paths() != bundle.n_paths()) {
        throw std::invalid_argument(
            "wealth_from_fraction: fraction needs one component per Brownian axis and one "
            "row per path");
    }

    DiscreteProcess prices = simulate_prices(model, bundle);
    const bool hoist = model.constant_coefficients;
    double const_r = 0.0;
    Eigen::VectorXd const_theta;
    if (hoist) {
        const_r = model.rate(grid.node(0), prices.node_values(0, 0));
        const_theta = model.risk_premium_at(grid.node(0), prices.node_values(0, 0));
    }

    DiscreteProcess drift(grid, 1, bundle.n_paths());
    detail::parallel_for(bundle.n_paths(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            for (std::size_t k = 0; k < grid.steps(); ++k) {
                double t = grid.node(k);
                auto state = prices.node_values(p, k);
                double r = hoist ? const_r : model.rate(t, state);
                Eigen::VectorXd theta = hoist ? const_theta : model.risk_premium_at(t, state);
                auto row = rho.node_values(p, k);
                double rho_theta = 0.0;
                for (std::size_t j = 0; j < model.n; ++j) {
                    rho_theta += row[j] * theta[static_cast<Eigen::Index>(j)];
                }
                drift.at(p, k) = r + rho_theta;
            }
        }
    });

    DiscreteProcess wealth = stochastic_exponential(drift, rho, bundle);
    for (double& v : wealth.raw()) v *= x;
    return wealth;
}

}  // namespace bsdelab
