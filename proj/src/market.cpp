#include "bsdelab/market.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "bsdelab/errors.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/rng.hpp"

namespace bsdelab {
namespace {

constexpr double kBoundSlack = 1e-9;

Eigen::MatrixXd vol_matrix(const MarketModel& model, double t, std::span<const double> prices) {
    Eigen::MatrixXd sigma(model.d, model.n);
    std::vector<double> buf(model.d * model.n);
    model.vol(t, prices, buf);
    for (std::size_t i = 0; i < model.d; ++i) {
        for (std::size_t j = 0; j < model.n; ++j) {
            sigma(i, j) = buf[i * model.n + j];
        }
    }
    return sigma;
}

}  // namespace

MarketModel MarketModel::black_scholes(double rate, double excess, double sigma, double spot) {
    Eigen::VectorXd ex(1);
    ex << excess;
    Eigen::MatrixXd vol(1, 1);
    vol << sigma;
    Eigen::VectorXd s0(1);
    s0 << spot;
    return constants(rate, ex, vol, s0);
}

MarketModel MarketModel::constants(double rate, const Eigen::VectorXd& excess,
                                   const Eigen::MatrixXd& sigma, const Eigen::VectorXd& spot) {
    const auto d = static_cast<std::size_t>(excess.size());
    const auto n = static_cast<std::size_t>(sigma.cols());
    if (static_cast<std::size_t>(sigma.rows()) != d) {
        throw std::invalid_argument("market model: vol row count must equal the number of assets");
    }
    if (d > n) {
        throw std::invalid_argument("market model: more assets than Brownian dimensions");
    }
    if (static_cast<std::size_t>(spot.size()) != d) {
        throw std::invalid_argument("market model: spot vector size must equal the number of assets");
    }
    for (Eigen::Index i = 0; i < spot.size(); ++i) {
        if (!(spot[i] > 0.0)) {
            throw std::invalid_argument("market model: spot prices must be positive");
        }
    }

    MarketModel model;
    model.d = d;
    model.n = n;
    model.initial_prices = spot;
    model.rate = [rate](double, std::span<const double>) { return rate; };
    model.excess = [excess](double, std::span<const double>, std::span<double> out) {
        for (Eigen::Index i = 0; i < excess.size(); ++i) out[i] = excess[i];
    };
    model.vol = [sigma](double, std::span<const double>, std::span<double> out) {
        for (Eigen::Index i = 0; i < sigma.rows(); ++i) {
            for (Eigen::Index j = 0; j < sigma.cols(); ++j) {
                out[i * sigma.cols() + j] = sigma(i, j);
            }
        }
    };
    model.rate_bound = std::abs(rate);
    model.excess_bound = excess.lpNorm<Eigen::Infinity>();
    model.vol_bound = sigma.cwiseAbs().maxCoeff();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sigma);
    model.ellip_lo = svd.singularValues().minCoeff();
    model.ellip_hi = svd.singularValues().maxCoeff();
    model.constant_coefficients = true;
    return model;
}

void MarketModel::validate(double horizon, std::uint64_t seed, std::size_t samples) const {
    if (!rate || !excess || !vol) {
        throw std::invalid_argument("market model: coefficient fields must be set");
    }
    if (!(ellip_lo > 0.0)) {
        throw std::invalid_argument("market model: lower ellipticity constant must be positive");
    }
    if (ellip_hi < ellip_lo) {
        throw std::invalid_argument("market model: ellipticity constants out of order");
    }

    GaussianStream stream(seed, 0x6d61726bULL);
    std::uint64_t draw = 0;
    std::vector<double> prices(d + 1);
    std::vector<double> excess_buf(d);
    Eigen::VectorXd x(d);
    for (std::size_t s = 0; s < samples; ++s) {
        // Lognormal price scatter around the initial prices, uniform time.
        double u = 0.5 * (1.0 + std::erf(stream.normal(draw++) / std::numbers::sqrt2));
        double t = horizon * u;
        prices[0] = std::exp(0.3 * stream.normal(draw++));
        for (std::size_t i = 0; i < d; ++i) {
            prices[1 + i] = initial_prices[i] * std::exp(stream.normal(draw++));
        }

        double r = rate(t, prices);
        if (std::abs(r) > rate_bound + kBoundSlack) {
            throw std::invalid_argument("market model: rate bound violated at sampled point");
        }
        excess(t, prices, excess_buf);
        for (std::size_t i = 0; i < d; ++i) {
            if (std::abs(excess_buf[i]) > excess_bound + kBoundSlack) {
                throw std::invalid_argument("market model: excess bound violated at sampled point");
            }
        }
        Eigen::MatrixXd sigma = vol_matrix(*this, t, prices);
        if (sigma.cwiseAbs().maxCoeff() > vol_bound + kBoundSlack) {
            throw std::invalid_argument("market model: vol bound violated at sampled point");
        }
        for (std::size_t i = 0; i < d; ++i) x[i] = stream.normal(draw++);
        double nx = x.norm();
        if (nx == 0.0) continue;
        double image = (sigma.transpose() * x).norm();
        if (image + kBoundSlack < ellip_lo * nx || image > ellip_hi * nx + kBoundSlack) {
            throw std::invalid_argument("market model: ellipticity violated at sampled point");
        }
    }
}

Eigen::VectorXd MarketModel::risk_premium_at(double t, std::span<const double> prices) const {
    Eigen::MatrixXd sigma = vol_matrix(*this, t, prices);
    Eigen::VectorXd ex(d);
    std::vector<double> buf(d);
    excess(t, prices, buf);
    for (std::size_t i = 0; i < d; ++i) ex[i] = buf[i];

    Eigen::MatrixXd gram = sigma * sigma.transpose();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success ||
        ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, gram.diagonal().maxCoeff())) {
        throw DegeneracyError("risk premium: vol gram matrix is numerically singular");
    }
    return sigma.transpose() * ldlt.solve(ex);
}

DiscreteProcess simulate_prices(const MarketModel& model, const PathBundle& bundle) {
    if (bundle.dim() != model.n) {
        throw std::invalid_argument("simulate_prices: bundle dimension must match the model");
    }
    const TimeGrid& grid = bundle.grid();
    const std::size_t steps = grid.steps();
    const std::size_t d = model.d;
    const std::size_t n = model.n;
    DiscreteProcess prices(grid, d + 1, bundle.n_paths());

    detail::parallel_for(bundle.n_paths(), [&](std::size_t begin, std::size_t end) {
        std::vector<double> excess_buf(d);
        std::vector<double> vol_buf(d * n);
        for (std::size_t p = begin; p < end; ++p) {
            auto start = prices.node_values(p, 0);
            start[0] = 1.0;
            for (std::size_t i = 0; i < d; ++i) start[1 + i] = model.initial_prices[i];
            for (std::size_t k = 0; k < steps; ++k) {
                double t = grid.node(k);
                double dt = grid.dt(k);
                auto cur = prices.node_values(p, k);
                auto next = prices.node_values(p, k + 1);
                double r = model.rate(t, cur);
                model.excess(t, cur, excess_buf);
                model.vol(t, cur, vol_buf);
                auto dw = bundle.increment(p, k);
                next[0] = cur[0] * std::exp(r * dt);
                for (std::size_t i = 0; i < d; ++i) {
                    double vol_sq = 0.0;
                    double vol_dw = 0.0;
                    for (std::size_t j = 0; j < n; ++j) {
                        double v = vol_buf[i * n + j];
                        vol_sq += v * v;
                        vol_dw += v * dw[j];
                    }
                    double drift = r + excess_buf[i];
                    next[1 + i] = cur[1 + i] * std::exp((drift - 0.5 * vol_sq) * dt + vol_dw);
                }
            }
        }
    });
    return prices;
}

DiscreteProcess risk_premium(const MarketModel& model, const DiscreteProcess& prices) {
    if (prices.dim() != model.d + 1) {
        throw std::invalid_argument("risk_premium: price process dimension must be d + 1");
    }
    const TimeGrid& grid = prices.grid();
    DiscreteProcess theta(grid, model.n, prices.n_paths());

    if (model.constant_coefficients) {
        Eigen::VectorXd value =
            model.risk_premium_at(grid.node(0), prices.node_values(0, 0));
        detail::parallel_for(prices.n_paths(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                for (std::size_t k = 0; k < grid.nodes(); ++k) {
                    auto out = theta.node_values(p, k);
                    for (std::size_t j = 0; j < model.n; ++j) out[j] = value[j];
                }
            }
        });
        return theta;
    }

    detail::parallel_for(prices.n_paths(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            for (std::size_t k = 0; k < grid.nodes(); ++k) {
                Eigen::VectorXd value =
                    model.risk_premium_at(grid.node(k), prices.node_values(p, k));
                auto out = theta.node_values(p, k);
                for (std::size_t j = 0; j < model.n; ++j) out[j] = value[j];
            }
        }
    });
    return theta;
}

DeflatorPaths deflator(const MarketModel& model, const PathBundle& bundle,
                       std::size_t base_node) {
    return deflator(model, simulate_prices(model, bundle), bundle, base_node);
}

DeflatorPaths deflator(const MarketModel& model, const DiscreteProcess& prices,
                       const PathBundle& bundle, std::size_t base_node) {
    const TimeGrid& grid = bundle.grid();
    if (!(prices.grid() == grid)) {
        throw std::invalid_argument("deflator: time grid mismatch");
    }
    if (base_node >= grid.nodes()) {
        throw std::invalid_argument("deflator: base node outside the grid");
    }
    const std::size_t steps = grid.steps();
    const std::size_t n = model.n;
    DiscreteProcess values(grid, 1, bundle.n_paths(), 1.0);

    const bool hoist = model.constant_coefficients;
    double const_r = 0.0;
    Eigen::VectorXd const_theta;
    if (hoist) {
        const_r = model.rate(grid.node(0), prices.node_values(0, 0));
        const_theta = model.risk_premium_at(grid.node(0), prices.node_values(0, 0));
    }

    detail::parallel_for(bundle.n_paths(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            double log_acc = 0.0;
            for (std::size_t k = base_node; k < steps; ++k) {
                double t = grid.node(k);
                auto state = prices.node_values(p, k);
                double r = hoist ? const_r : model.rate(t, state);
                Eigen::VectorXd theta =
                    hoist ? const_theta : model.risk_premium_at(t, state);
                auto dw = bundle.increment(p, k);
                double theta_sq = theta.squaredNorm();
                double theta_dw = 0.0;
                for (std::size_t j = 0; j < n; ++j) theta_dw += theta[j] * dw[j];
                log_acc += (-r - 0.5 * theta_sq) * grid.dt(k) - theta_dw;
                values.at(p, k + 1) = std::exp(log_acc);
            }
        }
    });
    return DeflatorPaths{base_node, std::move(values)};
}

std::vector<double> emm_weights(const MarketModel& model, const PathBundle& bundle) {
    const TimeGrid& grid = bundle.grid();
    const std::size_t steps = grid.steps();
    const std::size_t n = model.n;
    DiscreteProcess prices = simulate_prices(model, bundle);
    std::vector<double> weights(bundle.n_paths());

    const bool hoist = model.constant_coefficients;
    Eigen::VectorXd const_theta;
    if (hoist) const_theta = model.risk_premium_at(grid.node(0), prices.node_values(0, 0));

    detail::parallel_for(bundle.n_paths(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            double log_acc = 0.0;
            for (std::size_t k = 0; k < steps; ++k) {
                double t = grid.node(k);
                auto state = prices.node_values(p, k);
                Eigen::VectorXd theta =
                    hoist ? const_theta : model.risk_premium_at(t, state);
                auto dw = bundle.increment(p, k);
                double theta_dw = 0.0;
                for (std::size_t j = 0; j < n; ++j) theta_dw += theta[j] * dw[j];
                log_acc += -0.5 * theta.squaredNorm() * grid.dt(k) - theta_dw;
            }
            weights[p] = std::exp(log_acc);
        }
    });
    return weights;
}

}  // namespace bsdelab
