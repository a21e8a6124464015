#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bsdelab/discrete_process.hpp"
#include "bsdelab/path_bundle.hpp"

namespace bsdelab {

// Coefficient fields are deterministic functions of (t, prices), where
// prices is the full price vector (bond first, then d risky assets).
using ScalarField = std::function<double(double, std::span<const double>)>;
using VectorFieldFill = std::function<void(double, std::span<const double>, std::span<double>)>;

// Ito market with d risky assets driven by an n-dimensional Brownian motion,
// d <= n.  The drift datum is the EXCESS appreciation over the short rate:
// risky asset i evolves with total drift rate(t,P) + excess_i(t,P), and the
// risk premium solves  vol * theta = excess.
struct MarketModel {
    std::size_t d = 1;  // risky assets
    std::size_t n = 1;  // Brownian dimension

    ScalarField rate;
    VectorFieldFill excess;    // length d
    VectorFieldFill vol;       // d x n, row-major
    Eigen::VectorXd initial_prices;  // d risky spot prices; the bond starts at 1

    // Declared bounds checked by validate(); solvers rely on them for
    // Lipschitz constants.
    double rate_bound = 0.0;
    double excess_bound = 0.0;
    double vol_bound = 0.0;

    // Uniform ellipticity: ellip_lo * |x| <= |vol^T x| <= ellip_hi * |x|.
    double ellip_lo = 0.0;
    double ellip_hi = 0.0;

    // True when every coefficient is the same at all (t, prices); lets
    // downstream code evaluate projections and premia once instead of per node.
    bool constant_coefficients = false;

    // Single risky asset, scalar Brownian motion, constant coefficients.
    static MarketModel black_scholes(double rate, double excess, double sigma, double spot);

    // General constant-coefficient model; sigma is d x n.
    static MarketModel constants(double rate, const Eigen::VectorXd& excess,
                                 const Eigen::MatrixXd& sigma, const Eigen::VectorXd& spot);

    // Samples (t, prices) points and checks declared bounds and ellipticity.
    // Throws std::invalid_argument naming the violated bound.
    void validate(double horizon, std::uint64_t seed = 0, std::size_t samples = 1000) const;

    // Minimal-norm solution of vol * theta = excess at one evaluation point:
    // theta = vol^T (vol vol^T)^{-1} excess.  Throws DegeneracyError when
    // vol vol^T is numerically singular.
    Eigen::VectorXd risk_premium_at(double t, std::span<const double> prices) const;
};

// Price paths under the model: component 0 is the bond exp(int r), components
// 1..d the risky assets as stochastic exponentials of their drift and vol rows.
DiscreteProcess simulate_prices(const MarketModel& model, const PathBundle& bundle);

// Risk premium along given price paths, one n-vector per (path, node).
DiscreteProcess risk_premium(const MarketModel& model, const DiscreteProcess& prices);

// Deflator started at node s with unit mass: the stochastic exponential of
// drift -r and volatility -theta from t_s on.  Nodes before s hold 1.
struct DeflatorPaths {
    std::size_t base_node = 0;
    DiscreteProcess values;
};

DeflatorPaths deflator(const MarketModel& model, const PathBundle& bundle, std::size_t base_node);
DeflatorPaths deflator(const MarketModel& model, const DiscreteProcess& prices,
                       const PathBundle& bundle, std::size_t base_node);

// Per-path equivalent-martingale weights dQ/dP = exp(int r) * deflator_T; the
// bond-discounted risky assets are Q-martingales.
std::vector<double> emm_weights(const MarketModel& model, const PathBundle& bundle);

}  // namespace bsdelab
