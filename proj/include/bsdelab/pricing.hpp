#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsdelab/bsde.hpp"
#include "bsdelab/market.hpp"

namespace bsdelab {

// Non-negative European claim on the terminal price vector (bond first, then
// the risky assets).  Non-negativity and square integrability are sampled on
// the pricing bundle, not proven.
struct ClaimSpec {
    Payoff payoff;
    std::string label;

    static ClaimSpec call(double strike, std::size_t asset = 1);
    static ClaimSpec put(double strike, std::size_t asset = 1);
    static ClaimSpec digital(double strike, std::size_t asset = 1);
    static ClaimSpec bond();
    static ClaimSpec asset(std::size_t index);
};

struct DualDiagnostics {
    std::vector<double> beta_grid;
    std::vector<double> prices;       // E[xi Gamma^beta_T] per grid point
    std::vector<double> std_errors;   // matching standard errors
    double argmax_beta = 0.0;
};

struct PriceReport {
    double price = 0.0;
    double std_error = 0.0;
    std::string method;
    std::optional<DiscreteProcess> wealth;  // hedging wealth X_t (scalar)
    std::optional<DiscreteProcess> hedge;   // asset amounts pi_t (d-vector)
    std::optional<DualDiagnostics> dual;
};

// Complete-market price: mean of xi deflated from time 0, with the wealth
// process from the linear equation (phi = 0, beta = -r, gamma = -theta) and,
// when d = n, the hedge pi = (sigma^*)^{-1} Z.
PriceReport fair_price(const ClaimSpec& claim, const MarketModel& model,
                       const PathBundle& bundle, const RegressionBasis& basis);

// Equivalent-martingale-measure cross-check: mean of weight . discount . xi.
// Agrees with fair_price path-wise by the deflator factorisation.
PriceReport emm_price(const ClaimSpec& claim, const MarketModel& model,
                      const PathBundle& bundle);

// Price in the market where borrowing accrues interest at borrow_rate >= r:
//   driver  b(y, z) = -r y - theta . z + (borrow - r) (y - (sigma^{-1} 1) . z)^-,
// solved with the explicit backward scheme.  Requires d = n.  The reported
// standard error covers the final averaging step at the root node.
PriceReport borrowing_price(const ClaimSpec& claim, const MarketModel& model,
                            const ScalarField& borrow_rate, const PathBundle& bundle,
                            const RegressionBasis& basis);

// Dual family of fictitious markets: for each constant beta in [-R, -r],
//   price(beta) = E[ xi Gamma^beta_T ],
//   Gamma^beta  = exponential of  int beta ds - int (theta + (beta+r) sigma^{-1} 1) . dW,
// maximised over the grid.  beta = -r reproduces the fair-price estimator
// exactly.
PriceReport borrowing_price_dual(const ClaimSpec& claim, const MarketModel& model,
                                 const ScalarField& borrow_rate,
                                 std::span<const double> beta_grid,
                                 const PathBundle& bundle);

// count values of beta uniformly spaced on [-borrow_rate, -rate], endpoints
// exact.
std::vector<double> uniform_beta_grid(double rate, double borrow_rate,
                                      std::size_t count = 21);

struct ReplayReport {
    double rmse = 0.0;          // of terminal wealth against the claim
    DiscreteProcess wealth;     // forward-simulated from price with the hedge
};

// Self-financing replay: starting from report.price, roll the wealth equation
// forward with the extracted hedge (left-endpoint amounts) and measure the
// terminal replication error against the claim.
ReplayReport hedge_replay(const PriceReport& report, const ClaimSpec& claim,
                          const MarketModel& model, const PathBundle& bundle);

}  // namespace bsdelab
