#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "bsdelab/market.hpp"
#include "bsdelab/regression.hpp"

namespace bsdelab {

// Closed sets of admissible portfolio fractions c (one weight per risky
// asset).  The investable set in risk-premium space is sigma^* C.
struct FullSpace {};

struct BoxSet {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

struct FinitePointSet {
    std::vector<Eigen::VectorXd> points;
};

struct BallSet {
    Eigen::VectorXd center;
    double radius = 0.0;
};

using ConstraintSet = std::variant<FullSpace, BoxSet, FinitePointSet, BallSet>;

// Shape and non-emptiness checks against the asset count d; throws
// std::invalid_argument.
void validate_constraint(const ConstraintSet& constraint, std::size_t d);

struct Projection {
    double distance = 0.0;     // min_c |theta - sigma^* c|
    Eigen::VectorXd rho;       // the minimising point sigma^* c in R^n
    Eigen::VectorXd fraction;  // the achieving c in R^d
    bool converged = true;     // false when projected gradient hit its budget
};

// Distance from theta to sigma^* C.  FullSpace solves the normal equations;
// boxes and balls run projected gradient with step 1/L (L from 20 power
// iterations on sigma sigma^*), stopping after 500 iterations or when the
// projected-gradient norm falls below 1e-10; finite sets enumerate, lowest
// index winning ties.
Projection constraint_distance(const Eigen::VectorXd& theta, const Eigen::MatrixXd& sigma,
                               const ConstraintSet& constraint);

// Driver of the log-utility value equation along the simulated paths:
//   f(t) = r_t + |theta_t|^2 / 2 - dist(theta_t, sigma_t^* C)^2 / 2,
// stored on left endpoints (terminal node zero).  If all_converged is given
// it is cleared when any projection ran out of iterations.
DiscreteProcess log_utility_driver(const MarketModel& model, const ConstraintSet& constraint,
                                   const PathBundle& bundle, bool* all_converged = nullptr);

struct UtilityReport {
    double value;            // V(x) = log x + E[int f dt]
    double std_error;        // of the time-integral Monte Carlo mean
    DiscreteProcess driver;  // f per (path, node), left endpoints
    DiscreteProcess rho;     // optimal fraction in risk-premium space, per node
    bool projections_converged = true;
};

UtilityReport log_utility_value(double x, const MarketModel& model,
                                const ConstraintSet& constraint, const PathBundle& bundle);

// Same value through the regression backward solver (the driver ignores
// (y, z), so this is a pure cross-check of the direct route).
double log_utility_value_solver(double x, const MarketModel& model,
                                const ConstraintSet& constraint, const PathBundle& bundle,
                                const RegressionBasis& basis);

// Wealth of the self-financing strategy holding fraction rho (in risk-premium
// space, left endpoints):  X = x * exponential of int (r + rho.theta) dt
// + int rho . dW.  Strictly positive path by construction.
DiscreteProcess wealth_from_fraction(double x, const DiscreteProcess& rho,
                                     const MarketModel& model, const PathBundle& bundle);

}  // namespace bsdelab
