#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bsdelab/discrete_process.hpp"
#include "bsdelab/market.hpp"
#include "bsdelab/path_bundle.hpp"
#include "bsdelab/regression.hpp"

namespace bsdelab {

// Generator f(t, prices, y, z) of the backward equation
//   -dY = f(t, P_t, Y_t, Z_t) dt - Z_t . dW_t,  Y_T = terminal(P_T).
// z spans the Brownian dimension.  Solutions are scalar (value dimension 1).
using Driver = std::function<double(double, std::span<const double>, double,
                                    std::span<const double>)>;
using Payoff = std::function<double(std::span<const double>)>;

// Standard data: a Lipschitz driver with square-integrable terminal value.
// lipschitz is C in |f(t,x,y1,z1) - f(t,x,y2,z2)| <= C (|y1-y2| + |z1-z2|);
// driver_zero_bound dominates |f(t,x,0,0)|.  Both are declared and spot
// checked by sampling, not proven.
struct BsdeProblem {
    Driver driver;
    Payoff terminal;
    double lipschitz = 0.0;
    double driver_zero_bound = 0.0;
};

// Affine driver phi + beta y + gamma . z with process coefficients.
// slope_y_bound dominates |beta|, slope_z_bound the Euclidean norm of gamma;
// the pair gives the Lipschitz constant max(slope_y_bound, slope_z_bound).
struct LinearDriverSpec {
    ScalarField intercept;     // phi
    ScalarField slope_y;       // beta
    VectorFieldFill slope_z;   // gamma
    double slope_y_bound = 0.0;
    double slope_z_bound = 0.0;

    static LinearDriverSpec constants(double phi, double beta, const Eigen::VectorXd& gamma);
};

struct SolveDiagnostics {
    std::string method;
    int iterations = 0;                      // fixed-point updates performed
    std::vector<double> contraction_ratios;  // successive weighted-norm ratios
    double max_condition = 0.0;              // worst regression conditioning
};

// Node values of the pair (Y, Z).  Y is scalar with exact terminal values;
// Z carries the Brownian dimension and is meaningful on nodes 0..K-1 (left
// endpoints), with zeros stored at the terminal node.
struct BsdeSolution {
    DiscreteProcess y;
    DiscreteProcess z;
    SolveDiagnostics diagnostics;
};

// Affine equations via the adjoint representation: with Gamma the stochastic
// exponential of int beta dt + int gamma . dW,
//   Y_t = Gamma_t^{-1} E[ xi Gamma_T + int_t^T Gamma_s phi_s ds | F_t ],
// estimated by regression on the node state; node 0 is a plain mean.  Z comes
// from the martingale increment projection E[Y_{k+1} dW_k | F_k] / dt_k.
BsdeSolution solve_linear(const LinearDriverSpec& driver, const Payoff& terminal,
                          const MarketModel& model, const PathBundle& bundle,
                          const RegressionBasis& basis);

// Explicit backward Euler for Lipschitz drivers:
//   Y_k = E_k[Y_{k+1}] + f(t_k, P_k, E_k[Y_{k+1}], Z_k) dt_k.
// Requires dt * lipschitz < 1 on every step.
BsdeSolution solve_backward_euler(const BsdeProblem& problem, const MarketModel& model,
                                  const PathBundle& bundle, const RegressionBasis& basis);

struct PicardConfig {
    // Weight of the exponential norm  sum_k exp(beta t_k) E|.|^2 dt_k; the
    // iteration contracts when beta_weight > 2 (2 + T) C^2.
    double beta_weight = 0.0;
    int max_iterations = 50;
    double tolerance = 1e-10;  // on the squared weighted norm of the update
};

// Fixed-point iteration: each step solves the driver-frozen equation (a
// zero-Lipschitz problem) on the same bundle, so contraction ratios are free
// of Monte Carlo noise.  Iterate 0 freezes the driver at (y, z) = (0, 0);
// diagnostics.iterations counts the updates after that.
BsdeSolution solve_picard(const BsdeProblem& problem, const MarketModel& model,
                          const PathBundle& bundle, const RegressionBasis& basis,
                          const PicardConfig& config);

struct ResidualStats {
    double rms = 0.0;
    double max_abs = 0.0;
    std::vector<double> per_node_rms;  // size K
};

// One-step consistency of a candidate solution:
//   R_k = Y_{k+1} - Y_k + f(t_k, P_k, Y_k, Z_k) dt_k - Z_k . dW_k.
ResidualStats residual_check(const BsdeProblem& problem, const BsdeSolution& solution,
                             const DiscreteProcess& prices, const PathBundle& bundle);

// Solution of the consumption-augmented equation with driver f + c for a
// non-negative consumption-rate process c; dominates the base solution.
BsdeSolution supersolution_from_consumption(const BsdeProblem& problem,
                                            const DiscreteProcess& consumption,
                                            const MarketModel& model, const PathBundle& bundle,
                                            const RegressionBasis& basis);

struct AprioriReport {
    double y_norm_sq = 0.0;  // weighted squared norm of delta Y
    double y_bound = 0.0;
    double z_norm_sq = 0.0;
    double z_bound = 0.0;
    bool y_satisfied = false;
    bool z_satisfied = false;
};

// Stability estimate for two solved problems: with C the Lipschitz constant
// of problem_a's driver and beta_weight > C (2 + C),
//   |dY|_b^2 <= T ( e^{bT} E|dY_T|^2 + |d2f|_b^2 / (b - 2C - C^2) ),
//   |dZ|_b^2 <= (2 + 2 C^2 T) ( same bracket ),
// where d2f = f_a - f_b evaluated along problem_b's solution.  Norms are the
// discrete left-endpoint versions of  int e^{bt} E|.|^2 dt.
AprioriReport apriori_gap(const BsdeSolution& solution_a, const BsdeSolution& solution_b,
                          const BsdeProblem& problem_a, const BsdeProblem& problem_b,
                          const DiscreteProcess& prices, double beta_weight);

}  // namespace bsdelab
