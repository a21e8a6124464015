#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bsdelab/bsde.hpp"

namespace bsdelab {

// Driver with time and state frozen: a function of (y, z) alone.
using FrozenDriver = std::function<double(double, std::span<const double>)>;

// Cartesian evaluation box for the (y, z) argument of a driver.  Every axis
// needs at least three points so boundary maxima have an interior neighbour
// to compare against.
class YzGrid {
public:
    YzGrid(std::vector<double> y_points, std::vector<std::vector<double>> z_points);

    // Symmetric box [-y_radius, y_radius] x prod_j [-z_radii[j], z_radii[j]].
    static YzGrid box(double y_radius, std::span<const double> z_radii,
                      std::size_t points_per_axis = 41);

    // Box sized to `width` standard deviations of a pilot solution, one
    // radius per axis, never collapsing to zero width.
    static YzGrid from_pilot(const BsdeSolution& pilot, double width = 5.0,
                             std::size_t points_per_axis = 41);

    const std::vector<double>& y_points() const { return y_points_; }
    const std::vector<std::vector<double>>& z_points() const { return z_points_; }
    std::size_t z_dim() const { return z_points_.size(); }

private:
    std::vector<double> y_points_;
    std::vector<std::vector<double>> z_points_;
};

// sup_{(y,z) in grid} ( f(y,z) - beta y - gamma . z ).  `infinite` fires when
// the maximum sits on the box boundary and strictly increases outward (the
// divergence heuristic; a relative slack keeps flat ties finite), or when the
// value exceeds 1e12.  The boundary value itself is kept for diagnostics.
struct PolarValue {
    double value = 0.0;
    bool infinite = false;
    bool boundary = false;
};

PolarValue polar(const FrozenDriver& f, double beta, const Eigen::VectorXd& gamma,
                 const YzGrid& grid);

// One admissible control: the slope pair of a linear driver plus the
// intercept attached to it (the polar value of the driver being dualised).
struct ControlPoint {
    double beta = 0.0;
    Eigen::VectorXd gamma;  // Brownian dimension; may be empty for y-only work
    double phi = 0.0;
};

// Finite family of controls inside the box [-C, C]^{n+1}.
class ControlGrid {
public:
    static ControlGrid from_points(std::vector<ControlPoint> points, double box_bound);

    // count values of beta equally spaced on [lo, hi], gamma = 0.
    static ControlGrid uniform_beta(double lo, double hi, std::size_t count,
                                    std::size_t z_dim);

    // Evaluates the polar of f at every control and attaches it as the
    // intercept; controls with an infinite polar are dropped (they can never
    // achieve the infimum) and counted in dropped_infinite().
    ControlGrid with_intercepts(const FrozenDriver& f, const YzGrid& yz) const;

    const std::vector<ControlPoint>& points() const { return points_; }
    double box_bound() const { return box_bound_; }
    double resolution() const { return resolution_; }
    std::size_t dropped_infinite() const { return dropped_infinite_; }
    std::size_t size() const { return points_.size(); }

private:
    ControlGrid() = default;
    std::vector<ControlPoint> points_;
    double box_bound_ = 0.0;
    double resolution_ = 0.0;  // spacing for uniform grids, 0 when unknown
    std::size_t dropped_infinite_ = 0;
};

// Polar values of one driver over a control family, at a fixed (t, state).
struct PolarTable {
    std::vector<ControlPoint> controls;
    std::vector<PolarValue> values;
};

PolarTable tabulate_polar(const FrozenDriver& f, const ControlGrid& grid, const YzGrid& yz);

// min over finite-polar entries of F + beta y + gamma . z.  Restricting the
// infimum to a finite family approximates a concave driver from above; the
// Fenchel inequality keeps the result >= f wherever the polar is exact.
double conjugate_reconstruct(const PolarTable& table, double y, std::span<const double> z);

// The linear member f^{beta,gamma} = F + beta y + gamma . z of the dual
// family; requires a finite polar value.
LinearDriverSpec linear_family_driver(const PolarValue& polar_value, double beta,
                                      const Eigen::VectorXd& gamma);
LinearDriverSpec linear_family_driver(double polar_value, double beta,
                                      const Eigen::VectorXd& gamma);

// Path-wise node-wise extremum over the linear solutions Y^{beta,gamma} of a
// control family, all solved on the same bundle.  control_at says which
// control achieves the extremum (ties go to the lowest index); control_y0 are
// the per-control time-zero values.
struct EnvelopeResult {
    DiscreteProcess y;
    std::vector<std::uint32_t> control;  // [path * (steps + 1) + node]
    std::vector<double> control_y0;

    std::uint32_t control_at(std::size_t path, std::size_t node) const;
};

EnvelopeResult essinf_envelope(const Payoff& terminal, const ControlGrid& grid,
                               const MarketModel& model, const PathBundle& bundle,
                               const RegressionBasis& basis);
EnvelopeResult esssup_envelope(const Payoff& terminal, const ControlGrid& grid,
                               const MarketModel& model, const PathBundle& bundle,
                               const RegressionBasis& basis);

}  // namespace bsdelab
