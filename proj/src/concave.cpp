#include "bsdelab/concave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bsdelab {

namespace {

constexpr double kInfinityThreshold = 1e12;
constexpr double kBoxSlack = 1e-12;

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return out;
}

double sd_over_paths(const DiscreteProcess& process, std::size_t component) {
    // Standard deviation pooled over paths and the nodes 0..K-1 where the
    // component is meaningful.
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < process.n_paths(); ++p) {
        for (std::size_t k = 0; k < process.grid().steps(); ++k) {
            double v = process.at(p, k, component);
            sum += v;
            sum_sq += v * v;
            ++count;
        }
    }
    double mean = sum / static_cast<double>(count);
    double var = sum_sq / static_cast<double>(count) - mean * mean;
    return std::sqrt(std::max(var, 0.0));
}

}  // namespace

YzGrid::YzGrid(std::vector<double> y_points, std::vector<std::vector<double>> z_points)
    : y_points_(std::move(y_points)), z_points_(std::move(z_points)) {
    auto check_axis = [](const std::vector<double>& axis) {
        if (axis.size() < 3) {
            throw std::invalid_argument("YzGrid: every axis needs at least three points");
        }
        if (!std::is_sorted(axis.begin(), axis.end()) ||
            std::adjacent_find(axis.begin(), axis.end()) != axis.end()) {
            throw std::invalid_argument("YzGrid: axis points must be strictly increasing");
        }
    };
    check_axis(y_points_);
    for (const auto& axis : z_points_) check_axis(axis);
}

YzGrid YzGrid::box(double y_radius, std::span<const double> z_radii,
                   std::size_t points_per_axis) {
    if (!(y_radius > 0.0)) {
        throw std::invalid_argument("YzGrid::box: y_radius must be positive");
    }
    std::vector<std::vector<double>> z_points;
    z_points.reserve(z_radii.size());
    for (double r : z_radii) {
        if (!(r > 0.0)) {
            throw std::invalid_argument("YzGrid::box: z radii must be positive");
        }
        z_points.push_back(linspace(-r, r, points_per_axis));
    }
    return YzGrid(linspace(-y_radius, y_radius, points_per_axis), std::move(z_points));
}

YzGrid YzGrid::from_pilot(const BsdeSolution& pilot, double width,
                          std::size_t points_per_axis) {
    constexpr double kMinRadius = 1e-6;
    double y_radius = std::max(width * sd_over_paths(pilot.y, 0), kMinRadius);
    std::vector<double> z_radii(pilot.z.dim());
    for (std::size_t j = 0; j < pilot.z.dim(); ++j) {
        z_radii[j] = std::max(width * sd_over_paths(pilot.z, j), kMinRadius);
    }
    return box(y_radius, z_radii, points_per_axis);
}

PolarValue polar(const FrozenDriver& f, double beta, const Eigen::VectorXd& gamma,
                 const YzGrid& grid) {
    if (!f) throw std::invalid_argument("polar: driver must be set");
    const std::size_t n = grid.z_dim();
    if (static_cast<std::size_t>(gamma.size()) != n) {
        throw std::invalid_argument("polar: gamma dimension does not match the grid");
    }

    std::vector<const std::vector<double>*> axes;
    axes.push_back(&grid.y_points());
    for (const auto& axis : grid.z_points()) axes.push_back(&axis);
    const std::size_t n_axes = axes.size();

    std::vector<double> z(n);
    auto evaluate = [&](const std::vector<std::size_t>& idx) {
        double y = (*axes[0])[idx[0]];
        double linear = beta * y;
        for (std::size_t j = 0; j < n; ++j) {
            z[j] = (*axes[j + 1])[idx[j + 1]];
            linear += gamma[static_cast<Eigen::Index>(j)] * z[j];
        }
        return f(y, std::span<const double>(z)) - linear;
    };

    auto on_boundary = [&](const std::vector<std::size_t>& point) {
        for (std::size_t a = 0; a < n_axes; ++a) {
            if (point[a] == 0 || point[a] + 1 == axes[a]->size()) return true;
        }
        return false;
    };

    std::vector<std::size_t> idx(n_axes, 0);
    std::vector<std::size_t> best_idx = idx;
    double best = -std::numeric_limits<double>::infinity();
    double best_interior = -std::numeric_limits<double>::infinity();
    while (true) {
        double v = evaluate(idx);
        if (v > best) {
            best = v;
            best_idx = idx;
        }
        if (!on_boundary(idx)) best_interior = std::max(best_interior, v);
        std::size_t axis = 0;
        while (axis < n_axes && ++idx[axis] == axes[axis]->size()) {
            idx[axis] = 0;
            ++axis;
        }
        if (axis == n_axes) break;
    }

    PolarValue result;
    result.value = best;
    result.boundary = on_boundary(best_idx);
    if (best > kInfinityThreshold) {
        result.infinite = true;
        return result;
    }
    if (!result.boundary) return result;

    // Divergence heuristic.  A boundary maximum matched by some interior
    // point is an attained supremum (flat directions: kinked drivers have
    // maximising rays that exit through the box); only a boundary value that
    // strictly dominates the interior and strictly exceeds an inward
    // neighbour along a boundary axis flags divergence.  Relative slack keeps
    // rounding-level ties finite.
    const double slack = 1e-9 * (1.0 + std::abs(best));
    if (best_interior >= best - slack) return result;
    for (std::size_t a = 0; a < n_axes; ++a) {
        bool at_low = best_idx[a] == 0;
        bool at_high = best_idx[a] + 1 == axes[a]->size();
        if (!at_low && !at_high) continue;
        std::vector<std::size_t> inner = best_idx;
        inner[a] += at_low ? 1 : 0;
        inner[a] -= at_high ? 1 : 0;
        if (best > evaluate(inner) + slack) {
            result.infinite = true;
            return result;
        }
    }
    return result;
}

ControlGrid ControlGrid::from_points(std::vector<ControlPoint> points, double box_bound) {
    if (!(box_bound >= 0.0)) {
        throw std::invalid_argument("ControlGrid: box bound must be non-negative");
    }
    for (const ControlPoint& point : points) {
        bool inside = std::abs(point.beta) <= box_bound + kBoxSlack;
        for (Eigen::Index j = 0; j < point.gamma.size(); ++j) {
            inside = inside && std::abs(point.gamma[j]) <= box_bound + kBoxSlack;
        }
        if (!inside) {
            throw std::invalid_argument("ControlGrid: control outside the declared box");
        }
    }
    ControlGrid grid;
    grid.points_ = std::move(points);
    grid.box_bound_ = box_bound;
    return grid;
}

ControlGrid ControlGrid::uniform_beta(double lo, double hi, std::size_t count,
                                      std::size_t z_dim) {
    if (count < 1 || hi < lo) {
        throw std::invalid_argument("ControlGrid::uniform_beta: bad range");
    }
    std::vector<ControlPoint> points(count);
    for (std::size_t i = 0; i < count; ++i) {
        points[i].beta = count == 1 ? lo
                                    : lo + (hi - lo) * static_cast<double>(i) /
                                               static_cast<double>(count - 1);
        points[i].gamma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(z_dim));
    }
    ControlGrid grid = from_points(std::move(points), std::max(std::abs(lo), std::abs(hi)));
    grid.resolution_ = count > 1 ? (hi - lo) / static_cast<double>(count - 1) : 0.0;
    return grid;
}

ControlGrid ControlGrid::with_intercepts(const FrozenDriver& f, const YzGrid& yz) const {
    ControlGrid out;
    out.box_bound_ = box_bound_;
    out.resolution_ = resolution_;
    for (const ControlPoint& point : points_) {
        PolarValue value = polar(f, point.beta, point.gamma, yz);
        if (value.infinite) {
            ++out.dropped_infinite_;
            continue;
        }
        ControlPoint attached = point;
        attached.phi = value.value;
        out.points_.push_back(std::move(attached));
    }
    return out;
}

PolarTable tabulate_polar(const FrozenDriver& f, const ControlGrid& grid, const YzGrid& yz) {
    PolarTable table;
    table.controls = grid.points();
    table.values.reserve(table.controls.size());
    for (const ControlPoint& point : table.controls) {
        table.values.push_back(polar(f, point.beta, point.gamma, yz));
    }
    return table;
}

double conjugate_reconstruct(const PolarTable& table, double y, std::span<const double> z) {
    if (table.controls.size() != table.values.size() || table.controls.empty()) {
        throw std::invalid_argument("conjugate_reconstruct: empty or inconsistent table");
    }
    double best = std::numeric_limits<double>::infinity();
    bool any_finite = false;
    for (std::size_t i = 0; i < table.controls.size(); ++i) {
        if (table.values[i].infinite) continue;
        const ControlPoint& point = table.controls[i];
        if (static_cast<std::size_t>(point.gamma.size()) != z.size()) {
            throw std::invalid_argument("conjugate_reconstruct: z dimension mismatch");
        }
        double v = table.values[i].value + point.beta * y;
        for (Eigen::Index j = 0; j < point.gamma.size(); ++j) {
            v += point.gamma[j] * z[static_cast<std::size_t>(j)];
        }
        best = std::min(best, v);
        any_finite = true;
    }
    if (!any_finite) {
        throw std::invalid_argument("conjugate_reconstruct: no finite polar values");
    }
    return best;
}

LinearDriverSpec linear_family_driver(const PolarValue& polar_value, double beta,
                                      const Eigen::VectorXd& gamma) {
    if (polar_value.infinite) {
        throw std::invalid_argument("linear_family_driver: polar value is infinite");
    }
    return linear_family_driver(polar_value.value, beta, gamma);
}

LinearDriverSpec linear_family_driver(double polar_value, double beta,
                                      const Eigen::VectorXd& gamma) {
    if (!std::isfinite(polar_value)) {
        throw std::invalid_argument("linear_family_driver: polar value is not finite");
    }
    return LinearDriverSpec::constants(polar_value, beta, gamma);
}

std::uint32_t EnvelopeResult::control_at(std::size_t path, std::size_t node) const {
    return control[path * (y.grid().steps() + 1) + node];
}

namespace {

EnvelopeResult extremum_envelope(const Payoff& terminal, const ControlGrid& grid,
                                 const MarketModel& model, const PathBundle& bundle,
                                 const RegressionBasis& basis, bool maximise) {
    if (grid.size() == 0) {
        throw std::invalid_argument("envelope: control grid is empty");
    }
    for (const ControlPoint& point : grid.points()) {
        if (!std::isfinite(point.phi)) {
            throw std::invalid_argument("envelope: every control needs a finite intercept");
        }
    }

    EnvelopeResult result{DiscreteProcess(bundle.grid(), 1, bundle.n_paths()), {}, {}};
    const std::size_t nodes = bundle.grid().steps() + 1;
    result.control.assign(bundle.n_paths() * nodes, 0);
    result.control_y0.reserve(grid.size());

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const ControlPoint& point = grid.points()[i];
        BsdeSolution sol = solve_linear(linear_family_driver(point.phi, point.beta, point.gamma),
                                        terminal, model, bundle, basis);
        result.control_y0.push_back(sol.y.at(0, 0));
        if (i == 0) {
            result.y = std::move(sol.y);
            continue;
        }
        for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
            for (std::size_t k = 0; k < nodes; ++k) {
                double candidate = sol.y.at(p, k);
                double& current = result.y.at(p, k);
                bool better = maximise ? candidate > current : candidate < current;
                if (better) {
                    current = candidate;
                    result.control[p * nodes + k] = static_cast<std::uint32_t>(i);
                }
            }
        }
    }
    return result;
}

}  // namespace

EnvelopeResult essinf_envelope(const Payoff& terminal, const ControlGrid& grid,
                               const MarketModel& model, const PathBundle& bundle,
                               const RegressionBasis& basis) {
    return extremum_envelope(terminal, grid, model, bundle, basis, false);
}

EnvelopeResult esssup_envelope(const Payoff& terminal, const ControlGrid& grid,
                               const MarketModel& model, const PathBundle& bundle,
                               const RegressionBasis& basis) {
    return extremum_envelope(terminal, grid, model, bundle, basis, true);
}

}  // namespace bsdelab
