#include "bsdelab/time_grid.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace bsdelab {

TimeGrid::TimeGrid(double horizon, std::vector<double> nodes)
    : horizon_(horizon), nodes_(std::move(nodes)) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("time grid: horizon must be positive and finite");
    }
    if (nodes_.size() < 2) {
        throw std::invalid_argument("time grid: need at least one step");
    }
    if (nodes_.front() != 0.0) {
        throw std::invalid_argument("time grid: first node must be 0");
    }
    if (nodes_.back() != horizon_) {
        throw std::invalid_argument("time grid: last node must equal the horizon");
    }
    for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
        if (!(nodes_[k] < nodes_[k + 1])) {
            throw std::invalid_argument("time grid: nodes must be strictly increasing");
        }
    }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
    if (steps == 0) {
        throw std::invalid_argument("time grid: need at least one step");
    }
    std::vector<double> nodes(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        nodes[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
    }
    nodes[steps] = horizon;
    return TimeGrid(horizon, std::move(nodes));
}

TimeGrid make_time_grid(double horizon, std::size_t steps) {
    return TimeGrid::uniform(horizon, steps);
}

}  // namespace bsdelab
