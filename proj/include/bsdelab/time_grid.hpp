#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bsdelab {

// Partition 0 = t_0 < t_1 < ... < t_K = T of the trading horizon.  All path
// objects reference one of these; operations mixing different grids throw.
class TimeGrid {
public:
    TimeGrid(double horizon, std::vector<double> nodes);

    // K equal steps of length T/K.
    static TimeGrid uniform(double horizon, std::size_t steps);

    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return nodes_.size() - 1; }
    std::size_t nodes() const noexcept { return nodes_.size(); }
    double node(std::size_t k) const { return nodes_[k]; }
    double dt(std::size_t k) const { return nodes_[k + 1] - nodes_[k]; }
    std::span<const double> node_times() const noexcept { return nodes_; }

    bool operator==(const TimeGrid& other) const noexcept {
        return nodes_ == other.nodes_;
    }

private:
    double horizon_;
    std::vector<double> nodes_;
};

TimeGrid make_time_grid(double horizon, std::size_t steps);

}  // namespace bsdelab
