#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bsdelab/time_grid.hpp"

namespace bsdelab {

// Node values of an adapted process: value (p, k) may depend on increments of
// path p up to step k-1 only.  Adaptedness is a contract on the producers,
// not enforced per entry; the operations in this library preserve it.
// Layout [path][node][component], nodes 0..K.
class DiscreteProcess {
public:
    DiscreteProcess(TimeGrid grid, std::size_t dim, std::size_t n_paths, double fill = 0.0);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t n_paths() const noexcept { return n_paths_; }

    double& at(std::size_t p, std::size_t k, std::size_t j = 0) {
        return values_[(p * grid_.nodes() + k) * dim_ + j];
    }
    double at(std::size_t p, std::size_t k, std::size_t j = 0) const {
        return values_[(p * grid_.nodes() + k) * dim_ + j];
    }
    std::span<double> node_values(std::size_t p, std::size_t k) {
        return {values_.data() + (p * grid_.nodes() + k) * dim_, dim_};
    }
    std::span<const double> node_values(std::size_t p, std::size_t k) const {
        return {values_.data() + (p * grid_.nodes() + k) * dim_, dim_};
    }

    std::span<const double> raw() const noexcept { return values_; }
    std::span<double> raw() noexcept { return values_; }

private:
    TimeGrid grid_;
    std::size_t dim_;
    std::size_t n_paths_;
    std::vector<double> values_;
};

}  // namespace bsdelab
