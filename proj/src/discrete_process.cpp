#include "bsdelab/discrete_process.hpp"

#include <stdexcept>
#include <utility>

namespace bsdelab {

DiscreteProcess::DiscreteProcess(TimeGrid grid, std::size_t dim, std::size_t n_paths, double fill)
    : grid_(std::move(grid)), dim_(dim), n_paths_(n_paths) {
    if (dim_ == 0) throw std::invalid_argument("discrete process: dimension must be positive");
    if (n_paths_ == 0) throw std::invalid_argument("discrete process: need at least one path");
    values_.assign(n_paths_ * grid_.nodes() * dim_, fill);
}

}  // namespace bsdelab
