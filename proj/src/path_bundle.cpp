#include "bsdelab/path_bundle.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "bsdelab/parallel.hpp"
#include "bsdelab/rng.hpp"

namespace bsdelab {

PathBundle::PathBundle(TimeGrid grid, std::size_t dim, std::size_t n_paths, std::uint64_t seed,
                       std::vector<double> increments)
    : grid_(std::move(grid)),
      dim_(dim),
      n_paths_(n_paths),
      seed_(seed),
      increments_(std::move(increments)) {}

PathBundle PathBundle::sample(const TimeGrid& grid, std::size_t dim, std::size_t n_paths,
                              std::uint64_t seed) {
    if (dim == 0) throw std::invalid_argument("path bundle: Brownian dimension must be positive");
    if (n_paths == 0) throw std::invalid_argument("path bundle: need at least one path");

    const std::size_t steps = grid.steps();
    std::vector<double> increments(n_paths * steps * dim);
    std::vector<double> sqrt_dt(steps);
    for (std::size_t k = 0; k < steps; ++k) sqrt_dt[k] = std::sqrt(grid.dt(k));

    double* data = increments.data();
    detail::parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            GaussianStream stream(seed, p);
            double* row = data + p * steps * dim;
            std::uint64_t draw = 0;
            for (std::size_t k = 0; k < steps; ++k) {
                for (std::size_t j = 0; j < dim; ++j) {
                    row[k * dim + j] = sqrt_dt[k] * stream.normal(draw++);
                }
            }
        }
    });
    return PathBundle(grid, dim, n_paths, seed, std::move(increments));
}

PathBundle PathBundle::from_increments(const TimeGrid& grid, std::size_t dim, std::size_t n_paths,
                                       std::vector<double> increments) {
    if (increments.size() != n_paths * grid.steps() * dim) {
        throw std::invalid_argument("path bundle: increment array size mismatch");
    }
    return PathBundle(grid, dim, n_paths, 0, std::move(increments));
}

PathBundle sample_brownian(const TimeGrid& grid, std::size_t dim, std::size_t n_paths,
                           std::uint64_t seed) {
    return PathBundle::sample(grid, dim, n_paths, seed);
}

}  // namespace bsdelab
