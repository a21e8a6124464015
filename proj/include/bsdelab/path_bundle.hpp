#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bsdelab/time_grid.hpp"

namespace bsdelab {

// Brownian increments dW for n_paths independent paths on a shared grid.
// Increment (p, k) is the n-dimensional step over [t_k, t_{k+1}), each
// coordinate N(0, dt_k).  Immutable after construction; all consumers of one
// bundle see the same randomness, which is what makes pathwise comparisons
// between solvers exact.
class PathBundle {
public:
    // Counter-based sampling: identical (grid, dim, n_paths, seed) gives a
    // bitwise identical bundle regardless of thread count.
    static PathBundle sample(const TimeGrid& grid, std::size_t dim, std::size_t n_paths,
                             std::uint64_t seed);

    // Wraps externally supplied increments (layout [path][step][coord]).
    static PathBundle from_increments(const TimeGrid& grid, std::size_t dim,
                                      std::size_t n_paths, std::vector<double> increments);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t n_paths() const noexcept { return n_paths_; }
    std::uint64_t seed() const noexcept { return seed_; }

    // Increment vector of path p over step k.
    std::span<const double> increment(std::size_t p, std::size_t k) const {
        return {increments_.data() + (p * grid_.steps() + k) * dim_, dim_};
    }

    std::span<const double> raw() const noexcept { return increments_; }

private:
    PathBundle(TimeGrid grid, std::size_t dim, std::size_t n_paths, std::uint64_t seed,
               std::vector<double> increments);

    TimeGrid grid_;
    std::size_t dim_;
    std::size_t n_paths_;
    std::uint64_t seed_;
    std::vector<double> increments_;
};

PathBundle sample_brownian(const TimeGrid& grid, std::size_t dim, std::size_t n_paths,
                           std::uint64_t seed);

}  // namespace bsdelab
