#pragma once

#include <cstdint>

namespace bsdelab {

// Philox4x32-10 counter-based generator.  A draw is a pure function of
// (key, counter), so path p / draw j can be generated in any order, on any
// number of threads, with bitwise identical output.
struct Philox4x32 {
    // One block: four 32-bit words from a 128-bit counter and 64-bit key.
    static void block(std::uint64_t key, std::uint64_t counter_hi, std::uint64_t counter_lo,
                      std::uint32_t out[4]) noexcept;
};

// Stream of standard normal deviates for one path.  Deviate j of path p under
// seed s depends only on (s, p, j): key = seed, counter = (path, block index).
// Pairs come out of one Philox block via Box-Muller.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t path) noexcept
        : seed_(seed), path_(path) {}

    double normal(std::uint64_t draw_index) const noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t path_;
};

}  // namespace bsdelab
