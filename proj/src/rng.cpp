#include "bsdelab/rng.hpp"

#include <cmath>
#include <numbers>

namespace bsdelab {
namespace {

constexpr std::uint32_t kWeylKey0 = 0x9E3779B9u;   // golden ratio
constexpr std::uint32_t kWeylKey1 = 0xBB67AE85u;   // sqrt(3) - 1
constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                      std::uint32_t& lo) noexcept {
    std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

inline void philox_round(std::uint32_t ctr[4], const std::uint32_t key[2]) noexcept {
    std::uint32_t hi0, lo0, hi1, lo1;
    mul_hi_lo(kMult0, ctr[0], hi0, lo0);
    mul_hi_lo(kMult1, ctr[2], hi1, lo1);
    std::uint32_t out[4] = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    ctr[0] = out[0];
    ctr[1] = out[1];
    ctr[2] = out[2];
    ctr[3] = out[3];
}

// Map 64 random bits to (0, 1]: the +1 keeps log() finite.
inline double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

// Map 64 random bits to [0, 1).
inline double to_half_open_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

void Philox4x32::block(std::uint64_t key, std::uint64_t counter_hi, std::uint64_t counter_lo,
                       std::uint32_t out[4]) noexcept {
    std::uint32_t ctr[4] = {
        static_cast<std::uint32_t>(counter_lo),
        static_cast<std::uint32_t>(counter_lo >> 32),
        static_cast<std::uint32_t>(counter_hi),
        static_cast<std::uint32_t>(counter_hi >> 32),
    };
    std::uint32_t k[2] = {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
    for (int round = 0; round < 10; ++round) {
        philox_round(ctr, k);
        k[0] += kWeylKey0;
        k[1] += kWeylKey1;
    }
    out[0] = ctr[0];
    out[1] = ctr[1];
    out[2] = ctr[2];
    out[3] = ctr[3];
}

double GaussianStream::normal(std::uint64_t draw_index) const noexcept {
    std::uint32_t words[4];
    Philox4x32::block(seed_, path_, draw_index >> 1, words);
    std::uint64_t bits0 = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    std::uint64_t bits1 = (static_cast<std::uint64_t>(words[2]) << 32) | words[3];
    double radius = std::sqrt(-2.0 * std::log(to_open_unit(bits0)));
    double angle = 2.0 * std::numbers::pi * to_half_open_unit(bits1);
    return (draw_index & 1) ? radius * std::sin(angle) : radius * std::cos(angle);
}

}  // namespace bsdelab
