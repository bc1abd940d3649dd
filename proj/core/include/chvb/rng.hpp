#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace chvb {
namespace detail {

// Finalizer of the splitmix64 generator. Full avalanche on 64-bit inputs,
// including low-entropy counters.
inline constexpr uint64_t mix64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

inline constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// i-th value of the splitmix64 stream started at `seed`.
inline constexpr uint64_t stream64(uint64_t seed, uint64_t i) {
    return mix64(seed + (i + 1) * kGolden);
}

// Maps a uniform 64-bit hash into [lo, lo + width) by multiply-shift.
// width is allowed to be 2^64 (identity on the offset).
inline uint64_t map_into(uint64_t h, uint64_t lo, unsigned __int128 width) {
    return lo + static_cast<uint64_t>((static_cast<unsigned __int128>(h) * width) >> 64);
}

}  // namespace detail

// Deterministic RNG for simulations. All bounded draws go through Lemire
// reduction so results do not depend on the standard library's
// distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream = 0)
        : eng_(detail::stream64(seed, stream * 2 + 1)) {}

    uint64_t next() { return eng_(); }

    // Uniform in [0, n). n must be positive.
    uint64_t below(uint64_t n) {
        unsigned __int128 p = static_cast<unsigned __int128>(next()) * n;
        return static_cast<uint64_t>(p >> 64);
    }

    // Uniform in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    template <typename T>
    const T& pick(std::span<const T> xs) {
        return xs[below(xs.size())];
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace chvb
