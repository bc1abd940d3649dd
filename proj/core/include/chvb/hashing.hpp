#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "chvb/rng.hpp"

namespace chvb {

// Partition of the 64-bit key universe into k consecutive level ranges,
// plus one overflow range past the end of the universe. Level i covers
// [lo[i], lo[i+1]) with lo[0] = 0 and an implicit end of 2^64. The
// overflow range (level k) is addressed by offsets in [0, 2^64 / k).
struct HashUniverse {
    int k = 1;
    std::vector<uint64_t> lo;  // size k, strictly ascending, lo[0] == 0

    int level_of(uint64_t pos) const;

    uint64_t lower(int level) const { return lo[static_cast<size_t>(level)]; }

    // Width of a range as a 128-bit value; width(k) is the overflow width.
    unsigned __int128 width(int level) const;

    bool contains(int level, uint64_t pos) const;
};

struct FullyRandom {
    uint64_t seed = 0;
};

struct MixedTabulation {
    uint64_t seed = 0;
    int c = 8;  // characters per key
    int d = 4;  // derived characters
};

using HashMode = std::variant<FullyRandom, MixedTabulation>;

uint64_t seed_of(const HashMode& mode);

// Keyed pseudorandom function with a 128-bit internal state. Stateless
// after construction and therefore safe to evaluate concurrently.
class Prf {
public:
    Prf() = default;
    Prf(uint64_t seed, uint64_t domain)
        : s0_(detail::stream64(seed, 2 * domain)), s1_(detail::stream64(seed, 2 * domain + 1)) {}

    uint64_t operator()(uint64_t key) const {
        uint64_t h = detail::mix64(key ^ s0_);
        return detail::mix64(h + s1_);
    }

private:
    uint64_t s0_ = 0;
    uint64_t s1_ = 0;
};

// Two-level tabulation hash h(x) = h2(x, h1(x)) over w-bit characters,
// where h1 derives d extra characters from the c key characters and h2
// tabulates all c+d characters to a 64-bit value.
class MixedTabulationFn {
public:
    MixedTabulationFn(uint64_t seed, int c, int d, uint64_t domain = 0);

    uint64_t operator()(uint64_t key) const;

    int c() const { return c_; }
    int d() const { return d_; }
    int char_bits() const { return char_bits_; }
    uint64_t alphabet() const { return uint64_t{1} << char_bits_; }

    // Raw table entries, exposed so an external evaluator can recompute
    // the two-level composition.
    uint64_t table1_entry(int table, uint64_t ch) const { return table1_[static_cast<size_t>(table)][ch]; }
    uint64_t table2_entry(int table, uint64_t ch) const { return table2_[static_cast<size_t>(table)][ch]; }

private:
    int c_;
    int d_;
    int char_bits_;
    uint64_t char_mask_;
    std::vector<std::vector<uint64_t>> table1_;  // c tables, entries pack d characters
    std::vector<std::vector<uint64_t>> table2_;  // c + d tables of 64-bit values
};

// Hash-function family for one system instance: one function for balls,
// one per virtual-bin level (including the overflow level k), and a
// dedicated stream for capacity selection. Immutable after construction.
class Hasher {
public:
    Hasher(const HashMode& mode, const HashUniverse& universe);

    // Position of a ball in [0, 2^64); doubles as the ball's priority.
    uint64_t ball_position(uint64_t ball_id) const;

    // Position of a bin's virtual bin at `level`. For level < k the value
    // lies inside the level's range; for level == k it is an offset into
    // the overflow range. level outside [0, k] throws.
    uint64_t virtual_bin_position(uint64_t bin_id, int level) const;

    // Value used to rank bins for capacity selection.
    uint64_t selection_value(uint64_t bin_id) const { return selection_(bin_id); }

    const HashUniverse& universe() const { return universe_; }
    const HashMode& mode() const { return mode_; }

private:
    HashMode mode_;
    HashUniverse universe_;
    Prf ball_prf_;
    std::vector<Prf> level_prf_;                 // fully random mode, size k+1
    std::vector<MixedTabulationFn> level_tab_;   // mixed tabulation mode, size k+1
    std::vector<MixedTabulationFn> ball_tab_;    // mixed tabulation mode, size 1
    Prf selection_;

    uint64_t raw_ball_hash(uint64_t ball_id) const;
    uint64_t raw_level_hash(uint64_t bin_id, int level) const;
};

// Convenience single-shot forms. For MixedTabulation these build the
// tables on every call; use a Hasher for anything hot.
uint64_t hash_ball(const HashMode& mode, uint64_t ball_id);
uint64_t hash_virtual_bin(const HashMode& mode, uint64_t bin_id, int level, const HashUniverse& universe);

}  // namespace chvb
