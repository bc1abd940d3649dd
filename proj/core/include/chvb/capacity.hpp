#pragma once

#include <cstdint>
#include <vector>

namespace chvb {

// Capacity assignment for m bins holding n balls under balancing
// parameter c > 1. Bins are ranked by a dedicated selection hash; the q
// lowest-ranked bins ("big") get one more slot than the rest, so the set
// of big bins moves by about one element when q moves by one.
//
// base = floor(c*n/m), q = ceil(c*n) - m*base, capacity = base + 1 for
// the q big bins and base for the rest, never below 1. The total is
// ceil(c*n) whenever c*n >= m, and m otherwise. When c*n/m is integral
// q is 0 and every bin has exactly c*n/m slots.
struct CapacityPlan {
    double c = 0.0;
    uint64_t n = 0;
    uint64_t m = 0;
    int64_t base = 0;  // small-bin capacity before the floor rule
    uint64_t q = 0;    // number of big bins

    // Highest capacity any bin is assigned: max(1, ceil(c*n/m)).
    int64_t max_capacity() const;

    // Capacity of the bin ranked `rank` (0-based) by selection hash.
    int64_t capacity_for_rank(uint64_t rank) const;

    int64_t total_capacity() const;

    bool operator==(const CapacityPlan&) const = default;
};

// Deterministic plan for (c, n, m). Throws if c <= 1 or m == 0.
CapacityPlan plan_for(double c, uint64_t n, uint64_t m);

enum class UpdateKind { kBallInsert, kBallDelete, kBinInsert, kBinDelete };

struct CapacityChange {
    uint64_t bin = 0;
    int64_t old_capacity = 0;
    int64_t new_capacity = 0;
};

}  // namespace chvb
