#include "chvb/capacity.hpp"

#include <cmath>
#include <stdexcept>

namespace chvb {

namespace {

// ceil(c * n) and floor(c * n / m) with a small nudge so exact integer
// products are not pushed off by floating-point noise.
int64_t ceil_cn(double c, uint64_t n) {
    long double v = static_cast<long double>(c) * static_cast<long double>(n);
    auto r = static_cast<int64_t>(std::ceill(v - 1e-9L));
    return r < 0 ? 0 : r;
}

int64_t floor_cn_over_m(double c, uint64_t n, uint64_t m) {
    long double v = static_cast<long double>(c) * static_cast<long double>(n) / static_cast<long double>(m);
    auto r = static_cast<int64_t>(std::floorl(v + 1e-9L));
    return r < 0 ? 0 : r;
}

}  // namespace

int64_t CapacityPlan::max_capacity() const {
    int64_t top = base + (q > 0 ? 1 : 0);
    return top < 1 ? 1 : top;
}

int64_t CapacityPlan::capacity_for_rank(uint64_t rank) const {
    int64_t cap = base + (rank < q ? 1 : 0);
    return cap < 1 ? 1 : cap;
}

int64_t CapacityPlan::total_capacity() const {
    int64_t small = base < 1 ? 1 : base;
    int64_t big = base + 1 < 1 ? 1 : base + 1;
    return small * static_cast<int64_t>(m - q) + big * static_cast<int64_t>(q);
}

CapacityPlan plan_for(double c, uint64_t n, uint64_t m) {
    if (m == 0) throw std::domain_error("plan_for: need at least one bin");
    if (!(c > 1.0)) throw std::domain_error("plan_for: balancing parameter must exceed 1");
    CapacityPlan plan;
    plan.c = c;
    plan.n = n;
    plan.m = m;
    int64_t target = ceil_cn(c, n);
    plan.base = floor_cn_over_m(c, n, m);
    int64_t q = target - plan.base * static_cast<int64_t>(m);
    if (q < 0) q = 0;
    if (q > static_cast<int64_t>(m)) q = static_cast<int64_t>(m);
    plan.q = static_cast<uint64_t>(q);
    return plan;
}

}  // namespace chvb
