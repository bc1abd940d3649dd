#include "chvb/levels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace chvb {

std::string to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::kSingle: return "single";
        case SchemeKind::kUniform: return "uniform";
        case SchemeKind::kGeometric: return "geometric";
    }
    return "?";
}

SchemeKind scheme_kind_from_string(const std::string& name) {
    if (name == "single") return SchemeKind::kSingle;
    if (name == "uniform") return SchemeKind::kUniform;
    if (name == "geometric") return SchemeKind::kGeometric;
    throw std::invalid_argument("unknown scheme: " + name);
}

LevelScheme LevelScheme::single() {
    HashUniverse u;
    u.k = 1;
    u.lo = {0};
    return LevelScheme(SchemeKind::kSingle, std::move(u));
}

LevelScheme LevelScheme::uniform(int k) {
    if (k < 1) throw std::domain_error("uniform scheme needs k >= 1");
    HashUniverse u;
    u.k = k;
    u.lo.resize(static_cast<size_t>(k));
    constexpr unsigned __int128 kUniverse = static_cast<unsigned __int128>(1) << 64;
    for (int i = 0; i < k; ++i) {
        u.lo[static_cast<size_t>(i)] =
            static_cast<uint64_t>(kUniverse * static_cast<unsigned>(i) / static_cast<unsigned>(k));
    }
    return LevelScheme(SchemeKind::kUniform, std::move(u));
}

LevelScheme LevelScheme::geometric(int k) {
    if (k < 1 || k > 63) throw std::domain_error("geometric scheme needs 1 <= k <= 63");
    HashUniverse u;
    u.k = k;
    u.lo.resize(static_cast<size_t>(k));
    u.lo[0] = 0;
    for (int i = 1; i < k; ++i) {
        // Width of level i-1 is 2^(63-(i-1)); the final level takes the rest.
        u.lo[static_cast<size_t>(i)] = u.lo[static_cast<size_t>(i) - 1] + (uint64_t{1} << (64 - i));
    }
    return LevelScheme(SchemeKind::kGeometric, std::move(u));
}

LevelScheme LevelScheme::make(SchemeKind kind, int k) {
    switch (kind) {
        case SchemeKind::kSingle:
            if (k != 1) throw std::domain_error("single scheme has exactly one level");
            return single();
        case SchemeKind::kUniform: return uniform(k);
        case SchemeKind::kGeometric: return geometric(k);
    }
    throw std::domain_error("bad scheme kind");
}

Fraction LevelScheme::probability(int level) const {
    int k = universe_.k;
    if (level < 0 || level >= k) throw std::domain_error("level out of range");
    switch (kind_) {
        case SchemeKind::kSingle: return {1, 1};
        case SchemeKind::kUniform: return {1, static_cast<uint64_t>(k)};
        case SchemeKind::kGeometric:
            if (k == 1) return {1, 1};
            if (level < k - 1) return {1, uint64_t{1} << (level + 1)};
            return {1, uint64_t{1} << (k - 1)};
    }
    return {0, 1};
}

double f_formula(FParams params) {
    double eps = params.epsilon;
    double cap = static_cast<double>(params.capacity);
    if (!(eps > 0.0) || !(eps < 1.0)) throw std::domain_error("f_formula: epsilon must be in (0, 1)");
    if (params.capacity < 1) throw std::domain_error("f_formula: capacity must be >= 1");

    double f;
    if (cap >= 1.0 / (2.0 * eps * eps)) {
        f = 1.0;
    } else if (cap <= std::log(1.0 / eps)) {
        f = eps * cap;
    } else {
        double t = eps * std::sqrt(cap);
        double logterm = std::max(std::log(1.0 / t), std::numbers::ln2_v<double>);
        f = t * std::sqrt(logterm);
    }
    return std::min(f, 1.0);
}

double f_formula(double epsilon, int64_t capacity) { return f_formula(FParams{epsilon, capacity}); }

int recommended_k(SchemeKind kind, double epsilon, double uniform_c0) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw std::domain_error("recommended_k: epsilon must be in (0, 1)");
    switch (kind) {
        case SchemeKind::kSingle: return 1;
        case SchemeKind::kUniform: return static_cast<int>(std::ceil(uniform_c0 / (epsilon * epsilon)));
        case SchemeKind::kGeometric: {
            // Smallest t with 2^t >= 1/eps, evaluated without logarithms.
            int t = 0;
            while (t < 63 && std::ldexp(epsilon, t) < 1.0) ++t;
            return t + 2;
        }
    }
    throw std::domain_error("bad scheme kind");
}

}  // namespace chvb
