#pragma once

#include <cstdint>
#include <string>

#include "chvb/hashing.hpp"

namespace chvb {

enum class SchemeKind { kSingle, kUniform, kGeometric };

std::string to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(const std::string& name);

// Exact level probability as a fraction.
struct Fraction {
    uint64_t num = 0;
    uint64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Assignment of balls to k levels. The level of a ball is induced by
// which range of the universe its hash lands in, so range widths are
// proportional to the level probabilities.
class LevelScheme {
public:
    static LevelScheme single();
    static LevelScheme uniform(int k);
    // p_i = 2^-(i+1) for i < k-1 and p_{k-1} = 2^-(k-1). Requires k <= 63.
    static LevelScheme geometric(int k);
    static LevelScheme make(SchemeKind kind, int k);

    SchemeKind kind() const { return kind_; }
    int levels() const { return universe_.k; }
    const HashUniverse& universe() const { return universe_; }

    Fraction probability(int level) const;
    int level_of(uint64_t ball_position) const { return universe_.level_of(ball_position); }

private:
    LevelScheme(SchemeKind kind, HashUniverse universe) : kind_(kind), universe_(std::move(universe)) {}

    SchemeKind kind_;
    HashUniverse universe_;
};

struct FParams {
    double epsilon = 0.0;   // in (0, 1)
    int64_t capacity = 1;   // C >= 1
};

// Target non-full-bin fraction. Natural logarithms throughout; inside the
// middle case the log factor is floored at ln 2 so the value cannot
// degenerate to zero right at the case boundary.
double f_formula(FParams params);
double f_formula(double epsilon, int64_t capacity);

// Level count a scheme should use for a given epsilon. uniform_c0 scales
// the uniform scheme's k = ceil(c0 / eps^2).
int recommended_k(SchemeKind kind, double epsilon, double uniform_c0 = 8.0);

}  // namespace chvb
