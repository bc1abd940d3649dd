#include "chvb/hashing.hpp"

#include <algorithm>
#include <stdexcept>

namespace chvb {

namespace {

// Domain tags keep the ball, per-level and selection streams independent.
constexpr uint64_t kDomainSelection = 1;
constexpr uint64_t kDomainBall = 2;
constexpr uint64_t kDomainLevelBase = 16;

}  // namespace

int HashUniverse::level_of(uint64_t pos) const {
    auto it = std::upper_bound(lo.begin(), lo.end(), pos);
    return static_cast<int>(it - lo.begin()) - 1;
}

unsigned __int128 HashUniverse::width(int level) const {
    constexpr unsigned __int128 kUniverse = static_cast<unsigned __int128>(1) << 64;
    if (level == k) return kUniverse / static_cast<unsigned>(k);
    if (level + 1 == k) return kUniverse - lo[static_cast<size_t>(level)];
    return lo[static_cast<size_t>(level) + 1] - lo[static_cast<size_t>(level)];
}

bool HashUniverse::contains(int level, uint64_t pos) const {
    if (level < 0 || level > k) return false;
    if (level == k) return static_cast<unsigned __int128>(pos) < width(k);
    if (pos < lo[static_cast<size_t>(level)]) return false;
    return level + 1 == k || pos < lo[static_cast<size_t>(level) + 1];
}

uint64_t seed_of(const HashMode& mode) {
    return std::visit([](const auto& m) { return m.seed; }, mode);
}

MixedTabulationFn::MixedTabulationFn(uint64_t seed, int c, int d, uint64_t domain) : c_(c), d_(d) {
    if (c <= 0 || 64 % c != 0 || 64 / c > 8) {
        throw std::domain_error("mixed tabulation: c must divide 64 with characters of at most 8 bits");
    }
    char_bits_ = 64 / c;
    if (d <= 0 || d * char_bits_ > 64) {
        throw std::domain_error("mixed tabulation: derived characters must pack into 64 bits");
    }
    char_mask_ = (char_bits_ == 64) ? ~uint64_t{0} : (uint64_t{1} << char_bits_) - 1;

    uint64_t sigma = alphabet();
    Prf fill(seed, (domain << 8) | 0x7a);
    uint64_t ctr = 0;
    table1_.resize(static_cast<size_t>(c));
    for (auto& t : table1_) {
        t.resize(sigma);
        for (auto& e : t) e = fill(ctr++);
    }
    table2_.resize(static_cast<size_t>(c + d));
    for (auto& t : table2_) {
        t.resize(sigma);
        for (auto& e : t) e = fill(ctr++);
    }
}

uint64_t MixedTabulationFn::operator()(uint64_t key) const {
    uint64_t derived = 0;
    for (int i = 0; i < c_; ++i) {
        derived ^= table1_[static_cast<size_t>(i)][(key >> (i * char_bits_)) & char_mask_];
    }
    uint64_t out = 0;
    for (int i = 0; i < c_; ++i) {
        out ^= table2_[static_cast<size_t>(i)][(key >> (i * char_bits_)) & char_mask_];
    }
    for (int j = 0; j < d_; ++j) {
        out ^= table2_[static_cast<size_t>(c_ + j)][(derived >> (j * char_bits_)) & char_mask_];
    }
    return out;
}

Hasher::Hasher(const HashMode& mode, const HashUniverse& universe)
    : mode_(mode), universe_(universe), selection_(seed_of(mode), kDomainSelection) {
    if (const auto* fr = std::get_if<FullyRandom>(&mode_)) {
        ball_prf_ = Prf(fr->seed, kDomainBall);
        level_prf_.reserve(static_cast<size_t>(universe_.k) + 1);
        for (int lvl = 0; lvl <= universe_.k; ++lvl) {
            level_prf_.emplace_back(fr->seed, kDomainLevelBase + static_cast<uint64_t>(lvl));
        }
    } else {
        const auto& mt = std::get<MixedTabulation>(mode_);
        ball_tab_.emplace_back(mt.seed, mt.c, mt.d, kDomainBall);
        level_tab_.reserve(static_cast<size_t>(universe_.k) + 1);
        for (int lvl = 0; lvl <= universe_.k; ++lvl) {
            level_tab_.emplace_back(mt.seed, mt.c, mt.d, kDomainLevelBase + static_cast<uint64_t>(lvl));
        }
    }
}

uint64_t Hasher::raw_ball_hash(uint64_t ball_id) const {
    if (!ball_tab_.empty()) return ball_tab_[0](ball_id);
    return ball_prf_(ball_id);
}

uint64_t Hasher::raw_level_hash(uint64_t bin_id, int level) const {
    if (!level_tab_.empty()) return level_tab_[static_cast<size_t>(level)](bin_id);
    return level_prf_[static_cast<size_t>(level)](bin_id);
}

uint64_t Hasher::ball_position(uint64_t ball_id) const { return raw_ball_hash(ball_id); }

uint64_t Hasher::virtual_bin_position(uint64_t bin_id, int level) const {
    if (level < 0 || level > universe_.k) {
        throw std::domain_error("virtual bin level out of range");
    }
    uint64_t raw = raw_level_hash(bin_id, level);
    uint64_t lo = (level == universe_.k) ? 0 : universe_.lower(level);
    return detail::map_into(raw, lo, universe_.width(level));
}

uint64_t hash_ball(const HashMode& mode, uint64_t ball_id) {
    if (const auto* fr = std::get_if<FullyRandom>(&mode)) {
        return Prf(fr->seed, kDomainBall)(ball_id);
    }
    const auto& mt = std::get<MixedTabulation>(mode);
    return MixedTabulationFn(mt.seed, mt.c, mt.d, kDomainBall)(ball_id);
}

uint64_t hash_virtual_bin(const HashMode& mode, uint64_t bin_id, int level, const HashUniverse& universe) {
    if (level < 0 || level > universe.k) {
        throw std::domain_error("virtual bin level out of range");
    }
    uint64_t raw;
    if (const auto* fr = std::get_if<FullyRandom>(&mode)) {
        raw = Prf(fr->seed, kDomainLevelBase + static_cast<uint64_t>(level))(bin_id);
    } else {
        const auto& mt = std::get<MixedTabulation>(mode);
        raw = MixedTabulationFn(mt.seed, mt.c, mt.d, kDomainLevelBase + static_cast<uint64_t>(level))(bin_id);
    }
    uint64_t lo = (level == universe.k) ? 0 : universe.lower(level);
    return detail::map_into(raw, lo, universe.width(level));
}

}  // namespace chvb
