#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "chvb/capacity.hpp"
#include "chvb/hashing.hpp"
#include "chvb/levels.hpp"

namespace chvb {

struct FixedCapacity {
    int64_t capacity = 1;
};

struct DynamicCapacity {
    double c = 1.25;  // balancing parameter, > 1
};

using CapacityPolicy = std::variant<FixedCapacity, DynamicCapacity>;

struct Config {
    HashMode hash;
    SchemeKind scheme = SchemeKind::kSingle;
    int k = 1;
    CapacityPolicy capacity = FixedCapacity{1};
};

// Point of a virtual bin on the linear order. Overflow bins sort after
// every position in the normal range; ties between positions are broken
// by owner id.
struct VbinKey {
    bool overflow = false;
    uint64_t pos = 0;
    uint64_t owner = 0;

    auto operator<=>(const VbinKey&) const = default;
};

// Priority of a ball: smaller sorts first and wins slots.
struct BallKey {
    uint64_t pos = 0;
    uint64_t id = 0;

    auto operator<=>(const BallKey&) const = default;
};

struct Move {
    uint64_t ball = 0;
    std::optional<uint64_t> from;  // empty: ball was new
    std::optional<uint64_t> to;    // empty: ball was removed
};

struct Visit {
    uint64_t bin = 0;
    int level = 0;
};

// Audit record of one update: net ball moves, the exact sequence of
// virtual bins inspected, and any capacity changes applied around the
// structural change.
struct UpdateReport {
    std::vector<Move> moved;
    std::vector<Visit> visits;
    std::vector<CapacityChange> capacity_changes;

    uint64_t bins_visited() const { return visits.size(); }
    uint64_t balls_moved() const { return moved.size(); }
    std::map<int, uint64_t> per_level_visits() const;
    std::vector<int> levels_touched() const;
};

struct SearchResult {
    std::optional<uint64_t> bin;
    uint64_t bins_visited = 0;
};

// Consistent-hashing structure with bounded loads and virtual bins on a
// single linear order. Every super bin owns one virtual bin per level
// plus an overflow virtual bin; balls occupy the first non-full super
// bin on a forward walk from their hash position, inserting in priority
// order. The placement, including all pass counts, depends only on the
// current ball and bin sets (history independence), which rebuild()
// realizes directly and the incremental updates must reproduce.
//
// Instances are single-writer: mutating calls need exclusive access,
// const calls may run concurrently with each other.
class System {
public:
    System(const Config& config, std::span<const uint64_t> bin_ids);

    // Canonical construction for the given sets; the ground truth the
    // incremental updates are checked against.
    static System rebuild(const Config& config, std::span<const uint64_t> ball_ids,
                          std::span<const uint64_t> bin_ids);

    UpdateReport insert_ball(uint64_t ball_id);
    UpdateReport delete_ball(uint64_t ball_id);
    UpdateReport insert_bin(uint64_t bin_id);
    UpdateReport delete_bin(uint64_t bin_id);

    SearchResult search_ball(uint64_t ball_id) const;

    std::vector<std::string> check_invariants() const;

    uint64_t ball_count() const { return n_; }
    uint64_t bin_count() const { return m_; }
    int levels() const { return scheme_.levels(); }
    const Config& config() const { return config_; }
    const LevelScheme& scheme() const { return scheme_; }
    const Hasher& hasher() const { return hasher_; }

    bool has_ball(uint64_t ball_id) const { return balls_.contains(ball_id); }
    bool has_bin(uint64_t bin_id) const { return bins_.contains(bin_id); }
    std::optional<uint64_t> bin_of_ball(uint64_t ball_id) const;
    int64_t capacity_of(uint64_t bin_id) const;
    int64_t load_of(uint64_t bin_id) const;
    int64_t total_capacity() const;
    uint64_t total_pass_count() const;

    std::vector<uint64_t> ball_ids_sorted() const;
    std::vector<uint64_t> bin_ids_sorted() const;

    // Fraction of bins whose load is below their capacity.
    double nonfull_fraction() const;

    // Canonical JSON snapshot: bins sorted by id, balls by priority.
    std::string dump_json() const;

    // Differences against another instance (placement, pass counts,
    // capacities). Empty means the states are identical.
    std::vector<std::string> diff(const System& other) const;
    bool same_state(const System& other) const { return diff(other).empty(); }

    // Test hooks. Deliberately break internal bookkeeping.
    void debug_bump_pass_count(uint64_t bin_id, int level, int64_t delta);
    void debug_bump_ball_counter(int64_t delta);

private:
    struct SuperBin {
        int64_t capacity = 1;
        std::set<BallKey> balls;            // ascending priority; last = lowest priority
        std::vector<uint64_t> vbin_pos;     // size k+1, index = level
        std::vector<int64_t> pass_count;    // size k+1
        std::set<int> positive_levels;      // levels with pass_count > 0

        bool full() const { return static_cast<int64_t>(balls.size()) >= capacity; }
    };

    struct BallRec {
        uint64_t pos = 0;
        int level = 0;            // level the ball hashes to
        uint64_t bin = 0;         // owning super bin
        int placement_level = 0;  // level of the virtual bin it entered through
    };

    using Index = std::map<VbinKey, int>;  // key -> level

    Config config_;
    LevelScheme scheme_;
    Hasher hasher_;
    Index index_;
    std::map<uint64_t, SuperBin> bins_;
    std::unordered_map<uint64_t, BallRec> balls_;
    std::vector<std::pair<uint64_t, uint64_t>> selection_order_;  // (selection value, bin id), sorted
    uint64_t n_ = 0;
    uint64_t m_ = 0;

    System(const Config& config, LevelScheme scheme);

    VbinKey vbin_key(uint64_t bin_id, int level) const;
    uint64_t selection_rank(uint64_t bin_id) const;
    void bump_pass(SuperBin& bin, int level, int64_t delta);

    // Forward walk carrying `ball` from `start`, displacing lower
    // priority balls as needed. from_bin is the bin the ball leaves, if
    // any, for the move log.
    void carry_insert(BallKey ball, Index::const_iterator start, std::optional<uint64_t> from_bin,
                      UpdateReport& report);

    // Refill one freed slot in `bin_id`. hole_level < 0 means the slot
    // was freed by a capacity increase rather than a departing ball.
    void fill_hole(uint64_t bin_id, int hole_level, UpdateReport& report);
    std::pair<uint64_t, int> pull_into(uint64_t bin_id, int j, UpdateReport& report);

    void apply_plan_phase(const CapacityPlan& plan, bool increases, std::optional<uint64_t> skip_bin,
                          UpdateReport& report);
    void set_bin_capacity(uint64_t bin_id, int64_t new_capacity, UpdateReport& report);
    int64_t planned_capacity(uint64_t bin_id, const CapacityPlan& plan) const;

    void add_bin_skeleton(uint64_t bin_id, int64_t capacity);
    void remove_bin_skeleton(uint64_t bin_id);
    static void collapse_moves(UpdateReport& report);

    friend struct SystemInspector;
};

}  // namespace chvb
