#include "chvb/system.hpp"

#include <algorithm>
#include <stdexcept>

namespace chvb {

std::map<int, uint64_t> UpdateReport::per_level_visits() const {
    std::map<int, uint64_t> out;
    for (const auto& v : visits) ++out[v.level];
    return out;
}

std::vector<int> UpdateReport::levels_touched() const {
    std::vector<int> out;
    for (const auto& [level, count] : per_level_visits()) out.push_back(level);
    return out;
}

namespace {

LevelScheme scheme_from_config(const Config& config) { return LevelScheme::make(config.scheme, config.k); }

}  // namespace

System::System(const Config& config, LevelScheme scheme)
    : config_(config), scheme_(std::move(scheme)), hasher_(config.hash, scheme_.universe()) {}

System::System(const Config& config, std::span<const uint64_t> bin_ids)
    : System(config, scheme_from_config(config)) {
    if (bin_ids.empty()) throw std::invalid_argument("system needs at least one bin");
    for (uint64_t id : bin_ids) {
        if (bins_.contains(id)) throw std::invalid_argument("duplicate bin id");
        auto pos = std::lower_bound(selection_order_.begin(), selection_order_.end(),
                                    std::pair{hasher_.selection_value(id), id});
        selection_order_.insert(pos, {hasher_.selection_value(id), id});
        add_bin_skeleton(id, 1);
    }
    // Now that ranks are final, assign the capacities for n = 0.
    const auto* fixed = std::get_if<FixedCapacity>(&config_.capacity);
    CapacityPlan plan;
    if (!fixed) plan = plan_for(std::get<DynamicCapacity>(config_.capacity).c, 0, m_);
    for (auto& [id, bin] : bins_) {
        bin.capacity = fixed ? fixed->capacity : planned_capacity(id, plan);
    }
}

System System::rebuild(const Config& config, std::span<const uint64_t> ball_ids,
                       std::span<const uint64_t> bin_ids) {
    System sys(config, bin_ids);
    const auto* fixed = std::get_if<FixedCapacity>(&config.capacity);
    if (fixed) {
        if (static_cast<int64_t>(ball_ids.size()) > fixed->capacity * static_cast<int64_t>(sys.m_)) {
            throw std::domain_error("rebuild: more balls than total capacity");
        }
    } else {
        CapacityPlan plan = plan_for(std::get<DynamicCapacity>(config.capacity).c, ball_ids.size(), sys.m_);
        for (auto& [id, bin] : sys.bins_) bin.capacity = sys.planned_capacity(id, plan);
    }

    std::vector<BallKey> order;
    order.reserve(ball_ids.size());
    for (uint64_t id : ball_ids) order.push_back({sys.hasher_.ball_position(id), id});
    std::sort(order.begin(), order.end());
    for (size_t i = 0; i + 1 < order.size(); ++i) {
        if (order[i].id == order[i + 1].id) throw std::invalid_argument("duplicate ball id");
    }

    UpdateReport scratch;
    for (const BallKey& ball : order) {
        auto it = sys.index_.lower_bound(VbinKey{false, ball.pos, 0});
        sys.carry_insert(ball, it, std::nullopt, scratch);
        ++sys.n_;
    }
    return sys;
}

VbinKey System::vbin_key(uint64_t bin_id, int level) const {
    const SuperBin& bin = bins_.at(bin_id);
    return VbinKey{level == scheme_.levels(), bin.vbin_pos[static_cast<size_t>(level)], bin_id};
}

uint64_t System::selection_rank(uint64_t bin_id) const {
    auto it = std::lower_bound(selection_order_.begin(), selection_order_.end(),
                               std::pair{hasher_.selection_value(bin_id), bin_id});
    return static_cast<uint64_t>(it - selection_order_.begin());
}

int64_t System::planned_capacity(uint64_t bin_id, const CapacityPlan& plan) const {
    return plan.capacity_for_rank(selection_rank(bin_id));
}

void System::bump_pass(SuperBin& bin, int level, int64_t delta) {
    int64_t& count = bin.pass_count[static_cast<size_t>(level)];
    count += delta;
    if (count < 0) throw std::logic_error("pass count went negative");
    if (count > 0) {
        bin.positive_levels.insert(level);
    } else {
        bin.positive_levels.erase(level);
    }
}

void System::add_bin_skeleton(uint64_t bin_id, int64_t capacity) {
    int k = scheme_.levels();
    SuperBin bin;
    bin.capacity = capacity;
    bin.vbin_pos.resize(static_cast<size_t>(k) + 1);
    bin.pass_count.assign(static_cast<size_t>(k) + 1, 0);
    for (int level = 0; level <= k; ++level) {
        bin.vbin_pos[static_cast<size_t>(level)] = hasher_.virtual_bin_position(bin_id, level);
    }
    auto [it, inserted] = bins_.emplace(bin_id, std::move(bin));
    for (int level = 0; level <= k; ++level) {
        index_.emplace(VbinKey{level == k, it->second.vbin_pos[static_cast<size_t>(level)], bin_id}, level);
    }
    ++m_;
}

void System::remove_bin_skeleton(uint64_t bin_id) {
    int k = scheme_.levels();
    for (int level = 0; level <= k; ++level) {
        index_.erase(vbin_key(bin_id, level));
    }
    bins_.erase(bin_id);
    --m_;
}

void System::carry_insert(BallKey ball, Index::const_iterator start, std::optional<uint64_t> from_bin,
                          UpdateReport& report) {
    std::optional<uint64_t> origin = from_bin;
    auto it = start;
    while (true) {
        if (it == index_.end()) throw std::logic_error("insertion walked past the overflow range");
        const VbinKey& key = it->first;
        int level = it->second;
        SuperBin& bin = bins_.at(key.owner);
        report.visits.push_back({key.owner, level});

        if (!bin.full()) {
            bin.balls.insert(ball);
            balls_[ball.id] = BallRec{ball.pos, scheme_.level_of(ball.pos), key.owner, level};
            report.moved.push_back({ball.id, origin, key.owner});
            return;
        }
        BallKey lowest = *bin.balls.rbegin();
        if (ball < lowest) {
            // Swap in the carried ball, keep carrying the displaced one
            // from just past the virtual bin it was popped from.
            int pop_level = balls_.at(lowest.id).placement_level;
            bin.balls.erase(std::prev(bin.balls.end()));
            bin.balls.insert(ball);
            balls_[ball.id] = BallRec{ball.pos, scheme_.level_of(ball.pos), key.owner, level};
            report.moved.push_back({ball.id, origin, key.owner});
            bump_pass(bin, pop_level, 1);
            origin = key.owner;
            ball = lowest;
            it = index_.upper_bound(vbin_key(key.owner, pop_level));
        } else {
            bump_pass(bin, level, 1);
            ++it;
        }
    }
}

// Pulls the highest-priority ball that passed bin's level-j virtual bin
// back into the bin, decrementing the pass counts the ball no longer
// contributes to. Returns the location of the hole it leaves behind.
std::pair<uint64_t, int> System::pull_into(uint64_t bin_id, int j, UpdateReport& report) {
    int k = scheme_.levels();
    SuperBin& bin = bins_.at(bin_id);
    bool unbounded = (j == k);  // every ball hashes before the overflow range
    uint64_t threshold = unbounded ? 0 : bin.vbin_pos[static_cast<size_t>(j)];
    bump_pass(bin, j, -1);

    auto it = index_.upper_bound(vbin_key(bin_id, j));
    for (; it != index_.end(); ++it) {
        const VbinKey& key = it->first;
        int level = it->second;
        SuperBin& other = bins_.at(key.owner);
        report.visits.push_back({key.owner, level});
        for (const BallKey& cand : other.balls) {
            const BallRec& rec = balls_.at(cand.id);
            if (rec.placement_level != level) continue;
            if (!unbounded && cand.pos > threshold) break;  // nothing further passed us
            other.balls.erase(cand);
            bin.balls.insert(cand);
            balls_[cand.id] = BallRec{cand.pos, rec.level, bin_id, j};
            report.moved.push_back({cand.id, key.owner, bin_id});
            return {key.owner, level};
        }
        bump_pass(other, level, -1);
    }
    throw std::logic_error("positive pass count but no passed ball found");
}

void System::fill_hole(uint64_t bin_id, int hole_level, UpdateReport& report) {
    uint64_t cur_bin = bin_id;
    int cur_level = hole_level;
    while (true) {
        SuperBin& bin = bins_.at(cur_bin);
        if (bin.full()) return;
        if (bin.positive_levels.empty()) return;
        int j = *bin.positive_levels.begin();
        if (cur_level >= 0 && j < cur_level) {
            throw std::logic_error("positive pass count below the hole level");
        }
        auto [next_bin, next_level] = pull_into(cur_bin, j, report);
        cur_bin = next_bin;
        cur_level = next_level;
    }
}

void System::apply_plan_phase(const CapacityPlan& plan, bool increases, std::optional<uint64_t> skip_bin,
                              UpdateReport& report) {
    for (auto& [id, bin] : bins_) {
        if (skip_bin && id == *skip_bin) continue;
        int64_t target = planned_capacity(id, plan);
        if (increases ? target > bin.capacity : target < bin.capacity) {
            set_bin_capacity(id, target, report);
        }
    }
}

void System::set_bin_capacity(uint64_t bin_id, int64_t new_capacity, UpdateReport& report) {
    SuperBin& bin = bins_.at(bin_id);
    int64_t old_capacity = bin.capacity;
    if (old_capacity == new_capacity) return;
    report.capacity_changes.push_back({bin_id, old_capacity, new_capacity});
    bin.capacity = new_capacity;
    if (new_capacity > old_capacity) {
        for (int64_t i = old_capacity; i < new_capacity; ++i) fill_hole(bin_id, -1, report);
    } else {
        while (static_cast<int64_t>(bins_.at(bin_id).balls.size()) > new_capacity) {
            SuperBin& b = bins_.at(bin_id);
            BallKey lowest = *b.balls.rbegin();
            int pop_level = balls_.at(lowest.id).placement_level;
            b.balls.erase(std::prev(b.balls.end()));
            bump_pass(b, pop_level, 1);
            auto resume = index_.upper_bound(vbin_key(bin_id, pop_level));
            carry_insert(lowest, resume, bin_id, report);
        }
    }
}

void System::collapse_moves(UpdateReport& report) {
    std::vector<Move> net;
    std::map<uint64_t, size_t> slot;
    for (const Move& mv : report.moved) {
        auto it = slot.find(mv.ball);
        if (it == slot.end()) {
            slot.emplace(mv.ball, net.size());
            net.push_back(mv);
        } else {
            net[it->second].to = mv.to;
        }
    }
    std::erase_if(net, [](const Move& mv) { return mv.from && mv.to && *mv.from == *mv.to; });
    report.moved = std::move(net);
}

UpdateReport System::insert_ball(uint64_t ball_id) {
    if (balls_.contains(ball_id)) throw std::invalid_argument("ball already present");
    UpdateReport report;
    if (const auto* fixed = std::get_if<FixedCapacity>(&config_.capacity)) {
        if (static_cast<int64_t>(n_) + 1 > fixed->capacity * static_cast<int64_t>(m_)) {
            throw std::domain_error("insert_ball: system is at total capacity");
        }
    } else {
        CapacityPlan plan = plan_for(std::get<DynamicCapacity>(config_.capacity).c, n_ + 1, m_);
        apply_plan_phase(plan, /*increases=*/true, std::nullopt, report);
    }

    BallKey ball{hasher_.ball_position(ball_id), ball_id};
    carry_insert(ball, index_.lower_bound(VbinKey{false, ball.pos, 0}), std::nullopt, report);
    ++n_;

    if (const auto* dyn = std::get_if<DynamicCapacity>(&config_.capacity)) {
        apply_plan_phase(plan_for(dyn->c, n_, m_), /*increases=*/false, std::nullopt, report);
    }
    collapse_moves(report);
    return report;
}

UpdateReport System::delete_ball(uint64_t ball_id) {
    auto ball_it = balls_.find(ball_id);
    if (ball_it == balls_.end()) throw std::invalid_argument("ball not present");
    UpdateReport report;
    const BallRec rec = ball_it->second;

    // The ball passed every virtual bin from its hash location up to its
    // placement; take back those contributions.
    VbinKey placed_at = vbin_key(rec.bin, rec.placement_level);
    for (auto it = index_.lower_bound(VbinKey{false, rec.pos, 0});; ++it) {
        if (it == index_.end()) throw std::logic_error("ball placement not reachable from its hash location");
        if (it->first == placed_at) break;
        report.visits.push_back({it->first.owner, it->second});
        bump_pass(bins_.at(it->first.owner), it->second, -1);
    }
    report.visits.push_back({rec.bin, rec.placement_level});

    bins_.at(rec.bin).balls.erase(BallKey{rec.pos, ball_id});
    balls_.erase(ball_it);
    report.moved.push_back({ball_id, rec.bin, std::nullopt});
    --n_;

    fill_hole(rec.bin, rec.placement_level, report);

    if (const auto* dyn = std::get_if<DynamicCapacity>(&config_.capacity)) {
        apply_plan_phase(plan_for(dyn->c, n_, m_), /*increases=*/false, std::nullopt, report);
    }
    collapse_moves(report);
    return report;
}

UpdateReport System::insert_bin(uint64_t bin_id) {
    if (bins_.contains(bin_id)) throw std::invalid_argument("bin already present");
    UpdateReport report;
    int k = scheme_.levels();

    auto sel = std::pair{hasher_.selection_value(bin_id), bin_id};
    selection_order_.insert(std::lower_bound(selection_order_.begin(), selection_order_.end(), sel), sel);

    const auto* dyn = std::get_if<DynamicCapacity>(&config_.capacity);
    CapacityPlan plan;
    if (dyn) {
        plan = plan_for(dyn->c, n_, m_ + 1);
        apply_plan_phase(plan, /*increases=*/true, bin_id, report);
    }

    int64_t capacity = dyn ? planned_capacity(bin_id, plan) : std::get<FixedCapacity>(config_.capacity).capacity;
    add_bin_skeleton(bin_id, capacity);
    SuperBin& bin = bins_.at(bin_id);

    // Reconstruct each new virtual bin's pass count from the live state:
    // balls placed past it that hashed at or before it are exactly the
    // balls that passed it.
    for (int level = 0; level <= k; ++level) {
        bool unbounded = (level == k);
        uint64_t threshold = bin.vbin_pos[static_cast<size_t>(level)];
        int64_t count = 0;
        bool stopped = false;
        for (auto it = index_.upper_bound(vbin_key(bin_id, level)); it != index_.end() && !stopped; ++it) {
            const VbinKey& key = it->first;
            if (key.owner == bin_id) continue;  // sibling virtual bins carry no information yet
            const SuperBin& other = bins_.at(key.owner);
            report.visits.push_back({key.owner, it->second});
            bool any_here = false;
            for (const BallKey& cand : other.balls) {
                const BallRec& brec = balls_.at(cand.id);
                if (brec.placement_level != it->second) continue;
                if (!unbounded && cand.pos > threshold) {
                    stopped = true;  // first ball hashing after us; nothing further passed
                    break;
                }
                any_here = true;
                ++count;
            }
            if (!stopped && !any_here && other.pass_count[static_cast<size_t>(it->second)] == 0) {
                break;  // nothing placed here and nothing ever passed here
            }
        }
        if (count > 0) bump_pass(bin, level, count);
    }

    // Pull passed balls back, lowest level first, while there is room.
    for (int level = 0; level <= k && !bins_.at(bin_id).full(); ++level) {
        while (!bins_.at(bin_id).full() && bins_.at(bin_id).pass_count[static_cast<size_t>(level)] > 0) {
            auto [hole_bin, hole_level] = pull_into(bin_id, level, report);
            fill_hole(hole_bin, hole_level, report);
        }
    }

    if (dyn) apply_plan_phase(plan, /*increases=*/false, std::nullopt, report);
    collapse_moves(report);
    return report;
}

UpdateReport System::delete_bin(uint64_t bin_id) {
    auto bin_it = bins_.find(bin_id);
    if (bin_it == bins_.end()) throw std::invalid_argument("bin not present");
    if (m_ < 2) throw std::invalid_argument("cannot delete the last bin");
    UpdateReport report;

    auto sel = std::pair{hasher_.selection_value(bin_id), bin_id};
    selection_order_.erase(std::lower_bound(selection_order_.begin(), selection_order_.end(), sel));

    const auto* dyn = std::get_if<DynamicCapacity>(&config_.capacity);
    CapacityPlan plan;
    if (dyn) {
        plan = plan_for(dyn->c, n_, m_ - 1);
        apply_plan_phase(plan, /*increases=*/true, bin_id, report);
    }

    // Collect the evicted balls with the virtual bins they sat in; each
    // is reinserted from just past its old virtual bin, so the pass
    // counts between its hash location and that point stay untouched.
    struct Evicted {
        BallKey ball;
        VbinKey resume_after;
    };
    std::vector<Evicted> evicted;
    for (const BallKey& ball : bin_it->second.balls) {
        evicted.push_back({ball, vbin_key(bin_id, balls_.at(ball.id).placement_level)});
    }
    bin_it->second.balls.clear();
    remove_bin_skeleton(bin_id);

    for (const Evicted& ev : evicted) {
        carry_insert(ev.ball, index_.upper_bound(ev.resume_after), bin_id, report);
    }

    if (dyn) apply_plan_phase(plan, /*increases=*/false, std::nullopt, report);
    collapse_moves(report);
    return report;
}

SearchResult System::search_ball(uint64_t ball_id) const {
    uint64_t pos = hasher_.ball_position(ball_id);
    BallKey key{pos, ball_id};
    SearchResult result;
    for (auto it = index_.lower_bound(VbinKey{false, pos, 0}); it != index_.end(); ++it) {
        ++result.bins_visited;
        const SuperBin& bin = bins_.at(it->first.owner);
        if (bin.balls.contains(key)) {
            result.bin = it->first.owner;
            return result;
        }
        if (!bin.full()) return result;
        if (key < *bin.balls.rbegin()) return result;  // not filled with higher priority only
    }
    return result;
}

std::optional<uint64_t> System::bin_of_ball(uint64_t ball_id) const {
    auto it = balls_.find(ball_id);
    if (it == balls_.end()) return std::nullopt;
    return it->second.bin;
}

int64_t System::capacity_of(uint64_t bin_id) const { return bins_.at(bin_id).capacity; }

int64_t System::load_of(uint64_t bin_id) const { return static_cast<int64_t>(bins_.at(bin_id).balls.size()); }

int64_t System::total_capacity() const {
    int64_t total = 0;
    for (const auto& [id, bin] : bins_) total += bin.capacity;
    return total;
}

uint64_t System::total_pass_count() const {
    uint64_t total = 0;
    for (const auto& [id, bin] : bins_) {
        for (int64_t c : bin.pass_count) total += static_cast<uint64_t>(c);
    }
    return total;
}

std::vector<uint64_t> System::ball_ids_sorted() const {
    std::vector<uint64_t> ids;
    ids.reserve(balls_.size());
    for (const auto& [id, rec] : balls_) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<uint64_t> System::bin_ids_sorted() const {
    std::vector<uint64_t> ids;
    ids.reserve(bins_.size());
    for (const auto& [id, bin] : bins_) ids.push_back(id);
    return ids;
}

double System::nonfull_fraction() const {
    if (m_ == 0) return 0.0;
    uint64_t nonfull = 0;
    for (const auto& [id, bin] : bins_) {
        if (static_cast<int64_t>(bin.balls.size()) < bin.capacity) ++nonfull;
    }
    return static_cast<double>(nonfull) / static_cast<double>(m_);
}

void System::debug_bump_pass_count(uint64_t bin_id, int level, int64_t delta) {
    SuperBin& bin = bins_.at(bin_id);
    int64_t& count = bin.pass_count[static_cast<size_t>(level)];
    count += delta;
    if (count > 0) {
        bin.positive_levels.insert(level);
    } else {
        bin.positive_levels.erase(level);
    }
}

void System::debug_bump_ball_counter(int64_t delta) { n_ = static_cast<uint64_t>(static_cast<int64_t>(n_) + delta); }

}  // namespace chvb
