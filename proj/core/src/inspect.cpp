#include <sstream>

#include "chvb/system.hpp"

namespace chvb {

// check_invariants and diff live here to keep the update machinery in
// system.cpp focused on the walks.

std::vector<std::string> System::check_invariants() const {
    std::vector<std::string> out;
    auto fail = [&out](const std::string& msg) { out.push_back(msg); };

    if (m_ != bins_.size()) fail("bin counter does not match bin table");
    if (index_.size() != bins_.size() * (static_cast<size_t>(scheme_.levels()) + 1)) {
        fail("index does not hold (k+1) entries per bin");
    }

    uint64_t total_balls = 0;
    int64_t total_capacity = 0;
    for (const auto& [id, bin] : bins_) {
        total_balls += bin.balls.size();
        total_capacity += bin.capacity;
        if (static_cast<int64_t>(bin.balls.size()) > bin.capacity) {
            fail("bin " + std::to_string(id) + " is over capacity");
        }
        if (bin.capacity < 1) fail("bin " + std::to_string(id) + " has capacity below 1");
        for (int level = 0; level <= scheme_.levels(); ++level) {
            auto lsz = static_cast<size_t>(level);
            if (bin.vbin_pos[lsz] != hasher_.virtual_bin_position(id, level)) {
                fail("bin " + std::to_string(id) + " virtual bin position mismatch at level " +
                     std::to_string(level));
            }
            if (bin.pass_count[lsz] < 0) fail("negative pass count");
            bool positive = bin.pass_count[lsz] > 0;
            if (positive != bin.positive_levels.contains(level)) {
                fail("positive-level set out of sync for bin " + std::to_string(id));
            }
            auto it = index_.find(VbinKey{level == scheme_.levels(), bin.vbin_pos[lsz], id});
            if (it == index_.end() || it->second != level) {
                fail("index entry missing for bin " + std::to_string(id) + " level " + std::to_string(level));
            }
        }
        for (const BallKey& ball : bin.balls) {
            auto rec = balls_.find(ball.id);
            if (rec == balls_.end()) {
                fail("ball " + std::to_string(ball.id) + " missing from ball table");
                continue;
            }
            if (rec->second.bin != id) fail("ball table bin mismatch for ball " + std::to_string(ball.id));
            if (rec->second.pos != ball.pos || rec->second.pos != hasher_.ball_position(ball.id)) {
                fail("stored position mismatch for ball " + std::to_string(ball.id));
            }
            if (rec->second.level != scheme_.level_of(ball.pos)) {
                fail("stored level mismatch for ball " + std::to_string(ball.id));
            }
            if (rec->second.placement_level < rec->second.level) {
                fail("ball " + std::to_string(ball.id) + " placed below its hash level");
            }
        }
    }
    if (total_balls != n_) fail("ball counter does not match stored balls");
    if (balls_.size() != n_) fail("ball table size does not match counter");
    if (total_capacity < static_cast<int64_t>(n_)) fail("total capacity below ball count");

    if (const auto* fixed = std::get_if<FixedCapacity>(&config_.capacity)) {
        for (const auto& [id, bin] : bins_) {
            if (bin.capacity != fixed->capacity) fail("fixed capacity violated at bin " + std::to_string(id));
        }
    } else {
        CapacityPlan plan = plan_for(std::get<DynamicCapacity>(config_.capacity).c, n_, m_);
        for (const auto& [id, bin] : bins_) {
            if (bin.capacity != planned_capacity(id, plan)) {
                fail("planned capacity violated at bin " + std::to_string(id));
            }
        }
    }

    if (selection_order_.size() != bins_.size()) fail("selection order size mismatch");
    for (size_t i = 0; i + 1 < selection_order_.size(); ++i) {
        if (selection_order_[i] >= selection_order_[i + 1]) fail("selection order not sorted");
    }
    return out;
}

namespace {

std::string describe(const std::optional<uint64_t>& v) { return v ? std::to_string(*v) : "-"; }

}  // namespace

std::vector<std::string> System::diff(const System& other) const {
    std::vector<std::string> out;
    if (n_ != other.n_) out.push_back("ball counts differ");
    if (m_ != other.m_) out.push_back("bin counts differ");

    for (const auto& [id, bin] : bins_) {
        auto oit = other.bins_.find(id);
        if (oit == other.bins_.end()) {
            out.push_back("bin " + std::to_string(id) + " missing on the other side");
            continue;
        }
        const SuperBin& ob = oit->second;
        if (bin.capacity != ob.capacity) {
            out.push_back("bin " + std::to_string(id) + " capacity " + std::to_string(bin.capacity) + " vs " +
                          std::to_string(ob.capacity));
        }
        if (bin.balls != ob.balls) out.push_back("bin " + std::to_string(id) + " holds different balls");
        if (bin.pass_count != ob.pass_count) {
            out.push_back("bin " + std::to_string(id) + " pass counts differ");
        }
    }
    for (const auto& [id, bin] : other.bins_) {
        if (!bins_.contains(id)) out.push_back("bin " + std::to_string(id) + " missing on this side");
    }
    for (const auto& [id, rec] : balls_) {
        auto oit = other.balls_.find(id);
        if (oit == other.balls_.end()) {
            out.push_back("ball " + std::to_string(id) + " missing on the other side");
            continue;
        }
        if (rec.bin != oit->second.bin || rec.placement_level != oit->second.placement_level) {
            std::ostringstream os;
            os << "ball " << id << " placed at (" << rec.bin << ", level " << rec.placement_level << ") vs ("
               << oit->second.bin << ", level " << oit->second.placement_level << ")";
            out.push_back(os.str());
        }
    }
    for (const auto& [id, rec] : other.balls_) {
        if (!balls_.contains(id)) out.push_back("ball " + std::to_string(id) + " missing on this side");
    }
    (void)describe;
    return out;
}

}  // namespace chvb
