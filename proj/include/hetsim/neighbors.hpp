#pragma once

/// Leader/follower lookups over the per-lane vehicle ordering.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "network.hpp"
#include "vehicle.hpp"

namespace hetsim {

struct Neighbor {
    std::uint32_t slot = 0; // index into the vehicle array
    double gap = 0.0;       // bumper to bumper, may be negative when overlapping
    double speed = 0.0;
    double accel = 0.0;
};

struct LookaheadLimits {
    double horizon = 1000.0;
    int max_hops = 3;
};

/// Vehicles of every lane ordered by position (ascending), as slots into a
/// vehicle array owned by the caller.
class LaneIndex {
public:
    void rebuild(const RoadNetwork& net, std::span<const VehicleState> vehicles) {
        lanes_.resize(net.lane_slot_count());
        for (auto& l : lanes_) l.clear();
        for (std::uint32_t i = 0; i < vehicles.size(); ++i) lanes_[net.lane_slot(vehicles[i].lane)].push_back(i);
        for (auto& l : lanes_)
            std::sort(l.begin(), l.end(), [&](auto a, auto b) { return before(vehicles[a], vehicles[b]); });
    }

    std::span<const std::uint32_t> lane(const RoadNetwork& net, LaneRef ref) const {
        return lanes_[net.lane_slot(ref)];
    }

    /// Moves `slot` from its recorded lane `from` into `to`, keeping order.
    void relocate(const RoadNetwork& net, std::span<const VehicleState> vehicles, std::uint32_t slot,
                  LaneRef from, LaneRef to) {
        auto& src = lanes_[net.lane_slot(from)];
        src.erase(std::find(src.begin(), src.end(), slot));
        insert(net, vehicles, slot, to);
    }

    void insert(const RoadNetwork& net, std::span<const VehicleState> vehicles, std::uint32_t slot, LaneRef to) {
        auto& dst = lanes_[net.lane_slot(to)];
        auto pos = std::upper_bound(dst.begin(), dst.end(), slot,
                                    [&](auto a, auto b) { return before(vehicles[a], vehicles[b]); });
        dst.insert(pos, slot);
    }

private:
    static bool before(const VehicleState& a, const VehicleState& b) {
        return a.x < b.x || (a.x == b.x && a.id < b.id);
    }

    std::vector<std::vector<std::uint32_t>> lanes_;
};

namespace detail {

inline Neighbor make_leader(std::uint32_t slot, const VehicleState& v, double front_distance) {
    return {slot, front_distance - v.params.length, v.speed, v.accel};
}

/// Successor used when looking ahead from `lane` on behalf of a vehicle
/// heading to `exit`.
inline std::optional<LaneRef> continuation(const RoadNetwork& net, LaneRef lane, ExitId exit) {
    if (auto next = net.next_toward(lane, exit)) return next;
    const auto& succ = net.segment(lane.segment).successors[lane.lane];
    if (succ.empty()) return std::nullopt;
    return succ.front();
}

inline void nearest_upstream(const RoadNetwork& net, const LaneIndex& index, std::span<const VehicleState> vehicles,
                             LaneRef lane, double distance, int hops, const LookaheadLimits& limits,
                             std::optional<Neighbor>& best) {
    if (hops > limits.max_hops || distance > limits.horizon) return;
    for (const auto& pred : net.segment(lane.segment).predecessors[lane.lane]) {
        const double len = net.segment(pred.segment).length;
        const auto occupants = index.lane(net, pred);
        if (!occupants.empty()) {
            const auto slot = occupants.back();
            const double gap = distance + (len - vehicles[slot].x);
            if (!best || gap < best->gap) best = Neighbor{slot, gap, vehicles[slot].speed, vehicles[slot].accel};
        } else {
            nearest_upstream(net, index, vehicles, pred, distance + len, hops + 1, limits, best);
        }
    }
}

} // namespace detail

/// Nearest vehicle ahead of `slot` in the lane at `lane_offset` (-1 right,
/// 0 current, +1 left), following the route across segment boundaries. For
/// an adjacent lane a vehicle exactly alongside counts as a leader with a
/// negative gap. Returns nothing if the lane does not exist or nobody is
/// within the lookahead limits.
inline std::optional<Neighbor> leader_of(const RoadNetwork& net, const LaneIndex& index,
                                         std::span<const VehicleState> vehicles, std::uint32_t slot,
                                         int lane_offset, const LookaheadLimits& limits = {}) {
    const auto& ego = vehicles[slot];
    LaneRef lane{ego.lane.segment, ego.lane.lane + lane_offset};
    if (!net.has_lane(lane.segment, lane.lane)) return std::nullopt;

    const auto occupants = index.lane(net, lane);
    if (lane_offset == 0) {
        auto it = std::find(occupants.begin(), occupants.end(), slot);
        if (it != occupants.end() && ++it != occupants.end())
            return detail::make_leader(*it, vehicles[*it], vehicles[*it].x - ego.x);
    } else {
        auto it = std::lower_bound(occupants.begin(), occupants.end(), ego.x,
                                   [&](std::uint32_t s, double x) { return vehicles[s].x < x; });
        if (it != occupants.end()) return detail::make_leader(*it, vehicles[*it], vehicles[*it].x - ego.x);
    }

    double distance = net.segment(lane.segment).length - ego.x;
    for (int hop = 1; hop <= limits.max_hops && distance <= limits.horizon; ++hop) {
        auto next = detail::continuation(net, lane, ego.exit);
        if (!next) return std::nullopt;
        lane = *next;
        const auto ahead = index.lane(net, lane);
        if (!ahead.empty())
            return detail::make_leader(ahead.front(), vehicles[ahead.front()], distance + vehicles[ahead.front()].x);
        distance += net.segment(lane.segment).length;
    }
    return std::nullopt;
}

/// Nearest vehicle behind `slot` in the lane at `lane_offset`, searching
/// upstream through all predecessor lanes.
inline std::optional<Neighbor> follower_of(const RoadNetwork& net, const LaneIndex& index,
                                           std::span<const VehicleState> vehicles, std::uint32_t slot,
                                           int lane_offset, const LookaheadLimits& limits = {}) {
    const auto& ego = vehicles[slot];
    LaneRef lane{ego.lane.segment, ego.lane.lane + lane_offset};
    if (!net.has_lane(lane.segment, lane.lane)) return std::nullopt;

    const auto occupants = index.lane(net, lane);
    auto make = [&](std::uint32_t s) {
        return Neighbor{s, ego.rear() - vehicles[s].x, vehicles[s].speed, vehicles[s].accel};
    };
    if (lane_offset == 0) {
        auto it = std::find(occupants.begin(), occupants.end(), slot);
        if (it != occupants.end() && it != occupants.begin()) return make(*std::prev(it));
    } else {
        auto it = std::lower_bound(occupants.begin(), occupants.end(), ego.x,
                                   [&](std::uint32_t s, double x) { return vehicles[s].x < x; });
        if (it != occupants.begin()) return make(*std::prev(it));
    }

    std::optional<Neighbor> best;
    detail::nearest_upstream(net, index, vehicles, lane, ego.rear(), 1, limits, best);
    return best;
}

} // namespace hetsim
