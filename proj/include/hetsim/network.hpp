#pragma once

/// Directed multi-lane road graph.
///
/// Segments are joined lane-to-lane. A lane may fan out into several
/// successors (a diverge); the one a vehicle takes is chosen by its route.
/// Lanes flagged as ending (acceleration lanes) have no successor and must
/// be vacated before the end of the segment. The graph is immutable after
/// finalize(), which also precomputes the routing tables.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hetsim {

using SegmentId = std::uint32_t;
using ExitId = std::uint32_t;

struct LaneRef {
    SegmentId segment = 0;
    int lane = 0;

    friend bool operator==(const LaneRef&, const LaneRef&) = default;
};

enum class SegmentClass { mainline, on_ramp, off_ramp, loop_ramp };

inline const char* to_string(SegmentClass c) {
    switch (c) {
    case SegmentClass::mainline: return "mainline";
    case SegmentClass::on_ramp: return "on-ramp";
    case SegmentClass::off_ramp: return "off-ramp";
    case SegmentClass::loop_ramp: return "loop-ramp";
    }
    return "?";
}

struct RoadSegment {
    SegmentId id = 0;
    std::string name;
    double length = 0.0;
    int lane_count = 1;
    SegmentClass kind = SegmentClass::mainline;
    /// Nominal speed of the facility, only used to label detector output.
    double speed_context = 0.0;
    std::vector<std::vector<LaneRef>> successors;
    std::vector<std::vector<LaneRef>> predecessors;
    std::vector<bool> lane_ends;
    std::optional<ExitId> exit;
};

struct EntryBoundary {
    LaneRef lane;
    double share = 1.0;
};

struct ExitBoundary {
    SegmentId segment = 0;
    std::string name;
};

struct Detector {
    SegmentId segment = 0;
    double position = 0.0;
    double window = 10.0;
};

class NetworkError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class RoadNetwork {
public:
    SegmentId add_segment(std::string name, double length, int lanes, SegmentClass kind,
                          double speed_context = 0.0) {
        if (!(length > 0.0)) throw NetworkError("segment " + name + ": length must be > 0");
        if (lanes < 1) throw NetworkError("segment " + name + ": lane count must be >= 1");
        RoadSegment s;
        s.id = static_cast<SegmentId>(segments_.size());
        s.name = std::move(name);
        s.length = length;
        s.lane_count = lanes;
        s.kind = kind;
        s.speed_context = speed_context;
        s.successors.resize(lanes);
        s.predecessors.resize(lanes);
        s.lane_ends.assign(lanes, false);
        segments_.push_back(std::move(s));
        finalized_ = false;
        return segments_.back().id;
    }

    void connect(LaneRef from, LaneRef to) {
        check_lane(from);
        check_lane(to);
        segments_[from.segment].successors[from.lane].push_back(to);
        segments_[to.segment].predecessors[to.lane].push_back(from);
        finalized_ = false;
    }

    /// Connects n consecutive lanes one-to-one.
    void connect_lanes(SegmentId from, int from_first, SegmentId to, int to_first, int n) {
        for (int i = 0; i < n; ++i) connect({from, from_first + i}, {to, to_first + i});
    }

    void mark_lane_end(LaneRef lane) {
        check_lane(lane);
        segments_[lane.segment].lane_ends[lane.lane] = true;
        finalized_ = false;
    }

    ExitId add_exit(SegmentId segment, std::string name) {
        check_segment(segment);
        const auto id = static_cast<ExitId>(exits_.size());
        exits_.push_back({segment, std::move(name)});
        segments_[segment].exit = id;
        finalized_ = false;
        return id;
    }

    void add_entry(LaneRef lane, double share = 1.0) {
        check_lane(lane);
        if (!(share > 0.0)) throw NetworkError("entry share must be > 0");
        entries_.push_back({lane, share});
    }

    void add_detector(SegmentId segment, double position, double window) {
        check_segment(segment);
        if (!(position >= 0.0 && position <= segments_[segment].length))
            throw NetworkError("detector position outside segment " + segments_[segment].name);
        if (!(window > 0.0)) throw NetworkError("detector window must be > 0");
        detectors_.push_back({segment, position, window});
    }

    /// Validates the topology and builds routing tables.
    void finalize() {
        for (const auto& s : segments_) {
            for (int l = 0; l < s.lane_count; ++l) {
                const bool dead_end = s.successors[l].empty() && !s.exit && !s.lane_ends[l];
                if (dead_end) throw NetworkError("lane " + std::to_string(l) + " of " + s.name + " is a dead end");
                if (s.lane_ends[l] && !s.successors[l].empty())
                    throw NetworkError("ending lane " + std::to_string(l) + " of " + s.name + " has successors");
                if (s.lane_ends[l] && s.lane_count == 1)
                    throw NetworkError("segment " + s.name + " has only an ending lane");
            }
        }
        if (entries_.empty()) throw NetworkError("network has no entry boundary");
        if (exits_.empty()) throw NetworkError("network has no exit boundary");
        build_routing();
        for (std::size_t e = 0; e < entries_.size(); ++e) {
            const auto seg = entries_[e].lane.segment;
            bool any = false;
            for (ExitId x = 0; x < exits_.size(); ++x) any = any || segment_reaches(seg, x);
            if (!any) throw NetworkError("entry on " + segments_[seg].name + " reaches no exit");
        }
        finalized_ = true;
    }

    bool finalized() const { return finalized_; }

    const std::vector<RoadSegment>& segments() const { return segments_; }
    const RoadSegment& segment(SegmentId id) const { return segments_.at(id); }
    const std::vector<EntryBoundary>& entries() const { return entries_; }
    const std::vector<ExitBoundary>& exits() const { return exits_; }
    const std::vector<Detector>& detectors() const { return detectors_; }

    bool has_lane(SegmentId segment, int lane) const {
        return segment < segments_.size() && lane >= 0 && lane < segments_[segment].lane_count;
    }

    /// Index of a lane in flat per-lane tables.
    std::size_t lane_slot(LaneRef lane) const { return lane_offsets_[lane.segment] + lane.lane; }
    std::size_t lane_slot_count() const { return total_lanes_; }

    /// True if `exit` can be reached from anywhere on `segment`, lane changes allowed.
    bool segment_reaches(SegmentId segment, ExitId exit) const {
        return seg_reach_[exit * segments_.size() + segment] != 0;
    }

    /// Driving distance from the start of `segment` to `exit` along the
    /// shortest route; infinite if unreachable.
    double distance_to(SegmentId segment, ExitId exit) const { return seg_dist_[exit * segments_.size() + segment]; }

    /// True if staying in `lane` to the end of its segment keeps a vehicle on
    /// a shortest route to `exit`.
    bool lane_serves(LaneRef lane, ExitId exit) const {
        return lane_serves_[exit * total_lanes_ + lane_slot(lane)] != 0;
    }

    /// Successor of `lane` nearest to `exit`, if any successor reaches it.
    std::optional<LaneRef> next_toward(LaneRef lane, ExitId exit) const {
        std::optional<LaneRef> best;
        for (const auto& s : segments_[lane.segment].successors[lane.lane])
            if (segment_reaches(s.segment, exit) && (!best || distance_to(s.segment, exit) < distance_to(best->segment, exit)))
                best = s;
        return best;
    }

    /// Lane-change distance from `lane` to the nearest lane serving `exit`:
    /// 0 if the lane serves it, negative to the right, positive to the left.
    std::optional<int> lanes_to_serving(LaneRef lane, ExitId exit) const {
        const auto& s = segments_[lane.segment];
        std::optional<int> best;
        for (int l = 0; l < s.lane_count; ++l) {
            if (!lane_serves({lane.segment, l}, exit)) continue;
            const int d = l - lane.lane;
            if (!best || std::abs(d) < std::abs(*best)) best = d;
        }
        return best;
    }

    std::optional<ExitId> first_reachable_exit(SegmentId segment) const {
        for (ExitId x = 0; x < exits_.size(); ++x)
            if (segment_reaches(segment, x)) return x;
        return std::nullopt;
    }

    double lane_km(SegmentClass kind) const {
        double total = 0.0;
        for (const auto& s : segments_)
            if (s.kind == kind) total += s.length * s.lane_count / 1000.0;
        return total;
    }

private:
    void check_segment(SegmentId id) const {
        if (id >= segments_.size()) throw NetworkError("unknown segment " + std::to_string(id));
    }
    void check_lane(LaneRef lane) const {
        check_segment(lane.segment);
        if (!has_lane(lane.segment, lane.lane))
            throw NetworkError("lane " + std::to_string(lane.lane) + " out of range on " + segments_[lane.segment].name);
    }

    void build_routing() {
        const std::size_t ns = segments_.size();
        lane_offsets_.assign(ns, 0);
        total_lanes_ = 0;
        for (std::size_t i = 0; i < ns; ++i) {
            lane_offsets_[i] = total_lanes_;
            total_lanes_ += static_cast<std::size_t>(segments_[i].lane_count);
        }
        // Reverse segment adjacency for backwards reachability.
        std::vector<std::vector<SegmentId>> upstream(ns);
        for (const auto& s : segments_)
            for (const auto& lane : s.successors)
                for (const auto& to : lane) upstream[to.segment].push_back(s.id);

        constexpr double inf = std::numeric_limits<double>::infinity();
        seg_reach_.assign(exits_.size() * ns, 0);
        seg_dist_.assign(exits_.size() * ns, inf);
        lane_serves_.assign(exits_.size() * total_lanes_, 0);
        using Item = std::pair<double, SegmentId>;
        for (ExitId x = 0; x < exits_.size(); ++x) {
            auto* reach = &seg_reach_[x * ns];
            auto* dist = &seg_dist_[x * ns];
            std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
            dist[exits_[x].segment] = segments_[exits_[x].segment].length;
            queue.emplace(dist[exits_[x].segment], exits_[x].segment);
            while (!queue.empty()) {
                const auto [d, cur] = queue.top();
                queue.pop();
                if (d > dist[cur]) continue;
                reach[cur] = 1;
                for (auto up : upstream[cur]) {
                    const double via = d + segments_[up].length;
                    if (via < dist[up]) {
                        dist[up] = via;
                        queue.emplace(via, up);
                    }
                }
            }
            for (const auto& s : segments_) {
                // Shortest continuation over all lanes of the segment.
                double best = s.exit == x ? 0.0 : inf;
                for (const auto& lane : s.successors)
                    for (const auto& to : lane) best = std::min(best, dist[to.segment]);
                for (int l = 0; l < s.lane_count; ++l) {
                    bool serves = false;
                    if (!s.lane_ends[l] && best < inf) {
                        if (s.exit == x) serves = true;
                        for (const auto& to : s.successors[l]) serves = serves || dist[to.segment] <= best;
                    }
                    lane_serves_[x * total_lanes_ + lane_offsets_[s.id] + l] = serves;
                }
            }
        }
    }

    std::vector<RoadSegment> segments_;
    std::vector<EntryBoundary> entries_;
    std::vector<ExitBoundary> exits_;
    std::vector<Detector> detectors_;
    std::vector<std::size_t> lane_offsets_;
    std::size_t total_lanes_ = 0;
    std::vector<std::uint8_t> seg_reach_;
    std::vector<double> seg_dist_;
    std::vector<std::uint8_t> lane_serves_;
    bool finalized_ = false;
};

} // namespace hetsim
