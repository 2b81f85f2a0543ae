#include <gtest/gtest.h>

#include <random>
#include <set>
#include <vector>

#include "hetsim/cloverleaf.hpp"
#include "hetsim/neighbors.hpp"

using namespace hetsim;

namespace {

VehicleState car(VehicleId id, LaneRef lane, double x, double length = 5.0, double speed = 20.0) {
    VehicleState v;
    v.id = id;
    v.lane = lane;
    v.x = x;
    v.speed = speed;
    v.params.length = length;
    return v;
}

// Two consecutive two-lane segments ending in an exit.
struct Straight {
    RoadNetwork net;
    SegmentId first = 0, second = 0;

    Straight() {
        first = net.add_segment("first", 300.0, 2, SegmentClass::mainline);
        second = net.add_segment("second", 400.0, 2, SegmentClass::mainline);
        net.connect_lanes(first, 0, second, 0, 2);
        net.add_exit(second, "out");
        net.add_entry({first, 0});
        net.add_entry({first, 1});
        net.finalize();
    }
};

struct Lookup {
    const RoadNetwork& net;
    std::vector<VehicleState> vehicles;
    LaneIndex index;

    std::optional<Neighbor> leader(std::uint32_t slot, int offset) {
        index.rebuild(net, vehicles);
        return leader_of(net, index, vehicles, slot, offset);
    }
    std::optional<Neighbor> follower(std::uint32_t slot, int offset) {
        index.rebuild(net, vehicles);
        return follower_of(net, index, vehicles, slot, offset);
    }
};

} // namespace

TEST(Cloverleaf, DefaultGeometryHasEightMainlineEntries) {
    const auto c = build_cloverleaf({});
    const auto& net = c.network;
    EXPECT_EQ(net.entries().size(), 8u);
    for (const auto& e : net.entries()) EXPECT_EQ(net.segment(e.lane.segment).kind, SegmentClass::mainline);
    EXPECT_EQ(net.exits().size(), 4u);
    EXPECT_EQ(net.detectors().size(), 4u * 2u * 5u);
    EXPECT_TRUE(net.finalized());
}

TEST(Cloverleaf, FourLoopsAndFourDirectRamps) {
    const auto c = build_cloverleaf({});
    int loops = 0, off = 0, on = 0;
    for (const auto& s : c.network.segments()) {
        loops += s.kind == SegmentClass::loop_ramp;
        off += s.kind == SegmentClass::off_ramp;
        on += s.kind == SegmentClass::on_ramp;
    }
    EXPECT_EQ(loops, 4);
    EXPECT_EQ(off, 4);
    EXPECT_EQ(on, 4);
}

TEST(Cloverleaf, EveryEntryReachesEveryExit) {
    for (int lanes : {1, 2, 3}) {
        CloverleafGeometry g;
        g.lanes = lanes;
        const auto c = build_cloverleaf(g);
        for (const auto& e : c.network.entries())
            for (ExitId x = 0; x < c.network.exits().size(); ++x)
                EXPECT_TRUE(c.network.segment_reaches(e.lane.segment, x)) << "lanes=" << lanes;
    }
}

TEST(Cloverleaf, TurnExitsFollowHeadings) {
    const auto c = build_cloverleaf({});
    const auto& net = c.network;
    for (int d = 0; d < 4; ++d) {
        const auto& leg = c.legs[d];
        EXPECT_EQ(c.through_exit(d), leg.exit);
        // The right turn leaves from the rightmost approach lane.
        EXPECT_EQ(net.next_toward({leg.approach, 0}, c.right_exit(d)), (LaneRef{leg.direct_off, 0}));
        // The left turn uses the auxiliary weave lane.
        EXPECT_EQ(net.next_toward({leg.weave, 0}, c.left_exit(d)), (LaneRef{leg.loop, 0}));
        EXPECT_FALSE(net.lane_serves({leg.weave, 1}, c.left_exit(d)));
    }
}

TEST(Cloverleaf, SingleLaneIsValid) {
    CloverleafGeometry g;
    g.lanes = 1;
    const auto c = build_cloverleaf(g);
    EXPECT_EQ(c.network.entries().size(), 4u);
    EXPECT_EQ(c.network.segment(c.legs[0].approach).lane_count, 1);
    EXPECT_EQ(c.network.segment(c.legs[0].weave).lane_count, 2);
}

TEST(Cloverleaf, InvalidGeometryNamesParameter) {
    auto expect_error = [](CloverleafGeometry g, const std::string& name) {
        try {
            build_cloverleaf(g);
            ADD_FAILURE() << "expected NetworkError for " << name;
        } catch (const NetworkError& e) {
            EXPECT_NE(std::string(e.what()).find(name), std::string::npos) << e.what();
        }
    };
    CloverleafGeometry g;
    g.ramp_length = 0.0;
    expect_error(g, "ramp_length");
    g = {};
    g.lanes = 0;
    expect_error(g, "lanes");
    g = {};
    g.arm_length = -5.0;
    expect_error(g, "arm_length");
    g = {};
    g.detector_window = 0.0;
    expect_error(g, "detector_window");
    g = {};
    g.detectors_per_arm = 30;
    expect_error(g, "detectors");
    g = {};
    g.detector_offset = -1.0;
    expect_error(g, "detector_offset");
}

TEST(Cloverleaf, DetectorsWithinSegments) {
    const auto c = build_cloverleaf({});
    for (const auto& d : c.network.detectors()) {
        EXPECT_GE(d.position, 0.0);
        EXPECT_LE(d.position, c.network.segment(d.segment).length);
        EXPECT_GT(d.window, 0.0);
    }
}

TEST(Network, TopologyErrors) {
    RoadNetwork net;
    EXPECT_THROW(net.add_segment("zero", 0.0, 1, SegmentClass::mainline), NetworkError);
    EXPECT_THROW(net.add_segment("nolanes", 10.0, 0, SegmentClass::mainline), NetworkError);
    const auto a = net.add_segment("a", 100.0, 1, SegmentClass::mainline);
    EXPECT_THROW(net.connect({a, 0}, {a, 3}), NetworkError);
    EXPECT_THROW(net.add_detector(a, 150.0, 10.0), NetworkError);
    EXPECT_THROW(net.add_detector(a, 50.0, 0.0), NetworkError);
    net.add_entry({a, 0});
    EXPECT_THROW(net.finalize(), NetworkError); // dead end, no exit

    const auto b = net.add_segment("b", 100.0, 1, SegmentClass::mainline);
    net.connect({a, 0}, {a, 0});
    net.add_exit(b, "out");
    EXPECT_THROW(net.finalize(), NetworkError); // entry cannot reach the exit
}

TEST(Neighbors, LeaderSameLane) {
    Straight s;
    Lookup q{s.net, {car(0, {s.first, 0}, 0.0), car(1, {s.first, 0}, 50.0)}, {}};
    const auto l = q.leader(0, 0);
    ASSERT_TRUE(l);
    EXPECT_EQ(l->slot, 1u);
    EXPECT_DOUBLE_EQ(l->gap, 45.0);
    EXPECT_FALSE(q.leader(1, 0));
}

TEST(Neighbors, EmptyOrMissingLane) {
    Straight s;
    Lookup q{s.net, {car(0, {s.first, 0}, 10.0)}, {}};
    EXPECT_FALSE(q.leader(0, 0));
    EXPECT_FALSE(q.leader(0, +1));
    EXPECT_FALSE(q.leader(0, -1));
    EXPECT_FALSE(q.follower(0, -1));
    EXPECT_FALSE(q.follower(0, 0));
}

TEST(Neighbors, LeaderAcrossSegmentBoundary) {
    Straight s;
    Lookup q{s.net, {car(0, {s.first, 0}, 280.0), car(1, {s.second, 0}, 30.0, 6.0)}, {}};
    const auto l = q.leader(0, 0);
    ASSERT_TRUE(l);
    EXPECT_DOUBLE_EQ(l->gap, (300.0 - 280.0) + 30.0 - 6.0);
}

TEST(Neighbors, FollowerMirrorsLeader) {
    Straight s;
    Lookup q{s.net, {car(0, {s.first, 0}, 0.0), car(1, {s.first, 0}, 50.0)}, {}};
    const auto f = q.follower(1, 0);
    ASSERT_TRUE(f);
    EXPECT_EQ(f->slot, 0u);
    EXPECT_DOUBLE_EQ(f->gap, 45.0);

    Lookup across{s.net, {car(0, {s.first, 0}, 280.0), car(1, {s.second, 0}, 30.0, 6.0)}, {}};
    const auto g = across.follower(1, 0);
    ASSERT_TRUE(g);
    EXPECT_DOUBLE_EQ(g->gap, 44.0);
}

TEST(Neighbors, AdjacentLane) {
    Straight s;
    Lookup q{s.net,
             {car(0, {s.first, 0}, 100.0), car(1, {s.first, 1}, 130.0), car(2, {s.first, 1}, 60.0, 4.0)},
             {}};
    const auto l = q.leader(0, +1);
    ASSERT_TRUE(l);
    EXPECT_EQ(l->slot, 1u);
    EXPECT_DOUBLE_EQ(l->gap, 25.0);
    const auto f = q.follower(0, +1);
    ASSERT_TRUE(f);
    EXPECT_EQ(f->slot, 2u);
    EXPECT_DOUBLE_EQ(f->gap, 100.0 - 5.0 - 60.0);
}

TEST(Neighbors, LookaheadHorizon) {
    RoadNetwork net;
    std::vector<SegmentId> segs;
    for (int i = 0; i < 6; ++i) segs.push_back(net.add_segment("s" + std::to_string(i), 400.0, 1, SegmentClass::mainline));
    for (int i = 0; i + 1 < 6; ++i) net.connect({segs[i], 0}, {segs[i + 1], 0});
    net.add_exit(segs.back(), "out");
    net.add_entry({segs[0], 0});
    net.finalize();
    Lookup q{net, {car(0, {segs[0], 0}, 0.0), car(1, {segs[4], 0}, 10.0)}, {}};
    EXPECT_FALSE(q.leader(0, 0));
    q.vehicles[1].lane = {segs[2], 0};
    EXPECT_TRUE(q.leader(0, 0));
}

TEST(Neighbors, LeaderFollowerConsistentOnRandomTraffic) {
    const auto c = build_cloverleaf({});
    const auto& net = c.network;
    std::mt19937_64 gen(17);
    std::vector<VehicleState> vs;
    for (const auto& s : net.segments()) {
        for (int l = 0; l < s.lane_count; ++l) {
            double x = 12.0;
            while (x < s.length) {
                auto v = car(vs.size(), {s.id, l}, x, 3.0 + (gen() % 10));
                v.exit = *net.first_reachable_exit(s.id);
                vs.push_back(v);
                x += 20.0 + (gen() % 80);
            }
        }
    }
    Lookup q{net, vs, {}};
    q.index.rebuild(net, q.vehicles);
    int checked = 0;
    for (std::uint32_t i = 0; i < vs.size(); ++i) {
        const auto l = leader_of(net, q.index, q.vehicles, i, 0);
        if (!l || q.vehicles[l->slot].lane.segment != vs[i].lane.segment) continue;
        EXPECT_GE(l->gap, 0.0);
        const auto f = follower_of(net, q.index, q.vehicles, l->slot, 0);
        ASSERT_TRUE(f);
        EXPECT_EQ(f->slot, i);
        EXPECT_DOUBLE_EQ(f->gap, l->gap);
        ++checked;
    }
    EXPECT_GT(checked, 100);
}
