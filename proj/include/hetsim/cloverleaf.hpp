#pragma once

/// Parametric cloverleaf interchange between two dual carriageways.
///
/// Each of the four travel directions d is laid out as
///
///   approach (n lanes) -> weave (n+1) -> merge (n+1) -> departure (n lanes, exit)
///
/// The rightmost lane of the weave section is an auxiliary lane fed by the
/// loop ramp coming from the crossing road and feeding the loop ramp for the
/// left turn of d. The rightmost lane of the merge section is an
/// acceleration lane fed by the direct ramp of the right turn into d; it
/// ends with the segment. Right turns leave the approach from lane 0 onto a
/// direct ramp (off-ramp part, then on-ramp part).

#include <array>
#include <string>

#include "network.hpp"

namespace hetsim {

struct CloverleafGeometry {
    double arm_length = 2000.0;
    int lanes = 2;
    double ramp_length = 250.0;
    double loop_length = 300.0;
    double weave_length = 300.0;
    double merge_length = 250.0;
    /// Distance of the approach detector upstream of the interchange and of
    /// the departure detector downstream of it.
    double detector_offset = 100.0;
    /// Detectors per arm, repeated every `detector_spacing` metres further
    /// away from the interchange.
    int detectors_per_arm = 5;
    double detector_spacing = 100.0;
    double detector_window = 10.0;
    double speed_context = 0.0;

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0)) throw NetworkError(std::string("cloverleaf geometry: ") + name + " must be > 0");
        };
        positive(arm_length, "arm_length");
        if (lanes < 1) throw NetworkError("cloverleaf geometry: lanes must be >= 1");
        positive(ramp_length, "ramp_length");
        positive(loop_length, "loop_length");
        positive(weave_length, "weave_length");
        positive(merge_length, "merge_length");
        positive(detector_window, "detector_window");
        if (detectors_per_arm < 1) throw NetworkError("cloverleaf geometry: detectors_per_arm must be >= 1");
        if (detectors_per_arm > 1) positive(detector_spacing, "detector_spacing");
        if (!(detector_offset + (detectors_per_arm - 1) * detector_spacing <= arm_length))
            throw NetworkError("cloverleaf geometry: detectors extend beyond the arm");
        if (!(detector_offset >= 0.0)) throw NetworkError("cloverleaf geometry: detector_offset must be >= 0");
    }
};

enum class Direction { east = 0, north = 1, west = 2, south = 3 };

inline constexpr std::array<const char*, 4> kDirectionNames = {"EB", "NB", "WB", "SB"};

/// Right-hand traffic: a right turn rotates the heading clockwise.
constexpr int right_of(int d) { return (d + 3) % 4; }
constexpr int left_of(int d) { return (d + 1) % 4; }

/// Segment ids of one direction, plus its exit.
struct CloverleafLeg {
    SegmentId approach = 0;
    SegmentId weave = 0;
    SegmentId merge = 0;
    SegmentId departure = 0;
    SegmentId direct_off = 0;
    SegmentId direct_on = 0;
    SegmentId loop = 0;
    ExitId exit = 0;
};

struct Cloverleaf {
    RoadNetwork network;
    std::array<CloverleafLeg, 4> legs{};

    ExitId through_exit(int d) const { return legs[d].exit; }
    ExitId right_exit(int d) const { return legs[right_of(d)].exit; }
    ExitId left_exit(int d) const { return legs[left_of(d)].exit; }
};

inline Cloverleaf build_cloverleaf(const CloverleafGeometry& g) {
    g.validate();
    Cloverleaf c;
    auto& net = c.network;
    const int n = g.lanes;
    const double ramp_half = 0.5 * g.ramp_length;

    for (int d = 0; d < 4; ++d) {
        const std::string tag = kDirectionNames[d];
        auto& leg = c.legs[d];
        leg.approach = net.add_segment(tag + "-approach", g.arm_length, n, SegmentClass::mainline, g.speed_context);
        leg.weave = net.add_segment(tag + "-weave", g.weave_length, n + 1, SegmentClass::mainline, g.speed_context);
        leg.merge = net.add_segment(tag + "-merge", g.merge_length, n + 1, SegmentClass::mainline, g.speed_context);
        leg.departure = net.add_segment(tag + "-departure", g.arm_length, n, SegmentClass::mainline, g.speed_context);
        leg.direct_off = net.add_segment(tag + "-right-off", ramp_half, 1, SegmentClass::off_ramp, g.speed_context);
        leg.direct_on = net.add_segment(tag + "-right-on", ramp_half, 1, SegmentClass::on_ramp, g.speed_context);
        leg.loop = net.add_segment(tag + "-left-loop", g.loop_length, 1, SegmentClass::loop_ramp, g.speed_context);
    }

    for (int d = 0; d < 4; ++d) {
        const auto& leg = c.legs[d];
        net.connect_lanes(leg.approach, 0, leg.weave, 1, n);
        net.connect_lanes(leg.weave, 1, leg.merge, 1, n);
        net.connect_lanes(leg.merge, 1, leg.departure, 0, n);
        net.mark_lane_end({leg.merge, 0});

        // Right turn: approach lane 0 -> direct ramp -> acceleration lane of the crossing road.
        net.connect({leg.approach, 0}, {leg.direct_off, 0});
        net.connect({leg.direct_off, 0}, {leg.direct_on, 0});
        net.connect({leg.direct_on, 0}, {c.legs[right_of(d)].merge, 0});

        // Left turn: auxiliary weave lane -> loop -> auxiliary lane of the crossing road.
        net.connect({leg.weave, 0}, {leg.loop, 0});
        net.connect({leg.loop, 0}, {c.legs[left_of(d)].weave, 0});
    }

    for (int d = 0; d < 4; ++d) {
        auto& leg = c.legs[d];
        leg.exit = net.add_exit(leg.departure, std::string(kDirectionNames[d]) + "-exit");
        for (int l = 0; l < n; ++l) net.add_entry({leg.approach, l});
        for (int i = 0; i < g.detectors_per_arm; ++i) {
            const double off = g.detector_offset + i * g.detector_spacing;
            net.add_detector(leg.approach, g.arm_length - off, g.detector_window);
            net.add_detector(leg.departure, off, g.detector_window);
        }
    }

    net.finalize();
    return c;
}

} // namespace hetsim
