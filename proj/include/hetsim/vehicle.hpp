#pragma once

#include <cstdint>

#include "model.hpp"
#include "network.hpp"

namespace hetsim {

using VehicleId = std::uint64_t;

struct VehicleState {
    VehicleId id = 0;
    LaneRef lane;
    double x = 0.0;        // front bumper, metres from the segment start
    double speed = 0.0;
    double accel = 0.0;    // last commanded acceleration
    ControllerParams params;
    ExitId exit = 0;       // route target
    std::uint32_t lane_changes = 0;
    double last_lane_change = -1.0e9;

    double rear() const { return x - params.length; }
};

} // namespace hetsim
