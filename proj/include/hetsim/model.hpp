#pragma once

/// Longitudinal (E-IDM) and lateral (MOBIL) controller laws.
///
/// Everything in this header is a pure function of its arguments. The
/// engine calls these once per vehicle and step, so they avoid allocation
/// and keep the no-leader case on the same code path as the general one.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hetsim {

inline constexpr double kMphToMps = 0.44704;

/// Gap used for "no vehicle ahead". Large enough that the interaction term
/// is irrelevant; the IDM evaluates it as exactly zero.
inline constexpr double kNoLeaderGap = 1.0e6;

/// Hard braking limit applied to every commanded acceleration.
inline constexpr double kEmergencyDecel = 9.0;

/// Parameters of one vehicle controller, SI units throughout.
struct ControllerParams {
    double desired_speed = 31.2928;      // v0 [m/s]
    double time_headway = 2.0;           // T [s]
    double max_accel = 3.5;              // a [m/s^2]
    double comfortable_decel = 5.75;     // b [m/s^2], positive
    double accel_exponent = 4.0;         // delta
    double min_gap = 4.0;                // s0 [m]
    double coolness = 0.95;              // c in [0, 1)
    double politeness = 0.5;             // p
    double lc_threshold = 0.5;           // a_delta [m/s^2]
    double lc_bias = 0.6;                // a_bias [m/s^2]
    double critical_speed = 23.4696;     // v_crit [m/s]
    double safe_decel = 4.0;             // b_safe [m/s^2], positive
    double length = 9.75;                // L [m]
    double max_speed = 49.1744;          // v_max [m/s]

    friend bool operator==(const ControllerParams&, const ControllerParams&) = default;
};

class InvalidParams : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Throws InvalidParams naming the first offending field.
inline void validate(const ControllerParams& p) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw InvalidParams(std::string(name) + " must be finite and > 0");
    };
    positive(p.desired_speed, "desired_speed");
    positive(p.time_headway, "time_headway");
    positive(p.max_accel, "max_accel");
    positive(p.comfortable_decel, "comfortable_decel");
    positive(p.accel_exponent, "accel_exponent");
    positive(p.min_gap, "min_gap");
    positive(p.critical_speed, "critical_speed");
    positive(p.safe_decel, "safe_decel");
    positive(p.length, "length");
    positive(p.max_speed, "max_speed");
    // The sampling box allows a zero threshold, so only negatives are rejected.
    if (!(p.lc_threshold >= 0.0)) throw InvalidParams("lc_threshold must be >= 0");
    if (!(p.coolness >= 0.0 && p.coolness < 1.0)) throw InvalidParams("coolness must lie in [0, 1)");
    if (!std::isfinite(p.politeness)) throw InvalidParams("politeness must be finite");
    if (!std::isfinite(p.lc_bias)) throw InvalidParams("lc_bias must be finite");
}

/// Situation of a vehicle relative to the vehicle it follows.
struct LongitudinalContext {
    double speed = 0.0;        // ego velocity
    double gap = kNoLeaderGap; // bumper-to-bumper distance to the leader
    double approach_rate = 0.0; // ego velocity minus leader velocity
    double leader_accel = 0.0;

    static constexpr LongitudinalContext free_road(double speed) {
        return {speed, kNoLeaderGap, 0.0, 0.0};
    }
    constexpr bool has_leader() const { return gap < kNoLeaderGap; }
};

/// Raised when a gap is non-positive, i.e. two vehicles overlap.
class CollisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dynamic desired gap, floored at the standstill gap.
inline double idm_desired_gap(const ControllerParams& p, double speed, double approach_rate) {
    const double dynamic = speed * p.time_headway
        + speed * approach_rate / (2.0 * std::sqrt(p.max_accel * p.comfortable_decel));
    return p.min_gap + std::max(dynamic, 0.0);
}

inline double free_road_term(const ControllerParams& p, double speed) {
    const double ratio = speed / p.desired_speed;
    // Integer exponents are common (delta = 4) and much cheaper than pow.
    if (p.accel_exponent == 4.0) {
        const double sq = ratio * ratio;
        return sq * sq;
    }
    return std::pow(ratio, p.accel_exponent);
}

inline double idm_acceleration(const ControllerParams& p, const LongitudinalContext& ctx,
                               double decel_floor = kEmergencyDecel) {
    if (!(ctx.gap > 0.0))
        throw CollisionError("non-positive gap " + std::to_string(ctx.gap));
    double interaction = 0.0;
    if (ctx.has_leader()) {
        const double ratio = idm_desired_gap(p, ctx.speed, ctx.approach_rate) / ctx.gap;
        interaction = ratio * ratio;
    }
    const double acc = p.max_accel * (1.0 - free_road_term(p, ctx.speed) - interaction);
    return std::max(acc, -decel_floor);
}

/// Constant-acceleration heuristic: the acceleration that avoids a crash if
/// the leader keeps its current acceleration (capped at the ego maximum).
inline double cah_acceleration(const ControllerParams& p, const LongitudinalContext& ctx) {
    const double leader_speed = ctx.speed - ctx.approach_rate;
    const double leader_acc = std::min(ctx.leader_accel, p.max_accel);
    const double closing = std::max(ctx.approach_rate, 0.0);
    const double denom = leader_speed * leader_speed - 2.0 * ctx.gap * leader_acc;
    if (leader_speed * closing < -2.0 * ctx.gap * leader_acc && denom != 0.0)
        return ctx.speed * ctx.speed * leader_acc / denom;
    return leader_acc - 0.5 * closing * closing / ctx.gap;
}

/// IDM blended with the CAH through the coolness factor. c = 0 is plain IDM.
inline double eidm_acceleration(const ControllerParams& p, const LongitudinalContext& ctx,
                                double decel_floor = kEmergencyDecel) {
    const double acc_idm = idm_acceleration(p, ctx, decel_floor);
    if (!ctx.has_leader() || p.coolness == 0.0) return acc_idm;
    const double acc_cah = cah_acceleration(p, ctx);
    if (acc_idm >= acc_cah) return acc_idm;
    const double b = p.comfortable_decel;
    const double blended = (1.0 - p.coolness) * acc_idm
        + p.coolness * (acc_cah + b * std::tanh((acc_idm - acc_cah) / b));
    return std::max(blended, -decel_floor);
}

enum class LaneDirection { toward_faster, toward_slower };

/// Accelerations before and after a prospective lane change.
struct LaneChangeContext {
    double ego_now = 0.0;
    double ego_after = 0.0;
    double new_follower_now = 0.0;
    double new_follower_after = 0.0;
    double old_follower_now = 0.0;
    double old_follower_after = 0.0;
    LaneDirection direction = LaneDirection::toward_faster;
    bool congested = false;
};

inline bool mobil_safety_ok(const LaneChangeContext& ctx, const ControllerParams& p) {
    return ctx.new_follower_after >= -p.safe_decel;
}

/// Threshold the weighted advantage has to exceed. Below the critical speed
/// the keep-lane bias is dropped and the symmetric rule applies.
inline double mobil_threshold(const LaneChangeContext& ctx, const ControllerParams& p) {
    if (ctx.congested) return p.lc_threshold;
    return ctx.direction == LaneDirection::toward_faster ? p.lc_threshold + p.lc_bias
                                                         : p.lc_threshold - p.lc_bias;
}

inline double mobil_advantage(const LaneChangeContext& ctx, const ControllerParams& p) {
    const double own = ctx.ego_after - ctx.ego_now;
    const double others = (ctx.new_follower_after - ctx.new_follower_now)
        + (ctx.old_follower_after - ctx.old_follower_now);
    return own + p.politeness * others;
}

/// Incentive criterion only; callers check mobil_safety_ok first.
inline bool mobil_incentive(const LaneChangeContext& ctx, const ControllerParams& p) {
    return mobil_advantage(ctx, p) > mobil_threshold(ctx, p);
}

} // namespace hetsim
