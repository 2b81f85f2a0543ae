#pragma once

/// Heterogeneous fleet generation: controller parameters drawn from
/// independent Gaussians centred on a mean vector, with a standard deviation
/// proportional to each parameter's allowed range, then capped to the range.

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"
#include "rng.hpp"

namespace hetsim {

/// The sampled controller parameters. Headway time, coolness and the safe
/// deceleration are fixed for every vehicle and are not part of this set.
enum class Param : std::size_t {
    politeness,
    lc_bias,
    min_gap,
    critical_speed,
    lc_threshold,
    comfortable_decel,
    accel_exponent,
    length,
    max_speed,
    desired_speed,
    max_accel,
};

inline constexpr std::size_t kNumParams = 11;

using ParamVector = std::array<double, kNumParams>;

inline constexpr std::array<std::string_view, kNumParams> kParamNames = {
    "p", "a_bias", "s0", "v_crit", "a_delta", "b", "delta", "L", "v_max", "v0", "a"};

constexpr std::size_t index(Param p) { return static_cast<std::size_t>(p); }

inline std::string_view param_name(Param p) { return kParamNames[index(p)]; }

inline std::optional<Param> param_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kNumParams; ++i)
        if (kParamNames[i] == name) return static_cast<Param>(i);
    return std::nullopt;
}

inline constexpr std::array<Param, kNumParams> all_params() {
    std::array<Param, kNumParams> out{};
    for (std::size_t i = 0; i < kNumParams; ++i) out[i] = static_cast<Param>(i);
    return out;
}

struct ParamBounds {
    ParamVector min;
    ParamVector max;

    double range(std::size_t i) const { return max[i] - min[i]; }
    ParamVector midpoint() const {
        ParamVector m;
        for (std::size_t i = 0; i < kNumParams; ++i) m[i] = 0.5 * (min[i] + max[i]);
        return m;
    }
};

/// Default caps, converted to SI.
inline ParamBounds default_bounds() {
    ParamBounds b;
    auto set = [&](Param p, double lo, double hi) {
        b.min[index(p)] = lo;
        b.max[index(p)] = hi;
    };
    set(Param::politeness, 0.0, 1.0);
    set(Param::lc_bias, 0.2, 1.0);
    set(Param::min_gap, 3.0, 5.0);
    set(Param::critical_speed, 40.0 * kMphToMps, 65.0 * kMphToMps);
    set(Param::lc_threshold, 0.0, 1.0);
    set(Param::comfortable_decel, 4.0, 7.5);
    set(Param::accel_exponent, 3.0, 5.0);
    set(Param::length, 3.0, 16.5);
    set(Param::max_speed, 70.0 * kMphToMps, 150.0 * kMphToMps);
    set(Param::desired_speed, 40.0 * kMphToMps, 100.0 * kMphToMps);
    set(Param::max_accel, 0.5, 6.5);
    return b;
}

/// Parameters that never vary between vehicles.
struct FixedParams {
    double time_headway = 2.0;
    double coolness = 0.95;
    double safe_decel = 4.0;
};

struct FleetSpec {
    ParamVector mean{};
    ParamBounds bounds = default_bounds();
    /// Heterogeneity per parameter. A single fleet-wide value is the common case.
    ParamVector sigma{};
    FixedParams fixed{};

    static FleetSpec centred(double sigma) {
        FleetSpec s;
        s.mean = s.bounds.midpoint();
        s.sigma.fill(sigma);
        return s;
    }

    double stddev(std::size_t i) const { return 0.5 * sigma[i] * bounds.range(i); }

    void validate() const {
        for (std::size_t i = 0; i < kNumParams; ++i) {
            const std::string name(kParamNames[i]);
            if (!(bounds.min[i] <= bounds.max[i]))
                throw std::invalid_argument("bounds for " + name + " are inverted");
            if (!(mean[i] >= bounds.min[i] && mean[i] <= bounds.max[i]))
                throw std::invalid_argument("mean of " + name + " lies outside its bounds");
            if (!(sigma[i] >= 0.0)) throw std::invalid_argument("sigma of " + name + " must be >= 0");
        }
    }
};

inline ControllerParams to_controller(const ParamVector& theta, const FixedParams& fixed) {
    ControllerParams c;
    c.politeness = theta[index(Param::politeness)];
    c.lc_bias = theta[index(Param::lc_bias)];
    c.min_gap = theta[index(Param::min_gap)];
    c.critical_speed = theta[index(Param::critical_speed)];
    c.lc_threshold = theta[index(Param::lc_threshold)];
    c.comfortable_decel = theta[index(Param::comfortable_decel)];
    c.accel_exponent = theta[index(Param::accel_exponent)];
    c.length = theta[index(Param::length)];
    c.max_speed = theta[index(Param::max_speed)];
    c.desired_speed = theta[index(Param::desired_speed)];
    c.max_accel = theta[index(Param::max_accel)];
    c.time_headway = fixed.time_headway;
    c.coolness = fixed.coolness;
    c.safe_decel = fixed.safe_decel;
    return c;
}

inline ParamVector to_vector(const ControllerParams& c) {
    ParamVector v;
    v[index(Param::politeness)] = c.politeness;
    v[index(Param::lc_bias)] = c.lc_bias;
    v[index(Param::min_gap)] = c.min_gap;
    v[index(Param::critical_speed)] = c.critical_speed;
    v[index(Param::lc_threshold)] = c.lc_threshold;
    v[index(Param::comfortable_decel)] = c.comfortable_decel;
    v[index(Param::accel_exponent)] = c.accel_exponent;
    v[index(Param::length)] = c.length;
    v[index(Param::max_speed)] = c.max_speed;
    v[index(Param::desired_speed)] = c.desired_speed;
    v[index(Param::max_accel)] = c.max_accel;
    return v;
}

/// One controller: Gaussian draw per component, capped into the bounds.
/// Every component consumes one standard normal whatever its sigma, so a
/// vehicle keeps the same underlying draws when only the spreads change.
inline ControllerParams sample_controller(const FleetSpec& spec, Rng& rng) {
    ParamVector theta;
    for (std::size_t i = 0; i < kNumParams; ++i) {
        const double z = rng.normal(0.0, 1.0);
        theta[i] = std::clamp(spec.mean[i] + spec.stddev(i) * z, spec.bounds.min[i], spec.bounds.max[i]);
    }
    return to_controller(theta, spec.fixed);
}

inline std::vector<ControllerParams> sample_fleet(const FleetSpec& spec, std::size_t n, Rng& rng) {
    std::vector<ControllerParams> fleet;
    fleet.reserve(n);
    for (std::size_t i = 0; i < n; ++i) fleet.push_back(sample_controller(spec, rng));
    return fleet;
}

/// Draws a fleet mean uniformly from the bounds shrunk by two standard
/// deviations on each side, so capping barely distorts the fleet.
inline ParamVector sample_mean_vector(const ParamBounds& bounds, double sigma, Rng& rng) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
    ParamVector mean;
    for (std::size_t i = 0; i < kNumParams; ++i) {
        const double range = bounds.range(i);
        const double margin = sigma * range;
        if (range > 0.0 && margin >= 0.5 * range)
            throw std::invalid_argument("sigma " + std::to_string(sigma) + " leaves no admissible mean for "
                                        + std::string(kParamNames[i]));
        const double lo = bounds.min[i] + margin;
        const double hi = bounds.max[i] - margin;
        mean[i] = range > 0.0 ? rng.uniform(lo, hi) : bounds.min[i];
    }
    return mean;
}

} // namespace hetsim
