#pragma once

/// Fixed-step traffic simulation over a road network.
///
/// One step: commanded accelerations for every vehicle, ballistic
/// integration, segment transitions and exits, overlap check, sequential
/// MOBIL lane changes (vehicle id order), boundary insertion, detector
/// bookkeeping. A simulation is single threaded and fully determined by its
/// configuration, fleet and seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cloverleaf.hpp"
#include "model.hpp"
#include "neighbors.hpp"
#include "network.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "vehicle.hpp"

namespace hetsim {

enum class InflowSchedule { constant, ramped };

/// Share of arrivals per turning movement at a cloverleaf entry.
struct RouteSplit {
    double through = 0.6;
    double right = 0.2;
    double left = 0.2;
};

struct SimulationConfig {
    double timestep = 0.05;
    double duration = 120.0;
    double inflow_vph = 4400.0;
    InflowSchedule schedule = InflowSchedule::constant;
    double ramp_start_vph = 2000.0;
    double ramp_end_vph = 12000.0;
    std::uint64_t seed = 1;
    CloverleafGeometry geometry;
    RouteSplit routes;
    double mandatory_zone = 500.0;
    LookaheadLimits lookahead;
    double lane_change_cooldown = 0.0;
    double emergency_decel = kEmergencyDecel;
    /// Report lane changes per second per vehicle on the network instead of
    /// the network total.
    bool lcps_per_vehicle = false;
    /// Emit one state event per vehicle and step to the event sink.
    bool log_states = false;

    void validate() const {
        if (!(timestep > 0.0)) throw std::invalid_argument("timestep must be > 0");
        if (!(duration > 0.0)) throw std::invalid_argument("duration must be > 0");
        if (!(inflow_vph >= 0.0)) throw std::invalid_argument("inflow must be >= 0");
        if (!(ramp_start_vph >= 0.0 && ramp_end_vph >= 0.0)) throw std::invalid_argument("ramp inflow must be >= 0");
        if (!(mandatory_zone >= 0.0)) throw std::invalid_argument("mandatory zone must be >= 0");
        if (!(emergency_decel > 0.0)) throw std::invalid_argument("emergency deceleration must be > 0");
        if (!(routes.through >= 0.0 && routes.right >= 0.0 && routes.left >= 0.0)
            || !(routes.through + routes.right + routes.left > 0.0))
            throw std::invalid_argument("route split must be non-negative with a positive sum");
        geometry.validate();
    }

    /// Total network demand at simulated time t.
    double inflow_at(double t) const {
        if (schedule == InflowSchedule::constant) return inflow_vph;
        const double frac = std::clamp(t / duration, 0.0, 1.0);
        return ramp_start_vph + (ramp_end_vph - ramp_start_vph) * frac;
    }
};

struct DensityFlowSample {
    double time = 0.0;
    double density_vpkm = 0.0; // vehicles per km per lane on mainline segments
    double flow_vph = 0.0;     // mean detector flow per cross-section
    friend bool operator==(const DensityFlowSample&, const DensityFlowSample&) = default;
};

struct MetricsRecord {
    double lcps = 0.0;
    double mean_abs_acc = 0.0;
    double max_throughput_vph = 0.0;
    std::vector<DensityFlowSample> density_flow;
    std::uint64_t inserted = 0;
    std::uint64_t exited = 0;
    std::uint64_t lane_changes = 0;
    std::uint64_t on_network = 0;
    bool crashed = false;
    std::string failure;
    friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

enum class EventKind { inserted, lane_change, exited, crash, state };

inline const char* to_string(EventKind k) {
    switch (k) {
    case EventKind::inserted: return "insert";
    case EventKind::lane_change: return "lane_change";
    case EventKind::exited: return "exit";
    case EventKind::crash: return "crash";
    case EventKind::state: return "state";
    }
    return "?";
}

struct SimEvent {
    double time = 0.0;
    VehicleId vehicle = 0;
    SegmentId segment = 0;
    int lane = 0;
    double x = 0.0;
    double speed = 0.0;
    double accel = 0.0;
    EventKind kind = EventKind::state;
    /// For lane changes: acceleration imposed on the new follower, and the
    /// follower's safe deceleration limit it was checked against.
    double follower_accel_after = 0.0;
    double safe_decel = 0.0;
    bool mandatory = false;
};

using EventSink = std::function<void(const SimEvent&)>;

/// A network together with where arriving vehicles are routed.
struct Scenario {
    std::shared_ptr<const RoadNetwork> network;
    /// Per entry boundary: candidate exits with weights.
    std::vector<std::vector<std::pair<ExitId, double>>> routes;

    /// Every reachable exit with equal weight.
    static Scenario uniform_routes(RoadNetwork net) {
        if (!net.finalized()) net.finalize();
        Scenario s;
        for (const auto& e : net.entries()) {
            std::vector<std::pair<ExitId, double>> r;
            for (ExitId x = 0; x < net.exits().size(); ++x)
                if (net.segment_reaches(e.lane.segment, x)) r.emplace_back(x, 1.0);
            s.routes.push_back(std::move(r));
        }
        s.network = std::make_shared<const RoadNetwork>(std::move(net));
        return s;
    }
};

inline Scenario cloverleaf_scenario(const CloverleafGeometry& g, const RouteSplit& split) {
    auto clover = build_cloverleaf(g);
    Scenario s;
    for (const auto& e : clover.network.entries()) {
        int d = 0;
        while (clover.legs[d].approach != e.lane.segment) ++d;
        s.routes.push_back({{clover.through_exit(d), split.through},
                            {clover.right_exit(d), split.right},
                            {clover.left_exit(d), split.left}});
    }
    s.network = std::make_shared<const RoadNetwork>(std::move(clover.network));
    return s;
}

class Simulation {
public:
    Simulation(SimulationConfig config, FleetSpec fleet)
        : Simulation(config, fleet, cloverleaf_scenario(config.geometry, config.routes)) {}

    Simulation(SimulationConfig config, FleetSpec fleet, Scenario scenario)
        : config_(std::move(config)), fleet_(std::move(fleet)), scenario_(std::move(scenario)),
          net_(*scenario_.network) {
        config_.validate();
        fleet_.validate();
        if (scenario_.routes.size() != net_.entries().size())
            throw std::invalid_argument("scenario needs one route table per entry");
        double total_share = 0.0;
        for (const auto& e : net_.entries()) total_share += e.share;
        for (std::uint32_t e = 0; e < net_.entries().size(); ++e) {
            EntryState st(Rng(derive_seed(config_.seed, {kArrivalStream, e})));
            st.share = net_.entries()[e].share / total_share;
            st.threshold = st.rng.exponential(1.0);
            entries_.push_back(std::move(st));
        }
        for (std::size_t d = 0; d < net_.detectors().size(); ++d)
            detectors_by_segment_.emplace_back(net_.detectors()[d].segment, d);
        window_ = net_.detectors().empty() ? config_.geometry.detector_window : net_.detectors().front().window;
        mainline_lane_km_ = net_.lane_km(SegmentClass::mainline);
        index_.rebuild(net_, vehicles_);
    }

    const RoadNetwork& network() const { return net_; }
    const SimulationConfig& config() const { return config_; }
    std::span<const VehicleState> vehicles() const { return vehicles_; }
    const LaneIndex& lane_index() const { return index_; }
    double time() const { return time_; }
    std::uint64_t inserted() const { return inserted_; }
    std::uint64_t exited() const { return exited_; }
    std::uint64_t lane_changes() const { return lane_change_count_; }
    std::size_t queued() const {
        std::size_t q = 0;
        for (const auto& e : entries_) q += e.queue.size();
        return q;
    }

    void set_event_sink(EventSink sink) { sink_ = std::move(sink); }

    /// Places a vehicle directly; used to set up scenarios by hand.
    VehicleId spawn(LaneRef lane, double x, double speed, const ControllerParams& params,
                    std::optional<ExitId> exit = std::nullopt) {
        validate(params);
        if (!net_.has_lane(lane.segment, lane.lane)) throw std::invalid_argument("spawn: no such lane");
        VehicleState v;
        v.id = next_id_++;
        v.lane = lane;
        v.x = x;
        v.speed = speed;
        v.params = params;
        v.exit = exit ? *exit : net_.first_reachable_exit(lane.segment).value_or(0);
        vehicles_.push_back(v);
        index_.insert(net_, vehicles_, static_cast<std::uint32_t>(vehicles_.size() - 1), lane);
        ++inserted_;
        return v.id;
    }

    /// Commanded acceleration of a vehicle in its current situation.
    double acceleration_of(std::uint32_t slot) const {
        const auto& v = vehicles_[slot];
        const auto leader = leader_of(net_, index_, vehicles_, slot, 0, config_.lookahead);
        const auto ctx = leader ? LongitudinalContext{v.speed, leader->gap, v.speed - leader->speed, leader->accel}
                                : LongitudinalContext::free_road(v.speed);
        double acc = eidm_acceleration(v.params, ctx, config_.emergency_decel);
        const auto& seg = net_.segment(v.lane.segment);
        if (seg.lane_ends[v.lane.lane]) {
            const double to_end = std::max(seg.length - v.x, 1e-3);
            acc = std::min(acc, eidm_acceleration(v.params, {v.speed, to_end, v.speed, 0.0}, config_.emergency_decel));
        }
        return acc;
    }

    void step() {
        const double dt = config_.timestep;
        update_accelerations();
        integrate(dt);
        advance_segments();
        check_overlaps();
        change_lanes();
        insert_vehicles(dt);
        time_ = static_cast<double>(++steps_) * dt;
        update_detectors();
        if (config_.log_states && sink_)
            for (const auto& v : vehicles_) emit(v, EventKind::state);
    }

    /// Accumulates arrivals over dt and inserts at most one queued vehicle
    /// per entry whose spawn gap is safe.
    void insert_vehicles(double dt) {
        const double rate = config_.inflow_at(time_) / 3600.0;
        for (std::uint32_t e = 0; e < entries_.size(); ++e) {
            auto& st = entries_[e];
            st.accumulated += rate * st.share * dt;
            while (st.accumulated >= st.threshold) {
                st.accumulated -= st.threshold;
                st.threshold = st.rng.exponential(1.0);
                st.queue.push_back(make_arrival(e, st.arrivals++));
            }
            if (!st.queue.empty() && try_insert(net_.entries()[e].lane, st.queue.front())) st.queue.pop_front();
        }
    }

    MetricsRecord metrics() const {
        MetricsRecord m;
        const double elapsed = time_ > 0.0 ? time_ : config_.duration;
        m.lane_changes = lane_change_count_;
        m.lcps = static_cast<double>(lane_change_count_) / elapsed;
        if (config_.lcps_per_vehicle)
            m.lcps = vehicle_seconds_ > 0.0 ? static_cast<double>(lane_change_count_) / vehicle_seconds_ : 0.0;
        m.mean_abs_acc = acc_samples_ > 0 ? abs_acc_sum_ / static_cast<double>(acc_samples_) : 0.0;
        m.density_flow = samples_;
        for (const auto& s : samples_) m.max_throughput_vph = std::max(m.max_throughput_vph, s.flow_vph);
        m.inserted = inserted_;
        m.exited = exited_;
        m.on_network = vehicles_.size();
        return m;
    }

    /// Runs to the configured duration. A collision ends the run early and
    /// is reported in the returned record.
    MetricsRecord run() {
        const auto steps = static_cast<long>(std::llround(config_.duration / config_.timestep));
        try {
            for (long i = 0; i < steps; ++i) step();
        } catch (const CollisionError& e) {
            auto m = metrics();
            m.crashed = true;
            m.failure = "collision at t=" + std::to_string(time_) + ": " + e.what();
            if (sink_) {
                SimEvent ev;
                ev.time = time_;
                ev.kind = EventKind::crash;
                sink_(ev);
            }
            return m;
        }
        return metrics();
    }

private:
    static constexpr std::uint64_t kArrivalStream = 1;
    static constexpr std::uint64_t kVehicleStream = 2;

    struct Arrival {
        ControllerParams params;
        ExitId exit = 0;
    };

    struct EntryState {
        explicit EntryState(Rng r) : rng(std::move(r)) {}
        Rng rng;
        double share = 1.0;
        double accumulated = 0.0;
        double threshold = 1.0;
        std::uint64_t arrivals = 0;
        std::deque<Arrival> queue;
    };

    /// Vehicle k of entry e gets its own stream, so the fleet does not
    /// depend on when or whether other vehicles were inserted.
    Arrival make_arrival(std::uint32_t entry, std::uint64_t k) const {
        Rng rng(derive_seed(config_.seed, {kVehicleStream, entry, k}));
        Arrival a;
        a.params = sample_controller(fleet_, rng);
        const auto& options = scenario_.routes[entry];
        double total = 0.0;
        for (const auto& [exit, w] : options) total += w;
        double pick = rng.uniform(0.0, total);
        a.exit = options.empty() ? 0 : options.back().first;
        for (const auto& [exit, w] : options) {
            if (pick < w) {
                a.exit = exit;
                break;
            }
            pick -= w;
        }
        return a;
    }

    bool try_insert(LaneRef lane, const Arrival& arrival) {
        const auto& p = arrival.params;
        std::optional<Neighbor> leader;
        const auto occupants = index_.lane(net_, lane);
        if (!occupants.empty()) {
            const auto& v = vehicles_[occupants.front()];
            leader = Neighbor{occupants.front(), v.x - v.params.length, v.speed, v.accel};
        } else {
            double distance = net_.segment(lane.segment).length;
            LaneRef cur = lane;
            for (int hop = 1; hop <= config_.lookahead.max_hops && distance <= config_.lookahead.horizon; ++hop) {
                auto next = net_.next_toward(cur, arrival.exit);
                if (!next) break;
                cur = *next;
                const auto ahead = index_.lane(net_, cur);
                if (!ahead.empty()) {
                    const auto& v = vehicles_[ahead.front()];
                    leader = Neighbor{ahead.front(), distance + v.x - v.params.length, v.speed, v.accel};
                    break;
                }
                distance += net_.segment(cur.segment).length;
            }
        }
        double speed = std::min(p.desired_speed, p.max_speed);
        if (leader) {
            if (!(leader->gap > 0.0)) return false;
            speed = std::min(speed, leader->speed);
            const LongitudinalContext ctx{speed, leader->gap, speed - leader->speed, leader->accel};
            if (idm_acceleration(p, ctx, config_.emergency_decel) < -p.comfortable_decel) return false;
        }
        VehicleState v;
        v.id = next_id_++;
        v.lane = lane;
        v.x = 0.0;
        v.speed = speed;
        v.params = p;
        v.exit = arrival.exit;
        vehicles_.push_back(v);
        index_.insert(net_, vehicles_, static_cast<std::uint32_t>(vehicles_.size() - 1), lane);
        ++inserted_;
        emit(v, EventKind::inserted);
        return true;
    }

    void update_accelerations() {
        accel_.resize(vehicles_.size());
        for (std::uint32_t i = 0; i < vehicles_.size(); ++i) accel_[i] = acceleration_of(i);
        for (std::uint32_t i = 0; i < vehicles_.size(); ++i) vehicles_[i].accel = accel_[i];
    }

    void integrate(double dt) {
        for (auto& v : vehicles_) {
            const double x0 = v.x;
            const double v0 = v.speed;
            const double v1 = std::min(std::max(0.0, v0 + v.accel * dt), v.params.max_speed);
            v.speed = v1;
            v.x = x0 + 0.5 * (v0 + v1) * dt;
            abs_acc_sum_ += std::abs(v1 - v0) / dt;
            ++acc_samples_;
            vehicle_seconds_ += dt;
            for (const auto& [seg, d] : detectors_by_segment_) {
                if (seg != v.lane.segment) continue;
                const double pos = net_.detectors()[d].position;
                if (x0 < pos && v.x >= pos) ++window_crossings_;
            }
        }
    }

    void advance_segments() {
        bool removed = false;
        for (auto& v : vehicles_) {
            while (true) {
                const auto& seg = net_.segment(v.lane.segment);
                if (v.x < seg.length) break;
                if (seg.exit) {
                    emit(v, EventKind::exited);
                    v.x = std::numeric_limits<double>::infinity();
                    removed = true;
                    ++exited_;
                    break;
                }
                if (seg.lane_ends[v.lane.lane]) {
                    v.x = seg.length - 1e-3;
                    v.speed = 0.0;
                    break;
                }
                auto next = net_.next_toward(v.lane, v.exit);
                if (!next) {
                    // Missed the route: continue on the first successor and
                    // retarget to an exit still reachable from there.
                    next = seg.successors[v.lane.lane].front();
                    v.exit = net_.first_reachable_exit(next->segment).value_or(v.exit);
                }
                v.x -= seg.length;
                v.lane = *next;
            }
        }
        if (removed)
            vehicles_.erase(std::remove_if(vehicles_.begin(), vehicles_.end(),
                                           [](const VehicleState& v) { return std::isinf(v.x); }),
                            vehicles_.end());
        index_.rebuild(net_, vehicles_);
    }

    void check_overlaps() const {
        for (const auto& seg : net_.segments()) {
            for (int l = 0; l < seg.lane_count; ++l) {
                const auto lane = index_.lane(net_, {seg.id, l});
                for (std::size_t i = 1; i < lane.size(); ++i) {
                    const auto& back = vehicles_[lane[i - 1]];
                    const auto& front = vehicles_[lane[i]];
                    if (front.rear() - back.x <= 0.0) {
                        std::ostringstream msg;
                        msg << "vehicles " << back.id << " and " << front.id << " overlap on " << seg.name
                            << " lane " << l << " (gap " << front.rear() - back.x << " m)";
                        throw CollisionError(msg.str());
                    }
                }
            }
        }
    }

    struct Candidate {
        int offset = 0;
        double score = -std::numeric_limits<double>::infinity();
        double follower_after = 0.0;
        bool mandatory = false;
    };

    std::optional<Candidate> evaluate_lane_change(std::uint32_t slot, int offset, int required) const {
        const auto& ego = vehicles_[slot];
        const auto& seg = net_.segment(ego.lane.segment);
        const LaneRef target{ego.lane.segment, ego.lane.lane + offset};
        if (!net_.has_lane(target.segment, target.lane) || seg.lane_ends[target.lane]) return std::nullopt;
        const bool in_zone = seg.length - ego.x < config_.mandatory_zone;
        const bool mandatory = required != 0;
        if (mandatory && offset != required) return std::nullopt;
        if (!mandatory && in_zone && !net_.lane_serves(target, ego.exit)) return std::nullopt;

        const auto new_leader = leader_of(net_, index_, vehicles_, slot, offset, config_.lookahead);
        const auto new_follower = follower_of(net_, index_, vehicles_, slot, offset, config_.lookahead);
        if (new_leader && new_leader->gap <= 0.0) return std::nullopt;
        if (new_follower && new_follower->gap <= 0.0) return std::nullopt;

        const double floor = config_.emergency_decel;
        LaneChangeContext ctx;
        ctx.direction = offset > 0 ? LaneDirection::toward_faster : LaneDirection::toward_slower;
        ctx.congested = ego.speed < ego.params.critical_speed;
        ctx.ego_now = ego.accel;
        ctx.ego_after = eidm_acceleration(
            ego.params,
            new_leader ? LongitudinalContext{ego.speed, new_leader->gap, ego.speed - new_leader->speed, new_leader->accel}
                       : LongitudinalContext::free_road(ego.speed),
            floor);
        if (new_follower) {
            const auto& f = vehicles_[new_follower->slot];
            ctx.new_follower_now = f.accel;
            ctx.new_follower_after = eidm_acceleration(
                f.params, {f.speed, new_follower->gap, f.speed - ego.speed, ego.accel}, floor);
        }
        if (!mobil_safety_ok(ctx, ego.params)) return std::nullopt;
        // The ego must not need more than the safe deceleration either.
        if (ctx.ego_after < -ego.params.safe_decel) return std::nullopt;

        const auto old_follower = follower_of(net_, index_, vehicles_, slot, 0, config_.lookahead);
        if (old_follower) {
            const auto& f = vehicles_[old_follower->slot];
            const auto leader = leader_of(net_, index_, vehicles_, slot, 0, config_.lookahead);
            ctx.old_follower_now = f.accel;
            ctx.old_follower_after = eidm_acceleration(
                f.params,
                leader ? LongitudinalContext{f.speed, old_follower->gap + ego.params.length + leader->gap,
                                             f.speed - leader->speed, leader->accel}
                       : LongitudinalContext::free_road(f.speed),
                floor);
        }

        Candidate c;
        c.offset = offset;
        c.follower_after = ctx.new_follower_after;
        c.mandatory = mandatory;
        if (mandatory) {
            c.score = std::numeric_limits<double>::infinity();
            return c;
        }
        if (!mobil_incentive(ctx, ego.params)) return std::nullopt;
        c.score = mobil_advantage(ctx, ego.params) - mobil_threshold(ctx, ego.params);
        return c;
    }

    void change_lanes() {
        for (std::uint32_t slot = 0; slot < vehicles_.size(); ++slot) {
            auto& ego = vehicles_[slot];
            const auto& seg = net_.segment(ego.lane.segment);
            if (seg.lane_count == 1) continue;
            if (time_ - ego.last_lane_change < config_.lane_change_cooldown) continue;

            int required = 0;
            if (seg.length - ego.x < config_.mandatory_zone) {
                if (auto need = net_.lanes_to_serving(ego.lane, ego.exit); need && *need != 0)
                    required = *need > 0 ? 1 : -1;
            }
            if (seg.lane_ends[ego.lane.lane] && required == 0) required = 1;

            std::optional<Candidate> best;
            for (int offset : {1, -1}) {
                auto c = evaluate_lane_change(slot, offset, required);
                if (c && (!best || c->score > best->score)) best = c;
            }
            if (!best) continue;

            const LaneRef from = ego.lane;
            ego.lane = {from.segment, from.lane + best->offset};
            ++ego.lane_changes;
            ego.last_lane_change = time_;
            ++lane_change_count_;
            index_.relocate(net_, vehicles_, slot, from, ego.lane);
            if (sink_) {
                SimEvent ev = make_event(ego, EventKind::lane_change);
                ev.follower_accel_after = best->follower_after;
                ev.safe_decel = ego.params.safe_decel;
                ev.mandatory = best->mandatory;
                sink_(ev);
            }
        }
    }

    void update_detectors() {
        const double eps = 1e-9;
        if (!sampled_mid_ && time_ + eps >= window_start_ + 0.5 * window_) {
            std::size_t on_mainline = 0;
            for (const auto& v : vehicles_)
                if (net_.segment(v.lane.segment).kind == SegmentClass::mainline) ++on_mainline;
            pending_density_ = mainline_lane_km_ > 0.0 ? static_cast<double>(on_mainline) / mainline_lane_km_ : 0.0;
            sampled_mid_ = true;
        }
        if (time_ + eps >= window_start_ + window_) {
            const auto n = net_.detectors().size();
            if (n > 0) {
                DensityFlowSample s;
                s.time = window_start_ + 0.5 * window_;
                s.density_vpkm = pending_density_;
                s.flow_vph = static_cast<double>(window_crossings_) / static_cast<double>(n) / window_ * 3600.0;
                samples_.push_back(s);
            }
            window_crossings_ = 0;
            window_start_ += window_;
            sampled_mid_ = false;
        }
    }

    SimEvent make_event(const VehicleState& v, EventKind kind) const {
        SimEvent ev;
        ev.time = time_;
        ev.vehicle = v.id;
        ev.segment = v.lane.segment;
        ev.lane = v.lane.lane;
        ev.x = v.x;
        ev.speed = v.speed;
        ev.accel = v.accel;
        ev.kind = kind;
        return ev;
    }

    void emit(const VehicleState& v, EventKind kind) const {
        if (sink_) sink_(make_event(v, kind));
    }

    SimulationConfig config_;
    FleetSpec fleet_;
    Scenario scenario_;
    const RoadNetwork& net_;
    std::vector<VehicleState> vehicles_;
    std::vector<double> accel_;
    LaneIndex index_;
    std::vector<EntryState> entries_;
    std::vector<std::pair<SegmentId, std::size_t>> detectors_by_segment_;
    EventSink sink_;
    double time_ = 0.0;
    long steps_ = 0;
    VehicleId next_id_ = 0;
    std::uint64_t inserted_ = 0;
    std::uint64_t exited_ = 0;
    std::uint64_t lane_change_count_ = 0;
    double abs_acc_sum_ = 0.0;
    std::uint64_t acc_samples_ = 0;
    double vehicle_seconds_ = 0.0;
    double window_ = 10.0;
    double window_start_ = 0.0;
    bool sampled_mid_ = false;
    double pending_density_ = 0.0;
    std::uint64_t window_crossings_ = 0;
    double mainline_lane_km_ = 0.0;
    std::vector<DensityFlowSample> samples_;
};

inline MetricsRecord run_simulation(const SimulationConfig& config, const FleetSpec& fleet) {
    return Simulation(config, fleet).run();
}

} // namespace hetsim
