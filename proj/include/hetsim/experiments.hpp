#pragma once

/// Campaign orchestration: heterogeneity sweeps, OFAT screening and Sobol
/// analyses over the cloverleaf simulation.
///
/// Every evaluation point is simulated twice, once at constant inflow (lane
/// changes and acceleration) and once with the ramped inflow (throughput).
/// Run seeds come from derive_seed(master, {kind, point, mean, replicate});
/// with common seeds the point key is held at zero so every point of a
/// campaign sees the same arrivals and the same per-vehicle draws.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "engine.hpp"
#include "sampler.hpp"
#include "sensitivity.hpp"

namespace hetsim {

enum class ExperimentKind { het_sweep, ofat, sobol_het, sobol_mean, throughput };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::het_sweep: return "het-sweep";
    case ExperimentKind::ofat: return "ofat";
    case ExperimentKind::sobol_het: return "sobol-het";
    case ExperimentKind::sobol_mean: return "sobol-mean";
    case ExperimentKind::throughput: return "throughput";
    }
    return "?";
}

inline ExperimentKind kind_from_string(const std::string& s) {
    for (auto k : {ExperimentKind::het_sweep, ExperimentKind::ofat, ExperimentKind::sobol_het,
                   ExperimentKind::sobol_mean, ExperimentKind::throughput})
        if (s == to_string(k)) return k;
    throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

enum class Scale { full, desk };

inline Scale scale_from_string(const std::string& s) {
    if (s == "full") return Scale::full;
    if (s == "desk") return Scale::desk;
    throw std::invalid_argument("unknown scale '" + s + "' (expected full or desk)");
}

enum class Metric { lcps, mean_abs_acc, max_throughput };

inline constexpr std::array<Metric, 3> kMetrics = {Metric::lcps, Metric::mean_abs_acc, Metric::max_throughput};

inline const char* to_string(Metric m) {
    switch (m) {
    case Metric::lcps: return "lcps";
    case Metric::mean_abs_acc: return "mean_abs_acc";
    case Metric::max_throughput: return "max_throughput_vph";
    }
    return "?";
}

/// Evenly spaced heterogeneities on (low, high].
/// Heterogeneity values of a sweep: `count` evenly spaced values on
/// (low, high], or the explicit `list` when it is not empty.
struct SigmaGrid {
    double low = 0.0;
    double high = 0.4;
    std::size_t count = 10;
    std::vector<double> list;

    std::vector<double> values() const {
        if (!list.empty()) return list;
        std::vector<double> v(count);
        for (std::size_t i = 0; i < count; ++i)
            v[i] = low + (high - low) * static_cast<double>(i + 1) / static_cast<double>(count);
        return v;
    }

    double max() const {
        const auto v = values();
        return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    }
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::het_sweep;
    SigmaGrid grid;
    std::size_t means = 3;
    std::size_t seeds = 2;
    std::uint64_t master_seed = 1;
    bool common_seeds = false; // sweeps and OFAT: same seeds at every grid point
    SimulationConfig sim;
    ParamBounds bounds = default_bounds();
    FixedParams fixed;
    /// Factors swept by OFAT or varied by a Sobol design.
    std::vector<Param> factors = [] {
        const auto all = all_params();
        return std::vector<Param>(all.begin(), all.end());
    }();
    /// Parameters held without heterogeneity (het-sweep, OFAT, sobol-het)
    /// or at their midpoint (sobol-mean).
    std::vector<Param> pinned;
    std::size_t sobol_n = 256;
    bool second_order = false;
    /// Fleet heterogeneity in sobol-mean mode.
    double sobol_sigma = 0.2;
    /// Upper end of each heterogeneity factor in sobol-het mode.
    double sobol_sigma_max = 0.4;
    std::size_t bootstrap = 1000;
    std::string out_dir = "out";
    std::size_t jobs = 1;

    bool is_pinned(Param p) const { return std::find(pinned.begin(), pinned.end(), p) != pinned.end(); }

    /// Factors that actually enter a Sobol design.
    std::vector<Param> active_factors() const {
        std::vector<Param> out;
        for (auto p : factors)
            if (!is_pinned(p)) out.push_back(p);
        return out;
    }

    void validate() const {
        if (grid.list.empty()) {
            if (grid.count < 1) throw std::invalid_argument("sigma grid must have at least one value");
            if (!(grid.low >= 0.0 && grid.low < grid.high && grid.high < 1.0))
                throw std::invalid_argument("sigma grid must lie within (0, 1)");
        }
        for (double s : grid.list)
            if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("sigma grid must lie within (0, 1)");
        if (seeds < 1) throw std::invalid_argument("seeds must be >= 1");
        if (means < 1) throw std::invalid_argument("means must be >= 1");
        if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
        for (std::size_t i = 0; i < kNumParams; ++i)
            if (!(bounds.min[i] <= bounds.max[i]))
                throw std::invalid_argument("bounds for " + std::string(kParamNames[i]) + " are inverted");
        if (factors.empty()) throw std::invalid_argument("factor list is empty");
        for (std::size_t i = 0; i < factors.size(); ++i)
            for (std::size_t j = i + 1; j < factors.size(); ++j)
                if (factors[i] == factors[j])
                    throw std::invalid_argument("factor " + std::string(param_name(factors[i])) + " listed twice");
        const bool sobol = kind == ExperimentKind::sobol_het || kind == ExperimentKind::sobol_mean;
        if (sobol) {
            if (sobol_n < 2) throw std::invalid_argument("sobol N must be >= 2");
            if (active_factors().empty()) throw std::invalid_argument("every sobol factor is pinned");
            if (!(sobol_sigma >= 0.0 && sobol_sigma < 0.5)) throw std::invalid_argument("sobol sigma must be in [0, 0.5)");
            if (!(sobol_sigma_max > 0.0 && sobol_sigma_max < 1.0))
                throw std::invalid_argument("sobol sigma_max must be in (0, 1)");
        }
        if (kind == ExperimentKind::het_sweep || kind == ExperimentKind::throughput) {
            // Means are shared across the grid, so the widest heterogeneity sets the margin.
            if (!(grid.max() < 0.5)) throw std::invalid_argument("sigma grid upper end must be < 0.5 to sample means");
        }
        if (!(bootstrap >= 1)) throw std::invalid_argument("bootstrap resamples must be >= 1");
        sim.validate();
    }

    static ExperimentConfig preset(ExperimentKind kind, Scale scale) {
        ExperimentConfig c;
        c.kind = kind;
        const bool full = scale == Scale::full;
        switch (kind) {
        case ExperimentKind::het_sweep:
        case ExperimentKind::throughput:
            c.grid.count = full ? 50 : 10;
            c.means = full ? 10 : 3;
            c.seeds = full ? 4 : 2;
            break;
        case ExperimentKind::ofat:
            c.grid.count = full ? 50 : 10;
            c.means = 1;
            c.seeds = 1;
            break;
        case ExperimentKind::sobol_het:
        case ExperimentKind::sobol_mean:
            // 2769 * (11 + 2) = 35997 design points.
            c.sobol_n = full ? 2769 : 256;
            c.means = 1;
            c.seeds = 1;
            break;
        }
        return c;
    }
};

/// Everything needed to run one simulation, plus the key it is filed under.
struct RunSpec {
    std::size_t point = 0;
    std::string factor;
    double sigma = 0.0;
    std::size_t mean_id = 0;
    std::size_t replicate = 0;
    SimulationConfig sim;
    FleetSpec fleet;
};

struct RunRow {
    std::size_t point = 0;
    std::string factor;
    double sigma = 0.0;
    std::size_t mean_id = 0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    InflowSchedule schedule = InflowSchedule::constant;
    double lcps = 0.0;
    double mean_abs_acc = 0.0;
    double max_throughput_vph = 0.0;
    std::uint64_t inserted = 0;
    std::uint64_t exited = 0;
    bool crashed = false;
    std::string failure;

    double metric(Metric m) const {
        switch (m) {
        case Metric::lcps: return lcps;
        case Metric::mean_abs_acc: return mean_abs_acc;
        case Metric::max_throughput: return max_throughput_vph;
        }
        return 0.0;
    }
    friend bool operator==(const RunRow&, const RunRow&) = default;
};

inline const char* to_string(InflowSchedule s) { return s == InflowSchedule::constant ? "constant" : "ramped"; }

/// Schedule a metric is read from.
inline InflowSchedule schedule_of(Metric m) {
    return m == Metric::max_throughput ? InflowSchedule::ramped : InflowSchedule::constant;
}

struct SeriesPoint {
    double x = 0.0;
    double mean = 0.0;
    double std = 0.0;
    std::size_t n = 0;
    friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

struct Series {
    std::string metric;
    std::string factor; // empty for fleet-wide sweeps
    std::vector<SeriesPoint> points;
    friend bool operator==(const Series&, const Series&) = default;
};

struct MetricSensitivity {
    std::string metric;
    SensitivityResult result;
    friend bool operator==(const MetricSensitivity&, const MetricSensitivity&) = default;
};

struct CampaignResult {
    ExperimentKind kind = ExperimentKind::het_sweep;
    std::vector<RunRow> runs;
    std::vector<Series> series;
    std::vector<OfatResult> ofat;
    std::vector<MetricSensitivity> sensitivity;
    /// Sobol design points in factor units, one row per point.
    std::vector<std::string> design_factors;
    std::vector<Point> design;
    std::vector<std::string> failures;
    friend bool operator==(const CampaignResult&, const CampaignResult&) = default;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Applies `fn` to every job on up to `workers` threads. Results keep the
/// job order. The first exception thrown by any job is rethrown.
template <class Job, class Fn>
auto parallel_map(const std::vector<Job>& jobs, std::size_t workers, Fn fn, const ProgressFn& progress = {})
    -> std::vector<decltype(fn(jobs.front()))> {
    using Result = decltype(fn(jobs.front()));
    std::vector<Result> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
            try {
                results[i] = fn(jobs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
            const auto d = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(d, jobs.size());
            }
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(workers, jobs.size()));
    if (n == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n);
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

inline RunRow execute(const RunSpec& spec) {
    const auto m = run_simulation(spec.sim, spec.fleet);
    RunRow r;
    r.point = spec.point;
    r.factor = spec.factor;
    r.sigma = spec.sigma;
    r.mean_id = spec.mean_id;
    r.replicate = spec.replicate;
    r.seed = spec.sim.seed;
    r.schedule = spec.sim.schedule;
    r.lcps = m.lcps;
    r.mean_abs_acc = m.mean_abs_acc;
    r.max_throughput_vph = m.max_throughput_vph;
    r.inserted = m.inserted;
    r.exited = m.exited;
    r.crashed = m.crashed;
    r.failure = m.failure;
    return r;
}

inline std::uint64_t run_seed(const ExperimentConfig& c, std::size_t point, std::size_t mean_id, std::size_t replicate) {
    const std::uint64_t p = c.common_seeds ? 0 : static_cast<std::uint64_t>(point) + 1;
    return derive_seed(c.master_seed, {static_cast<std::uint64_t>(c.kind), p, mean_id, replicate});
}

/// Fleet means for a sweep: drawn once, with the margin of the widest
/// heterogeneity on the grid, and shared by every grid point.
inline std::vector<ParamVector> sweep_means(const ExperimentConfig& c) {
    Rng rng(derive_seed(c.master_seed, {static_cast<std::uint64_t>(c.kind), 0xAEA5ULL}));
    std::vector<ParamVector> out;
    for (std::size_t m = 0; m < c.means; ++m) out.push_back(sample_mean_vector(c.bounds, c.grid.max(), rng));
    return out;
}

namespace detail {

inline void add_both_schedules(std::vector<RunSpec>& jobs, RunSpec spec, bool constant) {
    if (constant) {
        spec.sim.schedule = InflowSchedule::constant;
        jobs.push_back(spec);
    }
    spec.sim.schedule = InflowSchedule::ramped;
    jobs.push_back(std::move(spec));
}

inline SeriesPoint summarize(double x, const std::vector<double>& ys) {
    SeriesPoint p;
    p.x = x;
    p.n = ys.size();
    if (ys.empty()) return p;
    double sum = 0.0;
    for (double y : ys) sum += y;
    p.mean = sum / static_cast<double>(ys.size());
    if (ys.size() > 1) {
        double ss = 0.0;
        for (double y : ys) ss += (y - p.mean) * (y - p.mean);
        p.std = std::sqrt(ss / static_cast<double>(ys.size() - 1));
    }
    return p;
}

/// Aggregates non-crashed rows of one factor by grid point.
inline Series aggregate(const std::vector<RunRow>& rows, Metric metric, const std::string& factor,
                        const std::vector<double>& xs) {
    Series s;
    s.metric = to_string(metric);
    s.factor = factor;
    for (std::size_t g = 0; g < xs.size(); ++g) {
        std::vector<double> ys;
        for (const auto& r : rows)
            if (r.point == g && r.factor == factor && r.schedule == schedule_of(metric) && !r.crashed)
                ys.push_back(r.metric(metric));
        s.points.push_back(summarize(xs[g], ys));
    }
    return s;
}

inline void collect_failures(CampaignResult& res) {
    for (const auto& r : res.runs)
        if (r.crashed)
            res.failures.push_back(std::string(to_string(r.schedule)) + " run point=" + std::to_string(r.point) +
                                   (r.factor.empty() ? "" : " factor=" + r.factor) +
                                   " mean=" + std::to_string(r.mean_id) + " seed=" + std::to_string(r.seed) +
                                   ": " + r.failure);
}

} // namespace detail

/// Heterogeneity sweep over the sigma grid. The throughput kind runs the
/// ramped schedule only.
inline CampaignResult run_het_sweep(const ExperimentConfig& c, const ProgressFn& progress = {}) {
    c.validate();
    const bool constant = c.kind != ExperimentKind::throughput;
    const auto grid = c.grid.values();
    const auto means = sweep_means(c);
    std::vector<RunSpec> jobs;
    for (std::size_t g = 0; g < grid.size(); ++g)
        for (std::size_t m = 0; m < means.size(); ++m)
            for (std::size_t r = 0; r < c.seeds; ++r) {
                RunSpec s;
                s.point = g;
                s.sigma = grid[g];
                s.mean_id = m;
                s.replicate = r;
                s.sim = c.sim;
                s.sim.seed = run_seed(c, g, m, r);
                s.fleet = FleetSpec{means[m], c.bounds, {}, c.fixed};
                for (std::size_t i = 0; i < kNumParams; ++i)
                    s.fleet.sigma[i] = c.is_pinned(static_cast<Param>(i)) ? 0.0 : grid[g];
                detail::add_both_schedules(jobs, std::move(s), constant);
            }

    CampaignResult res;
    res.kind = c.kind;
    res.runs = parallel_map(jobs, c.jobs, execute, progress);
    for (auto metric : kMetrics) {
        if (!constant && metric != Metric::max_throughput) continue;
        res.series.push_back(detail::aggregate(res.runs, metric, "", grid));
    }
    detail::collect_failures(res);
    return res;
}

/// One-factor-at-a-time screening: each factor's heterogeneity is swept
/// alone with the fleet means at the centre of the bounds.
inline CampaignResult run_ofat_campaign(const ExperimentConfig& c, const ProgressFn& progress = {}) {
    c.validate();
    const auto grid = c.grid.values();
    const auto mean = c.bounds.midpoint();
    std::vector<RunSpec> jobs;
    for (auto factor : c.factors)
        for (std::size_t g = 0; g < grid.size(); ++g)
            for (std::size_t r = 0; r < c.seeds; ++r) {
                RunSpec s;
                s.point = g;
                s.factor = param_name(factor);
                s.sigma = grid[g];
                s.replicate = r;
                s.sim = c.sim;
                s.sim.seed = run_seed(c, g, 0, r);
                s.fleet = FleetSpec{mean, c.bounds, {}, c.fixed};
                s.fleet.sigma[index(factor)] = grid[g];
                detail::add_both_schedules(jobs, std::move(s), true);
            }

    CampaignResult res;
    res.kind = c.kind;
    res.runs = parallel_map(jobs, c.jobs, execute, progress);
    for (auto factor : c.factors) {
        const std::string name(param_name(factor));
        for (auto metric : kMetrics) {
            // Correlation is taken over every non-crashed run, not the grid means.
            std::vector<double> xs, ys;
            for (const auto& r : res.runs)
                if (r.factor == name && r.schedule == schedule_of(metric) && !r.crashed) {
                    xs.push_back(r.sigma);
                    ys.push_back(r.metric(metric));
                }
            res.series.push_back(detail::aggregate(res.runs, metric, name, grid));
            if (xs.size() < 3) {
                res.failures.push_back("ofat " + name + "/" + to_string(metric) + ": fewer than 3 usable runs");
                continue;
            }
            auto o = correlate(name, std::move(xs), std::move(ys));
            o.metric = to_string(metric);
            res.ofat.push_back(std::move(o));
        }
    }
    detail::collect_failures(res);
    return res;
}

/// The factor box of a Sobol campaign in the units of its factors:
/// heterogeneities for sobol-het, fleet means for sobol-mean.
inline FactorBox sobol_box(const ExperimentConfig& c) {
    FactorBox box;
    for (auto p : c.active_factors()) {
        const auto i = index(p);
        box.names.emplace_back(param_name(p));
        if (c.kind == ExperimentKind::sobol_het) {
            box.lower.push_back(0.0);
            box.upper.push_back(c.sobol_sigma_max);
        } else {
            const double margin = c.sobol_sigma * c.bounds.range(i);
            box.lower.push_back(c.bounds.min[i] + margin);
            box.upper.push_back(c.bounds.max[i] - margin);
        }
    }
    return box;
}

inline FleetSpec sobol_fleet(const ExperimentConfig& c, const Point& x) {
    FleetSpec f{c.bounds.midpoint(), c.bounds, {}, c.fixed};
    const auto active = c.active_factors();
    if (c.kind == ExperimentKind::sobol_het) {
        for (std::size_t j = 0; j < active.size(); ++j) f.sigma[index(active[j])] = x[j];
    } else {
        f.sigma.fill(c.sobol_sigma);
        for (std::size_t j = 0; j < active.size(); ++j) f.mean[index(active[j])] = x[j];
    }
    return f;
}

/// Number of design points (not runs) of a Sobol campaign.
inline std::size_t sobol_points(const ExperimentConfig& c) {
    const auto k = c.active_factors().size();
    return c.sobol_n * (c.second_order ? 2 * k + 2 : k + 2);
}

inline CampaignResult run_sobol_campaign(const ExperimentConfig& c, const ProgressFn& progress = {}) {
    c.validate();
    if (c.kind != ExperimentKind::sobol_het && c.kind != ExperimentKind::sobol_mean)
        throw std::invalid_argument("run_sobol_campaign needs kind sobol-het or sobol-mean");
    const auto design = saltelli_design(c.sobol_n, sobol_box(c), c.second_order);
    const auto points = design.rows();

    std::vector<RunSpec> jobs;
    for (std::size_t row = 0; row < points.size(); ++row)
        for (std::size_t r = 0; r < c.seeds; ++r) {
            RunSpec s;
            s.point = row;
            s.replicate = r;
            s.sim = c.sim;
            // Every row reuses the replicate's seed, so the estimators see a
            // deterministic function of the factors.
            s.sim.seed = run_seed(c, 0, 0, r);
            s.fleet = sobol_fleet(c, points[row]);
            detail::add_both_schedules(jobs, std::move(s), true);
        }

    CampaignResult res;
    res.kind = c.kind;
    res.design_factors = design.box.names;
    res.design = points;
    res.runs = parallel_map(jobs, c.jobs, execute, progress);

    BootstrapOptions boot;
    boot.resamples = c.bootstrap;
    boot.seed = derive_seed(c.master_seed, {static_cast<std::uint64_t>(c.kind), 0xB007ULL});
    for (auto metric : kMetrics) {
        // Crashed runs keep the metrics accumulated up to the crash; they are listed as failures.
        std::vector<double> y(points.size(), 0.0);
        for (const auto& r : res.runs)
            if (r.schedule == schedule_of(metric)) y[r.point] += r.metric(metric) / static_cast<double>(c.seeds);
        res.sensitivity.push_back({to_string(metric), sobol_indices(design, y, boot)});
    }
    detail::collect_failures(res);
    return res;
}

inline CampaignResult run_campaign(const ExperimentConfig& c, const ProgressFn& progress = {}) {
    switch (c.kind) {
    case ExperimentKind::het_sweep:
    case ExperimentKind::throughput: return run_het_sweep(c, progress);
    case ExperimentKind::ofat: return run_ofat_campaign(c, progress);
    case ExperimentKind::sobol_het:
    case ExperimentKind::sobol_mean: return run_sobol_campaign(c, progress);
    }
    throw std::invalid_argument("unknown experiment kind");
}

} // namespace hetsim
