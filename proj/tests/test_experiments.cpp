#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

#include "hetsim/config.hpp"
#include "hetsim/experiments.hpp"
#include "hetsim/output.hpp"

using namespace hetsim;
namespace fs = std::filesystem;

namespace {

// Short runs on a compact interchange keep campaign tests quick.
ExperimentConfig quick(ExperimentKind kind) {
    auto c = ExperimentConfig::preset(kind, Scale::desk);
    c.sim.duration = 20.0;
    c.sim.geometry.arm_length = 600.0;
    c.bootstrap = 100;
    return c;
}

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("hetsim-test-" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const fs::path& p) {
    const auto s = slurp(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

ExperimentConfig load(const std::string& text, Scale scale = Scale::desk) {
    std::istringstream in(text);
    return load_experiment_config(in, scale);
}

} // namespace

TEST(SigmaGrid, EvenlySpacedAboveLowEnd) {
    SigmaGrid g;
    const auto v = g.values();
    ASSERT_EQ(v.size(), 10u);
    EXPECT_DOUBLE_EQ(v.front(), 0.04);
    EXPECT_DOUBLE_EQ(v.back(), 0.4);
    g.list = {0.01, 0.4};
    EXPECT_EQ(g.values(), (std::vector<double>{0.01, 0.4}));
    EXPECT_DOUBLE_EQ(g.max(), 0.4);
}

TEST(Counting, TwoPointGridGivesTwoRowsPerSchedule) {
    auto c = quick(ExperimentKind::het_sweep);
    c.grid.list = {0.01, 0.4};
    c.means = 1;
    c.seeds = 1;
    const auto r = run_het_sweep(c);
    ASSERT_EQ(r.runs.size(), 4u);
    for (auto schedule : {InflowSchedule::constant, InflowSchedule::ramped})
        EXPECT_EQ(std::count_if(r.runs.begin(), r.runs.end(), [&](const RunRow& row) { return row.schedule == schedule; }),
                  2);
    ASSERT_EQ(r.series.size(), 3u);
    for (const auto& s : r.series) EXPECT_EQ(s.points.size(), 2u);
}

TEST(Counting, ThroughputKindRunsRampedOnly) {
    auto c = quick(ExperimentKind::throughput);
    c.grid.count = 3;
    c.means = 2;
    c.seeds = 1;
    const auto r = run_het_sweep(c);
    EXPECT_EQ(r.runs.size(), 6u);
    for (const auto& row : r.runs) EXPECT_EQ(row.schedule, InflowSchedule::ramped);
    ASSERT_EQ(r.series.size(), 1u);
    EXPECT_EQ(r.series[0].metric, "max_throughput_vph");
}

TEST(Counting, FullScalePresets) {
    const auto sweep = ExperimentConfig::preset(ExperimentKind::het_sweep, Scale::full);
    EXPECT_EQ(sweep.grid.values().size() * sweep.means * sweep.seeds, 2000u);
    const auto ofat = ExperimentConfig::preset(ExperimentKind::ofat, Scale::full);
    EXPECT_EQ(ofat.factors.size() * ofat.grid.values().size() * ofat.seeds, 550u);
    const auto sobol = ExperimentConfig::preset(ExperimentKind::sobol_het, Scale::full);
    EXPECT_EQ(sobol_points(sobol), 35997u);
    const auto desk = ExperimentConfig::preset(ExperimentKind::sobol_het, Scale::desk);
    EXPECT_EQ(sobol_points(desk), 3328u);
    auto pinned = desk;
    pinned.pinned = {Param::desired_speed};
    EXPECT_EQ(sobol_points(pinned), 256u * 12u);
    EXPECT_EQ(sobol_box(pinned).size(), 10u);
}

TEST(Counting, DeskOfatIsOneHundredTenPoints) {
    auto c = quick(ExperimentKind::ofat);
    c.sim.duration = 5.0;
    const auto r = run_ofat_campaign(c);
    std::set<std::tuple<std::string, std::size_t, std::size_t>> points;
    for (const auto& row : r.runs) points.emplace(row.factor, row.point, row.replicate);
    EXPECT_EQ(points.size(), 110u);
    EXPECT_EQ(r.runs.size(), 220u);
    EXPECT_EQ(r.ofat.size() + r.failures.size(), 33u);
    EXPECT_EQ(r.series.size(), 33u);
}

TEST(Validation, RejectsBadConfigs) {
    auto c = quick(ExperimentKind::het_sweep);
    c.grid.count = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_THROW(run_het_sweep(c), std::invalid_argument);
    c = quick(ExperimentKind::het_sweep);
    c.grid.list = {0.2, 1.0};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = quick(ExperimentKind::het_sweep);
    c.grid.high = 0.6;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = quick(ExperimentKind::het_sweep);
    c.seeds = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = quick(ExperimentKind::sobol_het);
    c.pinned = c.factors;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = quick(ExperimentKind::ofat);
    c.factors = {Param::length, Param::length};
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Seeding, IndependentOfExecutionOrder) {
    auto c = quick(ExperimentKind::het_sweep);
    EXPECT_NE(run_seed(c, 0, 1, 1), run_seed(c, 5, 1, 1));
    EXPECT_NE(run_seed(c, 0, 1, 1), run_seed(c, 0, 2, 1));
    EXPECT_NE(run_seed(c, 0, 1, 1), run_seed(c, 0, 1, 0));
    c.common_seeds = true;
    EXPECT_EQ(run_seed(c, 0, 1, 1), run_seed(c, 5, 1, 1));
    EXPECT_NE(run_seed(c, 0, 1, 1), run_seed(c, 0, 2, 1));
    auto other = c;
    other.master_seed = 2;
    EXPECT_NE(run_seed(c, 0, 1, 1), run_seed(other, 0, 1, 1));
}

TEST(Seeding, MeansRespectWidestHeterogeneity) {
    auto c = quick(ExperimentKind::het_sweep);
    c.means = 20;
    const auto means = sweep_means(c);
    ASSERT_EQ(means.size(), 20u);
    for (const auto& m : means)
        for (std::size_t i = 0; i < kNumParams; ++i) {
            EXPECT_GE(m[i], c.bounds.min[i] + 0.4 * c.bounds.range(i) - 1e-12);
            EXPECT_LE(m[i], c.bounds.max[i] - 0.4 * c.bounds.range(i) + 1e-12);
        }
}

TEST(SobolCampaign, FleetMapping) {
    auto c = quick(ExperimentKind::sobol_het);
    c.pinned = {Param::desired_speed};
    const auto box = sobol_box(c);
    Point x(box.size());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = 0.01 * static_cast<double>(j + 1);
    const auto f = sobol_fleet(c, x);
    EXPECT_EQ(f.sigma[index(Param::desired_speed)], 0.0);
    EXPECT_EQ(f.mean, c.bounds.midpoint());
    EXPECT_EQ(f.sigma[index(Param::politeness)], 0.01);

    c.kind = ExperimentKind::sobol_mean;
    c.pinned = {};
    const auto mean_box = sobol_box(c);
    for (std::size_t j = 0; j < mean_box.size(); ++j) {
        EXPECT_NEAR(mean_box.lower[j], c.bounds.min[j] + 0.2 * c.bounds.range(j), 1e-12);
        EXPECT_NEAR(mean_box.upper[j], c.bounds.max[j] - 0.2 * c.bounds.range(j), 1e-12);
    }
    const auto g = sobol_fleet(c, mean_box.lower);
    for (std::size_t i = 0; i < kNumParams; ++i) EXPECT_EQ(g.sigma[i], 0.2);
}

TEST(SobolCampaign, SmallDesignEndToEnd) {
    auto c = quick(ExperimentKind::sobol_het);
    c.sobol_n = 4;
    c.jobs = 4;
    const auto r = run_sobol_campaign(c);
    EXPECT_EQ(r.design.size(), 4u * 13u);
    EXPECT_EQ(r.runs.size(), 2u * 4u * 13u);
    ASSERT_EQ(r.sensitivity.size(), 3u);
    for (const auto& ms : r.sensitivity) EXPECT_EQ(ms.result.first.size(), 11u);
    EXPECT_EQ(r.design_factors.size(), 11u);
    // One seed per replicate, shared by every design row.
    for (const auto& run : r.runs) EXPECT_EQ(run.seed, run_seed(c, 0, 0, run.replicate));

    const auto dir = scratch_dir("sobol");
    write_outputs(dir, r, c);
    EXPECT_EQ(line_count(dir / "design.csv"), 1u + 52u);
    EXPECT_EQ(line_count(dir / "sensitivity.csv"), 1u + 3u * 22u);
    EXPECT_EQ(campaign_from_json(nlohmann::json::parse(slurp(dir / "summary.json"))), r);
}

TEST(OfatCampaign, DesiredSpeedRaisesLaneChanges) {
    auto c = ExperimentConfig::preset(ExperimentKind::ofat, Scale::desk);
    c.factors = {Param::desired_speed};
    c.jobs = 4;
    const auto r = run_ofat_campaign(c);
    EXPECT_EQ(r.runs.size(), 20u);
    const auto it = std::find_if(r.ofat.begin(), r.ofat.end(), [](const OfatResult& o) { return o.metric == "lcps"; });
    ASSERT_NE(it, r.ofat.end());
    EXPECT_GT(it->r, 0.0);
    EXPECT_TRUE(it->significant()) << "r=" << it->r << " p=" << it->p;
}

TEST(Config, UnitsAreConverted) {
    const auto c = load(
        "[experiment]\nkind = het-sweep\nseeds = 3\nsigma_values = 0.01, 0.4\n"
        "[fleet]\nv0_mph_min = 50\nv0_mph_max = 90\nv_crit_mps_min = 15\ns0_m_max = 4.5\n"
        "[geometry]\narm_length_m = 1500\n");
    EXPECT_EQ(c.seeds, 3u);
    EXPECT_EQ(c.grid.values(), (std::vector<double>{0.01, 0.4}));
    EXPECT_DOUBLE_EQ(c.bounds.min[index(Param::desired_speed)], 50.0 * kMphToMps);
    EXPECT_DOUBLE_EQ(c.bounds.max[index(Param::desired_speed)], 90.0 * kMphToMps);
    EXPECT_DOUBLE_EQ(c.bounds.min[index(Param::critical_speed)], 15.0);
    EXPECT_DOUBLE_EQ(c.bounds.max[index(Param::min_gap)], 4.5);
    EXPECT_DOUBLE_EQ(c.sim.geometry.arm_length, 1500.0);
    // Untouched keys keep the desk preset.
    EXPECT_EQ(c.means, 3u);
}

TEST(Config, KindSelectsPreset) {
    const auto full = load("[experiment]\nkind = sobol-het\n", Scale::full);
    EXPECT_EQ(full.kind, ExperimentKind::sobol_het);
    EXPECT_EQ(full.sobol_n, 2769u);
    const auto desk = load("[experiment]\nkind = ofat\n");
    EXPECT_EQ(desk.grid.count, 10u);
    EXPECT_EQ(desk.seeds, 1u);
}

TEST(Config, ErrorsNameTheProblem) {
    auto expect_error = [](const std::string& text, const std::string& needle) {
        try {
            load(text);
            ADD_FAILURE() << "expected ConfigError for " << text;
        } catch (const ConfigError& e) {
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    };
    expect_error("[fleet]\nv0_min = 20\n", "v0_min");
    expect_error("[experiment]\nseeds = two\n", "seeds");
    expect_error("[experiment]\nkind = sweep\n", "kind");
    expect_error("[experiment]\nfactors = v0,x9\n", "x9");
    expect_error("[nowhere]\nkey = 1\n", "nowhere");
    expect_error("seed = 3\n", "seed");
    expect_error("[experiment\nseed = 3\n", "malformed");
}

TEST(Config, DumpRoundTrips) {
    auto c = quick(ExperimentKind::sobol_mean);
    c.master_seed = 77;
    c.pinned = {Param::desired_speed, Param::length};
    c.grid.list = {0.05, 0.15};
    c.bounds.max[index(Param::desired_speed)] = 95.0 * kMphToMps;
    c.sim.routes = {0.5, 0.3, 0.2};
    c.fixed.coolness = 0.9;
    c.sim.timestep = 0.1;
    const auto text = dump_experiment_config(c);
    const auto back = load(text);
    EXPECT_EQ(dump_experiment_config(back), text);
    EXPECT_EQ(back.kind, c.kind);
    EXPECT_EQ(back.master_seed, 77u);
    EXPECT_EQ(back.pinned, c.pinned);
    EXPECT_EQ(back.grid.list, c.grid.list);
    EXPECT_EQ(back.bounds.max, c.bounds.max);
    EXPECT_EQ(back.bounds.min, c.bounds.min);
    EXPECT_EQ(back.sim.timestep, 0.1);
    EXPECT_EQ(back.fixed.coolness, 0.9);
}

TEST(Output, JsonRoundTrip) {
    auto c = quick(ExperimentKind::het_sweep);
    c.grid.count = 2;
    c.means = 1;
    const auto r = run_het_sweep(c);
    EXPECT_EQ(campaign_from_json(campaign_to_json(r)), r);
    EXPECT_EQ(campaign_from_json(nlohmann::json::parse(campaign_to_json(r).dump())), r);
}

TEST(Output, AggregatesMatchRows) {
    auto c = quick(ExperimentKind::het_sweep);
    c.grid.count = 3;
    const auto r = run_het_sweep(c);
    for (const auto& s : r.series) {
        const auto metric = s.metric == "lcps"           ? Metric::lcps
                            : s.metric == "mean_abs_acc" ? Metric::mean_abs_acc
                                                         : Metric::max_throughput;
        for (std::size_t g = 0; g < s.points.size(); ++g) {
            std::vector<double> ys;
            for (const auto& row : r.runs)
                if (row.point == g && row.schedule == schedule_of(metric) && !row.crashed) ys.push_back(row.metric(metric));
            ASSERT_EQ(ys.size(), s.points[g].n);
            double mean = 0.0;
            for (double y : ys) mean += y / static_cast<double>(ys.size());
            double ss = 0.0;
            for (double y : ys) ss += (y - mean) * (y - mean);
            EXPECT_NEAR(s.points[g].mean, mean, 1e-9 * std::max(1.0, std::abs(mean)));
            EXPECT_NEAR(s.points[g].std, std::sqrt(ss / static_cast<double>(ys.size() - 1)), 1e-9 * std::max(1.0, mean));
        }
    }
}

TEST(Output, ByteIdenticalAcrossWorkerCounts) {
    auto c = quick(ExperimentKind::het_sweep);
    c.grid.count = 3;
    std::vector<std::string> runs, series;
    for (std::size_t jobs : {1u, 3u, 1u}) {
        c.jobs = jobs;
        const auto dir = scratch_dir("det" + std::to_string(runs.size()));
        write_outputs(dir, run_het_sweep(c));
        runs.push_back(slurp(dir / "runs.csv"));
        series.push_back(slurp(dir / "series_lcps.csv"));
    }
    EXPECT_EQ(runs[0], runs[1]);
    EXPECT_EQ(runs[0], runs[2]);
    EXPECT_EQ(series[0], series[1]);
    EXPECT_FALSE(runs[0].empty());
}

TEST(Output, SweepWritesThreeSeriesFiles) {
    auto c = quick(ExperimentKind::het_sweep);
    c.grid.count = 2;
    c.means = 1;
    c.seeds = 1;
    const auto dir = scratch_dir("series");
    write_outputs(dir, run_het_sweep(c), c);
    for (const char* name : {"series_lcps.csv", "series_mean_abs_acc.csv", "series_max_throughput_vph.csv"}) {
        ASSERT_TRUE(fs::exists(dir / name)) << name;
        EXPECT_EQ(line_count(dir / name), 3u);
        EXPECT_EQ(slurp(dir / name).substr(0, 11), "x,mean,std,");
    }
    EXPECT_TRUE(fs::exists(dir / "summary.json"));
    EXPECT_EQ(line_count(dir / "runs.csv"), 5u);
}

TEST(Output, EmptyCampaignWritesHeaders) {
    const auto dir = scratch_dir("empty");
    write_outputs(dir, CampaignResult{});
    EXPECT_EQ(slurp(dir / "runs.csv"),
              "point,factor,sigma,mean_id,replicate,seed,schedule,lcps,mean_abs_acc,max_throughput_vph,inserted,"
              "exited,crashed\n");
    CampaignResult ofat;
    ofat.kind = ExperimentKind::ofat;
    write_outputs(dir, ofat);
    EXPECT_EQ(line_count(dir / "ofat.csv"), 1u);
    EXPECT_EQ(line_count(dir / "ofat_significant.csv"), 1u);
}

TEST(Output, OfatFilesSeparateSignificantRows) {
    CampaignResult r;
    r.kind = ExperimentKind::ofat;
    auto strong = correlate("v0", {0.1, 0.2, 0.3, 0.4}, {1.0, 2.0, 3.0, 4.1});
    strong.metric = "lcps";
    auto weak = correlate("L", {0.1, 0.2, 0.3, 0.4}, {1.0, -1.0, 1.0, -1.0});
    weak.metric = "lcps";
    r.ofat = {strong, weak};
    const auto dir = scratch_dir("ofat");
    write_outputs(dir, r);
    EXPECT_EQ(line_count(dir / "ofat.csv"), 3u);
    EXPECT_EQ(line_count(dir / "ofat_significant.csv"), 2u);
    EXPECT_NE(slurp(dir / "ofat_significant.csv").find("v0,lcps"), std::string::npos);
}

TEST(Output, UnwritableDirectoryFailsEarly) {
    const auto dir = scratch_dir("blocked");
    fs::create_directories(dir);
    std::ofstream(dir / "file") << "x";
    EXPECT_THROW(prepare_output_dir(dir / "file" / "sub"), OutputError);
    EXPECT_THROW(write_outputs(dir / "file", CampaignResult{}), OutputError);
}

TEST(Output, CsvQuoting) {
    EXPECT_EQ(detail::csv_field("plain"), "plain");
    EXPECT_EQ(detail::csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(detail::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1e-20), "1e-20");
}

TEST(ParallelMap, KeepsOrderAndPropagatesErrors) {
    std::vector<int> jobs(200);
    std::iota(jobs.begin(), jobs.end(), 0);
    std::size_t last_done = 0;
    const auto out = parallel_map(jobs, 8, [](int x) { return x * x; }, [&](std::size_t d, std::size_t) { last_done = std::max(last_done, d); });
    for (int i = 0; i < 200; ++i) EXPECT_EQ(out[i], i * i);
    EXPECT_EQ(last_done, 200u);
    EXPECT_THROW(parallel_map(jobs, 4,
                              [](int x) {
                                  if (x == 17) throw std::runtime_error("boom");
                                  return x;
                              }),
                 std::runtime_error);
    EXPECT_TRUE(parallel_map(std::vector<int>{}, 4, [](int x) { return x; }).empty());
}
