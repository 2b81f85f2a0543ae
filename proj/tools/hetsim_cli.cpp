// hetsim command-line front end.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetsim/config.hpp"
#include "hetsim/engine.hpp"
#include "hetsim/experiments.hpp"
#include "hetsim/output.hpp"

namespace {

using namespace hetsim;

struct CommonOptions {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::string scale = "desk";
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool campaign) {
    cmd->add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--scale", o.scale, "preset size the config starts from")
        ->check(CLI::IsMember({"full", "desk"}));
    if (campaign) {
        cmd->add_option("--jobs", o.jobs, "parallel simulations")->check(CLI::PositiveNumber);
        cmd->add_flag("--quiet", o.quiet, "no progress output");
    }
}

ExperimentConfig resolve(const CommonOptions& o, ExperimentKind default_kind) {
    const auto scale = scale_from_string(o.scale);
    ExperimentConfig c = o.config.empty() ? ExperimentConfig::preset(default_kind, scale)
                                          : load_experiment_config_file(o.config, scale, default_kind);
    if (o.seed) c.master_seed = *o.seed;
    if (o.jobs) c.jobs = *o.jobs;
    if (!o.out.empty()) c.out_dir = o.out;
    return c;
}

ProgressFn progress_printer(bool quiet) {
    if (quiet) return {};
    return [](std::size_t done, std::size_t total) {
        if (done == total || done % 50 == 0) std::fprintf(stderr, "\r%zu/%zu runs", done, total);
        if (done == total) std::fprintf(stderr, "\n");
    };
}

void print_series(const CampaignResult& r) {
    for (const auto& s : r.series) {
        if (!s.factor.empty()) continue;
        std::printf("%s\n", s.metric.c_str());
        for (const auto& p : s.points) std::printf("  sigma=%.4f mean=%.6g std=%.3g n=%zu\n", p.x, p.mean, p.std, p.n);
    }
}

void print_sensitivity(const CampaignResult& r) {
    for (const auto& ms : r.sensitivity) {
        std::printf("%s%s\n", ms.metric.c_str(), ms.result.degenerate ? " (zero variance)" : "");
        for (std::size_t i = 0; i < ms.result.first.size(); ++i) {
            const auto& f = ms.result.first[i];
            const auto& t = ms.result.total[i];
            std::printf("  %-8s S1=%7.3f [%6.3f, %6.3f]  ST=%7.3f [%6.3f, %6.3f]\n", ms.result.names[i].c_str(), f.value,
                        f.ci.low, f.ci.high, t.value, t.ci.low, t.ci.high);
        }
    }
}

void print_ofat(const CampaignResult& r) {
    std::printf("significant correlations (p < %.2f):\n", kSignificance);
    for (const auto& o : r.ofat)
        if (o.significant()) std::printf("  %-8s %-20s r=%+.3f p=%.3g\n", o.factor.c_str(), o.metric.c_str(), o.r, o.p);
}

int run_and_write(ExperimentConfig c, bool quiet) {
    c.validate();
    // Fail on an unwritable destination before any simulation runs.
    prepare_output_dir(c.out_dir);
    const auto result = run_campaign(c, progress_printer(quiet));
    write_outputs(c.out_dir, result, c);
    switch (c.kind) {
    case ExperimentKind::het_sweep:
    case ExperimentKind::throughput: print_series(result); break;
    case ExperimentKind::ofat: print_ofat(result); break;
    case ExperimentKind::sobol_het:
    case ExperimentKind::sobol_mean: print_sensitivity(result); break;
    }
    for (const auto& f : result.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
    std::printf("wrote %s (%zu runs, %zu failed)\n", c.out_dir.c_str(), result.runs.size(), result.failures.size());
    return 0;
}

int simulate(const CommonOptions& o, double sigma, const std::string& schedule, bool events, bool states) {
    auto c = resolve(o, ExperimentKind::het_sweep);
    c.validate();
    SimulationConfig sim = c.sim;
    sim.seed = c.master_seed;
    sim.schedule = schedule == "ramped" ? InflowSchedule::ramped : InflowSchedule::constant;
    sim.log_states = states;
    FleetSpec fleet{c.bounds.midpoint(), c.bounds, {}, c.fixed};
    for (std::size_t i = 0; i < kNumParams; ++i) fleet.sigma[i] = c.is_pinned(static_cast<Param>(i)) ? 0.0 : sigma;

    const std::filesystem::path dir = c.out_dir;
    prepare_output_dir(dir);
    Simulation s(sim, fleet);
    std::ofstream log;
    if (events || states) {
        log.open(dir / "events.csv");
        log << "time,vehicle,segment,lane,x,v,acc,event\n";
        s.set_event_sink([&](const SimEvent& e) {
            log << format_double(e.time) << ',' << e.vehicle << ',' << s.network().segment(e.segment).name << ','
                << e.lane << ',' << format_double(e.x) << ',' << format_double(e.speed) << ','
                << format_double(e.accel) << ',' << to_string(e.kind) << '\n';
        });
    }
    const auto m = s.run();

    std::ofstream df(dir / "density_flow.csv");
    df << "time,density_vpkm,flow_vph\n";
    for (const auto& p : m.density_flow)
        df << format_double(p.time) << ',' << format_double(p.density_vpkm) << ',' << format_double(p.flow_vph) << '\n';

    nlohmann::json j = {{"seed", sim.seed},
                        {"sigma", sigma},
                        {"schedule", to_string(sim.schedule)},
                        {"lcps", m.lcps},
                        {"mean_abs_acc", m.mean_abs_acc},
                        {"max_throughput_vph", m.max_throughput_vph},
                        {"inserted", m.inserted},
                        {"exited", m.exited},
                        {"on_network", m.on_network},
                        {"lane_changes", m.lane_changes},
                        {"crashed", m.crashed},
                        {"failure", m.failure}};
    std::ofstream(dir / "metrics.json") << j.dump(1) << "\n";
    std::printf("lcps=%.4f mean_abs_acc=%.4f max_throughput_vph=%.1f inserted=%llu exited=%llu%s\n", m.lcps,
                m.mean_abs_acc, m.max_throughput_vph, static_cast<unsigned long long>(m.inserted),
                static_cast<unsigned long long>(m.exited), m.crashed ? " CRASHED" : "");
    if (m.crashed) std::fprintf(stderr, "%s\n", m.failure.c_str());
    return m.crashed ? 1 : 0;
}

std::vector<Param> parse_param_list(const std::vector<std::string>& names) {
    std::vector<Param> out;
    for (const auto& n : names) {
        const auto p = param_from_name(n);
        if (!p) throw ConfigError("unknown parameter '" + n + "'");
        out.push_back(*p);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heterogeneous-fleet traffic simulation and sensitivity campaigns"};
    app.require_subcommand(1);

    CommonOptions sim_o, sweep_o, ofat_o, sobol_o, check_o;

    auto* sim_cmd = app.add_subcommand("simulate", "run one simulation with the fleet centred in its bounds");
    add_common(sim_cmd, sim_o, false);
    double sigma = 0.0;
    std::string schedule = "constant";
    bool events = false, states = false;
    sim_cmd->add_option("--sigma", sigma, "fleet heterogeneity")->check(CLI::Range(0.0, 0.99));
    sim_cmd->add_option("--schedule", schedule, "inflow schedule")->check(CLI::IsMember({"constant", "ramped"}));
    sim_cmd->add_flag("--events", events, "write insert/lane-change/exit events to events.csv");
    sim_cmd->add_flag("--states", states, "also log every vehicle state each step");

    auto* sweep_cmd = app.add_subcommand("het-sweep", "fleet-wide heterogeneity sweep");
    add_common(sweep_cmd, sweep_o, true);
    bool throughput_only = false;
    std::vector<std::string> sweep_pin;
    sweep_cmd->add_flag("--throughput-only", throughput_only, "ramped runs only");
    sweep_cmd->add_option("--pin", sweep_pin, "parameters held without heterogeneity")->delimiter(',');

    auto* ofat_cmd = app.add_subcommand("ofat", "one-factor-at-a-time heterogeneity screening");
    add_common(ofat_cmd, ofat_o, true);
    std::vector<std::string> ofat_factors;
    ofat_cmd->add_option("--factors", ofat_factors, "factors to sweep (default: all)")->delimiter(',');

    auto* sobol_cmd = app.add_subcommand("sobol", "Sobol sensitivity campaign");
    add_common(sobol_cmd, sobol_o, true);
    std::string mode;
    std::vector<std::string> sobol_pin;
    bool second_order = false;
    sobol_cmd->add_option("--mode", mode, "het: heterogeneities vary; mean: fleet means vary at fixed sigma")
        ->check(CLI::IsMember({"het", "mean"}));
    sobol_cmd->add_option("--pin", sobol_pin, "factors excluded from the design")->delimiter(',');
    sobol_cmd->add_flag("--second-order", second_order, "extended design with second-order indices");

    auto* check_cmd = app.add_subcommand("validate-config", "check a configuration and print the effective settings");
    add_common(check_cmd, check_o, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim_cmd) return simulate(sim_o, sigma, schedule, events, states);
        if (*sweep_cmd) {
            auto c = resolve(sweep_o, ExperimentKind::het_sweep);
            if (c.kind != ExperimentKind::het_sweep && c.kind != ExperimentKind::throughput)
                throw ConfigError(std::string("config kind ") + to_string(c.kind) + " does not match het-sweep");
            if (throughput_only) c.kind = ExperimentKind::throughput;
            if (!sweep_pin.empty()) c.pinned = parse_param_list(sweep_pin);
            return run_and_write(c, sweep_o.quiet);
        }
        if (*ofat_cmd) {
            auto c = resolve(ofat_o, ExperimentKind::ofat);
            if (c.kind != ExperimentKind::ofat)
                throw ConfigError(std::string("config kind ") + to_string(c.kind) + " does not match ofat");
            if (!ofat_factors.empty()) c.factors = parse_param_list(ofat_factors);
            return run_and_write(c, ofat_o.quiet);
        }
        if (*sobol_cmd) {
            auto c = resolve(sobol_o, ExperimentKind::sobol_het);
            if (c.kind != ExperimentKind::sobol_het && c.kind != ExperimentKind::sobol_mean)
                throw ConfigError(std::string("config kind ") + to_string(c.kind) + " does not match sobol");
            if (mode == "het") c.kind = ExperimentKind::sobol_het;
            if (mode == "mean") c.kind = ExperimentKind::sobol_mean;
            if (!sobol_pin.empty()) c.pinned = parse_param_list(sobol_pin);
            if (second_order) c.second_order = true;
            return run_and_write(c, sobol_o.quiet);
        }
        if (*check_cmd) {
            if (check_o.config.empty()) throw ConfigError("validate-config needs --config");
            auto c = resolve(check_o, ExperimentKind::het_sweep);
            c.validate();
            std::cout << dump_experiment_config(c);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
