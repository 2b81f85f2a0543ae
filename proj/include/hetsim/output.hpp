#pragma once

/// Campaign output files.
///
///   runs.csv         point,factor,sigma,mean_id,replicate,seed,schedule,lcps,
///                    mean_abs_acc,max_throughput_vph,inserted,exited,crashed
///   series_<m>.csv   x,mean,std,n  (sweeps; one file per metric)
///   ofat_series.csv  factor,metric,x,mean,std,n
///   ofat.csv         factor,metric,r,p_value,significant,degenerate,n
///   ofat_significant.csv  rows of ofat.csv with p < 0.05
///   design.csv       point,<factor>...  (Sobol design in factor units)
///   sensitivity.csv  metric,factor,order,estimate,ci_low,ci_high
///   summary.json     everything above plus the configuration
///
/// Numbers are written in their shortest exact form, so identical results
/// give identical bytes.

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "experiments.hpp"

namespace hetsim {

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Creates `dir` if needed and checks that files can be written there.
inline void prepare_output_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw OutputError("cannot create output directory " + dir.string() + ": " + ec.message());
    if (!std::filesystem::is_directory(dir)) throw OutputError(dir.string() + " is not a directory");
    const auto probe = dir / ".hetsim-write-test";
    {
        std::ofstream out(probe);
        if (!out || !(out << "ok")) throw OutputError("output directory " + dir.string() + " is not writable");
    }
    std::filesystem::remove(probe, ec);
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw OutputError("cannot write " + path.string());
        row(header);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << csv_field(cells[i]);
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

inline std::string num(double x) { return format_double(x); }
inline std::string num(std::uint64_t x) { return std::to_string(x); }

} // namespace detail

// --- JSON -----------------------------------------------------------------

inline void to_json(nlohmann::json& j, const Interval& v) { j = {v.low, v.high}; }
inline void from_json(const nlohmann::json& j, Interval& v) {
    v.low = j.at(0).get<double>();
    v.high = j.at(1).get<double>();
}

inline void to_json(nlohmann::json& j, const IndexEstimate& v) { j = {{"estimate", v.value}, {"ci", v.ci}}; }
inline void from_json(const nlohmann::json& j, IndexEstimate& v) {
    j.at("estimate").get_to(v.value);
    j.at("ci").get_to(v.ci);
}

inline void to_json(nlohmann::json& j, const SensitivityResult& v) {
    j = {{"factors", v.names},   {"first", v.first},       {"total", v.total},          {"second", v.second},
         {"evaluations", v.evaluations}, {"variance", v.variance}, {"degenerate", v.degenerate}};
}
inline void from_json(const nlohmann::json& j, SensitivityResult& v) {
    j.at("factors").get_to(v.names);
    j.at("first").get_to(v.first);
    j.at("total").get_to(v.total);
    j.at("second").get_to(v.second);
    j.at("evaluations").get_to(v.evaluations);
    j.at("variance").get_to(v.variance);
    j.at("degenerate").get_to(v.degenerate);
}

inline void to_json(nlohmann::json& j, const OfatResult& v) {
    j = {{"factor", v.factor}, {"metric", v.metric}, {"values", v.values}, {"outputs", v.outputs},
         {"r", v.r},           {"p", v.p},           {"degenerate", v.degenerate}};
}
inline void from_json(const nlohmann::json& j, OfatResult& v) {
    j.at("factor").get_to(v.factor);
    j.at("metric").get_to(v.metric);
    j.at("values").get_to(v.values);
    j.at("outputs").get_to(v.outputs);
    j.at("r").get_to(v.r);
    j.at("p").get_to(v.p);
    j.at("degenerate").get_to(v.degenerate);
}

inline void to_json(nlohmann::json& j, const SeriesPoint& v) {
    j = {{"x", v.x}, {"mean", v.mean}, {"std", v.std}, {"n", v.n}};
}
inline void from_json(const nlohmann::json& j, SeriesPoint& v) {
    j.at("x").get_to(v.x);
    j.at("mean").get_to(v.mean);
    j.at("std").get_to(v.std);
    j.at("n").get_to(v.n);
}

inline void to_json(nlohmann::json& j, const Series& v) {
    j = {{"metric", v.metric}, {"factor", v.factor}, {"points", v.points}};
}
inline void from_json(const nlohmann::json& j, Series& v) {
    j.at("metric").get_to(v.metric);
    j.at("factor").get_to(v.factor);
    j.at("points").get_to(v.points);
}

inline void to_json(nlohmann::json& j, const MetricSensitivity& v) { j = {{"metric", v.metric}, {"result", v.result}}; }
inline void from_json(const nlohmann::json& j, MetricSensitivity& v) {
    j.at("metric").get_to(v.metric);
    j.at("result").get_to(v.result);
}

inline void to_json(nlohmann::json& j, const RunRow& v) {
    j = {{"point", v.point},       {"factor", v.factor},     {"sigma", v.sigma},
         {"mean_id", v.mean_id},   {"replicate", v.replicate}, {"seed", v.seed},
         {"schedule", to_string(v.schedule)}, {"lcps", v.lcps}, {"mean_abs_acc", v.mean_abs_acc},
         {"max_throughput_vph", v.max_throughput_vph}, {"inserted", v.inserted}, {"exited", v.exited},
         {"crashed", v.crashed},   {"failure", v.failure}};
}
inline void from_json(const nlohmann::json& j, RunRow& v) {
    j.at("point").get_to(v.point);
    j.at("factor").get_to(v.factor);
    j.at("sigma").get_to(v.sigma);
    j.at("mean_id").get_to(v.mean_id);
    j.at("replicate").get_to(v.replicate);
    j.at("seed").get_to(v.seed);
    const auto schedule = j.at("schedule").get<std::string>();
    if (schedule != "constant" && schedule != "ramped") throw OutputError("unknown schedule '" + schedule + "'");
    v.schedule = schedule == "constant" ? InflowSchedule::constant : InflowSchedule::ramped;
    j.at("lcps").get_to(v.lcps);
    j.at("mean_abs_acc").get_to(v.mean_abs_acc);
    j.at("max_throughput_vph").get_to(v.max_throughput_vph);
    j.at("inserted").get_to(v.inserted);
    j.at("exited").get_to(v.exited);
    j.at("crashed").get_to(v.crashed);
    j.at("failure").get_to(v.failure);
}

inline nlohmann::json campaign_to_json(const CampaignResult& r) {
    return {{"kind", to_string(r.kind)}, {"runs", r.runs},
            {"series", r.series},        {"ofat", r.ofat},
            {"sensitivity", r.sensitivity}, {"design_factors", r.design_factors},
            {"design", r.design},        {"failures", r.failures}};
}

inline CampaignResult campaign_from_json(const nlohmann::json& j) {
    CampaignResult r;
    r.kind = kind_from_string(j.at("kind").get<std::string>());
    j.at("runs").get_to(r.runs);
    j.at("series").get_to(r.series);
    j.at("ofat").get_to(r.ofat);
    j.at("sensitivity").get_to(r.sensitivity);
    j.at("design_factors").get_to(r.design_factors);
    j.at("design").get_to(r.design);
    j.at("failures").get_to(r.failures);
    return r;
}

// --- files ----------------------------------------------------------------

inline void write_runs_csv(const std::filesystem::path& path, const std::vector<RunRow>& runs) {
    detail::CsvWriter w(path, {"point", "factor", "sigma", "mean_id", "replicate", "seed", "schedule", "lcps",
                               "mean_abs_acc", "max_throughput_vph", "inserted", "exited", "crashed"});
    using detail::num;
    for (const auto& r : runs)
        w.row({std::to_string(r.point), r.factor, num(r.sigma), std::to_string(r.mean_id), std::to_string(r.replicate),
               num(r.seed), to_string(r.schedule), num(r.lcps), num(r.mean_abs_acc), num(r.max_throughput_vph),
               num(r.inserted), num(r.exited), r.crashed ? "1" : "0"});
}

inline void write_series_csv(const std::filesystem::path& path, const Series& s) {
    detail::CsvWriter w(path, {"x", "mean", "std", "n"});
    using detail::num;
    for (const auto& p : s.points) w.row({num(p.x), num(p.mean), num(p.std), std::to_string(p.n)});
}

inline void write_outputs(const std::filesystem::path& dir, const CampaignResult& r,
                          const std::optional<ExperimentConfig>& config = std::nullopt) {
    using detail::num;
    prepare_output_dir(dir);
    write_runs_csv(dir / "runs.csv", r.runs);

    if (r.kind == ExperimentKind::ofat) {
        detail::CsvWriter series(dir / "ofat_series.csv", {"factor", "metric", "x", "mean", "std", "n"});
        for (const auto& s : r.series)
            for (const auto& p : s.points)
                series.row({s.factor, s.metric, num(p.x), num(p.mean), num(p.std), std::to_string(p.n)});
        const std::vector<std::string> header = {"factor", "metric", "r", "p_value", "significant", "degenerate", "n"};
        detail::CsvWriter all(dir / "ofat.csv", header);
        detail::CsvWriter sig(dir / "ofat_significant.csv", header);
        for (const auto& o : r.ofat) {
            const std::vector<std::string> row = {o.factor, o.metric, num(o.r), num(o.p), o.significant() ? "1" : "0",
                                                  o.degenerate ? "1" : "0", std::to_string(o.values.size())};
            all.row(row);
            if (o.significant()) sig.row(row);
        }
    } else {
        for (const auto& s : r.series) write_series_csv(dir / ("series_" + s.metric + ".csv"), s);
    }

    if (!r.sensitivity.empty() || r.kind == ExperimentKind::sobol_het || r.kind == ExperimentKind::sobol_mean) {
        std::vector<std::string> header = {"point"};
        header.insert(header.end(), r.design_factors.begin(), r.design_factors.end());
        detail::CsvWriter design(dir / "design.csv", header);
        for (std::size_t i = 0; i < r.design.size(); ++i) {
            std::vector<std::string> row = {std::to_string(i)};
            for (double x : r.design[i]) row.push_back(num(x));
            design.row(row);
        }
        detail::CsvWriter sens(dir / "sensitivity.csv", {"metric", "factor", "order", "estimate", "ci_low", "ci_high"});
        for (const auto& ms : r.sensitivity) {
            const auto& s = ms.result;
            auto emit = [&](const std::string& factor, const char* order, const IndexEstimate& e) {
                sens.row({ms.metric, factor, order, num(e.value), num(e.ci.low), num(e.ci.high)});
            };
            for (std::size_t i = 0; i < s.first.size(); ++i) emit(s.names[i], "first", s.first[i]);
            for (std::size_t i = 0; i < s.total.size(); ++i) emit(s.names[i], "total", s.total[i]);
            for (std::size_t i = 0; i < s.second.size(); ++i)
                for (std::size_t m = i + 1; m < s.second.size(); ++m)
                    emit(s.names[i] + "*" + s.names[m], "second", s.second[i][m]);
        }
    }

    auto summary = campaign_to_json(r);
    if (config) summary["config"] = dump_experiment_config(*config);
    std::ofstream json(dir / "summary.json");
    if (!json) throw OutputError("cannot write " + (dir / "summary.json").string());
    json << summary.dump(1) << "\n";
}

} // namespace hetsim
