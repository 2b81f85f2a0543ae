#pragma once

/// INI configuration for campaigns. Every physical quantity carries its unit
/// in the key name (`arm_length_m`, `v0_mph_min`, `a_mps2_max`); speeds may
/// be given in mph or m/s. Unknown sections and keys are rejected so a
/// missing unit suffix cannot silently fall back to a default.
///
///   [experiment]  kind seed common_seeds means seeds sigma_low sigma_high
///                 sigma_count sigma_values jobs out_dir factors pinned
///   [simulation]  timestep_s duration_s inflow_vph ramp_start_vph ramp_end_vph
///                 mandatory_zone_m lane_change_cooldown_s emergency_decel_mps2
///                 lookahead_m lookahead_hops lcps_per_vehicle
///   [geometry]    arm_length_m lanes ramp_length_m loop_length_m weave_length_m
///                 merge_length_m detector_offset_m detectors_per_arm
///                 detector_spacing_m detector_window_s
///   [routes]      through right left
///   [fleet]       <param>_<unit>_min / _max for the 11 sampled parameters,
///                 T_s c b_safe_mps2
///   [sobol]       n second_order sigma sigma_max bootstrap

#include <charconv>
#include <functional>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "experiments.hpp"

namespace hetsim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest text that parses back to exactly `x`.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace detail {

inline double parse_double(const std::string& where, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) throw ConfigError(where + ": '" + text + "' is not a number");
    return v;
}

inline std::uint64_t parse_uint(const std::string& where, const std::string& text) {
    std::uint64_t v = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw ConfigError(where + ": '" + text + "' is not a non-negative integer");
    return v;
}

inline bool parse_bool(const std::string& where, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(where + ": '" + text + "' is not a boolean");
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

inline std::vector<Param> parse_params(const std::string& where, const std::string& text) {
    std::vector<Param> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        item = trim(item);
        if (item.empty()) continue;
        const auto p = param_from_name(item);
        if (!p) throw ConfigError(where + ": unknown parameter '" + item + "'");
        out.push_back(*p);
    }
    return out;
}

inline std::string join_params(const std::vector<Param>& ps) {
    std::string out;
    for (auto p : ps) {
        if (!out.empty()) out += ",";
        out += param_name(p);
    }
    return out;
}

struct Field {
    std::string section;
    std::string key;
    std::function<void(ExperimentConfig&, const std::string& where, const std::string& value)> set;
    /// Empty for aliases that are accepted but never written.
    std::function<std::string(const ExperimentConfig&)> get;
};

using DoubleRef = std::function<double&(ExperimentConfig&)>;

inline Field number(std::string section, std::string key, DoubleRef ref, double to_si = 1.0) {
    return {std::move(section), std::move(key),
            [ref, to_si](ExperimentConfig& c, const std::string& w, const std::string& v) {
                ref(c) = parse_double(w, v) * to_si;
            },
            [ref, to_si](const ExperimentConfig& c) {
                return format_double(ref(const_cast<ExperimentConfig&>(c)) / to_si);
            }};
}

template <class Int>
Field integer(std::string section, std::string key, std::function<Int&(ExperimentConfig&)> ref) {
    return {std::move(section), std::move(key),
            [ref](ExperimentConfig& c, const std::string& w, const std::string& v) {
                ref(c) = static_cast<Int>(parse_uint(w, v));
            },
            [ref](const ExperimentConfig& c) { return std::to_string(ref(const_cast<ExperimentConfig&>(c))); }};
}

inline Field flag(std::string section, std::string key, std::function<bool&(ExperimentConfig&)> ref) {
    return {std::move(section), std::move(key),
            [ref](ExperimentConfig& c, const std::string& w, const std::string& v) { ref(c) = parse_bool(w, v); },
            [ref](const ExperimentConfig& c) {
                return std::string(ref(const_cast<ExperimentConfig&>(c)) ? "true" : "false");
            }};
}

inline Field alias(Field f) {
    f.get = nullptr;
    return f;
}

/// Unit suffix and SI factor for each sampled parameter's bound keys.
struct BoundUnit {
    Param param;
    const char* unit;
    double to_si;
    const char* alt_unit;
    double alt_to_si;
};

inline const std::vector<BoundUnit>& bound_units() {
    static const std::vector<BoundUnit> units = {
        {Param::politeness, "", 1.0, nullptr, 0.0},
        {Param::lc_bias, "mps2", 1.0, nullptr, 0.0},
        {Param::min_gap, "m", 1.0, nullptr, 0.0},
        {Param::critical_speed, "mph", kMphToMps, "mps", 1.0},
        {Param::lc_threshold, "mps2", 1.0, nullptr, 0.0},
        {Param::comfortable_decel, "mps2", 1.0, nullptr, 0.0},
        {Param::accel_exponent, "", 1.0, nullptr, 0.0},
        {Param::length, "m", 1.0, nullptr, 0.0},
        {Param::max_speed, "mph", kMphToMps, "mps", 1.0},
        {Param::desired_speed, "mph", kMphToMps, "mps", 1.0},
        {Param::max_accel, "mps2", 1.0, nullptr, 0.0},
    };
    return units;
}

inline std::string bound_key(Param p, const char* unit, const char* end) {
    std::string k(param_name(p));
    if (unit && *unit) k += std::string("_") + unit;
    return k + "_" + end;
}

inline const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        const std::string ex = "experiment", sim = "simulation", geo = "geometry", rt = "routes", fl = "fleet",
                          so = "sobol";
        f.push_back({ex, "kind",
                     [](ExperimentConfig& c, const std::string& w, const std::string& v) {
                         try {
                             c.kind = kind_from_string(v);
                         } catch (const std::invalid_argument& e) {
                             throw ConfigError(w + ": " + e.what());
                         }
                     },
                     [](const ExperimentConfig& c) { return std::string(to_string(c.kind)); }});
        f.push_back(integer<std::uint64_t>(ex, "seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.master_seed; }));
        f.push_back(flag(ex, "common_seeds", [](ExperimentConfig& c) -> bool& { return c.common_seeds; }));
        f.push_back(integer<std::size_t>(ex, "means", [](ExperimentConfig& c) -> std::size_t& { return c.means; }));
        f.push_back(integer<std::size_t>(ex, "seeds", [](ExperimentConfig& c) -> std::size_t& { return c.seeds; }));
        f.push_back(number(ex, "sigma_low", [](ExperimentConfig& c) -> double& { return c.grid.low; }));
        f.push_back(number(ex, "sigma_high", [](ExperimentConfig& c) -> double& { return c.grid.high; }));
        f.push_back(integer<std::size_t>(ex, "sigma_count", [](ExperimentConfig& c) -> std::size_t& { return c.grid.count; }));
        f.push_back({ex, "sigma_values",
                     [](ExperimentConfig& c, const std::string& w, const std::string& v) {
                         c.grid.list.clear();
                         std::stringstream ss(v);
                         for (std::string item; std::getline(ss, item, ',');)
                             if (!trim(item).empty()) c.grid.list.push_back(parse_double(w, trim(item)));
                     },
                     [](const ExperimentConfig& c) {
                         std::string out;
                         for (double x : c.grid.list) out += (out.empty() ? "" : ",") + format_double(x);
                         return out;
                     }});
        f.push_back(integer<std::size_t>(ex, "jobs", [](ExperimentConfig& c) -> std::size_t& { return c.jobs; }));
        f.push_back({ex, "out_dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
                     [](const ExperimentConfig& c) { return c.out_dir; }});
        f.push_back({ex, "factors",
                     [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.factors = parse_params(w, v); },
                     [](const ExperimentConfig& c) { return join_params(c.factors); }});
        f.push_back({ex, "pinned",
                     [](ExperimentConfig& c, const std::string& w, const std::string& v) { c.pinned = parse_params(w, v); },
                     [](const ExperimentConfig& c) { return join_params(c.pinned); }});

        f.push_back(number(sim, "timestep_s", [](ExperimentConfig& c) -> double& { return c.sim.timestep; }));
        f.push_back(number(sim, "duration_s", [](ExperimentConfig& c) -> double& { return c.sim.duration; }));
        f.push_back(number(sim, "inflow_vph", [](ExperimentConfig& c) -> double& { return c.sim.inflow_vph; }));
        f.push_back(number(sim, "ramp_start_vph", [](ExperimentConfig& c) -> double& { return c.sim.ramp_start_vph; }));
        f.push_back(number(sim, "ramp_end_vph", [](ExperimentConfig& c) -> double& { return c.sim.ramp_end_vph; }));
        f.push_back(number(sim, "mandatory_zone_m", [](ExperimentConfig& c) -> double& { return c.sim.mandatory_zone; }));
        f.push_back(number(sim, "lane_change_cooldown_s",
                           [](ExperimentConfig& c) -> double& { return c.sim.lane_change_cooldown; }));
        f.push_back(number(sim, "emergency_decel_mps2", [](ExperimentConfig& c) -> double& { return c.sim.emergency_decel; }));
        f.push_back(number(sim, "lookahead_m", [](ExperimentConfig& c) -> double& { return c.sim.lookahead.horizon; }));
        f.push_back(integer<int>(sim, "lookahead_hops", [](ExperimentConfig& c) -> int& { return c.sim.lookahead.max_hops; }));
        f.push_back(flag(sim, "lcps_per_vehicle", [](ExperimentConfig& c) -> bool& { return c.sim.lcps_per_vehicle; }));

        f.push_back(number(geo, "arm_length_m", [](ExperimentConfig& c) -> double& { return c.sim.geometry.arm_length; }));
        f.push_back(integer<int>(geo, "lanes", [](ExperimentConfig& c) -> int& { return c.sim.geometry.lanes; }));
        f.push_back(number(geo, "ramp_length_m", [](ExperimentConfig& c) -> double& { return c.sim.geometry.ramp_length; }));
        f.push_back(number(geo, "loop_length_m", [](ExperimentConfig& c) -> double& { return c.sim.geometry.loop_length; }));
        f.push_back(number(geo, "weave_length_m", [](ExperimentConfig& c) -> double& { return c.sim.geometry.weave_length; }));
        f.push_back(number(geo, "merge_length_m", [](ExperimentConfig& c) -> double& { return c.sim.geometry.merge_length; }));
        f.push_back(number(geo, "detector_offset_m",
                           [](ExperimentConfig& c) -> double& { return c.sim.geometry.detector_offset; }));
        f.push_back(integer<int>(geo, "detectors_per_arm",
                                 [](ExperimentConfig& c) -> int& { return c.sim.geometry.detectors_per_arm; }));
        f.push_back(number(geo, "detector_spacing_m",
                           [](ExperimentConfig& c) -> double& { return c.sim.geometry.detector_spacing; }));
        f.push_back(number(geo, "detector_window_s",
                           [](ExperimentConfig& c) -> double& { return c.sim.geometry.detector_window; }));

        f.push_back(number(rt, "through", [](ExperimentConfig& c) -> double& { return c.sim.routes.through; }));
        f.push_back(number(rt, "right", [](ExperimentConfig& c) -> double& { return c.sim.routes.right; }));
        f.push_back(number(rt, "left", [](ExperimentConfig& c) -> double& { return c.sim.routes.left; }));

        for (const auto& u : bound_units()) {
            const auto i = index(u.param);
            f.push_back(number(fl, bound_key(u.param, u.unit, "min"),
                               [i](ExperimentConfig& c) -> double& { return c.bounds.min[i]; }, u.to_si));
            f.push_back(number(fl, bound_key(u.param, u.unit, "max"),
                               [i](ExperimentConfig& c) -> double& { return c.bounds.max[i]; }, u.to_si));
            if (u.alt_unit) {
                f.push_back(alias(number(fl, bound_key(u.param, u.alt_unit, "min"),
                                         [i](ExperimentConfig& c) -> double& { return c.bounds.min[i]; }, u.alt_to_si)));
                f.push_back(alias(number(fl, bound_key(u.param, u.alt_unit, "max"),
                                         [i](ExperimentConfig& c) -> double& { return c.bounds.max[i]; }, u.alt_to_si)));
            }
        }
        f.push_back(number(fl, "T_s", [](ExperimentConfig& c) -> double& { return c.fixed.time_headway; }));
        f.push_back(number(fl, "c", [](ExperimentConfig& c) -> double& { return c.fixed.coolness; }));
        f.push_back(number(fl, "b_safe_mps2", [](ExperimentConfig& c) -> double& { return c.fixed.safe_decel; }));

        f.push_back(integer<std::size_t>(so, "n", [](ExperimentConfig& c) -> std::size_t& { return c.sobol_n; }));
        f.push_back(flag(so, "second_order", [](ExperimentConfig& c) -> bool& { return c.second_order; }));
        f.push_back(number(so, "sigma", [](ExperimentConfig& c) -> double& { return c.sobol_sigma; }));
        f.push_back(number(so, "sigma_max", [](ExperimentConfig& c) -> double& { return c.sobol_sigma_max; }));
        f.push_back(integer<std::size_t>(so, "bootstrap", [](ExperimentConfig& c) -> std::size_t& { return c.bootstrap; }));
        return f;
    }();
    return table;
}

inline const Field* find_field(const std::string& section, const std::string& key) {
    for (const auto& f : fields())
        if (f.section == section && f.key == key) return &f;
    return nullptr;
}

} // namespace detail

/// Reads the experiment kind named in a configuration, if any.
inline std::optional<ExperimentKind> peek_kind(const boost::property_tree::ptree& tree) {
    if (auto v = tree.get_optional<std::string>("experiment.kind")) {
        try {
            return kind_from_string(detail::trim(*v));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("[experiment] kind: ") + e.what());
        }
    }
    return std::nullopt;
}

/// Applies every key of `tree` on top of `base`.
inline ExperimentConfig apply_config(const boost::property_tree::ptree& tree, ExperimentConfig base) {
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("key '" + section + "' must be inside a [section]");
        for (const auto& [key, node] : body) {
            const auto* field = detail::find_field(section, key);
            if (!field) throw ConfigError("unknown key [" + section + "] " + key);
            field->set(base, "[" + section + "] " + key, detail::trim(node.data()));
        }
    }
    return base;
}

inline boost::property_tree::ptree parse_ini(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return tree;
}

/// Builds a configuration: the preset for the configured kind (or
/// `default_kind`) at `scale`, overridden by the file's keys.
inline ExperimentConfig load_experiment_config(std::istream& in, Scale scale,
                                               ExperimentKind default_kind = ExperimentKind::het_sweep) {
    const auto tree = parse_ini(in);
    const auto kind = peek_kind(tree).value_or(default_kind);
    return apply_config(tree, ExperimentConfig::preset(kind, scale));
}

inline ExperimentConfig load_experiment_config_file(const std::string& path, Scale scale,
                                                    ExperimentKind default_kind = ExperimentKind::het_sweep) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return load_experiment_config(in, scale, default_kind);
}

/// Writes every setting back out in the same format.
inline std::string dump_experiment_config(const ExperimentConfig& c) {
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
    std::vector<std::string> order;
    for (const auto& f : detail::fields()) {
        if (!f.get) continue;
        if (!sections.count(f.section)) order.push_back(f.section);
        sections[f.section].emplace_back(f.key, f.get(c));
    }
    std::ostringstream out;
    for (const auto& s : order) {
        out << "[" << s << "]\n";
        for (const auto& [k, v] : sections[s]) out << k << " = " << v << "\n";
        out << "\n";
    }
    return out.str();
}

} // namespace hetsim
