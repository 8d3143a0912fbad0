#pragma once

// Run configuration: a YAML document whose numeric scalars may carry
// engineering suffixes (10u, 100p, 25p, 92m, 100k, 1meg). Every omitted
// field keeps its built-in default (EPC2038 ratings, test-board circuit,
// published degradation parameters, D = 0.7, 0.4 A drive).
//
//   mode: campaign              # simulate | campaign | fit | extract
//   out_dir: results
//   device:      {vds_max_pulsed, vds_max_continuous, id_max, vgs_max, vgs_min,
//                 tj_min_c | tj_min_k, tj_max_c | tj_max_k, rds_on_nominal}
//   circuit:     {vin, l_drain, c_in, c_out, v_supply, diode_vf, series_r, r_load}
//   drive:       {frequency, duty, v_gate_high, v_gate_low}
//   sim:         {steps_per_period, n_periods, settle_fraction}
//   degradation: {a, b, hbar_omega_lo, v_fd, alpha, t0_min, k_boltzmann, vertical_offset}
//   extraction:  {shape_factor}
//   cell:        {id, v_stress, temp_c | temp_k, i_drive, duty, duration_min, sample_times_min}
//   campaign:    {frequency: auto | <Hz>, points_per_decade, threads, sim: {...}, cells: [<cell>...]}
//
// `cell` supplies defaults for every entry of campaign.cells; without a
// cells list the campaign runs that single cell. A cell's v_stress
// defaults to circuit.v_supply; its duty is independent of drive.duty,
// which only applies to the simulate mode. `sim` likewise governs
// the simulate mode only; campaigns use campaign.sim (12 periods by default).

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hvrb/campaign.hpp"
#include "hvrb/converter.hpp"
#include "hvrb/degradation.hpp"
#include "hvrb/device.hpp"
#include "hvrb/error.hpp"
#include "hvrb/format.hpp"

namespace hvrb {

enum class RunMode { simulate, campaign, fit, extract };

inline const char* to_string(RunMode m) noexcept {
    switch (m) {
        case RunMode::simulate: return "simulate";
        case RunMode::campaign: return "campaign";
        case RunMode::fit: return "fit";
        case RunMode::extract: return "extract";
    }
    return "?";
}

struct RunConfig {
    std::optional<RunMode> mode;
    std::string out_dir;  // empty: current directory / CLI --out

    DeviceRatings ratings;
    CircuitParams circuit;
    DriveSignal drive;
    SimConfig sim;
    DegradationParams degradation;
    double shape_factor = default_shape_factor;

    StressCell cell;                 // defaults for campaign cells
    std::vector<StressCell> cells;   // fully resolved; never empty after parsing
    std::optional<double> campaign_frequency;  // empty: calibrate per cell
    SimConfig campaign_sim{1000, 12, 0.5};
    int points_per_decade = 20;
    unsigned threads = 0;

    CampaignSettings campaign_settings() const {
        CampaignSettings s;
        s.circuit = circuit;
        s.drive = drive;
        s.auto_frequency = !campaign_frequency.has_value();
        if (campaign_frequency) s.drive.frequency = *campaign_frequency;
        s.ratings = ratings;
        s.degradation = degradation;
        s.sim = campaign_sim;
        s.shape_factor = shape_factor;
        s.points_per_decade = points_per_decade;
        s.threads = threads;
        return s;
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses "10u", "2.5e-3", "100k", "1meg", "92m". Case-sensitive: m is milli, M or meg is mega.
inline std::optional<double> parse_engineering(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{}) return std::nullopt;
    const std::string_view suffix(ptr, static_cast<std::size_t>(text.data() + text.size() - ptr));
    double scale = 1.0;
    if (suffix.empty()) scale = 1.0;
    else if (suffix == "f") scale = 1e-15;
    else if (suffix == "p") scale = 1e-12;
    else if (suffix == "n") scale = 1e-9;
    else if (suffix == "u" || suffix == "\xC2\xB5") scale = 1e-6;
    else if (suffix == "m") scale = 1e-3;
    else if (suffix == "k" || suffix == "K") scale = 1e3;
    else if (suffix == "M" || suffix == "meg" || suffix == "Meg") scale = 1e6;
    else if (suffix == "G") scale = 1e9;
    else return std::nullopt;
    const double out = value * scale;
    if (!std::isfinite(out)) return std::nullopt;
    return out;
}

namespace detail {

class ConfigReader {
public:
    std::vector<std::string> unknown;

    void check_keys(const YAML::Node& map, const std::string& path,
                    std::initializer_list<std::string_view> allowed) {
        if (!map.IsMap()) fail(ErrorKind::config, path + " must be a mapping");
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            bool ok = false;
            for (auto a : allowed) ok = ok || key == a;
            if (!ok) unknown.push_back(path.empty() ? key : path + "." + key);
        }
    }

    static double number(const YAML::Node& node, const std::string& path) {
        if (!node.IsScalar()) fail(ErrorKind::config, path + ": expected a number");
        const auto v = parse_engineering(node.Scalar());
        if (!v) fail(ErrorKind::config, path + ": cannot parse '" + node.Scalar() + "' as a number");
        return *v;
    }

    static void read(const YAML::Node& map, const char* key, const std::string& path, double& out) {
        if (const auto n = map[key]) out = number(n, path + "." + key);
    }

    static void read_int(const YAML::Node& map, const char* key, const std::string& path, int& out) {
        if (const auto n = map[key]) {
            const double v = number(n, path + "." + key);
            if (v != std::floor(v) || std::abs(v) > 1e9) {
                fail(ErrorKind::config, path + "." + key + ": expected an integer");
            }
            out = static_cast<int>(v);
        }
    }

    static void read_kelvin(const YAML::Node& map, const char* base, const std::string& path, double& out) {
        const std::string c_key = std::string(base) + "_c";
        const std::string k_key = std::string(base) + "_k";
        const auto c = map[c_key];
        const auto k = map[k_key];
        if (c && k) fail(ErrorKind::config, path + ": give only one of " + c_key + " and " + k_key);
        if (c) out = celsius_to_kelvin(number(c, path + "." + c_key));
        if (k) out = number(k, path + "." + k_key);
    }

    // Fields a cell entry may set; absent ones stay as in `cell`.
    void read_cell(const YAML::Node& node, const std::string& path, StressCell& cell) {
        check_keys(node, path, {"id", "v_stress", "temp_c", "temp_k", "i_drive", "duty", "duration_min",
                                "sample_times_min"});
        if (const auto n = node["id"]) cell.id = n.as<std::string>();
        read(node, "v_stress", path, cell.v_stress);
        read_kelvin(node, "temp", path, cell.temp);
        read(node, "i_drive", path, cell.i_drive);
        read(node, "duty", path, cell.duty);
        read(node, "duration_min", path, cell.duration);
        if (const auto n = node["sample_times_min"]) {
            if (!n.IsSequence()) fail(ErrorKind::config, path + ".sample_times_min: expected a list");
            cell.sample_times.clear();
            for (std::size_t k = 0; k < n.size(); ++k) {
                cell.sample_times.push_back(number(n[k], path + ".sample_times_min[" + std::to_string(k) + "]"));
            }
        }
    }
};

inline void validate_cell_id(const std::string& id) {
    if (id.empty()) fail(ErrorKind::config, "cell id must not be empty");
    for (char ch : id) {
        const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                        ch == '_' || ch == '-' || ch == '.';
        if (!ok) fail(ErrorKind::config, "cell id '" + id + "' may only contain [A-Za-z0-9_.-]");
    }
}

}  // namespace detail

inline RunMode parse_mode(const std::string& text) {
    if (text == "simulate") return RunMode::simulate;
    if (text == "campaign") return RunMode::campaign;
    if (text == "fit") return RunMode::fit;
    if (text == "extract") return RunMode::extract;
    fail(ErrorKind::config, "mode must be one of simulate | campaign | fit | extract, got '" + text + "'");
}

/// Parses and fully validates a configuration document.
inline RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        fail(ErrorKind::config, std::string("malformed document: ") + e.what());
    }

    RunConfig cfg;
    detail::ConfigReader r;

    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    r.check_keys(root, "", {"mode", "out_dir", "device", "circuit", "drive", "sim", "degradation",
                            "extraction", "cell", "campaign"});

    try {
        if (const auto n = root["mode"]) cfg.mode = parse_mode(n.as<std::string>());
        if (const auto n = root["out_dir"]) cfg.out_dir = n.as<std::string>();

        if (const auto d = root["device"]) {
            r.check_keys(d, "device", {"vds_max_pulsed", "vds_max_continuous", "id_max", "vgs_max", "vgs_min",
                                       "tj_min_c", "tj_min_k", "tj_max_c", "tj_max_k", "rds_on_nominal"});
            auto& x = cfg.ratings;
            r.read(d, "vds_max_pulsed", "device", x.vds_max_pulsed);
            r.read(d, "vds_max_continuous", "device", x.vds_max_continuous);
            r.read(d, "id_max", "device", x.id_max);
            r.read(d, "vgs_max", "device", x.vgs_max);
            r.read(d, "vgs_min", "device", x.vgs_min);
            r.read_kelvin(d, "tj_min", "device", x.tj_min);
            r.read_kelvin(d, "tj_max", "device", x.tj_max);
            r.read(d, "rds_on_nominal", "device", x.rds_on_nominal);
        }
        if (const auto c = root["circuit"]) {
            r.check_keys(c, "circuit", {"vin", "l_drain", "c_in", "c_out", "v_supply", "diode_vf", "series_r", "r_load"});
            auto& x = cfg.circuit;
            r.read(c, "vin", "circuit", x.vin);
            r.read(c, "l_drain", "circuit", x.l_drain);
            r.read(c, "c_in", "circuit", x.c_in);
            r.read(c, "c_out", "circuit", x.c_out);
            r.read(c, "v_supply", "circuit", x.v_supply);
            r.read(c, "diode_vf", "circuit", x.diode_vf);
            r.read(c, "series_r", "circuit", x.series_r);
            if (const auto n = c["r_load"]) {
                if (n.IsScalar() && n.Scalar() == "none") x.r_load.reset();
                else x.r_load = r.number(n, "circuit.r_load");
            }
        }
        if (const auto d = root["drive"]) {
            r.check_keys(d, "drive", {"frequency", "duty", "v_gate_high", "v_gate_low"});
            r.read(d, "frequency", "drive", cfg.drive.frequency);
            r.read(d, "duty", "drive", cfg.drive.duty);
            r.read(d, "v_gate_high", "drive", cfg.drive.v_gate_high);
            r.read(d, "v_gate_low", "drive", cfg.drive.v_gate_low);
        }
        if (const auto s = root["sim"]) {
            r.check_keys(s, "sim", {"steps_per_period", "n_periods", "settle_fraction"});
            r.read_int(s, "steps_per_period", "sim", cfg.sim.steps_per_period);
            r.read_int(s, "n_periods", "sim", cfg.sim.n_periods);
            r.read(s, "settle_fraction", "sim", cfg.sim.settle_fraction);
        }
        if (const auto g = root["degradation"]) {
            r.check_keys(g, "degradation", {"a", "b", "hbar_omega_lo", "v_fd", "alpha", "t0_min", "k_boltzmann",
                                            "vertical_offset"});
            auto& x = cfg.degradation;
            r.read(g, "a", "degradation", x.a);
            r.read(g, "b", "degradation", x.b);
            r.read(g, "hbar_omega_lo", "degradation", x.hbar_omega_lo);
            r.read(g, "v_fd", "degradation", x.v_fd);
            r.read(g, "alpha", "degradation", x.alpha);
            r.read(g, "t0_min", "degradation", x.t0);
            r.read(g, "k_boltzmann", "degradation", x.k_boltzmann);
            r.read(g, "vertical_offset", "degradation", x.vertical_offset);
        }
        if (const auto e = root["extraction"]) {
            r.check_keys(e, "extraction", {"shape_factor"});
            r.read(e, "shape_factor", "extraction", cfg.shape_factor);
        }

        cfg.cell.v_stress = cfg.circuit.v_supply;
        if (const auto c = root["cell"]) {
            r.read_cell(c, "cell", cfg.cell);
        }

        if (const auto c = root["campaign"]) {
            r.check_keys(c, "campaign", {"frequency", "points_per_decade", "threads", "cells", "sim"});
            if (const auto f = c["frequency"]) {
                if (f.IsScalar() && f.Scalar() == "auto") cfg.campaign_frequency.reset();
                else cfg.campaign_frequency = r.number(f, "campaign.frequency");
            }
            r.read_int(c, "points_per_decade", "campaign", cfg.points_per_decade);
            if (const auto t = c["threads"]) {
                int threads = 0;
                r.read_int(c, "threads", "campaign", threads);
                if (threads < 0) fail(ErrorKind::config, "campaign.threads must be >= 0");
                cfg.threads = static_cast<unsigned>(threads);
            }
            if (const auto s = c["sim"]) {
                r.check_keys(s, "campaign.sim", {"steps_per_period", "n_periods", "settle_fraction"});
                r.read_int(s, "steps_per_period", "campaign.sim", cfg.campaign_sim.steps_per_period);
                r.read_int(s, "n_periods", "campaign.sim", cfg.campaign_sim.n_periods);
                r.read(s, "settle_fraction", "campaign.sim", cfg.campaign_sim.settle_fraction);
            }
            if (const auto list = c["cells"]) {
                if (!list.IsSequence()) fail(ErrorKind::config, "campaign.cells: expected a list");
                for (std::size_t k = 0; k < list.size(); ++k) {
                    StressCell cell = cfg.cell;
                    cell.id = "cell" + std::to_string(k);
                    r.read_cell(list[k], "campaign.cells[" + std::to_string(k) + "]", cell);
                    cfg.cells.push_back(std::move(cell));
                }
            }
        }
    } catch (const YAML::Exception& e) {
        fail(ErrorKind::config, std::string("malformed document: ") + e.what());
    }

    if (!r.unknown.empty()) {
        std::string msg = "unknown keys:";
        for (const auto& k : r.unknown) msg += " " + k;
        fail(ErrorKind::config, msg);
    }
    if (cfg.cells.empty()) cfg.cells.push_back(cfg.cell);

    try {
        cfg.ratings.validate();
        cfg.drive.validate();
        cfg.circuit.validate();
        cfg.sim.validate();
        cfg.campaign_sim.validate();
        cfg.degradation.validate();
        if (!(cfg.shape_factor > 0.0)) fail(ErrorKind::invalid_parameter, "shape_factor must be > 0");
        if (cfg.campaign_frequency && !(*cfg.campaign_frequency > 0.0)) {
            fail(ErrorKind::invalid_parameter, "campaign.frequency must be > 0");
        }
        if (cfg.points_per_decade < 1) fail(ErrorKind::invalid_parameter, "points_per_decade must be >= 1");
        std::set<std::string> ids;
        detail::validate_cell_id(cfg.cell.id);
        for (const auto& cell : cfg.cells) {
            detail::validate_cell_id(cell.id);
            if (!ids.insert(cell.id).second) fail(ErrorKind::config, "duplicate cell id '" + cell.id + "'");
            cell.validate();
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::config) throw;
        fail(ErrorKind::config, e.what());
    }
    return cfg;
}

namespace detail {

inline void emit_cell(YAML::Emitter& out, const StressCell& c) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << c.id;
    out << YAML::Key << "v_stress" << YAML::Value << format_number(c.v_stress);
    out << YAML::Key << "temp_k" << YAML::Value << format_number(c.temp);
    out << YAML::Key << "i_drive" << YAML::Value << format_number(c.i_drive);
    out << YAML::Key << "duty" << YAML::Value << format_number(c.duty);
    out << YAML::Key << "duration_min" << YAML::Value << format_number(c.duration);
    // Always written: an empty list means the log-spaced default schedule.
    out << YAML::Key << "sample_times_min" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double t : c.sample_times) out << format_number(t);
    out << YAML::EndSeq;
    out << YAML::EndMap;
}

}  // namespace detail

/// Canonical YAML form of a configuration; parse_config(echo_config(c)) == c.
inline std::string echo_config(const RunConfig& cfg) {
    YAML::Emitter out;
    auto kv = [&out](const char* key, double v) { out << YAML::Key << key << YAML::Value << format_number(v); };
    out << YAML::BeginMap;
    if (cfg.mode) out << YAML::Key << "mode" << YAML::Value << to_string(*cfg.mode);
    if (!cfg.out_dir.empty()) out << YAML::Key << "out_dir" << YAML::Value << YAML::DoubleQuoted << cfg.out_dir;

    out << YAML::Key << "device" << YAML::Value << YAML::BeginMap;
    kv("vds_max_pulsed", cfg.ratings.vds_max_pulsed);
    kv("vds_max_continuous", cfg.ratings.vds_max_continuous);
    kv("id_max", cfg.ratings.id_max);
    kv("vgs_max", cfg.ratings.vgs_max);
    kv("vgs_min", cfg.ratings.vgs_min);
    kv("tj_min_k", cfg.ratings.tj_min);
    kv("tj_max_k", cfg.ratings.tj_max);
    kv("rds_on_nominal", cfg.ratings.rds_on_nominal);
    out << YAML::EndMap;

    out << YAML::Key << "circuit" << YAML::Value << YAML::BeginMap;
    kv("vin", cfg.circuit.vin);
    kv("l_drain", cfg.circuit.l_drain);
    kv("c_in", cfg.circuit.c_in);
    kv("c_out", cfg.circuit.c_out);
    kv("v_supply", cfg.circuit.v_supply);
    kv("diode_vf", cfg.circuit.diode_vf);
    kv("series_r", cfg.circuit.series_r);
    if (cfg.circuit.r_load) kv("r_load", *cfg.circuit.r_load);
    else out << YAML::Key << "r_load" << YAML::Value << "none";
    out << YAML::EndMap;

    out << YAML::Key << "drive" << YAML::Value << YAML::BeginMap;
    kv("frequency", cfg.drive.frequency);
    kv("duty", cfg.drive.duty);
    kv("v_gate_high", cfg.drive.v_gate_high);
    kv("v_gate_low", cfg.drive.v_gate_low);
    out << YAML::EndMap;

    out << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "steps_per_period" << YAML::Value << cfg.sim.steps_per_period;
    out << YAML::Key << "n_periods" << YAML::Value << cfg.sim.n_periods;
    kv("settle_fraction", cfg.sim.settle_fraction);
    out << YAML::EndMap;

    out << YAML::Key << "degradation" << YAML::Value << YAML::BeginMap;
    kv("a", cfg.degradation.a);
    kv("b", cfg.degradation.b);
    kv("hbar_omega_lo", cfg.degradation.hbar_omega_lo);
    kv("v_fd", cfg.degradation.v_fd);
    kv("alpha", cfg.degradation.alpha);
    kv("t0_min", cfg.degradation.t0);
    kv("k_boltzmann", cfg.degradation.k_boltzmann);
    kv("vertical_offset", cfg.degradation.vertical_offset);
    out << YAML::EndMap;

    out << YAML::Key << "extraction" << YAML::Value << YAML::BeginMap;
    kv("shape_factor", cfg.shape_factor);
    out << YAML::EndMap;

    out << YAML::Key << "cell" << YAML::Value;
    detail::emit_cell(out, cfg.cell);

    out << YAML::Key << "campaign" << YAML::Value << YAML::BeginMap;
    if (cfg.campaign_frequency) kv("frequency", *cfg.campaign_frequency);
    else out << YAML::Key << "frequency" << YAML::Value << "auto";
    out << YAML::Key << "points_per_decade" << YAML::Value << cfg.points_per_decade;
    out << YAML::Key << "threads" << YAML::Value << cfg.threads;
    out << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "steps_per_period" << YAML::Value << cfg.campaign_sim.steps_per_period;
    out << YAML::Key << "n_periods" << YAML::Value << cfg.campaign_sim.n_periods;
    kv("settle_fraction", cfg.campaign_sim.settle_fraction);
    out << YAML::EndMap;
    out << YAML::Key << "cells" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : cfg.cells) detail::emit_cell(out, c);
    out << YAML::EndSeq;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace hvrb
