// hvrb: command-line front end for the high-voltage reliability bench.
//
// Exit codes: 0 success, 1 I/O failure, 2 invalid input or configuration,
// 3 numeric instability.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "hvrb/hvrb.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_io = 1;
constexpr int exit_invalid = 2;
constexpr int exit_unstable = 3;

int exit_code(hvrb::ErrorKind kind) {
    switch (kind) {
        case hvrb::ErrorKind::numeric_instability: return exit_unstable;
        case hvrb::ErrorKind::io: return exit_io;
        default: return exit_invalid;
    }
}

std::string read_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) hvrb::fail(hvrb::ErrorKind::io, "cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::filesystem::path prepare_out_dir(const std::string& dir) {
    const std::filesystem::path path = dir.empty() ? "." : dir;
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) hvrb::fail(hvrb::ErrorKind::io, "cannot create " + path.string() + ": " + ec.message());
    return path;
}

void print_paths(const std::vector<std::filesystem::path>& paths) {
    for (const auto& p : paths) std::cout << "wrote " << p.string() << '\n';
}

int run_simulate(const hvrb::RunConfig& cfg) {
    const hvrb::Waveform w =
        hvrb::simulate(cfg.circuit, cfg.drive, hvrb::DeviceState::fresh(cfg.ratings.rds_on_nominal), cfg.sim);
    const auto m = hvrb::steady_state_metrics(w, cfg.sim, cfg.drive);
    const auto b = hvrb::check_balances(w, cfg.circuit, cfg.sim.settle_fraction);
    using hvrb::format_number;
    std::cout << "v_max=" << format_number(m.v_max) << '\n'
              << "v_in_avg=" << format_number(m.v_in_avg) << '\n'
              << "i_avg=" << format_number(m.i_avg) << '\n'
              << "i_peak=" << format_number(m.i_peak) << '\n'
              << "volt_second_residual=" << format_number(b.worst_volt_second) << '\n'
              << "charge_residual=" << format_number(b.worst_charge) << '\n';
    for (const auto& v : hvrb::check_soa(cfg.ratings, m.v_max, m.i_peak, hvrb::default_stress_temp, m.v_in_avg)) {
        std::cerr << "warning: " << v.describe() << '\n';
    }
    print_paths(hvrb::emit_results(w, prepare_out_dir(cfg.out_dir)));
    return exit_ok;
}

int run_campaign(const hvrb::RunConfig& cfg) {
    const auto result = hvrb::run_matrix(cfg.cells, cfg.campaign_settings());
    std::cout << "config_hash=" << result.config_hash << '\n';
    int code = exit_ok;
    for (const auto& c : result.cells) {
        std::cout << "cell " << c.cell.id << ": ";
        if (c.aborted) {
            std::cout << "aborted\n";
            std::cerr << "cell " << c.cell.id << ": " << c.abort_reason << '\n';
            const int cell_code = c.abort_kind ? exit_code(*c.abort_kind) : exit_invalid;
            code = std::max(code, cell_code);
        } else {
            std::cout << "frequency=" << hvrb::format_number(c.frequency)
                      << " slope=" << hvrb::format_number(c.fit->slope)
                      << " r_squared=" << hvrb::format_number(c.fit->r_squared) << '\n';
        }
        if (c.inconsistent_samples > 0) {
            std::cerr << "warning: cell " << c.cell.id << ": " << c.inconsistent_samples
                      << " extractions were non-positive\n";
        }
        if (!c.soa.empty()) {
            std::cerr << "warning: cell " << c.cell.id << ": " << c.soa.size() << " rating violations, first: "
                      << c.soa.front().violation.describe() << '\n';
        }
    }
    print_paths(hvrb::emit_results(result, prepare_out_dir(cfg.out_dir)));
    return code;
}

int run_fit(const std::string& csv_path, const std::string& out_dir, bool write_file) {
    std::ifstream is(csv_path, std::ios::binary);
    if (!is) hvrb::fail(hvrb::ErrorKind::io, "cannot open " + csv_path);
    const auto fit = hvrb::fit_log_time(hvrb::read_rds_csv(is));
    hvrb::write_fit_report(std::cout, fit);
    if (fit.dropped > 0) std::cerr << "warning: " << fit.dropped << " samples at t = 0 were excluded\n";
    if (write_file) print_paths(hvrb::emit_results(fit, prepare_out_dir(out_dir)));
    return exit_ok;
}

struct ExtractArgs {
    double vin_avg = 0.0;
    double vmax = 0.0;
    double duty = 0.0;
    double iavg = 0.0;
    double shape_factor = hvrb::default_shape_factor;
};

int run_extract(const ExtractArgs& a) {
    const auto r = hvrb::extract_rds_on(a.vin_avg, a.vmax, a.duty, a.iavg, a.shape_factor);
    std::cout << "rds_on_ohm=" << hvrb::format_number(r.rds_on) << '\n'
              << "physical=" << (r.physical ? 1 : 0) << '\n';
    if (!r.physical) std::cerr << "warning: non-positive on-resistance; the inputs are inconsistent\n";
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"High-voltage reliability bench: converter simulation, dynamic RDS(on) campaigns and fits"};
    app.fallthrough();
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string out_dir;
    long long seed = 0;
    bool print_config = false;
    app.add_option("--config", config_path, "YAML run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory (created if missing)");
    app.add_option("--seed", seed, "Accepted for compatibility; every run is deterministic");
    app.add_flag("--print-config", print_config, "Print the resolved configuration and exit");

    auto* simulate = app.add_subcommand("simulate", "Simulate the boost test circuit and write waveform.csv");
    auto* campaign = app.add_subcommand("campaign", "Run the stress matrix and write per-cell series");
    auto* fit = app.add_subcommand("fit", "Fit RDS(on) against ln(time) from a t_min,rds_on_ohm CSV");
    std::string fit_csv;
    fit->add_option("csv", fit_csv, "Input CSV")->required();
    auto* extract = app.add_subcommand("extract", "Extract RDS(on) from averaged measurements");
    ExtractArgs ex;
    extract->add_option("--vin-avg", ex.vin_avg, "Average drain voltage [V]")->required();
    extract->add_option("--vmax", ex.vmax, "Peak off-state drain voltage [V]")->required();
    extract->add_option("--duty", ex.duty, "Duty cycle")->required();
    extract->add_option("--iavg", ex.iavg, "Average on-state current [A]")->required();
    extract->add_option("--shape-factor", ex.shape_factor, "Off-state pulse shape factor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }

    try {
        hvrb::RunConfig cfg = config_path.empty() ? hvrb::parse_config("") : hvrb::parse_config(read_text(config_path));
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (print_config) {
            std::cout << hvrb::echo_config(cfg);
            return exit_ok;
        }

        std::optional<hvrb::RunMode> mode = cfg.mode;
        if (*simulate) mode = hvrb::RunMode::simulate;
        if (*campaign) mode = hvrb::RunMode::campaign;
        if (*fit) mode = hvrb::RunMode::fit;
        if (*extract) mode = hvrb::RunMode::extract;
        if (!mode) {
            std::cerr << "no subcommand given and the configuration names no mode\n" << app.help();
            return exit_invalid;
        }
        switch (*mode) {
            case hvrb::RunMode::simulate: return run_simulate(cfg);
            case hvrb::RunMode::campaign: return run_campaign(cfg);
            case hvrb::RunMode::fit:
                if (!*fit) {
                    std::cerr << "fit needs an input CSV: hvrb fit <csv>\n";
                    return exit_invalid;
                }
                return run_fit(fit_csv, cfg.out_dir, !cfg.out_dir.empty());
            case hvrb::RunMode::extract:
                if (!*extract) {
                    std::cerr << "extract needs --vin-avg, --vmax, --duty and --iavg\n";
                    return exit_invalid;
                }
                return run_extract(ex);
        }
    } catch (const hvrb::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_io;
    }
    return exit_ok;
}
