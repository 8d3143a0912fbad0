#pragma once

// HVRB stress campaigns. Each cell alternates degradation time-marching with
// a simulated measurement: the converter runs with the degraded switch, the
// input voltage is tuned until the on-time inductor current matches the
// drive target, and R_DS(on) is extracted from the averaged drain voltage.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hvrb/converter.hpp"
#include "hvrb/degradation.hpp"
#include "hvrb/device.hpp"
#include "hvrb/error.hpp"
#include "hvrb/extraction.hpp"
#include "hvrb/format.hpp"

namespace hvrb {

inline constexpr double default_stress_temp = 298.15;  // K

/// One (stress voltage, temperature) entry of the test matrix.
struct StressCell {
    std::string id = "cell";
    double v_stress = 60.0;  // V, output clamp supply
    double temp = default_stress_temp;  // K
    double i_drive = 0.4;    // A, on-time average drain current
    double duty = 0.7;
    double duration = 1000.0;  // min
    std::vector<double> sample_times;  // min; empty selects the log-spaced default

    void validate() const {
        for (double v : {v_stress, temp, i_drive, duty, duration}) require_finite(v, "cell parameter");
        if (!(v_stress > 0.0)) fail(ErrorKind::invalid_parameter, "cell " + id + ": v_stress must be > 0");
        if (!(temp > 0.0)) fail(ErrorKind::invalid_parameter, "cell " + id + ": temp must be > 0 K");
        if (!(i_drive > 0.0)) fail(ErrorKind::invalid_parameter, "cell " + id + ": i_drive must be > 0");
        if (!(duty > 0.0 && duty < 1.0)) fail(ErrorKind::invalid_parameter, "cell " + id + ": duty must be in (0, 1)");
        if (!(duration > 0.0)) fail(ErrorKind::invalid_parameter, "cell " + id + ": duration must be > 0");
        double prev = 0.0;
        for (double t : sample_times) {
            require_finite(t, "sample time");
            if (!(t > prev) || t > duration) {
                fail(ErrorKind::invalid_parameter,
                     "cell " + id + ": sample_times must be strictly increasing within (0, duration]");
            }
            prev = t;
        }
    }

    friend bool operator==(const StressCell&, const StressCell&) = default;
};

/// Log-spaced sample times from `start` to `duration` minutes inclusive.
inline std::vector<double> log_spaced_schedule(double duration, int points_per_decade,
                                               double start = 1.0) {
    if (!(duration > 0.0)) fail(ErrorKind::invalid_parameter, "duration must be > 0");
    if (points_per_decade < 1) fail(ErrorKind::invalid_parameter, "points_per_decade must be >= 1");
    start = std::min(start, duration);
    std::vector<double> out;
    const double decades = std::log10(duration / start);
    const auto steps = static_cast<int>(std::floor(decades * points_per_decade + 1e-9));
    for (int k = 0; k <= steps; ++k) {
        const double t = start * std::pow(10.0, static_cast<double>(k) / points_per_decade);
        out.push_back(std::min(t, duration));
    }
    if (out.back() < duration * (1.0 - 1e-12)) out.push_back(duration);
    else out.back() = duration;
    return out;
}

/// Configuration shared by every cell in a matrix.
struct CampaignSettings {
    CircuitParams circuit;
    DriveSignal drive;  // duty is taken from each cell
    // The board's switching frequency is unpublished; when set, each cell
    // picks the frequency at which a fresh device reads back its nominal
    // on-resistance (see calibrate_frequency).
    bool auto_frequency = true;
    DeviceRatings ratings;
    DegradationParams degradation;
    SimConfig sim{1000, 12, 0.5};
    double shape_factor = default_shape_factor;
    int points_per_decade = 20;
    unsigned threads = 0;  // 0: hardware concurrency

    void validate() const {
        circuit.validate();
        drive.validate();
        ratings.validate();
        degradation.validate();
        sim.validate();
        require_finite(shape_factor, "shape_factor");
        if (!(shape_factor > 0.0)) fail(ErrorKind::invalid_parameter, "shape_factor must be > 0");
        if (points_per_decade < 1) fail(ErrorKind::invalid_parameter, "points_per_decade must be >= 1");
    }
};

struct TimedViolation {
    double t;  // min
    SoaViolation violation;
};

/// One simulated measurement at a fixed device state.
struct Measurement {
    double vin = 0.0;  // input voltage that realizes the drive current
    SteadyStateMetrics metrics;
    BalanceReport balance;
};

struct CellResult {
    StressCell cell;
    double frequency = 0.0;
    double v_max_measured = 0.0;
    std::vector<RdsSample> samples;
    std::vector<double> vin_applied;
    std::optional<FitResult> fit;
    std::vector<TimedViolation> soa;
    std::size_t inconsistent_samples = 0;  // extractions that came out <= 0
    // Worst residuals over every measurement in the cell.
    double worst_volt_second = 0.0;
    double worst_charge = 0.0;
    double min_i_l = 0.0;
    bool aborted = false;
    std::optional<ErrorKind> abort_kind;
    std::string abort_reason;
};

struct CampaignResult {
    std::vector<CellResult> cells;
    std::string config_hash;
    std::chrono::system_clock::time_point started;
    std::chrono::system_clock::time_point finished;
};

/// Switching frequency at which a fresh device satisfies the triangular
/// averaging assumption exactly: the input voltage equals the predicted
/// average drain voltage, and the exponential on-ramp from zero current
/// averages to the drive target.
inline double calibrate_frequency(const StressCell& cell, const CampaignSettings& s) {
    const double r_on = s.ratings.rds_on_nominal;
    const double r_loop = r_on + s.circuit.series_r;
    const double v_max = cell.v_stress + s.circuit.diode_vf;
    const double vin = predict_avg_vin(cell.i_drive, r_on, cell.duty, v_max, s.shape_factor);
    if (!(cell.i_drive * r_loop < vin)) {
        fail(ErrorKind::domain, "cell " + cell.id + ": drive current unreachable at the calibrated input voltage");
    }
    const double tau = s.circuit.l_drain / r_loop;
    auto on_average = [&](double t_on) {
        const double x = t_on / tau;
        return vin / r_loop * (1.0 + std::expm1(-x) / x);
    };
    double lo = 1e-15;
    double hi = 2.0 * s.circuit.l_drain * cell.i_drive / vin;
    while (on_average(hi) < cell.i_drive) hi *= 2.0;
    for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        (on_average(mid) < cell.i_drive ? lo : hi) = mid;
    }
    return cell.duty / (0.5 * (lo + hi));
}

/// Tunes the input voltage (secant search, at most 20 iterations) so the
/// on-time average inductor current matches `i_target`, and returns the
/// measurement taken at that operating point.
inline Measurement measure_at_drive_current(const CircuitParams& circuit, const DriveSignal& drive,
                                            const DeviceState& device, const SimConfig& sim,
                                            double i_target) {
    CircuitParams c = circuit;
    auto run = [&](double vin) {
        c.vin = vin;
        Measurement m;
        m.vin = vin;
        const Waveform w = simulate(c, drive, device, sim);
        m.metrics = steady_state_metrics(w, sim, drive);
        m.balance = check_balances(w, c, sim.settle_fraction);
        return m;
    };

    // Linear-ramp estimate, corrected for the first-order R/L droop.
    const double t_on = drive.duty / drive.frequency;
    const double r_loop = device.rds_on() + c.series_r;
    double x0 = 2.0 * c.l_drain * i_target / t_on * (1.0 + r_loop * t_on / (3.0 * c.l_drain));
    double x1 = x0 * 1.01;
    Measurement m0 = run(x0);
    Measurement m1 = run(x1);
    double g0 = m0.metrics.i_avg - i_target;
    double g1 = m1.metrics.i_avg - i_target;
    for (int iter = 0; iter < 20; ++iter) {
        if (std::abs(g1) <= 1e-12 * i_target || g1 == g0) break;
        double x2 = x1 - g1 * (x1 - x0) / (g1 - g0);
        if (!(x2 > 0.0)) x2 = 0.5 * x1;
        x0 = x1;
        g0 = g1;
        x1 = x2;
        m1 = run(x1);
        g1 = m1.metrics.i_avg - i_target;
    }
    if (std::abs(g1) > 0.02 * i_target) {
        fail(ErrorKind::domain, "drive current " + format_number(i_target) +
                                    " A not reached (got " + format_number(m1.metrics.i_avg) + " A)");
    }
    return m1;
}

inline CellResult run_cell(const StressCell& cell, const CampaignSettings& settings) {
    cell.validate();
    settings.validate();

    CircuitParams circuit = settings.circuit;
    circuit.v_supply = cell.v_stress;
    DriveSignal drive = settings.drive;
    drive.duty = cell.duty;

    CellResult result;
    result.cell = cell;
    result.min_i_l = std::numeric_limits<double>::infinity();
    const std::vector<double> schedule = cell.sample_times.empty()
                                             ? log_spaced_schedule(cell.duration, settings.points_per_decade)
                                             : cell.sample_times;
    try {
        if (settings.auto_frequency) drive.frequency = calibrate_frequency(cell, settings);
        result.frequency = drive.frequency;

        auto record_health = [&](const Measurement& m) {
            result.worst_volt_second = std::max(result.worst_volt_second, m.balance.worst_volt_second);
            result.worst_charge = std::max(result.worst_charge, m.balance.worst_charge);
            result.min_i_l = std::min(result.min_i_l, m.balance.min_i_l);
        };

        DeviceState state = DeviceState::fresh(settings.ratings.rds_on_nominal);
        const Measurement fresh =
            measure_at_drive_current(circuit, drive, state, settings.sim, cell.i_drive);
        record_health(fresh);
        // Degradation is driven by the peak drain stress.
        double stress_v = fresh.metrics.v_max;
        result.v_max_measured = stress_v;

        for (double t : schedule) {
            state = apply_stress_step(state, settings.degradation, stress_v, cell.temp,
                                      t - state.stress_time);
            const Measurement m =
                measure_at_drive_current(circuit, drive, state, settings.sim, cell.i_drive);
            record_health(m);
            for (const auto& v : check_soa(settings.ratings, m.metrics.v_max, m.metrics.i_peak,
                                           cell.temp, m.metrics.v_in_avg)) {
                result.soa.push_back({t, v});
            }
            const RdsExtraction ext = extract_rds_on(m.metrics.v_in_avg, m.metrics.v_max, cell.duty,
                                                     m.metrics.i_avg, settings.shape_factor);
            if (!ext.physical) ++result.inconsistent_samples;
            result.samples.push_back({t, ext.rds_on});
            result.vin_applied.push_back(m.vin);
            stress_v = m.metrics.v_max;
            result.v_max_measured = stress_v;
        }
        result.fit = fit_log_time(result.samples);
    } catch (const Error& e) {
        result.aborted = true;
        result.abort_kind = e.kind();
        result.abort_reason = e.what();
    }
    return result;
}

namespace detail {

inline std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string campaign_fingerprint(const std::vector<StressCell>& cells, const CampaignSettings& s) {
    std::ostringstream os;
    auto put = [&os](double v) { os << format_number(v) << ';'; };
    const auto& c = s.circuit;
    for (double v : {c.vin, c.l_drain, c.c_in, c.c_out, c.v_supply, c.diode_vf, c.series_r}) put(v);
    put(c.r_load.value_or(-1.0));
    for (double v : {s.drive.frequency, s.drive.duty, s.drive.v_gate_high, s.drive.v_gate_low}) put(v);
    os << s.auto_frequency << ';';
    const auto& r = s.ratings;
    for (double v : {r.vds_max_pulsed, r.vds_max_continuous, r.id_max, r.vgs_max, r.vgs_min, r.tj_min,
                     r.tj_max, r.rds_on_nominal}) put(v);
    const auto& d = s.degradation;
    for (double v : {d.a, d.b, d.hbar_omega_lo, d.v_fd, d.alpha, d.t0, d.k_boltzmann, d.vertical_offset}) put(v);
    os << s.sim.steps_per_period << ';' << s.sim.n_periods << ';';
    put(s.sim.settle_fraction);
    put(s.shape_factor);
    os << s.points_per_decade << '|';
    for (const auto& cell : cells) {
        os << cell.id << ';';
        for (double v : {cell.v_stress, cell.temp, cell.i_drive, cell.duty, cell.duration}) put(v);
        for (double t : cell.sample_times) put(t);
        os << '|';
    }
    return os.str();
}

}  // namespace detail

/// Runs every cell independently (in parallel) and returns results in
/// input order. A failing cell is recorded as aborted; the matrix never fails.
inline CampaignResult run_matrix(const std::vector<StressCell>& cells, const CampaignSettings& settings) {
    if (cells.empty()) fail(ErrorKind::insufficient_data, "campaign needs at least one cell");
    CampaignResult out;
    out.started = std::chrono::system_clock::now();
    {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(detail::fnv1a(detail::campaign_fingerprint(cells, settings))));
        out.config_hash = buf;
    }
    out.cells.resize(cells.size());

    auto work = [&](std::size_t k) {
        try {
            out.cells[k] = run_cell(cells[k], settings);
        } catch (const Error& e) {
            CellResult r;
            r.cell = cells[k];
            r.aborted = true;
            r.abort_kind = e.kind();
            r.abort_reason = e.what();
            out.cells[k] = std::move(r);
        }
    };

    unsigned n_threads = settings.threads != 0 ? settings.threads : std::thread::hardware_concurrency();
    n_threads = std::clamp<unsigned>(n_threads, 1u, static_cast<unsigned>(cells.size()));
    if (n_threads == 1) {
        for (std::size_t k = 0; k < cells.size(); ++k) work(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < cells.size(); k = next++) work(k);
            });
        }
    }
    out.finished = std::chrono::system_clock::now();
    return out;
}

}  // namespace hvrb
