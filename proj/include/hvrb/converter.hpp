#pragma once

// Switched piecewise-linear model of the HVRB boost stage.
//
// State is (inductor current i_L, output capacitor voltage v_out). The
// switch is a resistor R_DS(on) when the gate is high. The output diode is
// an ideal switch with a constant forward drop, so with the gate low
// v_ds = v_out + V_f while it conducts. The output node is clamped to the
// high-voltage supply (excess charge flows into the supply), which bounds
// v_ds at v_supply + V_f. Once i_L reaches zero the diode blocks, i_L is
// held at zero and the drain floats to v_in.
//
// Integration is fixed-step explicit trapezoidal (Heun). The sample grid is
// uniform; each grid interval is split internally at PWM edges and at
// diode/clamp transitions, which are located by linear interpolation so the
// result depends continuously on the circuit parameters. Each waveform
// record holds the interval average of v_ds, i_L and v_out over
// [t, t + dt), which makes the post-settle means exact time averages.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "hvrb/device.hpp"
#include "hvrb/error.hpp"
#include "hvrb/format.hpp"

namespace hvrb {

/// Boost topology. Defaults follow the HVRB test board.
struct CircuitParams {
    double vin = 10.0;          // V
    double l_drain = 10e-6;     // H
    double c_in = 100e-12;      // F, lumped away (not simulated)
    double c_out = 25e-12;      // F
    double v_supply = 100.0;    // V, clamp supply on the output node
    double diode_vf = 0.5;      // V, Schottky forward drop
    double series_r = 0.0;      // ohm, lumped parasitics in the inductor loop
    std::optional<double> r_load;  // ohm; empty for the unloaded HVRB board

    void validate() const {
        for (double v : {vin, l_drain, c_in, c_out, v_supply, diode_vf, series_r}) {
            require_finite(v, "circuit parameter");
        }
        if (!(vin > 0.0)) fail(ErrorKind::invalid_parameter, "vin must be > 0");
        if (!(l_drain > 0.0)) fail(ErrorKind::invalid_parameter, "l_drain must be > 0");
        if (!(c_out > 0.0)) fail(ErrorKind::invalid_parameter, "c_out must be > 0");
        if (c_in < 0.0) fail(ErrorKind::invalid_parameter, "c_in must be >= 0");
        if (!(v_supply > 0.0)) fail(ErrorKind::invalid_parameter, "v_supply must be > 0");
        if (diode_vf < 0.0) fail(ErrorKind::invalid_parameter, "diode_vf must be >= 0");
        if (series_r < 0.0) fail(ErrorKind::invalid_parameter, "series_r must be >= 0");
        if (r_load) {
            require_finite(*r_load, "r_load");
            if (!(*r_load > 0.0)) fail(ErrorKind::invalid_parameter, "r_load must be > 0");
        }
    }

    friend bool operator==(const CircuitParams&, const CircuitParams&) = default;
};

/// PWM gate drive. Switching frequency is not published for the board;
/// 100 kHz is only a default.
struct DriveSignal {
    double frequency = 100e3;  // Hz
    double duty = 0.7;
    double v_gate_high = 5.0;  // V
    double v_gate_low = 0.0;   // V, off-state gate held at 0 V

    void validate() const {
        require_finite(frequency, "frequency");
        require_finite(duty, "duty");
        require_finite(v_gate_high, "v_gate_high");
        require_finite(v_gate_low, "v_gate_low");
        if (!(frequency > 0.0)) fail(ErrorKind::invalid_parameter, "frequency must be > 0");
        if (duty < 0.0 || duty > 1.0) fail(ErrorKind::invalid_parameter, "duty must be in [0, 1]");
        if (!(v_gate_low <= 0.0 && 0.0 <= v_gate_high)) {
            fail(ErrorKind::invalid_parameter, "require v_gate_low <= 0 <= v_gate_high");
        }
    }

    double period() const { return 1.0 / frequency; }

    friend bool operator==(const DriveSignal&, const DriveSignal&) = default;
};

struct SimConfig {
    int steps_per_period = 1000;
    int n_periods = 40;
    double settle_fraction = 0.5;  // leading fraction of the run excluded from metrics

    void validate() const {
        if (steps_per_period < 100) {
            fail(ErrorKind::invalid_parameter, "steps_per_period must be >= 100");
        }
        if (n_periods < 2) fail(ErrorKind::invalid_parameter, "n_periods must be >= 2");
        require_finite(settle_fraction, "settle_fraction");
        if (settle_fraction < 0.0 || settle_fraction >= 1.0) {
            fail(ErrorKind::invalid_parameter, "settle_fraction must be in [0, 1)");
        }
    }

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Interval-averaged record over [t, t + dt).
struct Sample {
    double t;      // s
    double v_ds;   // V
    double i_l;    // A
    double v_out;  // V
    bool gate_on;  // gate high for at least half the interval
};

/// Per-switching-period integrals used for steady-state balance checks.
struct PeriodBalance {
    double t_start = 0.0;
    double inductor_volt_seconds = 0.0;  // integral of v_L dt
    double diode_charge = 0.0;           // charge delivered through the output diode
    double clamp_charge = 0.0;           // charge returned to the clamp supply
    double load_charge = 0.0;            // charge drawn by r_load
    double i_l_start = 0.0;
    double i_l_end = 0.0;
    double v_out_start = 0.0;
    double v_out_end = 0.0;
};

struct Waveform {
    double dt = 0.0;      // uniform record spacing, s
    double period = 0.0;  // switching period, s
    std::vector<Sample> samples;
    std::vector<PeriodBalance> periods;  // empty for hand-built waveforms
};

struct SteadyStateMetrics {
    double v_max = 0.0;     // peak v_ds after settling
    double v_in_avg = 0.0;  // mean v_ds after settling
    double i_avg = 0.0;     // mean i_L over gate-on records after settling
    double i_peak = 0.0;    // peak i_L after settling
};

/// Ideal continuous-conduction boost ratio.
inline double ideal_boost_vout(double vin, double duty) {
    require_finite(vin, "vin");
    require_finite(duty, "duty");
    if (duty == 1.0) fail(ErrorKind::domain, "duty = 1 makes vin / (1 - duty) singular");
    if (duty < 0.0 || duty > 1.0) fail(ErrorKind::invalid_parameter, "duty must be in [0, 1)");
    return vin / (1.0 - duty);
}

namespace detail {

enum class Mode { on, conducting, clamped, blocking };

struct StateRates {
    double di;
    double dv;
};

struct Terminal {
    double v_ds;
    double v_l;
    double i_diode;
    double i_clamp;
    double i_load;
};

struct Accumulator {
    double v_ds = 0.0;
    double i_l = 0.0;
    double v_out = 0.0;
    double gate_on_time = 0.0;
};

class BoostStepper {
public:
    BoostStepper(const CircuitParams& circuit, double rds_on)
        : c_(circuit),
          rds_on_(rds_on),
          g_load_(circuit.r_load ? 1.0 / *circuit.r_load : 0.0),
          i_(0.0),
          v_(std::clamp(circuit.vin - circuit.diode_vf, 0.0, circuit.v_supply)) {}

    double current() const { return i_; }
    double output() const { return v_; }

    Mode classify(bool gate) const {
        if (gate) return Mode::on;
        if (v_ >= c_.v_supply * (1.0 - 1e-15) && i_ - v_ * g_load_ > 0.0) return Mode::clamped;
        if (i_ > 0.0) return Mode::conducting;
        if (c_.vin - c_.diode_vf > v_) return Mode::conducting;
        return Mode::blocking;
    }

    StateRates rates(Mode m, double i, double v) const {
        const double load = v * g_load_;
        switch (m) {
            case Mode::on:
                return {(c_.vin - i * (rds_on_ + c_.series_r)) / c_.l_drain, -load / c_.c_out};
            case Mode::conducting:
                return {(c_.vin - i * c_.series_r - v - c_.diode_vf) / c_.l_drain,
                        (i - load) / c_.c_out};
            case Mode::clamped:
                return {(c_.vin - i * c_.series_r - c_.v_supply - c_.diode_vf) / c_.l_drain, 0.0};
            case Mode::blocking:
                return {0.0, -load / c_.c_out};
        }
        return {0.0, 0.0};
    }

    Terminal terminal(Mode m, double i, double v) const {
        const double load = v * g_load_;
        switch (m) {
            case Mode::on:
                return {i * rds_on_, c_.vin - i * (rds_on_ + c_.series_r), 0.0, 0.0, load};
            case Mode::conducting:
                return {v + c_.diode_vf, c_.vin - i * c_.series_r - v - c_.diode_vf, i, 0.0, load};
            case Mode::clamped:
                return {v + c_.diode_vf, c_.vin - i * c_.series_r - v - c_.diode_vf, i, i - load,
                        load};
            case Mode::blocking:
                return {c_.vin, 0.0, 0.0, 0.0, load};
        }
        return {};
    }

    void heun(Mode m, double h, double& i1, double& v1) const {
        const StateRates k0 = rates(m, i_, v_);
        const double ip = i_ + h * k0.di;
        const double vp = v_ + h * k0.dv;
        const StateRates k1 = rates(m, ip, vp);
        i1 = i_ + 0.5 * h * (k0.di + k1.di);
        v1 = v_ + 0.5 * h * (k0.dv + k1.dv);
    }

    /// Advances by h with the gate held fixed, splitting at diode and clamp events.
    void advance(bool gate, double h, Accumulator& sample, PeriodBalance& period,
                 std::size_t step_index) {
        double remaining = h;
        for (int events = 0; remaining > 0.0; ++events) {
            if (events > 64) {
                throw NumericInstability(step_index, "event chattering in switch interval");
            }
            const Mode m = classify(gate);
            double i1 = 0.0;
            double v1 = 0.0;
            heun(m, remaining, i1, v1);

            double theta = 1.0;
            enum class Event { none, diode_off, clamp_on, clamp_off, diode_on } event = Event::none;
            switch (m) {
                case Mode::conducting:
                    if (i1 < 0.0 && i_ > 0.0) {
                        theta = i_ / (i_ - i1);
                        event = Event::diode_off;
                    }
                    if (v1 > c_.v_supply && v_ < c_.v_supply) {
                        const double tv = (c_.v_supply - v_) / (v1 - v_);
                        if (tv < theta) {
                            theta = tv;
                            event = Event::clamp_on;
                        }
                    }
                    break;
                case Mode::clamped: {
                    const double in0 = i_ - v_ * g_load_;
                    const double in1 = i1 - v1 * g_load_;
                    if (in1 < 0.0) {
                        theta = in0 / (in0 - in1);
                        event = Event::clamp_off;
                    }
                    break;
                }
                case Mode::blocking: {
                    const double r0 = v_ + c_.diode_vf - c_.vin;
                    const double r1 = v1 + c_.diode_vf - c_.vin;
                    if (r1 < 0.0) {
                        theta = r0 / (r0 - r1);
                        event = Event::diode_on;
                    }
                    break;
                }
                case Mode::on:
                    break;
            }

            double h_sub = remaining;
            if (event != Event::none) {
                theta = std::clamp(theta, 0.0, 1.0);
                h_sub = theta * remaining;
                heun(m, h_sub, i1, v1);
                switch (event) {
                    case Event::diode_off: i1 = 0.0; break;
                    case Event::clamp_on: v1 = c_.v_supply; break;
                    case Event::clamp_off:
                        v1 = c_.v_supply;
                        if (g_load_ == 0.0) i1 = 0.0;
                        break;
                    case Event::diode_on: v1 = c_.vin - c_.diode_vf; break;
                    case Event::none: break;
                }
                // Round-off can leave a vanishing remainder; finish it in the new mode.
                if (remaining - h_sub <= remaining * 1e-14) h_sub = remaining;
            }
            if (m == Mode::clamped) v1 = c_.v_supply;
            if (i1 < 0.0) i1 = 0.0;

            if (!std::isfinite(i1) || !std::isfinite(v1)) {
                throw NumericInstability(step_index, "non-finite state (i_L, v_out)");
            }

            const Terminal a = terminal(m, i_, v_);
            const Terminal b = terminal(m, i1, v1);
            const double w = 0.5 * h_sub;
            sample.v_ds += w * (a.v_ds + b.v_ds);
            sample.i_l += w * (i_ + i1);
            sample.v_out += w * (v_ + v1);
            if (gate) sample.gate_on_time += h_sub;
            period.inductor_volt_seconds += w * (a.v_l + b.v_l);
            period.diode_charge += w * (a.i_diode + b.i_diode);
            period.clamp_charge += w * (a.i_clamp + b.i_clamp);
            period.load_charge += w * (a.i_load + b.i_load);

            i_ = i1;
            v_ = v1;
            remaining -= h_sub;
        }
    }

private:
    CircuitParams c_;
    double rds_on_;
    double g_load_;
    double i_;
    double v_;
};

}  // namespace detail

/// Runs the converter for sim.n_periods switching periods with a fixed
/// switch on-resistance (zero allowed for ideal-switch studies).
inline Waveform simulate(const CircuitParams& circuit, const DriveSignal& drive, double rds_on,
                         const SimConfig& sim) {
    circuit.validate();
    drive.validate();
    sim.validate();
    require_finite(rds_on, "rds_on");
    if (rds_on < 0.0) fail(ErrorKind::invalid_parameter, "rds_on must be >= 0");

    const std::size_t n = static_cast<std::size_t>(sim.steps_per_period);
    const double period = drive.period();
    const double h = period / static_cast<double>(n);

    // Turn-off edge position within a period, in grid steps.
    double edge = drive.duty * static_cast<double>(n);
    if (std::abs(edge - std::round(edge)) < 1e-9) edge = std::round(edge);

    Waveform w;
    w.dt = h;
    w.period = period;
    w.samples.reserve(n * static_cast<std::size_t>(sim.n_periods));
    w.periods.reserve(static_cast<std::size_t>(sim.n_periods));

    detail::BoostStepper stepper(circuit, rds_on);
    for (std::size_t p = 0; p < static_cast<std::size_t>(sim.n_periods); ++p) {
        PeriodBalance bal;
        bal.t_start = static_cast<double>(p * n) * h;
        bal.i_l_start = stepper.current();
        bal.v_out_start = stepper.output();
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t index = p * n + k;
            detail::Accumulator acc;
            const double kd = static_cast<double>(k);
            if (edge >= kd + 1.0) {
                stepper.advance(true, h, acc, bal, index);
            } else if (edge <= kd) {
                stepper.advance(false, h, acc, bal, index);
            } else {
                const double frac = edge - kd;
                stepper.advance(true, frac * h, acc, bal, index);
                stepper.advance(false, (1.0 - frac) * h, acc, bal, index);
            }
            w.samples.push_back(Sample{static_cast<double>(index) * h, acc.v_ds / h,
                                       acc.i_l / h, acc.v_out / h,
                                       acc.gate_on_time >= 0.5 * h});
        }
        bal.i_l_end = stepper.current();
        bal.v_out_end = stepper.output();
        w.periods.push_back(bal);
    }
    return w;
}

/// Runs the converter with the switch at the device's present (degraded) on-resistance.
inline Waveform simulate(const CircuitParams& circuit, const DriveSignal& drive,
                         const DeviceState& device, const SimConfig& sim) {
    return simulate(circuit, drive, device.rds_on(), sim);
}

namespace detail {

struct SettledWindow {
    std::size_t begin;
    std::size_t end;
    std::size_t samples_per_period;
};

inline SettledWindow settled_window(const Waveform& w, double settle_fraction, double frequency) {
    if (!(w.dt > 0.0) || !(frequency > 0.0)) {
        fail(ErrorKind::invalid_parameter, "waveform step and frequency must be > 0");
    }
    const double spp_real = 1.0 / (frequency * w.dt);
    const auto spp = static_cast<std::size_t>(std::llround(spp_real));
    if (spp == 0) fail(ErrorKind::insufficient_data, "record spacing exceeds the switching period");
    const std::size_t total_periods = w.samples.size() / spp;
    const auto first =
        static_cast<std::size_t>(std::ceil(settle_fraction * static_cast<double>(total_periods)));
    if (total_periods < first + 2) {
        fail(ErrorKind::insufficient_data,
             "waveform covers fewer than 2 full periods after the settle window");
    }
    return {first * spp, total_periods * spp, spp};
}

}  // namespace detail

inline SteadyStateMetrics steady_state_metrics(const Waveform& w, const SimConfig& sim,
                                               const DriveSignal& drive) {
    const auto win = detail::settled_window(w, sim.settle_fraction, drive.frequency);
    SteadyStateMetrics m;
    m.v_max = -std::numeric_limits<double>::infinity();
    double sum_v = 0.0;
    double sum_i_on = 0.0;
    std::size_t n_on = 0;
    for (std::size_t k = win.begin; k < win.end; ++k) {
        const Sample& s = w.samples[k];
        m.v_max = std::max(m.v_max, s.v_ds);
        m.i_peak = std::max(m.i_peak, s.i_l);
        sum_v += s.v_ds;
        if (s.gate_on) {
            sum_i_on += s.i_l;
            ++n_on;
        }
    }
    m.v_in_avg = sum_v / static_cast<double>(win.end - win.begin);
    m.i_avg = n_on > 0 ? sum_i_on / static_cast<double>(n_on) : 0.0;
    return m;
}

/// Worst-case steady-state residuals over post-settle periods.
struct BalanceReport {
    double worst_volt_second = 0.0;  // |mean v_L| / vin
    double worst_charge = 0.0;       // |net C_out charge| / diode charge throughput
    double mean_v_out = 0.0;         // post-settle mean of v_out records
    double min_i_l = 0.0;            // over every record
    double max_v_ds = 0.0;           // over every record
    std::size_t periods_checked = 0;
};

inline BalanceReport check_balances(const Waveform& w, const CircuitParams& circuit,
                                    double settle_fraction) {
    if (w.periods.empty() || w.samples.empty()) {
        fail(ErrorKind::insufficient_data, "waveform carries no period integrals");
    }
    BalanceReport r;
    r.min_i_l = std::numeric_limits<double>::infinity();
    r.max_v_ds = -std::numeric_limits<double>::infinity();
    for (const Sample& s : w.samples) {
        r.min_i_l = std::min(r.min_i_l, s.i_l);
        r.max_v_ds = std::max(r.max_v_ds, s.v_ds);
    }
    const std::size_t n_periods = w.periods.size();
    const std::size_t spp = w.samples.size() / n_periods;
    const auto first =
        static_cast<std::size_t>(std::ceil(settle_fraction * static_cast<double>(n_periods)));
    double sum_v_out = 0.0;
    for (std::size_t p = first; p < n_periods; ++p) {
        const PeriodBalance& b = w.periods[p];
        const double vs = std::abs(b.inductor_volt_seconds / w.period) / circuit.vin;
        const double net = b.diode_charge - b.clamp_charge - b.load_charge;
        const double throughput = std::max(b.diode_charge, 1e-300);
        const double cb = net == 0.0 ? 0.0 : std::abs(net) / throughput;
        r.worst_volt_second = std::max(r.worst_volt_second, vs);
        r.worst_charge = std::max(r.worst_charge, cb);
        for (std::size_t k = p * spp; k < (p + 1) * spp; ++k) sum_v_out += w.samples[k].v_out;
        ++r.periods_checked;
    }
    if (r.periods_checked > 0) {
        r.mean_v_out = sum_v_out / static_cast<double>(r.periods_checked * spp);
    }
    return r;
}

inline constexpr const char* waveform_csv_header = "t_s,v_ds_V,i_l_A,v_out_V,gate_on";

inline void write_waveform_csv(std::ostream& os, const Waveform& w) {
    os << waveform_csv_header << '\n';
    for (const Sample& s : w.samples) {
        os << format_number(s.t) << ',' << format_number(s.v_ds) << ',' << format_number(s.i_l)
           << ',' << format_number(s.v_out) << ',' << (s.gate_on ? 1 : 0) << '\n';
    }
}

}  // namespace hvrb
