#pragma once

// Hot-carrier / surface-trap dynamic on-resistance model.
//
//   slope(V, T) = a + b * ln(1 + exp((V - V_fd) / alpha)) * sqrt(T) * exp(E_lo / (k T))
//   dR/R(t)     = slope(V, T) * ln(1 + t / t0) + vertical_offset
//
// The printed expression is treated as the log-time slope; t0 guards the
// t -> 0 singularity. Natural logarithms throughout.

#include <algorithm>
#include <cmath>

#include "hvrb/device.hpp"
#include "hvrb/error.hpp"

namespace hvrb {

inline constexpr double boltzmann_ev_per_k = 8.617e-5;

/// Defaults are the published parameters for 100 V fifth-generation eGaN parts.
struct DegradationParams {
    double a = 0.0;                   // dimensionless offset
    double b = 2.0e-5;                // K^-1/2
    double hbar_omega_lo = 0.092;     // eV, optical phonon energy
    double v_fd = 100.0;              // V, full-depletion voltage
    double alpha = 10.0;              // V, knee width
    double t0 = 1.0;                  // min
    double k_boltzmann = boltzmann_ev_per_k;  // eV/K
    // Switching frequency / current only shift dR/R vertically.
    double vertical_offset = 0.0;

    void validate() const {
        for (double v : {a, b, hbar_omega_lo, v_fd, alpha, t0, k_boltzmann, vertical_offset}) {
            require_finite(v, "degradation parameter");
        }
        if (b < 0.0) fail(ErrorKind::invalid_parameter, "b must be >= 0");
        if (!(alpha > 0.0)) fail(ErrorKind::invalid_parameter, "alpha must be > 0");
        if (!(hbar_omega_lo > 0.0)) fail(ErrorKind::invalid_parameter, "hbar_omega_lo must be > 0");
        if (!(t0 > 0.0)) fail(ErrorKind::invalid_parameter, "t0 must be > 0");
        if (!(k_boltzmann > 0.0)) fail(ErrorKind::invalid_parameter, "k_boltzmann must be > 0");
    }

    friend bool operator==(const DegradationParams&, const DegradationParams&) = default;
};

/// ln(1 + e^x) without overflow.
inline double softplus(double x) {
    if (x > 30.0) return x;
    return std::log1p(std::exp(x));
}

inline double stress_slope(const DegradationParams& p, double v_ds, double temp) {
    require_finite(v_ds, "v_ds");
    require_finite(temp, "temperature");
    if (!(temp > 0.0)) fail(ErrorKind::invalid_parameter, "temperature must be > 0 K");
    const double voltage_term = softplus((v_ds - p.v_fd) / p.alpha);
    const double thermal_term = std::sqrt(temp) * std::exp(p.hbar_omega_lo / (p.k_boltzmann * temp));
    return p.a + p.b * voltage_term * thermal_term;
}

inline double delta_r_fraction(const DegradationParams& p, double v_ds, double temp, double t) {
    require_finite(t, "stress time");
    if (t < 0.0) fail(ErrorKind::invalid_parameter, "stress time must be >= 0");
    return stress_slope(p, v_ds, temp) * std::log1p(t / p.t0) + p.vertical_offset;
}

/// Advances the stress clock by dt minutes at (v_ds, temp). The fraction is
/// the closed form at the new time, never allowed to decrease.
inline DeviceState apply_stress_step(const DeviceState& state, const DegradationParams& p,
                                     double v_ds, double temp, double dt) {
    require_finite(dt, "dt");
    if (!(dt > 0.0)) fail(ErrorKind::invalid_parameter, "dt must be > 0");
    DeviceState next = state;
    next.stress_time = state.stress_time + dt;
    const double closed_form = delta_r_fraction(p, v_ds, temp, next.stress_time);
    next.delta_r_fraction = std::max({state.delta_r_fraction, closed_form, 0.0});
    return next;
}

}  // namespace hvrb
