#pragma once

// GaN switch under test: datasheet envelope, live on-resistance, SOA checks.

#include <optional>
#include <string>
#include <vector>

#include "hvrb/error.hpp"
#include "hvrb/format.hpp"

namespace hvrb {

inline constexpr double kelvin_offset = 273.15;

constexpr double celsius_to_kelvin(double celsius) noexcept { return celsius + kelvin_offset; }
constexpr double kelvin_to_celsius(double kelvin) noexcept { return kelvin - kelvin_offset; }

/// Absolute maximum ratings. Defaults are the EPC2038 datasheet values.
struct DeviceRatings {
    double vds_max_pulsed = 120.0;      // V
    double vds_max_continuous = 100.0;  // V
    double id_max = 0.5;                // A
    double vgs_max = 6.0;               // V
    double vgs_min = -5.0;              // V
    double tj_min = celsius_to_kelvin(-40.0);
    double tj_max = celsius_to_kelvin(150.0);
    double rds_on_nominal = 3.3;        // ohm

    void validate() const {
        for (double v : {vds_max_pulsed, vds_max_continuous, id_max, vgs_max, vgs_min, tj_min,
                         tj_max, rds_on_nominal}) {
            require_finite(v, "device rating");
        }
        if (!(vds_max_continuous > 0.0)) {
            fail(ErrorKind::invalid_parameter, "vds_max_continuous must be > 0");
        }
        if (vds_max_pulsed < vds_max_continuous) {
            fail(ErrorKind::invalid_parameter, "vds_max_pulsed must be >= vds_max_continuous");
        }
        if (!(vgs_min < 0.0 && vgs_max > 0.0)) {
            fail(ErrorKind::invalid_parameter, "require vgs_min < 0 < vgs_max");
        }
        if (!(id_max > 0.0)) fail(ErrorKind::invalid_parameter, "id_max must be > 0");
        if (!(tj_min > 0.0 && tj_min < tj_max)) {
            fail(ErrorKind::invalid_parameter, "require 0 K < tj_min < tj_max");
        }
        if (!(rds_on_nominal > 0.0)) {
            fail(ErrorKind::invalid_parameter, "rds_on_nominal must be > 0");
        }
    }

    friend bool operator==(const DeviceRatings&, const DeviceRatings&) = default;
};

inline DeviceRatings epc2038() { return DeviceRatings{}; }

/// Applies an accumulated dR/R fraction to a nominal on-resistance.
inline double effective_rds_on(double delta_r_fraction, double nominal) {
    require_finite(nominal, "nominal rds_on");
    require_finite(delta_r_fraction, "delta_r_fraction");
    if (!(nominal > 0.0)) fail(ErrorKind::invalid_parameter, "nominal rds_on must be > 0");
    if (delta_r_fraction < 0.0) {
        fail(ErrorKind::invalid_parameter, "delta_r_fraction must be >= 0");
    }
    return nominal * (1.0 + delta_r_fraction);
}

/// Degradation state of the switch. rds_on() is derived so it always
/// equals nominal * (1 + delta_r_fraction).
struct DeviceState {
    double rds_on_nominal = 3.3;
    double delta_r_fraction = 0.0;
    double stress_time = 0.0;  // minutes

    static DeviceState fresh(double nominal) { return DeviceState{nominal, 0.0, 0.0}; }

    double rds_on() const { return effective_rds_on(delta_r_fraction, rds_on_nominal); }

    friend bool operator==(const DeviceState&, const DeviceState&) = default;
};

inline double effective_rds_on(const DeviceState& state, double nominal) {
    return effective_rds_on(state.delta_r_fraction, nominal);
}

enum class SoaLimit { vds_pulsed, vds_continuous, id, tj_low, tj_high };

inline const char* to_string(SoaLimit limit) noexcept {
    switch (limit) {
        case SoaLimit::vds_pulsed: return "vds_max_pulsed";
        case SoaLimit::vds_continuous: return "vds_max_continuous";
        case SoaLimit::id: return "id_max";
        case SoaLimit::tj_low: return "tj_min";
        case SoaLimit::tj_high: return "tj_max";
    }
    return "?";
}

struct SoaViolation {
    SoaLimit limit;
    double value;
    double bound;
    double excess;  // always positive: how far past the bound

    std::string describe() const {
        return std::string(to_string(limit)) + " exceeded by " + format_number(excess) +
               " (value " + format_number(value) + ", limit " + format_number(bound) + ")";
    }
};

/// Compares an operating point against the ratings. Peak drain voltage is
/// checked against the pulsed limit; the optional cycle-averaged drain
/// voltage against the continuous limit. Violations are data, not errors.
inline std::vector<SoaViolation> check_soa(const DeviceRatings& ratings, double vds_peak,
                                           double id_peak, double tj,
                                           std::optional<double> vds_avg = std::nullopt) {
    require_finite(vds_peak, "vds_peak");
    require_finite(id_peak, "id_peak");
    require_finite(tj, "tj");
    if (vds_avg) require_finite(*vds_avg, "vds_avg");

    std::vector<SoaViolation> out;
    if (vds_peak > ratings.vds_max_pulsed) {
        out.push_back({SoaLimit::vds_pulsed, vds_peak, ratings.vds_max_pulsed,
                       vds_peak - ratings.vds_max_pulsed});
    }
    if (vds_avg && *vds_avg > ratings.vds_max_continuous) {
        out.push_back({SoaLimit::vds_continuous, *vds_avg, ratings.vds_max_continuous,
                       *vds_avg - ratings.vds_max_continuous});
    }
    if (id_peak > ratings.id_max) {
        out.push_back({SoaLimit::id, id_peak, ratings.id_max, id_peak - ratings.id_max});
    }
    if (tj < ratings.tj_min) {
        out.push_back({SoaLimit::tj_low, tj, ratings.tj_min, ratings.tj_min - tj});
    }
    if (tj > ratings.tj_max) {
        out.push_back({SoaLimit::tj_high, tj, ratings.tj_max, tj - ratings.tj_max});
    }
    return out;
}

}  // namespace hvrb
