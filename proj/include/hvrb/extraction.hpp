#pragma once

// On-resistance extraction from averaged drain voltage, and log-time fits.
//
// With a triangular off-state drain pulse of height V_max, the drain
// voltage averages to
//     V_avg = I_on * R_on * D + V_max * (1 - D) / shape_factor
// and R_on follows by rearrangement. shape_factor defaults to 2; a diode
// that holds V_max longer than a triangle needs a smaller factor.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hvrb/error.hpp"
#include "hvrb/format.hpp"

namespace hvrb {

inline constexpr double default_shape_factor = 2.0;

struct RdsSample {
    double t;       // min
    double rds_on;  // ohm

    friend bool operator==(const RdsSample&, const RdsSample&) = default;
};

struct FitResult {
    double slope = 0.0;      // ohm per ln(min)
    double intercept = 0.0;  // ohm at t = 1 min
    double r_squared = 0.0;
    std::size_t n = 0;
    std::size_t dropped = 0;  // t = 0 samples excluded from the regression

    /// Slope per decade of time.
    double slope_log10() const { return slope * std::numbers::ln10; }
};

struct RdsExtraction {
    double rds_on;  // ohm, returned as computed even when negative
    bool physical;  // false when rds_on <= 0: the inputs are mutually inconsistent
};

inline double predict_avg_vin(double i_on, double rds_on, double duty, double v_max,
                              double shape_factor = default_shape_factor) {
    for (double v : {i_on, rds_on, duty, v_max, shape_factor}) require_finite(v, "input");
    if (duty < 0.0 || duty > 1.0) fail(ErrorKind::invalid_parameter, "duty must be in [0, 1]");
    if (!(shape_factor > 0.0)) fail(ErrorKind::invalid_parameter, "shape_factor must be > 0");
    return i_on * rds_on * duty + v_max * (1.0 - duty) / shape_factor;
}

inline RdsExtraction extract_rds_on(double v_in_avg, double v_max, double duty, double i_avg,
                                    double shape_factor = default_shape_factor) {
    for (double v : {v_in_avg, v_max, duty, i_avg, shape_factor}) require_finite(v, "input");
    if (duty < 0.0 || duty > 1.0) fail(ErrorKind::invalid_parameter, "duty must be in (0, 1]");
    if (i_avg < 0.0) fail(ErrorKind::invalid_parameter, "i_avg must be > 0");
    if (!(shape_factor > 0.0)) fail(ErrorKind::invalid_parameter, "shape_factor must be > 0");
    const double denom = i_avg * duty;
    if (denom == 0.0) fail(ErrorKind::domain, "i_avg * duty = 0");
    const double r = (v_in_avg - v_max * (1.0 - duty) / shape_factor) / denom;
    return {r, r > 0.0};
}

/// Divides every sample by the first sample's on-resistance.
inline std::vector<RdsSample> normalize_series(const std::vector<RdsSample>& samples) {
    if (samples.empty()) fail(ErrorKind::insufficient_data, "cannot normalize an empty series");
    const double ref = samples.front().rds_on;
    if (!(ref > 0.0)) fail(ErrorKind::invalid_parameter, "first rds_on must be > 0");
    std::vector<RdsSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back({s.t, s.rds_on / ref});
    out.front().rds_on = 1.0;
    return out;
}

/// Ordinary least squares of rds_on against ln(t). Samples at t = 0 are
/// dropped and counted. r^2 is defined as 0 when the target has no variance.
inline FitResult fit_log_time(const std::vector<RdsSample>& samples) {
    std::vector<double> x;
    std::vector<double> y;
    std::size_t dropped = 0;
    for (const auto& s : samples) {
        require_finite(s.t, "t");
        require_finite(s.rds_on, "rds_on");
        if (s.t < 0.0) fail(ErrorKind::invalid_parameter, "sample time must be >= 0");
        if (s.t == 0.0) {
            ++dropped;
            continue;
        }
        x.push_back(std::log(s.t));
        y.push_back(s.rds_on);
    }
    const std::size_t n = x.size();
    if (n < 2) fail(ErrorKind::insufficient_data, "log-time fit needs at least 2 samples with t > 0");

    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = x[k] - mx;
        const double dy = y[k] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) fail(ErrorKind::degenerate_regression, "all samples share the same time");

    FitResult fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.n = n;
    fit.dropped = dropped;
    if (syy > 0.0) {
        double ss_res = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double e = y[k] - (fit.intercept + fit.slope * x[k]);
            ss_res += e * e;
        }
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

inline constexpr const char* rds_csv_header = "t_min,rds_on_ohm";

inline void write_rds_csv(std::ostream& os, const std::vector<RdsSample>& samples) {
    os << rds_csv_header << '\n';
    for (const auto& s : samples) os << format_number(s.t) << ',' << format_number(s.rds_on) << '\n';
}

/// Reads a `t_min,rds_on_ohm` series. Extra trailing columns are ignored.
inline std::vector<RdsSample> read_rds_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) fail(ErrorKind::insufficient_data, "empty RDS(on) CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind(rds_csv_header, 0) != 0) {
        fail(ErrorKind::invalid_parameter,
             "expected header '" + std::string(rds_csv_header) + "', got '" + line + "'");
    }
    std::vector<RdsSample> out;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string t_field;
        std::string r_field;
        if (!std::getline(row, t_field, ',') || !std::getline(row, r_field, ',')) {
            fail(ErrorKind::invalid_parameter, "line " + std::to_string(line_no) + ": expected two columns");
        }
        try {
            std::size_t used_t = 0;
            std::size_t used_r = 0;
            const double t = std::stod(t_field, &used_t);
            const double r = std::stod(r_field, &used_r);
            if (used_t != t_field.size() || used_r != r_field.size()) throw std::invalid_argument("trailing");
            out.push_back({t, r});
        } catch (const std::logic_error&) {
            fail(ErrorKind::invalid_parameter, "line " + std::to_string(line_no) + ": malformed number");
        }
    }
    return out;
}

/// Flat key=value fit report.
inline void write_fit_report(std::ostream& os, const FitResult& fit) {
    os << "slope=" << format_number(fit.slope) << '\n'
       << "intercept=" << format_number(fit.intercept) << '\n'
       << "r_squared=" << format_number(fit.r_squared) << '\n'
       << "n=" << fit.n << '\n'
       << "slope_log10=" << format_number(fit.slope_log10()) << '\n';
}

}  // namespace hvrb
