#pragma once

// Result files. Every writer returns the paths it produced; numbers use
// shortest round-trip formatting so identical runs give identical bytes.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hvrb/campaign.hpp"
#include "hvrb/converter.hpp"
#include "hvrb/error.hpp"
#include "hvrb/extraction.hpp"
#include "hvrb/format.hpp"

namespace hvrb {

inline constexpr const char* cell_csv_header = "t_min,rds_on_ohm,rds_norm";
inline constexpr const char* summary_csv_header =
    "cell_id,v_stress_V,v_max_measured_V,temp_K,slope_ohm_per_ln_min,intercept_ohm,r_squared";

namespace detail {

inline std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name,
                                        const std::string& content) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        fail(ErrorKind::io, "output directory " + dir.string() + " does not exist");
    }
    const auto path = dir / name;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
    os << content;
    os.flush();
    if (!os) fail(ErrorKind::io, "write to " + path.string() + " failed");
    return path;
}

}  // namespace detail

inline std::string cell_csv(const CellResult& cell) {
    std::ostringstream os;
    os << cell_csv_header << '\n';
    const double ref = cell.samples.empty() ? 0.0 : cell.samples.front().rds_on;
    for (const auto& s : cell.samples) {
        os << format_number(s.t) << ',' << format_number(s.rds_on) << ',';
        if (ref > 0.0) os << format_number(s.rds_on / ref);
        os << '\n';
    }
    return os.str();
}

/// One row per cell; fit columns stay empty when a cell has no fit.
inline std::string summary_csv(const CampaignResult& result) {
    std::ostringstream os;
    os << summary_csv_header << '\n';
    for (const auto& c : result.cells) {
        os << c.cell.id << ',' << format_number(c.cell.v_stress) << ',' << format_number(c.v_max_measured) << ','
           << format_number(c.cell.temp) << ',';
        if (c.fit) {
            os << format_number(c.fit->slope) << ',' << format_number(c.fit->intercept) << ','
               << format_number(c.fit->r_squared);
        } else {
            os << ",,";
        }
        os << '\n';
    }
    return os.str();
}

inline std::string cell_file_name(std::size_t index, const StressCell& cell) {
    return "cell" + std::to_string(index) + "_" + cell.id + ".csv";
}

inline std::vector<std::filesystem::path> emit_results(const CampaignResult& result,
                                                       const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    for (std::size_t k = 0; k < result.cells.size(); ++k) {
        const auto& c = result.cells[k];
        written.push_back(detail::write_file(dir, cell_file_name(k, c.cell), cell_csv(c)));
    }
    written.push_back(detail::write_file(dir, "campaign_summary.csv", summary_csv(result)));
    return written;
}

inline std::vector<std::filesystem::path> emit_results(const Waveform& waveform, const std::filesystem::path& dir) {
    std::ostringstream os;
    write_waveform_csv(os, waveform);
    return {detail::write_file(dir, "waveform.csv", os.str())};
}

inline std::vector<std::filesystem::path> emit_results(const FitResult& fit, const std::filesystem::path& dir) {
    std::ostringstream os;
    write_fit_report(os, fit);
    return {detail::write_file(dir, "fit_report.txt", os.str())};
}

}  // namespace hvrb
