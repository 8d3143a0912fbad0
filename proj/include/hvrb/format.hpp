#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace hvrb {

/// Shortest decimal string that parses back to the same double.
inline std::string format_number(double value) {
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    if (ec != std::errc{}) {
        return "nan";
    }
    return std::string(buffer, end);
}

inline std::string format_number(long long value) { return std::to_string(value); }
inline std::string format_number(std::size_t value) { return std::to_string(value); }
inline std::string format_number(int value) { return std::to_string(value); }

}  // namespace hvrb
