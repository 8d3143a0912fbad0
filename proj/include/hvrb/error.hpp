#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace hvrb {

enum class ErrorKind {
    invalid_parameter,
    domain,
    numeric_instability,
    insufficient_data,
    degenerate_regression,
    config,
    io,
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_parameter: return "invalid parameter";
        case ErrorKind::domain: return "domain error";
        case ErrorKind::numeric_instability: return "numeric instability";
        case ErrorKind::insufficient_data: return "insufficient data";
        case ErrorKind::degenerate_regression: return "degenerate regression";
        case ErrorKind::config: return "configuration error";
        case ErrorKind::io: return "I/O error";
    }
    return "error";
}

/// Single exception type for the workbench; the kind drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised when integration produces a non-finite state; carries the global step index.
class NumericInstability : public Error {
public:
    NumericInstability(std::size_t step, const std::string& message)
        : Error(ErrorKind::numeric_instability,
                "step " + std::to_string(step) + ": " + message),
          step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require_finite(double value, const char* name) {
    if (!std::isfinite(value)) {
        fail(ErrorKind::invalid_parameter, std::string(name) + " must be finite");
    }
}

}  // namespace hvrb
