// error.hpp - Error kinds shared by all nmkit modules

#pragma once

#include <stdexcept>
#include <string>

namespace nmkit {

enum class ErrorKind {
    NonSquare,
    DimMismatch,
    NotHermitian,
    InvalidState,
    ConvergenceFailure,
    Singular,
    NegativeTime,
    GridTooCoarse,
    UnphysicalG,
    NearZeroG,
    NotTracePreserving,
    InvalidArgument,
    InvariantViolation,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::NonSquare: return "NonSquare";
        case ErrorKind::DimMismatch: return "DimMismatch";
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::InvalidState: return "InvalidState";
        case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorKind::Singular: return "Singular";
        case ErrorKind::NegativeTime: return "NegativeTime";
        case ErrorKind::GridTooCoarse: return "GridTooCoarse";
        case ErrorKind::UnphysicalG: return "UnphysicalG";
        case ErrorKind::NearZeroG: return "NearZeroG";
        case ErrorKind::NotTracePreserving: return "NotTracePreserving";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::InvariantViolation: return "InvariantViolation";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace nmkit
