#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hetero_rd {

enum class ErrorCode {
    InvalidArgument,
    InterfaceNotOnFace,
    DuplicateInterface,
    OutOfDomain,
    NotBistable,
    DimensionMismatch,
    GridMismatch,
    SingularSystem,
    NewtonDiverged,
    InvalidInitialData,
    BoundViolation,
    UnknownDatum,
    TooFewCells,
    NonPositiveInput,
    InsufficientSnapshots,
    NoBracket,
    IoError,
    ParseError,
    ValidationError,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library is reported through this type; `code()`
/// identifies the condition so callers can branch without parsing text.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace hetero_rd
