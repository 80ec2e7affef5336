#include "hetero_rd/error.hpp"

namespace hetero_rd {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InterfaceNotOnFace: return "InterfaceNotOnFace";
        case ErrorCode::DuplicateInterface: return "DuplicateInterface";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::NotBistable: return "NotBistable";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::NewtonDiverged: return "NewtonDiverged";
        case ErrorCode::InvalidInitialData: return "InvalidInitialData";
        case ErrorCode::BoundViolation: return "BoundViolation";
        case ErrorCode::UnknownDatum: return "UnknownDatum";
        case ErrorCode::TooFewCells: return "TooFewCells";
        case ErrorCode::NonPositiveInput: return "NonPositiveInput";
        case ErrorCode::InsufficientSnapshots: return "InsufficientSnapshots";
        case ErrorCode::NoBracket: return "NoBracket";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

}  // namespace hetero_rd
