#include "fruitsize/error.hpp"

namespace fruitsize {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidInput: return "invalid-input";
        case ErrorCode::InvalidDepth: return "invalid-depth";
        case ErrorCode::EmptyMask: return "empty-mask";
        case ErrorCode::EmptySet: return "empty-set";
        case ErrorCode::InsufficientEvidence: return "insufficient-evidence";
        case ErrorCode::InsufficientPoints: return "insufficient-points";
        case ErrorCode::DegenerateSample: return "degenerate-sample";
        case ErrorCode::DegenerateGeometry: return "degenerate-geometry";
        case ErrorCode::FileError: return "file-error";
        case ErrorCode::SchemaError: return "schema-error";
        case ErrorCode::ReferentialError: return "referential-error";
        case ErrorCode::PlacementError: return "placement-error";
    }
    return "unknown-error";
}

}  // namespace fruitsize
