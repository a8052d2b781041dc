#include "coordlens/error.hpp"

namespace coordlens {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::CellTypeError: return "CellTypeError";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::UnknownDimension: return "UnknownDimension";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::ProjectionSingularity: return "ProjectionSingularity";
    case ErrorCode::NotEnoughDistinct: return "NotEnoughDistinct";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateX: return "DegenerateX";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidDate: return "InvalidDate";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::UnsupportedGeometry: return "UnsupportedGeometry";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::BundleInvalid: return "BundleInvalid";
    case ErrorCode::UnknownView: return "UnknownView";
    case ErrorCode::SnapshotMismatch: return "SnapshotMismatch";
    case ErrorCode::InvalidCommand: return "InvalidCommand";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace coordlens
