#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coordlens {

enum class ErrorCode {
  DuplicateKey,
  CellTypeError,
  KindMismatch,
  InvalidRange,
  UnknownColumn,
  UnknownKey,
  UnknownDimension,
  InvalidGeometry,
  ProjectionSingularity,
  NotEnoughDistinct,
  NotApplicable,
  EmptyInput,
  DegenerateX,
  TooFewPoints,
  LengthMismatch,
  InvalidDate,
  SchemaMismatch,
  UnsupportedGeometry,
  MissingKey,
  BundleInvalid,
  UnknownView,
  SnapshotMismatch,
  InvalidCommand,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every domain failure in the engine is reported through this type; the
/// code is stable and appears verbatim in session Error notifications.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by table construction when a cell does not fit its column.
class CellTypeError : public Error {
 public:
  CellTypeError(std::size_t row, std::string column, const std::string& detail)
      : Error(ErrorCode::CellTypeError,
              "row " + std::to_string(row) + ", column '" + column + "': " + detail),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

}  // namespace coordlens
