#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "coordlens/date.hpp"
#include "coordlens/geometry.hpp"

namespace coordlens {

enum class ColumnKind { Number, Text, Date, Point, TagList };

std::string_view to_string(ColumnKind kind);
std::optional<ColumnKind> parse_column_kind(std::string_view name);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Number;
};

/// One input cell. Strings are accepted for Date (ISO-8601) and TagList
/// (comma separated) columns; anything else must match the column kind.
using Cell = std::variant<std::monostate, double, std::string, GeoPoint, std::vector<std::string>, Date>;

/// Splits "blood, liver, lung" into a sorted, de-duplicated tag set.
std::vector<std::string> split_tags(std::string_view text);

/// "%.15g" rendering shared by keys, search and the JSON codec.
std::string format_number(double value);

/// Columnar storage for one column. Exactly one of the value vectors is
/// populated, selected by `kind`; `valid[row] == 0` marks a null.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Number;
  std::vector<std::uint8_t> valid;
  std::vector<double> numbers;  ///< Number values, or Date as days since epoch
  std::vector<std::string> texts;
  std::vector<GeoPoint> points;
  std::vector<std::vector<std::string>> tags;

  bool is_null(std::size_t row) const { return valid[row] == 0; }
  bool is_numeric() const { return kind == ColumnKind::Number || kind == ColumnKind::Date; }
};

/// Rectangular, immutable record table. Row indices never change after
/// construction and record keys are unique and non-null.
class RecordTable {
 public:
  RecordTable() = default;

  std::size_t row_count() const noexcept { return row_count_; }
  std::size_t column_count() const noexcept { return columns_.size(); }

  const std::vector<Column>& columns() const noexcept { return columns_; }
  const Column& column(std::size_t index) const { return columns_.at(index); }
  /// Throws Error(UnknownColumn).
  const Column& column(std::string_view name) const;
  std::optional<std::size_t> column_index(std::string_view name) const;

  std::size_t key_column() const noexcept { return key_column_; }
  const std::string& key(std::size_t row) const { return keys_.at(row); }
  std::optional<std::size_t> find_row(std::string_view key) const;

  /// Renders one cell as display text (empty for null).
  std::string cell_text(std::size_t row, std::size_t column) const;

 private:
  friend RecordTable build_table(std::span<const ColumnSpec>, std::span<const std::vector<Cell>>,
                                 std::string_view);

  std::vector<Column> columns_;
  std::size_t row_count_ = 0;
  std::size_t key_column_ = 0;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::size_t> key_to_row_;
};

/// Builds a table from row-major cells. Throws Error(DuplicateKey) on a
/// repeated key, CellTypeError on a null key or a cell that does not fit its
/// column, Error(UnknownColumn) when `key_column` is absent and
/// Error(KindMismatch) when the key column is a point or tag-list column.
RecordTable build_table(std::span<const ColumnSpec> columns, std::span<const std::vector<Cell>> rows,
                        std::string_view key_column);

}  // namespace coordlens
