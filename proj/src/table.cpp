#include "coordlens/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "coordlens/error.hpp"

namespace coordlens {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

void store_cell(Column& col, std::size_t row, const Cell& cell) {
  if (std::holds_alternative<std::monostate>(cell)) return;
  switch (col.kind) {
    case ColumnKind::Number:
      if (const auto* v = std::get_if<double>(&cell)) {
        if (!std::isfinite(*v)) throw CellTypeError(row, col.name, "number is not finite");
        col.numbers[row] = *v;
        col.valid[row] = 1;
        return;
      }
      throw CellTypeError(row, col.name, "expected a number");
    case ColumnKind::Date:
      if (const auto* d = std::get_if<Date>(&cell)) {
        col.numbers[row] = d->days;
        col.valid[row] = 1;
        return;
      }
      if (const auto* s = std::get_if<std::string>(&cell)) {
        auto d = parse_iso_date(trim(*s));
        if (!d) throw CellTypeError(row, col.name, "expected an ISO-8601 date, got '" + *s + "'");
        col.numbers[row] = d->days;
        col.valid[row] = 1;
        return;
      }
      throw CellTypeError(row, col.name, "expected a date");
    case ColumnKind::Text:
      if (const auto* s = std::get_if<std::string>(&cell)) {
        col.texts[row] = *s;
        col.valid[row] = 1;
        return;
      }
      throw CellTypeError(row, col.name, "expected text");
    case ColumnKind::Point:
      if (const auto* p = std::get_if<GeoPoint>(&cell)) {
        if (!is_valid(*p)) throw CellTypeError(row, col.name, "point out of lon/lat bounds");
        col.points[row] = *p;
        col.valid[row] = 1;
        return;
      }
      throw CellTypeError(row, col.name, "expected a point");
    case ColumnKind::TagList:
      if (const auto* s = std::get_if<std::string>(&cell)) {
        col.tags[row] = split_tags(*s);
        col.valid[row] = 1;
        return;
      }
      if (const auto* list = std::get_if<std::vector<std::string>>(&cell)) {
        std::vector<std::string> tags;
        for (const auto& t : *list) {
          auto item = trim(t);
          if (!item.empty()) tags.emplace_back(item);
        }
        std::sort(tags.begin(), tags.end());
        tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
        col.tags[row] = std::move(tags);
        col.valid[row] = 1;
        return;
      }
      throw CellTypeError(row, col.name, "expected a tag list");
  }
}

}  // namespace

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Number: return "number";
    case ColumnKind::Text: return "text";
    case ColumnKind::Date: return "date";
    case ColumnKind::Point: return "point";
    case ColumnKind::TagList: return "tag-list";
  }
  return "number";
}

std::optional<ColumnKind> parse_column_kind(std::string_view name) {
  if (name == "number") return ColumnKind::Number;
  if (name == "text") return ColumnKind::Text;
  if (name == "date") return ColumnKind::Date;
  if (name == "point") return ColumnKind::Point;
  if (name == "tag-list" || name == "tags") return ColumnKind::TagList;
  return std::nullopt;
}

std::vector<std::string> split_tags(std::string_view text) {
  std::vector<std::string> tags;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    auto item = trim(text.substr(start, comma - start));
    if (!item.empty()) tags.emplace_back(item);
    start = comma + 1;
  }
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  return tags;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", value);
  return buf;
}

const Column& RecordTable::column(std::string_view name) const {
  auto idx = column_index(name);
  if (!idx) throw Error(ErrorCode::UnknownColumn, "unknown column '" + std::string(name) + "'");
  return columns_[*idx];
}

std::optional<std::size_t> RecordTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> RecordTable::find_row(std::string_view key) const {
  auto it = key_to_row_.find(std::string(key));
  if (it == key_to_row_.end()) return std::nullopt;
  return it->second;
}

std::string RecordTable::cell_text(std::size_t row, std::size_t column) const {
  const Column& col = columns_.at(column);
  if (col.is_null(row)) return {};
  switch (col.kind) {
    case ColumnKind::Number: return format_number(col.numbers[row]);
    case ColumnKind::Date: return format_iso_date(Date{static_cast<std::int32_t>(col.numbers[row])});
    case ColumnKind::Text: return col.texts[row];
    case ColumnKind::Point:
      return format_number(col.points[row].lon) + " " + format_number(col.points[row].lat);
    case ColumnKind::TagList: {
      std::string out;
      for (const auto& t : col.tags[row]) {
        if (!out.empty()) out += ", ";
        out += t;
      }
      return out;
    }
  }
  return {};
}

RecordTable build_table(std::span<const ColumnSpec> columns, std::span<const std::vector<Cell>> rows,
                        std::string_view key_column) {
  RecordTable table;
  const std::size_t m = rows.size();
  table.row_count_ = m;
  table.columns_.reserve(columns.size());
  for (const ColumnSpec& spec : columns) {
    for (const Column& existing : table.columns_) {
      if (existing.name == spec.name) {
        throw Error(ErrorCode::SchemaMismatch, "duplicate column name '" + spec.name + "'");
      }
    }
    Column col;
    col.name = spec.name;
    col.kind = spec.kind;
    col.valid.assign(m, 0);
    switch (spec.kind) {
      case ColumnKind::Number:
      case ColumnKind::Date: col.numbers.assign(m, 0.0); break;
      case ColumnKind::Text: col.texts.assign(m, std::string{}); break;
      case ColumnKind::Point: col.points.assign(m, GeoPoint{}); break;
      case ColumnKind::TagList: col.tags.assign(m, {}); break;
    }
    table.columns_.push_back(std::move(col));
  }

  auto key_idx = table.column_index(key_column);
  if (!key_idx) throw Error(ErrorCode::UnknownColumn, "key column '" + std::string(key_column) + "' not found");
  table.key_column_ = *key_idx;
  const ColumnKind key_kind = table.columns_[*key_idx].kind;
  if (key_kind == ColumnKind::Point || key_kind == ColumnKind::TagList) {
    throw Error(ErrorCode::KindMismatch, "key column must be text, number or date");
  }

  for (std::size_t r = 0; r < m; ++r) {
    const auto& row = rows[r];
    if (row.size() != columns.size()) {
      throw CellTypeError(r, "", "row has " + std::to_string(row.size()) + " cells, expected " +
                                     std::to_string(columns.size()));
    }
    for (std::size_t c = 0; c < columns.size(); ++c) store_cell(table.columns_[c], r, row[c]);
  }

  table.keys_.reserve(m);
  table.key_to_row_.reserve(m);
  for (std::size_t r = 0; r < m; ++r) {
    if (table.columns_[*key_idx].is_null(r)) {
      throw CellTypeError(r, table.columns_[*key_idx].name, "key is null");
    }
    std::string key = table.cell_text(r, *key_idx);
    if (!table.key_to_row_.emplace(key, r).second) {
      throw Error(ErrorCode::DuplicateKey, "duplicate key '" + key + "'");
    }
    table.keys_.push_back(std::move(key));
  }
  return table;
}

}  // namespace coordlens
