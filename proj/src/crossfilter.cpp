#include "coordlens/crossfilter.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "coordlens/error.hpp"

namespace coordlens {

std::string_view to_string(DimensionKind kind) {
  switch (kind) {
    case DimensionKind::Scalar: return "scalar";
    case DimensionKind::Categorical: return "categorical";
    case DimensionKind::Tag: return "tag";
    case DimensionKind::Point: return "point";
  }
  return "scalar";
}

DimensionKind natural_dimension_kind(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Number:
    case ColumnKind::Date: return DimensionKind::Scalar;
    case ColumnKind::Text: return DimensionKind::Categorical;
    case ColumnKind::TagList: return DimensionKind::Tag;
    case ColumnKind::Point: return DimensionKind::Point;
  }
  return DimensionKind::Scalar;
}

namespace {

bool compatible(DimensionKind dim, ColumnKind col) {
  if (dim == DimensionKind::Categorical) {
    // Key columns may be numeric; categorical dimensions compare display text.
    return col == ColumnKind::Text || col == ColumnKind::Number || col == ColumnKind::Date;
  }
  return natural_dimension_kind(col) == dim;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> build_dictionary(std::vector<std::string> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

std::int32_t code_of(const std::vector<std::string>& dict, const std::string& value) {
  auto it = std::lower_bound(dict.begin(), dict.end(), value);
  if (it == dict.end() || *it != value) return -1;
  return static_cast<std::int32_t>(it - dict.begin());
}

}  // namespace

struct Crossfilter::DimensionState {
  std::uint32_t index = 0;
  std::size_t column = 0;
  std::string column_name;
  DimensionKind kind = DimensionKind::Scalar;
  bool is_date = false;
  FilterSpec filter = NoFilter{};

  std::vector<std::uint8_t> valid;

  // Scalar
  std::vector<double> values;
  std::vector<std::uint32_t> sorted_rows;  // valid rows by (value, row)
  std::vector<double> sorted_values;

  // Categorical / tag
  std::vector<std::string> dictionary;
  std::vector<std::int32_t> codes;         // categorical: one per row, -1 when null
  std::vector<std::uint32_t> tag_offsets;  // tag: CSR offsets into tag_codes
  std::vector<std::int32_t> tag_codes;

  // Point
  const std::vector<GeoPoint>* points = nullptr;

  // Prepared evaluators for the active filter.
  std::vector<std::uint8_t> accepted_codes;
  std::optional<SpatialPredicate> spatial;

  std::uint64_t bit() const { return std::uint64_t{1} << index; }

  std::pair<std::size_t, std::size_t> sorted_span(const RangeFilter& r) const {
    auto lo = std::lower_bound(sorted_values.begin(), sorted_values.end(), r.lo) - sorted_values.begin();
    auto hi = std::lower_bound(sorted_values.begin(), sorted_values.end(), r.hi) - sorted_values.begin();
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(std::max(lo, hi))};
  }

  void prepare(const FilterSpec& spec) {
    accepted_codes.clear();
    spatial.reset();
    auto mark = [&](const std::set<std::string>& wanted) {
      accepted_codes.assign(dictionary.size(), 0);
      for (const auto& w : wanted) {
        auto c = code_of(dictionary, w);
        if (c >= 0) accepted_codes[static_cast<std::size_t>(c)] = 1;
      }
    };
    if (const auto* s = std::get_if<SetFilter>(&spec)) mark(s->values);
    if (const auto* t = std::get_if<TagAnyFilter>(&spec)) mark(t->values);
    if (const auto* k = std::get_if<KeyFilter>(&spec)) mark(k->keys);
    if (const auto* sp = std::get_if<SpatialFilter>(&spec)) spatial.emplace(sp->geometry);
  }

  bool passes(std::size_t row) const {
    if (std::holds_alternative<NoFilter>(filter)) return true;
    if (!valid[row]) return false;
    switch (kind) {
      case DimensionKind::Scalar: {
        const auto& r = std::get<RangeFilter>(filter);
        return values[row] >= r.lo && values[row] < r.hi;
      }
      case DimensionKind::Categorical:
        return accepted_codes[static_cast<std::size_t>(codes[row])] != 0;
      case DimensionKind::Tag:
        for (auto i = tag_offsets[row]; i < tag_offsets[row + 1]; ++i) {
          if (accepted_codes[static_cast<std::size_t>(tag_codes[i])]) return true;
        }
        return false;
      case DimensionKind::Point:
        return (*spatial)((*points)[row]);
    }
    return false;
  }
};

struct Crossfilter::GroupState {
  bool alive = true;
  DimensionId dim;
  std::uint64_t dim_bit = 0;
  Reduction reduction;
  std::optional<std::size_t> sum_column;
  std::vector<BinKey> keys;
  std::vector<std::uint32_t> offsets;  // CSR: bins of row r are bins[offsets[r]..offsets[r+1])
  std::vector<std::uint32_t> bins;
  std::vector<std::int64_t> members;   // contributing records per bin
};

Crossfilter::Crossfilter(std::shared_ptr<const RecordTable> table)
    : table_(std::move(table)), masks_(table_->row_count(), 0), n_selected_(table_->row_count()) {}

Crossfilter::~Crossfilter() = default;
Crossfilter::Crossfilter(Crossfilter&&) noexcept = default;
Crossfilter& Crossfilter::operator=(Crossfilter&&) noexcept = default;

Crossfilter::DimensionState& Crossfilter::dim_state(DimensionId dim) {
  if (dim.index >= dims_.size()) throw Error(ErrorCode::UnknownDimension, "unknown dimension");
  return *dims_[dim.index];
}

const Crossfilter::DimensionState& Crossfilter::dim_state(DimensionId dim) const {
  if (dim.index >= dims_.size()) throw Error(ErrorCode::UnknownDimension, "unknown dimension");
  return *dims_[dim.index];
}

const Crossfilter::GroupState& Crossfilter::group_state(GroupId group) const {
  if (group.index >= groups_.size() || !groups_[group.index]->alive) {
    throw Error(ErrorCode::UnknownDimension, "unknown group");
  }
  return *groups_[group.index];
}

DimensionId Crossfilter::create_dimension(std::string_view column, DimensionKind kind) {
  const auto col_idx = table_->column_index(column);
  if (!col_idx) throw Error(ErrorCode::UnknownColumn, "unknown column '" + std::string(column) + "'");
  const Column& col = table_->column(*col_idx);
  if (!compatible(kind, col.kind)) {
    throw Error(ErrorCode::KindMismatch, std::string(to_string(kind)) + " dimension cannot index " +
                                             std::string(to_string(col.kind)) + " column '" + col.name + "'");
  }
  if (dims_.size() >= kMaxDimensions) {
    throw Error(ErrorCode::NotApplicable, "at most 64 dimensions per crossfilter");
  }

  auto state = std::make_unique<DimensionState>();
  const std::size_t m = table_->row_count();
  state->index = static_cast<std::uint32_t>(dims_.size());
  state->column = *col_idx;
  state->column_name = col.name;
  state->kind = kind;
  state->is_date = col.kind == ColumnKind::Date;
  state->valid = col.valid;

  switch (kind) {
    case DimensionKind::Scalar: {
      state->values = col.numbers;
      for (std::size_t r = 0; r < m; ++r) {
        if (col.valid[r]) state->sorted_rows.push_back(static_cast<std::uint32_t>(r));
      }
      std::stable_sort(state->sorted_rows.begin(), state->sorted_rows.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return col.numbers[a] < col.numbers[b]; });
      state->sorted_values.reserve(state->sorted_rows.size());
      for (auto r : state->sorted_rows) state->sorted_values.push_back(col.numbers[r]);
      break;
    }
    case DimensionKind::Categorical: {
      std::vector<std::string> text(m);
      for (std::size_t r = 0; r < m; ++r) {
        if (col.valid[r]) text[r] = table_->cell_text(r, *col_idx);
      }
      std::vector<std::string> present;
      for (std::size_t r = 0; r < m; ++r) {
        if (col.valid[r]) present.push_back(text[r]);
      }
      state->dictionary = build_dictionary(std::move(present));
      state->codes.assign(m, -1);
      for (std::size_t r = 0; r < m; ++r) {
        if (col.valid[r]) state->codes[r] = code_of(state->dictionary, text[r]);
      }
      break;
    }
    case DimensionKind::Tag: {
      std::vector<std::string> present;
      for (std::size_t r = 0; r < m; ++r) {
        for (const auto& t : col.tags[r]) present.push_back(t);
      }
      state->dictionary = build_dictionary(std::move(present));
      state->tag_offsets.assign(m + 1, 0);
      for (std::size_t r = 0; r < m; ++r) {
        if (col.valid[r]) {
          for (const auto& t : col.tags[r]) state->tag_codes.push_back(code_of(state->dictionary, t));
        }
        state->tag_offsets[r + 1] = static_cast<std::uint32_t>(state->tag_codes.size());
      }
      break;
    }
    case DimensionKind::Point:
      state->points = &col.points;
      break;
  }
  DimensionId id{state->index};
  dims_.push_back(std::move(state));
  return id;
}

DimensionId Crossfilter::key_dimension() {
  if (!key_dim_) {
    key_dim_ = create_dimension(table_->column(table_->key_column()).name, DimensionKind::Categorical);
  }
  return *key_dim_;
}

std::size_t Crossfilter::dimension_count() const noexcept { return dims_.size(); }

DimensionKind Crossfilter::dimension_kind(DimensionId dim) const { return dim_state(dim).kind; }

const std::string& Crossfilter::dimension_column(DimensionId dim) const { return dim_state(dim).column_name; }

const FilterSpec& Crossfilter::filter(DimensionId dim) const { return dim_state(dim).filter; }

void Crossfilter::check_filter(const DimensionState& dim, const FilterSpec& spec) const {
  auto mismatch = [&](std::string_view variant) {
    throw Error(ErrorCode::KindMismatch, std::string(variant) + " filter is not valid on " +
                                             std::string(to_string(dim.kind)) + " dimension over '" +
                                             dim.column_name + "'");
  };
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, RangeFilter>) {
          if (dim.kind != DimensionKind::Scalar) mismatch("range");
          if (std::isnan(f.lo) || std::isnan(f.hi)) throw Error(ErrorCode::InvalidRange, "range bound is NaN");
          if (f.lo > f.hi) {
            throw Error(ErrorCode::InvalidRange,
                        "range lo " + format_number(f.lo) + " exceeds hi " + format_number(f.hi));
          }
        } else if constexpr (std::is_same_v<T, SetFilter>) {
          if (dim.kind != DimensionKind::Categorical) mismatch("set");
        } else if constexpr (std::is_same_v<T, TagAnyFilter>) {
          if (dim.kind != DimensionKind::Tag) mismatch("tag_any");
        } else if constexpr (std::is_same_v<T, SpatialFilter>) {
          if (dim.kind != DimensionKind::Point) mismatch("spatial");
          validate(f.geometry);
        } else if constexpr (std::is_same_v<T, KeyFilter>) {
          if (dim.kind != DimensionKind::Categorical || dim.column != table_->key_column()) mismatch("key");
        }
      },
      spec);
}

void Crossfilter::apply_mask_change(std::size_t row, std::uint64_t new_mask) {
  const std::uint64_t old_mask = masks_[row];
  if (old_mask == new_mask) return;
  for (auto& g : groups_) {
    if (!g->alive) continue;
    const std::uint64_t others = ~g->dim_bit;
    const bool before = (old_mask & others) == 0;
    const bool after = (new_mask & others) == 0;
    if (before == after) continue;
    const std::int64_t delta = after ? 1 : -1;
    for (auto i = g->offsets[row]; i < g->offsets[row + 1]; ++i) g->members[g->bins[i]] += delta;
  }
  if (old_mask == 0) --n_selected_;
  if (new_mask == 0) ++n_selected_;
  masks_[row] = new_mask;
}

void Crossfilter::set_filter(DimensionId dim_id, FilterSpec spec) {
  DimensionState& dim = dim_state(dim_id);
  check_filter(dim, spec);

  const FilterSpec old = std::move(dim.filter);
  dim.filter = std::move(spec);
  dim.prepare(dim.filter);

  const std::uint64_t bit = dim.bit();
  auto revisit = [&](std::size_t row) {
    const bool rejected = (masks_[row] & bit) != 0;
    const bool pass = dim.passes(row);
    if (pass == rejected) apply_mask_change(row, masks_[row] ^ bit);
  };

  const auto* old_range = std::get_if<RangeFilter>(&old);
  const auto* new_range = std::get_if<RangeFilter>(&dim.filter);
  if (old_range && new_range) {
    // Only rows between the old and new bounds in sorted order can flip.
    auto [a0, a1] = dim.sorted_span(*old_range);
    auto [b0, b1] = dim.sorted_span(*new_range);
    for (auto i = std::min(a0, b0); i < std::max(a0, b0); ++i) revisit(dim.sorted_rows[i]);
    const auto lo = std::max(std::min(a1, b1), std::max(a0, b0));
    for (auto i = lo; i < std::max(a1, b1); ++i) revisit(dim.sorted_rows[i]);
  } else {
    for (std::size_t r = 0; r < masks_.size(); ++r) revisit(r);
  }
}

void Crossfilter::clear_filter(DimensionId dim) { set_filter(dim, NoFilter{}); }

void Crossfilter::clear_all_filters() {
  for (std::uint32_t i = 0; i < dims_.size(); ++i) {
    if (!std::holds_alternative<NoFilter>(dims_[i]->filter)) set_filter(DimensionId{i}, NoFilter{});
  }
}

void Crossfilter::toggle_member(DimensionId dim, const std::string& value) {
  SetFilter next;
  if (const auto* current = std::get_if<SetFilter>(&dim_state(dim).filter)) next = *current;
  if (!next.values.erase(value)) next.values.insert(value);
  if (next.values.empty()) {
    set_filter(dim, NoFilter{});
  } else {
    set_filter(dim, std::move(next));
  }
}

const FilterSpec& Crossfilter::row_click(std::string_view record_key) {
  if (!table_->find_row(record_key)) {
    throw Error(ErrorCode::UnknownKey, "unknown record key '" + std::string(record_key) + "'");
  }
  const DimensionId dim = key_dimension();
  const auto* current = std::get_if<KeyFilter>(&dim_state(dim).filter);
  if (current && current->keys.size() == 1 && *current->keys.begin() == record_key) {
    set_filter(dim, NoFilter{});
  } else {
    set_filter(dim, KeyFilter{{std::string(record_key)}});
  }
  return dim_state(dim).filter;
}

std::pair<std::size_t, std::size_t> Crossfilter::selected_count() const noexcept {
  return {n_selected_, table_->row_count()};
}

bool Crossfilter::is_selected(std::size_t row) const { return masks_.at(row) == 0; }

bool Crossfilter::passes_except(std::size_t row, std::span<const DimensionId> excluded) const {
  std::uint64_t ignore = 0;
  for (DimensionId d : excluded) ignore |= dim_state(d).bit();
  return (masks_.at(row) & ~ignore) == 0;
}

std::vector<std::size_t> Crossfilter::selected_rows(std::span<const DimensionId> excluded) const {
  std::uint64_t ignore = 0;
  for (DimensionId d : excluded) ignore |= dim_state(d).bit();
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < masks_.size(); ++r) {
    if ((masks_[r] & ~ignore) == 0) rows.push_back(r);
  }
  return rows;
}

GroupId Crossfilter::create_group(DimensionId dim_id, Binning binning, Reduction reduction) {
  const DimensionState& dim = dim_state(dim_id);
  const std::size_t m = table_->row_count();
  auto g = std::make_unique<GroupState>();
  g->dim = dim_id;
  g->dim_bit = dim.bit();

  if (reduction.kind == Reduction::Kind::Sum) {
    const Column& sum_col = table_->column(reduction.column);
    if (!sum_col.is_numeric()) {
      throw Error(ErrorCode::KindMismatch, "cannot sum non-numeric column '" + reduction.column + "'");
    }
    g->sum_column = *table_->column_index(reduction.column);
  }
  g->reduction = std::move(reduction);

  // Per-row bin key, then dense bin indices in key order.
  std::vector<std::optional<BinKey>> row_key(m);
  std::vector<std::vector<std::uint32_t>> row_tag_bins;

  switch (dim.kind) {
    case DimensionKind::Point:
      throw Error(ErrorCode::KindMismatch, "point dimensions cannot be grouped");
    case DimensionKind::Categorical:
    case DimensionKind::Tag:
      if (binning.kind != Binning::Kind::Identity) {
        throw Error(ErrorCode::KindMismatch, "categorical and tag dimensions only support identity binning");
      }
      break;
    case DimensionKind::Scalar:
      if (binning.kind == Binning::Kind::TimeBucket && !dim.is_date) {
        throw Error(ErrorCode::KindMismatch, "time-bucket binning requires a date column");
      }
      if (binning.kind == Binning::Kind::FixedWidth && !(binning.width > 0.0 && std::isfinite(binning.width))) {
        throw Error(ErrorCode::InvalidRange, "bin width must be positive");
      }
      break;
  }

  if (dim.kind == DimensionKind::Tag) {
    for (const auto& t : dim.dictionary) g->keys.emplace_back(t);
    g->offsets.assign(m + 1, 0);
    for (std::size_t r = 0; r < m; ++r) {
      for (auto i = dim.tag_offsets[r]; i < dim.tag_offsets[r + 1]; ++i) {
        g->bins.push_back(static_cast<std::uint32_t>(dim.tag_codes[i]));
      }
      g->offsets[r + 1] = static_cast<std::uint32_t>(g->bins.size());
    }
  } else {
    for (std::size_t r = 0; r < m; ++r) {
      if (dim.kind == DimensionKind::Categorical) {
        row_key[r] = dim.valid[r] ? BinKey{dim.dictionary[static_cast<std::size_t>(dim.codes[r])]}
                                  : BinKey{std::string(kMissingBin)};
        continue;
      }
      if (!dim.valid[r]) continue;
      const double v = dim.values[r];
      switch (binning.kind) {
        case Binning::Kind::Identity: row_key[r] = BinKey{v}; break;
        case Binning::Kind::FixedWidth:
          row_key[r] = BinKey{binning.origin + std::floor((v - binning.origin) / binning.width) * binning.width};
          break;
        case Binning::Kind::TimeBucket:
          row_key[r] = BinKey{bucket_key(Date{static_cast<std::int32_t>(v)}, binning.granularity)};
          break;
      }
    }
    for (const auto& k : row_key) {
      if (k) g->keys.push_back(*k);
    }
    std::sort(g->keys.begin(), g->keys.end());
    g->keys.erase(std::unique(g->keys.begin(), g->keys.end()), g->keys.end());
    g->offsets.assign(m + 1, 0);
    for (std::size_t r = 0; r < m; ++r) {
      if (row_key[r]) {
        auto it = std::lower_bound(g->keys.begin(), g->keys.end(), *row_key[r]);
        g->bins.push_back(static_cast<std::uint32_t>(it - g->keys.begin()));
      }
      g->offsets[r + 1] = static_cast<std::uint32_t>(g->bins.size());
    }
  }

  g->members.assign(g->keys.size(), 0);
  const std::uint64_t others = ~g->dim_bit;
  for (std::size_t r = 0; r < m; ++r) {
    if ((masks_[r] & others) != 0) continue;
    for (auto i = g->offsets[r]; i < g->offsets[r + 1]; ++i) ++g->members[g->bins[i]];
  }

  GroupId id{static_cast<std::uint32_t>(groups_.size())};
  groups_.push_back(std::move(g));
  return id;
}

void Crossfilter::dispose_group(GroupId group) {
  group_state(group);
  auto& g = *groups_[group.index];
  g.alive = false;
  g.keys.clear();
  g.offsets.clear();
  g.bins.clear();
  g.members.clear();
}

DimensionId Crossfilter::group_dimension(GroupId group) const { return group_state(group).dim; }

GroupResult Crossfilter::read_group(GroupId group) const {
  const GroupState& g = group_state(group);
  GroupResult result;
  result.id = group;

  std::vector<double> values(g.keys.size(), 0.0);
  if (g.sum_column) {
    // Sums are rebuilt in row order so the result depends only on the
    // current filter state, never on the sequence of edits that led there.
    const Column& col = table_->column(*g.sum_column);
    const std::uint64_t others = ~g.dim_bit;
    for (std::size_t r = 0; r < masks_.size(); ++r) {
      if ((masks_[r] & others) != 0 || col.is_null(r)) continue;
      for (auto i = g.offsets[r]; i < g.offsets[r + 1]; ++i) values[g.bins[i]] += col.numbers[r];
    }
  } else {
    for (std::size_t b = 0; b < g.keys.size(); ++b) values[b] = static_cast<double>(g.members[b]);
  }

  for (std::size_t b = 0; b < g.keys.size(); ++b) {
    if (g.members[b] > 0) result.bins.push_back(Bin{g.keys[b], values[b]});
  }
  return result;
}

std::vector<ValueEntry> Crossfilter::values_for(std::string_view value_column,
                                                std::span<const DimensionId> exclude_dims) const {
  const Column& col = table_->column(value_column);
  if (!col.is_numeric()) {
    throw Error(ErrorCode::KindMismatch, "column '" + col.name + "' is not numeric");
  }
  std::uint64_t ignore = 0;
  for (DimensionId d : exclude_dims) ignore |= dim_state(d).bit();
  std::vector<ValueEntry> out;
  for (std::size_t r = 0; r < masks_.size(); ++r) {
    if ((masks_[r] & ~ignore) != 0 || col.is_null(r)) continue;
    out.push_back(ValueEntry{r, table_->key(r), col.numbers[r]});
  }
  return out;
}

RecordsPage Crossfilter::records_view(const RecordsQuery& query) const {
  std::optional<std::size_t> sort_col;
  if (query.sort) {
    sort_col = table_->column_index(query.sort->column);
    if (!sort_col) throw Error(ErrorCode::UnknownColumn, "unknown sort column '" + query.sort->column + "'");
  }

  std::vector<std::size_t> text_cols;
  for (std::size_t c = 0; c < table_->column_count(); ++c) {
    if (table_->column(c).kind == ColumnKind::Text) text_cols.push_back(c);
  }
  const std::string needle = lowercase(query.search);

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < masks_.size(); ++r) {
    if (masks_[r] != 0) continue;
    if (!needle.empty()) {
      bool hit = false;
      for (std::size_t c : text_cols) {
        const Column& col = table_->column(c);
        if (!col.is_null(r) && lowercase(col.texts[r]).find(needle) != std::string::npos) {
          hit = true;
          break;
        }
      }
      if (!hit) continue;
    }
    rows.push_back(r);
  }

  if (sort_col) {
    const Column& col = table_->column(*sort_col);
    const bool asc = query.sort->ascending;
    std::vector<std::string> text_keys;
    if (col.kind == ColumnKind::TagList) {
      text_keys.resize(table_->row_count());
      for (std::size_t r : rows) text_keys[r] = table_->cell_text(r, *sort_col);
    }
    auto less = [&](std::size_t a, std::size_t b) {
      const bool na = col.is_null(a);
      const bool nb = col.is_null(b);
      if (na || nb) return !na && nb;  // nulls after values
      switch (col.kind) {
        case ColumnKind::Number:
        case ColumnKind::Date: return col.numbers[a] < col.numbers[b];
        case ColumnKind::Text: return col.texts[a] < col.texts[b];
        case ColumnKind::Point:
          return std::pair(col.points[a].lon, col.points[a].lat) < std::pair(col.points[b].lon, col.points[b].lat);
        case ColumnKind::TagList: return text_keys[a] < text_keys[b];
      }
      return false;
    };
    std::stable_sort(rows.begin(), rows.end(),
                     [&](std::size_t a, std::size_t b) { return asc ? less(a, b) : less(b, a); });
  }

  RecordsPage page;
  page.total_matching = rows.size();
  const std::size_t begin = std::min(query.offset, rows.size());
  const std::size_t end = begin + std::min(query.limit, rows.size() - begin);
  page.rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(begin), rows.begin() + static_cast<std::ptrdiff_t>(end));
  return page;
}

}  // namespace coordlens
