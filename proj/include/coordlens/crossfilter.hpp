#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "coordlens/date.hpp"
#include "coordlens/geometry.hpp"
#include "coordlens/table.hpp"

namespace coordlens {

enum class DimensionKind { Scalar, Categorical, Tag, Point };

std::string_view to_string(DimensionKind kind);

/// The dimension kind a column supports (number/date -> scalar, text ->
/// categorical, tag-list -> tag, point -> point).
DimensionKind natural_dimension_kind(ColumnKind kind);

struct DimensionId {
  std::uint32_t index = 0;
  friend auto operator<=>(const DimensionId&, const DimensionId&) = default;
};

struct GroupId {
  std::uint32_t index = 0;
  friend auto operator<=>(const GroupId&, const GroupId&) = default;
};

struct NoFilter {
  friend bool operator==(const NoFilter&, const NoFilter&) = default;
};
/// Half-open [lo, hi); dates compare as days since epoch.
struct RangeFilter {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const RangeFilter&, const RangeFilter&) = default;
};
struct SetFilter {
  std::set<std::string> values;
  friend bool operator==(const SetFilter&, const SetFilter&) = default;
};
/// Passes records whose tag set intersects `values`.
struct TagAnyFilter {
  std::set<std::string> values;
  friend bool operator==(const TagAnyFilter&, const TagAnyFilter&) = default;
};
struct SpatialFilter {
  Geometry geometry;
};
struct KeyFilter {
  std::set<std::string> keys;
  friend bool operator==(const KeyFilter&, const KeyFilter&) = default;
};

using FilterSpec = std::variant<NoFilter, RangeFilter, SetFilter, TagAnyFilter, SpatialFilter, KeyFilter>;

/// Label of the bin that collects nulls in categorical identity groups.
inline constexpr std::string_view kMissingBin = "(missing)";

struct Binning {
  enum class Kind { Identity, FixedWidth, TimeBucket };
  Kind kind = Kind::Identity;
  double origin = 0.0;
  double width = 1.0;
  TimeGranularity granularity = TimeGranularity::Month;

  static Binning identity() { return {}; }
  static Binning fixed_width(double origin, double width) { return {Kind::FixedWidth, origin, width}; }
  static Binning time_bucket(TimeGranularity g) { return {Kind::TimeBucket, 0.0, 1.0, g}; }
};

struct Reduction {
  enum class Kind { Count, Sum };
  Kind kind = Kind::Count;
  std::string column;  ///< summed column for Kind::Sum

  static Reduction count() { return {}; }
  static Reduction sum(std::string column) { return {Kind::Sum, std::move(column)}; }
};

/// Numeric bins (identity over scalars, fixed-width lower edges) or string
/// bins (categories, tags, time-bucket keys). One group never mixes both.
using BinKey = std::variant<double, std::string>;

struct Bin {
  BinKey key;
  double value = 0.0;
};

struct GroupResult {
  GroupId id;
  std::vector<Bin> bins;  ///< ascending key order; bins with no contributing record are omitted
};

struct ValueEntry {
  std::size_t row = 0;
  std::string_view key;
  double value = 0.0;
};

struct SortSpec {
  std::string column;
  bool ascending = true;
};

struct RecordsQuery {
  std::optional<SortSpec> sort;
  std::string search;
  std::size_t offset = 0;
  std::size_t limit = 25;
};

struct RecordsPage {
  std::vector<std::size_t> rows;
  std::size_t total_matching = 0;
};

/// Multidimensional filter engine over one record table.
///
/// Each record carries one rejection bit per dimension. A record is selected
/// when no dimension rejects it. Group aggregates skip the bit of their own
/// dimension, so a chart keeps showing its full axis while every other
/// view's filter applies. Filter changes only touch records whose
/// membership under the changed dimension flips; group counts are adjusted
/// for exactly those records.
///
/// Mutations must come from one thread at a time; const members may run
/// concurrently between mutations.
class Crossfilter {
 public:
  static constexpr std::size_t kMaxDimensions = 64;

  explicit Crossfilter(std::shared_ptr<const RecordTable> table);
  ~Crossfilter();
  Crossfilter(Crossfilter&&) noexcept;
  Crossfilter& operator=(Crossfilter&&) noexcept;

  const RecordTable& table() const noexcept { return *table_; }
  std::shared_ptr<const RecordTable> shared_table() const noexcept { return table_; }

  /// Throws Error(UnknownColumn) or Error(KindMismatch).
  DimensionId create_dimension(std::string_view column, DimensionKind kind);
  /// Dimension over the key column used by row clicks; created on first use.
  DimensionId key_dimension();

  std::size_t dimension_count() const noexcept;
  DimensionKind dimension_kind(DimensionId dim) const;
  const std::string& dimension_column(DimensionId dim) const;
  const FilterSpec& filter(DimensionId dim) const;

  /// Throws Error(KindMismatch) when the spec variant is illegal for the
  /// dimension, Error(InvalidRange) when lo > hi, Error(InvalidGeometry) for a
  /// malformed spatial filter. State is untouched on error.
  void set_filter(DimensionId dim, FilterSpec spec);
  void clear_filter(DimensionId dim);
  void clear_all_filters();

  /// Adds `value` to the dimension's Set filter, or removes it when already
  /// present; an emptied set clears the filter.
  void toggle_member(DimensionId dim, const std::string& value);

  /// Key filter toggle on the key dimension: same key clears, another key
  /// replaces. Throws Error(UnknownKey).
  const FilterSpec& row_click(std::string_view record_key);

  /// (selected, total).
  std::pair<std::size_t, std::size_t> selected_count() const noexcept;
  bool is_selected(std::size_t row) const;
  /// True when the row passes every filter except those on `excluded`.
  bool passes_except(std::size_t row, std::span<const DimensionId> excluded) const;
  std::vector<std::size_t> selected_rows(std::span<const DimensionId> excluded = {}) const;

  GroupId create_group(DimensionId dim, Binning binning, Reduction reduction);
  void dispose_group(GroupId group);
  GroupResult read_group(GroupId group) const;
  DimensionId group_dimension(GroupId group) const;

  /// Non-null values of a numeric/date column over records passing every
  /// filter except those on `exclude_dims`, in row order.
  std::vector<ValueEntry> values_for(std::string_view value_column,
                                     std::span<const DimensionId> exclude_dims = {}) const;

  RecordsPage records_view(const RecordsQuery& query) const;

 private:
  struct DimensionState;
  struct GroupState;

  DimensionState& dim_state(DimensionId dim);
  const DimensionState& dim_state(DimensionId dim) const;
  const GroupState& group_state(GroupId group) const;
  void check_filter(const DimensionState& dim, const FilterSpec& spec) const;
  void apply_mask_change(std::size_t row, std::uint64_t new_mask);

  std::shared_ptr<const RecordTable> table_;
  std::vector<std::unique_ptr<DimensionState>> dims_;
  std::vector<std::unique_ptr<GroupState>> groups_;
  std::vector<std::uint64_t> masks_;
  std::size_t n_selected_ = 0;
  std::optional<DimensionId> key_dim_;
};

}  // namespace coordlens
