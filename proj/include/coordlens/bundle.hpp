#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "coordlens/geometry.hpp"
#include "coordlens/table.hpp"

namespace coordlens {

// ---------------------------------------------------------------- CSV

struct CsvColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Number;
  /// Point columns may be assembled from two numeric CSV columns; otherwise
  /// a point cell reads "lon lat".
  std::optional<std::string> lon_column;
  std::optional<std::string> lat_column;
};

struct CsvSchema {
  std::vector<CsvColumn> columns;
  std::string key_column;
};

/// RFC 4180 records (quoted fields, doubled quotes, CRLF or LF).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Header row required; empty cells are null; dates are ISO-8601; tag
/// cells split on commas. Throws Error(SchemaMismatch) for a column missing
/// from the header, CellTypeError for an unparseable cell,
/// Error(DuplicateKey), Error(IoError) when the file cannot be read.
RecordTable load_csv(const std::filesystem::path& path, const CsvSchema& schema);
RecordTable parse_csv_table(std::string_view text, const CsvSchema& schema);

// ------------------------------------------------------------ GeoJSON

using FeatureGeometry = std::variant<GeoPoint, MultiPolygon>;

struct Feature {
  std::string key;
  FeatureGeometry geometry;
  nlohmann::json properties;
};

struct FeatureSet {
  std::string key_property;
  std::vector<Feature> features;
};

/// FeatureCollection of Point / Polygon / MultiPolygon; polygons are held as
/// one-element multipolygons. Throws Error(UnsupportedGeometry),
/// Error(MissingKey), Error(InvalidGeometry), Error(IoError).
FeatureSet load_geometries(const std::filesystem::path& path, const std::string& key_property);
FeatureSet parse_geometries(const nlohmann::json& doc, const std::string& key_property);

Geometry geometry_from_geojson(const nlohmann::json& geom);
nlohmann::json geometry_to_geojson(const Geometry& geom);

/// Point geometries test equality; multipolygons test containment.
bool feature_contains(const Feature& feature, GeoPoint pt);

// --------------------------------------------------------------- Join

struct JoinedFeature {
  std::size_t feature = 0;
  std::optional<std::size_t> row;  ///< nullopt: unmatched, attributes are null
};

struct JoinResult {
  std::vector<JoinedFeature> features;
  std::vector<std::string> unmatched_features;  ///< feature keys without a row
  std::vector<std::string> unmatched_rows;      ///< row keys without a feature
};

/// Matches features to rows on `key_column`. Throws Error(UnknownColumn) or
/// Error(DuplicateKey) when the join column repeats a value.
JoinResult join_attributes(const RecordTable& table, const FeatureSet& features, std::string_view key_column);

// ---------------------------------------------------------- Manifest

enum class Layout { SingleMap, MultiMapRows };

enum class ViewKind {
  MarkerMap,
  ChoroplethMap,
  PropSymbolMap,
  SmallMultiples,
  HeatmapLayer,
  Histogram,
  Boxplot,
  Scatter,
  StackedBar,
  Donut,
  RowChart,
  BarChart,
  SeriesChart,
  RangeSlider,
  DateSlider,
  SelectMenu,
  DataTable,
  StatusBar,
};

std::string_view to_string(ViewKind kind);
std::optional<ViewKind> parse_view_kind(std::string_view name);
bool is_map_kind(ViewKind kind);

struct ViewSpec {
  std::string id;
  ViewKind kind = ViewKind::StatusBar;
  std::map<std::string, std::string> bindings;  ///< role -> column or geometry id
  nlohmann::json options = nlohmann::json::object();

  const std::string* binding(std::string_view role) const;
};

struct DataSource {
  std::string id;
  std::filesystem::path path;  ///< relative to the bundle directory
  CsvSchema schema;
};

struct GeometrySource {
  std::string id;
  std::filesystem::path path;
  std::string key_property;
};

struct JoinSpec {
  std::string table;
  std::string features;
  std::string key;
};

struct Diagnostic {
  std::string where;
  std::string message;
};

struct ValidationReport {
  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> warnings;

  bool ok() const noexcept { return errors.empty(); }
  nlohmann::json to_json() const;
};

/// In-memory application bundle. Loading never throws for content problems;
/// they are collected and surfaced by validate_bundle.
struct AppBundle {
  std::filesystem::path root;
  std::string name;
  std::optional<Layout> layout;
  std::string records_source;  ///< data source the session filters over
  std::vector<DataSource> data_sources;
  std::vector<GeometrySource> geometry_sources;
  std::vector<JoinSpec> joins;
  std::map<std::string, std::vector<std::string>> palettes;
  std::vector<ViewSpec> views;

  std::map<std::string, std::shared_ptr<const RecordTable>> tables;
  std::map<std::string, std::shared_ptr<const FeatureSet>> feature_sets;
  std::map<std::string, JoinResult> join_results;  ///< keyed by "table|features"
  std::vector<Diagnostic> load_errors;
  std::string content_hash;  ///< SHA-256 over the manifest and every referenced file

  std::shared_ptr<const RecordTable> records() const;
  const ViewSpec* find_view(std::string_view id) const;
};

/// Reads `<dir>/app.config.json` (or the manifest file itself). Throws
/// Error(IoError) only when the manifest cannot be read or is not JSON.
AppBundle load_bundle(const std::filesystem::path& path);

/// Returns the bytes of a bundle-relative file; throws Error(IoError).
using FileReader = std::function<std::string(const std::filesystem::path&)>;

FileReader disk_reader(std::filesystem::path root);
FileReader memory_reader(std::map<std::string, std::string> files);

/// Builds a bundle from an already-parsed manifest, reading data files
/// through `reader` (paths as written in the manifest).
AppBundle bundle_from_manifest(const nlohmann::json& manifest, const std::filesystem::path& root,
                               const FileReader& reader);

/// Pure check of every bundle invariant; errors block session creation.
ValidationReport validate_bundle(const AppBundle& bundle);

std::string sha256_hex(std::string_view bytes);

}  // namespace coordlens
