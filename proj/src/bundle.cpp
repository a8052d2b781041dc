#include "coordlens/bundle.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "coordlens/classify.hpp"
#include "coordlens/error.hpp"
#include "coordlens/heatgrid.hpp"
#include "coordlens/stats.hpp"
#include "coordlens/projection.hpp"

namespace coordlens {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GeoPoint parse_position(const json& pos) {
  if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
    throw Error(ErrorCode::InvalidGeometry, "position must be [lon, lat]");
  }
  GeoPoint pt{pos[0].get<double>(), pos[1].get<double>()};
  if (!is_valid(pt)) throw Error(ErrorCode::InvalidGeometry, "position out of lon/lat bounds");
  return pt;
}

Polygon parse_polygon(const json& coords) {
  if (!coords.is_array()) throw Error(ErrorCode::InvalidGeometry, "polygon coordinates must be an array");
  Polygon poly;
  for (const json& ring_json : coords) {
    if (!ring_json.is_array()) throw Error(ErrorCode::InvalidGeometry, "ring must be an array");
    Ring ring;
    for (const json& pos : ring_json) ring.push_back(parse_position(pos));
    poly.rings.push_back(std::move(ring));
  }
  validate(poly);
  return poly;
}

json position_json(GeoPoint p) { return json::array({p.lon, p.lat}); }

json polygon_json(const Polygon& poly) {
  json rings = json::array();
  for (const Ring& ring : poly.rings) {
    json r = json::array();
    for (const GeoPoint& p : ring) r.push_back(position_json(p));
    rings.push_back(std::move(r));
  }
  return rings;
}

std::string key_text(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number()) return format_number(value.get<double>());
  throw Error(ErrorCode::MissingKey, "key property must be a string or number");
}

}  // namespace

// ---------------------------------------------------------------- CSV

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started || field.empty()) in_quotes = true;
        else field += c;
        field_started = true;
        break;
      case ',': end_field(); break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n': end_record(); break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

RecordTable parse_csv_table(std::string_view text, const CsvSchema& schema) {
  const auto records = parse_csv(text);
  if (records.empty()) throw Error(ErrorCode::SchemaMismatch, "CSV has no header row");
  std::unordered_map<std::string, std::size_t> header;
  for (std::size_t i = 0; i < records[0].size(); ++i) header.emplace(std::string(trim(records[0][i])), i);
  auto column_at = [&](const std::string& name) {
    auto it = header.find(name);
    if (it == header.end()) throw Error(ErrorCode::SchemaMismatch, "column '" + name + "' missing from CSV header");
    return it->second;
  };

  struct Source {
    std::size_t a = 0;
    std::optional<std::size_t> b;
  };
  std::vector<Source> sources;
  std::vector<ColumnSpec> specs;
  for (const CsvColumn& col : schema.columns) {
    specs.push_back({col.name, col.kind});
    if (col.kind == ColumnKind::Point && (col.lon_column || col.lat_column)) {
      if (!col.lon_column || !col.lat_column) {
        throw Error(ErrorCode::SchemaMismatch, "point column '" + col.name + "' needs both lon and lat columns");
      }
      sources.push_back({column_at(*col.lon_column), column_at(*col.lat_column)});
    } else {
      sources.push_back({column_at(col.name), std::nullopt});
    }
  }

  std::vector<std::vector<Cell>> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t row = r - 1;
    if (rec.size() != records[0].size()) {
      throw CellTypeError(row, "", "record has " + std::to_string(rec.size()) + " fields, header has " +
                                       std::to_string(records[0].size()));
    }
    std::vector<Cell> cells;
    cells.reserve(specs.size());
    for (std::size_t c = 0; c < specs.size(); ++c) {
      const ColumnSpec& spec = specs[c];
      const std::string_view raw = rec[sources[c].a];
      const std::string_view cell = trim(raw);
      if (spec.kind == ColumnKind::Point) {
        std::string_view lon_text = cell;
        std::string_view lat_text;
        if (sources[c].b) {
          lat_text = trim(rec[*sources[c].b]);
        } else if (!cell.empty()) {
          auto sep = cell.find_first_of(" ,");
          if (sep == std::string_view::npos) throw CellTypeError(row, spec.name, "expected 'lon lat'");
          lon_text = cell.substr(0, sep);
          lat_text = trim(cell.substr(sep + 1));
        }
        if (lon_text.empty() && lat_text.empty()) {
          cells.emplace_back(std::monostate{});
          continue;
        }
        auto lon = parse_double(lon_text);
        auto lat = parse_double(lat_text);
        if (!lon || !lat) throw CellTypeError(row, spec.name, "unparseable coordinates");
        cells.emplace_back(GeoPoint{*lon, *lat});
        continue;
      }
      if (cell.empty()) {
        cells.emplace_back(std::monostate{});
        continue;
      }
      switch (spec.kind) {
        case ColumnKind::Number: {
          auto v = parse_double(cell);
          if (!v) throw CellTypeError(row, spec.name, "'" + std::string(cell) + "' is not a number");
          cells.emplace_back(*v);
          break;
        }
        case ColumnKind::Date: {
          auto d = parse_iso_date(cell);
          if (!d) throw CellTypeError(row, spec.name, "'" + std::string(cell) + "' is not an ISO-8601 date");
          cells.emplace_back(*d);
          break;
        }
        case ColumnKind::Text: cells.emplace_back(std::string(raw)); break;
        case ColumnKind::TagList: cells.emplace_back(std::string(cell)); break;
        case ColumnKind::Point: break;
      }
    }
    rows.push_back(std::move(cells));
  }
  return build_table(specs, rows, schema.key_column);
}

RecordTable load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  return parse_csv_table(read_file(path), schema);
}

// ------------------------------------------------------------ GeoJSON

FeatureSet parse_geometries(const json& doc, const std::string& key_property) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw Error(ErrorCode::UnsupportedGeometry, "expected a GeoJSON FeatureCollection");
  }
  FeatureSet set;
  set.key_property = key_property;
  std::size_t index = 0;
  for (const json& f : doc["features"]) {
    const std::string where = "feature " + std::to_string(index++);
    if (!f.is_object() || !f.contains("geometry") || !f["geometry"].is_object()) {
      throw Error(ErrorCode::UnsupportedGeometry, where + " has no geometry");
    }
    const json& g = f["geometry"];
    const std::string type = g.value("type", "");
    Feature feature;
    if (type == "Point") {
      feature.geometry = parse_position(g.at("coordinates"));
    } else if (type == "Polygon") {
      feature.geometry = MultiPolygon{{parse_polygon(g.at("coordinates"))}};
    } else if (type == "MultiPolygon") {
      MultiPolygon multi;
      for (const json& p : g.at("coordinates")) multi.polygons.push_back(parse_polygon(p));
      if (multi.polygons.empty()) throw Error(ErrorCode::InvalidGeometry, where + " multipolygon is empty");
      feature.geometry = std::move(multi);
    } else {
      throw Error(ErrorCode::UnsupportedGeometry, where + " has unsupported geometry type '" + type + "'");
    }
    feature.properties = f.value("properties", json::object());
    if (!feature.properties.is_object() || !feature.properties.contains(key_property) ||
        feature.properties[key_property].is_null()) {
      throw Error(ErrorCode::MissingKey, where + " lacks key property '" + key_property + "'");
    }
    feature.key = key_text(feature.properties[key_property]);
    set.features.push_back(std::move(feature));
  }
  return set;
}

FeatureSet load_geometries(const std::filesystem::path& path, const std::string& key_property) {
  const std::string text = read_file(path);
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::UnsupportedGeometry, "'" + path.string() + "' is not valid JSON");
  return parse_geometries(doc, key_property);
}

Geometry geometry_from_geojson(const json& g) {
  if (!g.is_object()) throw Error(ErrorCode::InvalidGeometry, "geometry must be an object");
  const std::string type = g.value("type", "");
  Geometry geom;
  if (type == "Polygon") {
    geom = parse_polygon(g.at("coordinates"));
  } else if (type == "MultiPolygon") {
    MultiPolygon multi;
    for (const json& p : g.at("coordinates")) multi.polygons.push_back(parse_polygon(p));
    geom = std::move(multi);
  } else if (type == "BBox") {
    const json& b = g.at("bbox");
    if (!b.is_array() || b.size() != 4) throw Error(ErrorCode::InvalidGeometry, "bbox must be [west, south, east, north]");
    geom = BBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
  } else if (type == "Circle") {
    if (!g.contains("radius") || !g["radius"].is_number()) {
      throw Error(ErrorCode::InvalidGeometry, "circle needs a numeric radius in meters");
    }
    geom = Circle{parse_position(g.at("center")), g["radius"].get<double>()};
  } else {
    throw Error(ErrorCode::UnsupportedGeometry, "unsupported selection geometry '" + type + "'");
  }
  validate(geom);
  return geom;
}

json geometry_to_geojson(const Geometry& geom) {
  return std::visit(
      [](const auto& g) -> json {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Polygon>) {
          return {{"type", "Polygon"}, {"coordinates", polygon_json(g)}};
        } else if constexpr (std::is_same_v<T, MultiPolygon>) {
          json polys = json::array();
          for (const Polygon& p : g.polygons) polys.push_back(polygon_json(p));
          return {{"type", "MultiPolygon"}, {"coordinates", polys}};
        } else if constexpr (std::is_same_v<T, BBox>) {
          return {{"type", "BBox"}, {"bbox", {g.west, g.south, g.east, g.north}}};
        } else {
          return {{"type", "Circle"}, {"center", position_json(g.center)}, {"radius", g.radius_m}};
        }
      },
      geom);
}

bool feature_contains(const Feature& feature, GeoPoint pt) {
  if (const auto* p = std::get_if<GeoPoint>(&feature.geometry)) return *p == pt;
  for (const Polygon& poly : std::get<MultiPolygon>(feature.geometry).polygons) {
    if (point_in_polygon(pt, poly)) return true;
  }
  return false;
}

// --------------------------------------------------------------- Join

JoinResult join_attributes(const RecordTable& table, const FeatureSet& features, std::string_view key_column) {
  const auto col = table.column_index(key_column);
  if (!col) throw Error(ErrorCode::UnknownColumn, "join column '" + std::string(key_column) + "' not in table");
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    if (table.column(*col).is_null(r)) continue;
    auto [it, inserted] = row_of.emplace(table.cell_text(r, *col), r);
    if (!inserted) throw Error(ErrorCode::DuplicateKey, "duplicate join key '" + it->first + "'");
  }
  JoinResult result;
  std::vector<std::uint8_t> matched(table.row_count(), 0);
  for (std::size_t i = 0; i < features.features.size(); ++i) {
    const Feature& f = features.features[i];
    auto it = row_of.find(f.key);
    if (it == row_of.end()) {
      result.features.push_back({i, std::nullopt});
      result.unmatched_features.push_back(f.key);
    } else {
      result.features.push_back({i, it->second});
      matched[it->second] = 1;
    }
  }
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    if (!matched[r]) result.unmatched_rows.push_back(table.key(r));
  }
  return result;
}

// ---------------------------------------------------------- Manifest

namespace {

constexpr std::pair<ViewKind, std::string_view> kViewKindNames[] = {
    {ViewKind::MarkerMap, "marker_map"},     {ViewKind::ChoroplethMap, "choropleth_map"},
    {ViewKind::PropSymbolMap, "prop_symbol_map"}, {ViewKind::SmallMultiples, "small_multiples"},
    {ViewKind::HeatmapLayer, "heatmap_layer"}, {ViewKind::Histogram, "histogram"},
    {ViewKind::Boxplot, "boxplot"},           {ViewKind::Scatter, "scatter"},
    {ViewKind::StackedBar, "stacked_bar"},    {ViewKind::Donut, "donut"},
    {ViewKind::RowChart, "row_chart"},        {ViewKind::BarChart, "bar_chart"},
    {ViewKind::SeriesChart, "series_chart"},  {ViewKind::RangeSlider, "range_slider"},
    {ViewKind::DateSlider, "date_slider"},    {ViewKind::SelectMenu, "select_menu"},
    {ViewKind::DataTable, "data_table"},      {ViewKind::StatusBar, "status_bar"},
};

}  // namespace

std::string_view to_string(ViewKind kind) {
  for (auto [k, name] : kViewKindNames) {
    if (k == kind) return name;
  }
  return "status_bar";
}

std::optional<ViewKind> parse_view_kind(std::string_view name) {
  for (auto [k, n] : kViewKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool is_map_kind(ViewKind kind) {
  return kind == ViewKind::MarkerMap || kind == ViewKind::ChoroplethMap || kind == ViewKind::PropSymbolMap ||
         kind == ViewKind::SmallMultiples || kind == ViewKind::HeatmapLayer;
}

const std::string* ViewSpec::binding(std::string_view role) const {
  auto it = bindings.find(std::string(role));
  return it == bindings.end() ? nullptr : &it->second;
}

json ValidationReport::to_json() const {
  auto list = [](const std::vector<Diagnostic>& items) {
    json out = json::array();
    for (const auto& d : items) out.push_back({{"where", d.where}, {"message", d.message}});
    return out;
  };
  return {{"ok", ok()}, {"errors", list(errors)}, {"warnings", list(warnings)}};
}

std::shared_ptr<const RecordTable> AppBundle::records() const {
  auto it = tables.find(records_source);
  return it == tables.end() ? nullptr : it->second;
}

const ViewSpec* AppBundle::find_view(std::string_view id) const {
  for (const auto& v : views) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

FileReader disk_reader(std::filesystem::path root) {
  return [root = std::move(root)](const std::filesystem::path& rel) { return read_file(root / rel); };
}

FileReader memory_reader(std::map<std::string, std::string> files) {
  return [files = std::move(files)](const std::filesystem::path& rel) {
    auto it = files.find(rel.generic_string());
    if (it == files.end()) throw Error(ErrorCode::IoError, "no file '" + rel.generic_string() + "' in bundle");
    return it->second;
  };
}

AppBundle bundle_from_manifest(const json& m, const std::filesystem::path& root, const FileReader& reader) {
  AppBundle b;
  b.root = root;
  auto err = [&](std::string where, std::string message) {
    b.load_errors.push_back({std::move(where), std::move(message)});
  };
  if (!m.is_object()) {
    err("manifest", "manifest must be a JSON object");
    return b;
  }
  b.name = m.value("name", "");

  const std::string layout = m.contains("layout") && m["layout"].is_string() ? m["layout"].get<std::string>() : "";
  if (layout == "single_map") b.layout = Layout::SingleMap;
  else if (layout == "multi_map_rows") b.layout = Layout::MultiMapRows;
  else err("layout", "layout must be 'single_map' or 'multi_map_rows'");

  for (const json& d : m.value("data", json::array())) {
    DataSource src;
    src.id = d.value("id", "");
    src.path = d.value("path", "");
    src.schema.key_column = d.value("key", "");
    const std::string where = "data[" + src.id + "]";
    for (const json& c : d.value("columns", json::array())) {
      CsvColumn col;
      col.name = c.value("name", "");
      auto kind = parse_column_kind(c.value("kind", ""));
      if (!kind) {
        err(where, "column '" + col.name + "' has unknown kind '" + c.value("kind", "") + "'");
        continue;
      }
      col.kind = *kind;
      if (c.contains("lon")) col.lon_column = c["lon"].get<std::string>();
      if (c.contains("lat")) col.lat_column = c["lat"].get<std::string>();
      src.schema.columns.push_back(std::move(col));
    }
    b.data_sources.push_back(std::move(src));
  }
  if (b.data_sources.empty()) err("data", "bundle declares no data sources");
  b.records_source = m.value("records", b.data_sources.empty() ? std::string{} : b.data_sources.front().id);

  for (const json& g : m.value("geometries", json::array())) {
    b.geometry_sources.push_back({g.value("id", ""), g.value("path", ""), g.value("key_property", "")});
  }
  for (const json& j : m.value("joins", json::array())) {
    b.joins.push_back({j.value("table", ""), j.value("features", ""), j.value("key", "")});
  }
  if (m.contains("palettes") && m["palettes"].is_object()) {
    for (const auto& [name, colors] : m["palettes"].items()) {
      std::vector<std::string> list;
      for (const json& c : colors) list.push_back(c.get<std::string>());
      b.palettes.emplace(name, std::move(list));
    }
  }
  for (const json& v : m.value("views", json::array())) {
    ViewSpec view;
    view.id = v.value("id", "");
    auto kind = parse_view_kind(v.value("kind", ""));
    if (!kind) {
      err("views[" + view.id + "]", "unknown view kind '" + v.value("kind", "") + "'");
      continue;
    }
    view.kind = *kind;
    if (v.contains("bindings") && v["bindings"].is_object()) {
      for (const auto& [role, target] : v["bindings"].items()) {
        if (target.is_string()) view.bindings.emplace(role, target.get<std::string>());
      }
    }
    view.options = v.value("options", json::object());
    b.views.push_back(std::move(view));
  }

  // Content: the manifest bytes plus every referenced file, in manifest order.
  std::string hash_input = m.dump();
  auto hash_file = [&](const std::filesystem::path& rel) {
    try {
      hash_input += "\n" + rel.generic_string() + "\n" + reader(rel);
    } catch (const Error&) {
    }
  };

  for (const DataSource& src : b.data_sources) {
    hash_file(src.path);
    try {
      b.tables.emplace(src.id, std::make_shared<const RecordTable>(parse_csv_table(reader(src.path), src.schema)));
    } catch (const Error& e) {
      err("data[" + src.id + "]", std::string(to_string(e.code())) + ": " + e.what());
    }
  }
  for (const GeometrySource& src : b.geometry_sources) {
    hash_file(src.path);
    try {
      json doc = json::parse(reader(src.path), nullptr, false);
      if (doc.is_discarded()) throw Error(ErrorCode::UnsupportedGeometry, "'" + src.path.string() + "' is not valid JSON");
      b.feature_sets.emplace(src.id, std::make_shared<const FeatureSet>(parse_geometries(doc, src.key_property)));
    } catch (const Error& e) {
      err("geometries[" + src.id + "]", std::string(to_string(e.code())) + ": " + e.what());
    } catch (const json::exception& e) {
      err("geometries[" + src.id + "]", std::string("InvalidGeometry: ") + e.what());
    }
  }
  for (const JoinSpec& j : b.joins) {
    auto t = b.tables.find(j.table);
    auto f = b.feature_sets.find(j.features);
    if (t == b.tables.end() || f == b.feature_sets.end()) continue;  // reported by validate
    try {
      b.join_results.emplace(j.table + "|" + j.features, join_attributes(*t->second, *f->second, j.key));
    } catch (const Error& e) {
      err("joins[" + j.table + "|" + j.features + "]", std::string(to_string(e.code())) + ": " + e.what());
    }
  }
  b.content_hash = sha256_hex(hash_input);
  return b;
}

AppBundle load_bundle(const std::filesystem::path& path) {
  std::filesystem::path manifest_path = path;
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) manifest_path = path / "app.config.json";
  const std::string text = read_file(manifest_path);
  json manifest = json::parse(text, nullptr, false);
  if (manifest.is_discarded()) throw Error(ErrorCode::IoError, "'" + manifest_path.string() + "' is not valid JSON");
  return bundle_from_manifest(manifest, manifest_path.parent_path(), disk_reader(manifest_path.parent_path()));
}

// --------------------------------------------------------- Validation

namespace {

enum Accept : unsigned {
  kNum = 1u << 0,
  kText = 1u << 1,
  kDate = 1u << 2,
  kPoint = 1u << 3,
  kTags = 1u << 4,
  kGeometry = 1u << 5,  // binding names a geometry source, not a column
};

struct RoleRule {
  std::string_view role;
  unsigned accept;
  bool required;
};

std::vector<RoleRule> role_rules(ViewKind kind) {
  switch (kind) {
    case ViewKind::MarkerMap: return {{"point", kPoint, true}};
    case ViewKind::ChoroplethMap: return {{"region", kText | kNum, true}, {"features", kGeometry, true}};
    case ViewKind::PropSymbolMap:
      return {{"region", kText | kNum, true}, {"value", kNum, true}, {"features", kGeometry, false}};
    case ViewKind::SmallMultiples: return {{"region", kText | kNum, true}, {"features", kGeometry, true}};
    case ViewKind::HeatmapLayer: return {{"point", kPoint, true}, {"weight", kNum, false}};
    case ViewKind::Histogram: return {{"value", kNum, true}};
    case ViewKind::Boxplot: return {{"value", kNum, true}, {"category", kText, false}};
    case ViewKind::Scatter: return {{"x", kNum, true}, {"y", kNum, true}};
    case ViewKind::StackedBar: return {{"primary", kText, true}, {"secondary", kText, true}};
    case ViewKind::Donut:
    case ViewKind::RowChart:
    case ViewKind::BarChart:
    case ViewKind::SelectMenu: return {{"dimension", kText | kTags | kNum | kDate, true}};
    case ViewKind::SeriesChart:
      return {{"date", kDate, true}, {"category", kText, true}, {"value", kNum, false}};
    case ViewKind::RangeSlider: return {{"value", kNum | kDate, true}};
    case ViewKind::DateSlider: return {{"date", kDate, true}};
    case ViewKind::DataTable:
    case ViewKind::StatusBar: return {};
  }
  return {};
}

unsigned accept_bit(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Number: return kNum;
    case ColumnKind::Text: return kText;
    case ColumnKind::Date: return kDate;
    case ColumnKind::Point: return kPoint;
    case ColumnKind::TagList: return kTags;
  }
  return 0;
}

}  // namespace

ValidationReport validate_bundle(const AppBundle& b) {
  ValidationReport report;
  report.errors = b.load_errors;
  auto error = [&](std::string where, std::string msg) { report.errors.push_back({std::move(where), std::move(msg)}); };
  auto warn = [&](std::string where, std::string msg) { report.warnings.push_back({std::move(where), std::move(msg)}); };

  std::set<std::string> source_ids;
  for (const DataSource& src : b.data_sources) {
    if (src.id.empty()) error("data", "data source without id");
    if (!source_ids.insert(src.id).second) error("data[" + src.id + "]", "duplicate data source id");
  }
  if (!b.data_sources.empty() && !source_ids.count(b.records_source)) {
    error("records", "records source '" + b.records_source + "' is not a declared data source");
  }

  for (const JoinSpec& j : b.joins) {
    const std::string where = "joins[" + j.table + "|" + j.features + "]";
    auto t = b.tables.find(j.table);
    bool known = true;
    if (!source_ids.count(j.table)) {
      error(where, "unknown table '" + j.table + "'");
      known = false;
    }
    if (std::none_of(b.geometry_sources.begin(), b.geometry_sources.end(),
                     [&](const GeometrySource& g) { return g.id == j.features; })) {
      error(where, "unknown geometry source '" + j.features + "'");
      known = false;
    }
    if (known && t != b.tables.end() && !t->second->column_index(j.key)) {
      error(where, "join key column '" + j.key + "' not in table '" + j.table + "'");
    }
    auto jr = b.join_results.find(j.table + "|" + j.features);
    if (jr != b.join_results.end()) {
      if (!jr->second.unmatched_features.empty()) {
        warn(where, std::to_string(jr->second.unmatched_features.size()) + " feature(s) without a matching row");
      }
      if (!jr->second.unmatched_rows.empty()) {
        warn(where, std::to_string(jr->second.unmatched_rows.size()) + " row(s) without a matching feature");
      }
    }
  }

  const auto records = b.records();
  auto column_kind = [&](const std::string& name) -> std::optional<ColumnKind> {
    if (!records) return std::nullopt;
    auto idx = records->column_index(name);
    if (!idx) return std::nullopt;
    return records->column(*idx).kind;
  };
  auto check_numeric_list = [&](const std::string& where, const json& list, std::string_view label) {
    std::size_t n = 0;
    if (list.is_array()) {
      for (const json& v : list) {
        if (!v.is_string()) {
          error(where, std::string(label) + " entries must be column names");
          continue;
        }
        ++n;
        if (records) {
          auto kind = column_kind(v.get<std::string>());
          if (!kind) error(where, std::string(label) + " column '" + v.get<std::string>() + "' does not exist");
          else if (*kind != ColumnKind::Number) error(where, std::string(label) + " column '" + v.get<std::string>() + "' is not numeric");
        }
      }
    }
    return n;
  };

  std::set<std::string> view_ids;
  for (const ViewSpec& v : b.views) {
    const std::string where = "views[" + v.id + "]";
    if (v.id.empty()) error(where, "view without id");
    if (!view_ids.insert(v.id).second) error(where, "duplicate view id");
    const auto rules = role_rules(v.kind);
    for (const RoleRule& rule : rules) {
      const std::string* target = v.binding(rule.role);
      if (!target) {
        if (rule.required) error(where, "missing binding '" + std::string(rule.role) + "'");
        continue;
      }
      if (rule.accept == kGeometry) {
        if (std::none_of(b.geometry_sources.begin(), b.geometry_sources.end(),
                         [&](const GeometrySource& g) { return g.id == *target; })) {
          error(where, "binding '" + std::string(rule.role) + "' names unknown geometry source '" + *target + "'");
        }
        continue;
      }
      if (!records) continue;
      auto kind = column_kind(*target);
      if (!kind) {
        error(where, "binding '" + std::string(rule.role) + "' names unknown column '" + *target + "'");
      } else if ((accept_bit(*kind) & rule.accept) == 0) {
        error(where, "binding '" + std::string(rule.role) + "' cannot use " + std::string(to_string(*kind)) +
                         " column '" + *target + "'");
      }
    }
    for (const auto& [role, target] : v.bindings) {
      if (std::none_of(rules.begin(), rules.end(), [&](const RoleRule& r) { return r.role == role; })) {
        warn(where, "binding '" + role + "' is not used by " + std::string(to_string(v.kind)));
      }
    }

    const json& o = v.options;
    if (!o.is_object()) {
      error(where, "options must be an object");
      continue;
    }
    switch (v.kind) {
      case ViewKind::ChoroplethMap:
      case ViewKind::SmallMultiples: {
        const std::size_t nvars = check_numeric_list(where, o.value("variables", json::array()), "variable");
        if (nvars == 0) error(where, "needs at least one variable in options.variables");
        if (o.contains("method") && !parse_class_method(o.value("method", ""))) {
          error(where, "unknown classification method '" + o.value("method", "") + "'");
        }
        const int k = o.value("k", 5);
        if (k < 2) error(where, "class count k must be >= 2");
        if (o.contains("palette")) {
          const std::string palette = o.value("palette", "");
          auto p = b.palettes.find(palette);
          if (p == b.palettes.end()) {
            error(where, "unknown palette '" + palette + "'");
          } else if (p->second.size() < static_cast<std::size_t>(std::max(k, 0))) {
            warn(where, "palette '" + palette + "' has " + std::to_string(p->second.size()) + " colors for " +
                            std::to_string(k) + " classes");
          }
        }
        if (v.kind == ViewKind::SmallMultiples) {
          const json projections = o.value("projections", json::array());
          if (!projections.is_array() || projections.empty()) {
            error(where, "needs at least one projection in options.projections");
          } else {
            for (const json& p : projections) {
              if (!p.is_string() || !projection_by_name(p.get<std::string>())) {
                error(where, "unknown projection " + p.dump());
              }
            }
          }
        } else if (o.contains("projection") &&
                   (!o["projection"].is_string() || !projection_by_name(o["projection"].get<std::string>()))) {
          error(where, "unknown projection " + o["projection"].dump());
        }
        break;
      }
      case ViewKind::HeatmapLayer: {
        const double cell = o.value("cell_size", 250.0);
        const double radius = o.value("radius", 750.0);
        if (!(cell > 0.0)) error(where, "cell_size must be positive");
        if (!(radius >= cell / 2.0)) error(where, "radius must be at least half of cell_size");
        if (o.contains("mode") && !parse_heat_mode(o.value("mode", ""))) error(where, "mode must be global or local");
        break;
      }
      case ViewKind::Histogram: {
        if (o.contains("bin_width") && !(o["bin_width"].is_number() && o["bin_width"].get<double>() > 0.0)) {
          error(where, "bin_width must be a positive number");
        }
        for (const json& w : o.value("bin_widths", json::array())) {
          if (!(w.is_number() && w.get<double>() > 0.0)) error(where, "bin_widths entries must be positive numbers");
        }
        break;
      }
      case ViewKind::Scatter: check_numeric_list(where, o.value("columns", json::array()), "axis"); break;
      case ViewKind::SeriesChart: {
        if (o.contains("granularity") && !parse_granularity(o.value("granularity", ""))) {
          error(where, "granularity must be year, month or day");
        }
        const std::string reduction = o.value("reduction", v.binding("value") ? "mean" : "count");
        if (!parse_series_reduction(reduction)) error(where, "reduction must be mean or count");
        else if (reduction == "mean" && !v.binding("value")) error(where, "mean reduction needs a value binding");
        break;
      }
      case ViewKind::DateSlider:
        if (o.contains("granularity") && !parse_granularity(o.value("granularity", ""))) {
          error(where, "granularity must be year, month or day");
        }
        break;
      case ViewKind::MarkerMap: {
        const int zoom = o.value("zoom", 12);
        if (zoom < 0 || zoom > 22) error(where, "zoom must be within [0, 22]");
        if (!(o.value("radius_px", 80.0) > 0.0)) error(where, "radius_px must be positive");
        break;
      }
      default: break;
    }
  }
  return report;
}

}  // namespace coordlens
