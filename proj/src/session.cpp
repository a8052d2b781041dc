#include "coordlens/session.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "coordlens/classify.hpp"
#include "coordlens/cluster.hpp"
#include "coordlens/codec.hpp"
#include "coordlens/stats.hpp"

namespace coordlens {

using nlohmann::json;

namespace {

constexpr std::string_view kSnapshotFormat = "coordlens-snapshot/1";
constexpr std::string_view kKeyFilterSlot = "#key";
constexpr std::size_t kMaxListedMembers = 50;

std::string thousands(std::size_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

std::string validation_message(const ValidationReport& report) {
  std::string msg = "bundle has " + std::to_string(report.errors.size()) + " error(s)";
  if (!report.errors.empty()) msg += ": " + report.errors.front().where + ": " + report.errors.front().message;
  return msg;
}

[[noreturn]] void kind_mismatch(const ViewSpec& view, std::string_view command) {
  throw Error(ErrorCode::KindMismatch,
              std::string(command) + " does not apply to " + std::string(to_string(view.kind)) + " view '" + view.id + "'");
}

json project_ring(const ProjectionSpec& proj, const Ring& ring) {
  json out = json::array();
  for (const GeoPoint& p : ring) {
    const ProjectedPoint q = project_forward(proj, p);
    out.push_back(json::array({q.x, q.y}));
  }
  return out;
}

json project_features(const ProjectionSpec& proj, const FeatureSet& features) {
  json out = json::array();
  for (const Feature& f : features.features) {
    json entry = {{"key", f.key}};
    if (const auto* pt = std::get_if<GeoPoint>(&f.geometry)) {
      const ProjectedPoint q = project_forward(proj, *pt);
      entry["type"] = "Point";
      entry["coordinates"] = json::array({q.x, q.y});
    } else {
      const auto& mp = std::get<MultiPolygon>(f.geometry);
      json polys = json::array();
      for (const Polygon& poly : mp.polygons) {
        json rings = json::array();
        for (const Ring& ring : poly.rings) rings.push_back(project_ring(proj, ring));
        polys.push_back(std::move(rings));
      }
      entry["type"] = "MultiPolygon";
      entry["coordinates"] = std::move(polys);
    }
    out.push_back(std::move(entry));
  }
  return out;
}

GeoPoint feature_anchor(const Feature& f) {
  if (const auto* pt = std::get_if<GeoPoint>(&f.geometry)) return *pt;
  BBox box{INFINITY, INFINITY, -INFINITY, -INFINITY};
  for (const Polygon& poly : std::get<MultiPolygon>(f.geometry).polygons) {
    const BBox b = envelope(poly);
    box = {std::min(box.west, b.west), std::min(box.south, b.south), std::max(box.east, b.east),
           std::max(box.north, b.north)};
  }
  return {(box.west + box.east) / 2.0, (box.south + box.north) / 2.0};
}

}  // namespace

BundleInvalidError::BundleInvalidError(ValidationReport report)
    : Error(ErrorCode::BundleInvalid, validation_message(report)), report_(std::move(report)) {}

bool is_state_changing(const Command& cmd) {
  return !(std::holds_alternative<command::QueryView>(cmd) || std::holds_alternative<command::QueryTable>(cmd) ||
           std::holds_alternative<command::QueryHeatmap>(cmd) || std::holds_alternative<command::QueryStatus>(cmd));
}

struct ViewState {
  const ViewSpec* spec = nullptr;
  std::optional<DimensionId> dim;
  std::optional<GroupId> group;

  // thematic maps
  std::string variable;
  std::vector<std::string> variables;
  ClassMethod method = ClassMethod::Quantile;
  std::size_t k = 5;
  bool aggregate_sum = false;
  std::optional<ProjectionSpec> projection;
  std::vector<ProjectionSpec> projections;
  bool facet_projection = false;
  json breaks;  // per variable name for small multiples
  double max_radius = 30.0;

  // histogram
  double bin_width = 1.0;
  double origin = 0.0;

  // scatter
  std::string x;
  std::string y;

  // heatmap
  double cell_size = 250.0;
  double kernel_radius = 750.0;
  HeatMode mode = HeatMode::Local;
  json global_grid;

  // marker map
  int zoom = 12;
  double radius_px = 80.0;

  TimeGranularity granularity = TimeGranularity::Month;
  SeriesReduction reduction = SeriesReduction::Count;
  std::size_t page_size = 25;
  json domain;

  std::string pushed;
};

struct Session::Impl {
  std::shared_ptr<const AppBundle> bundle;
  std::shared_ptr<const RecordTable> table;
  Crossfilter cf;
  DimensionId key_dim;
  std::vector<ViewState> views;
  std::map<std::string, std::size_t, std::less<>> by_id;
  std::uint64_t revision = 0;

  // region column -> sorted distinct region keys, and per-row index into it
  struct RegionIndex {
    std::vector<std::string> keys;
    std::vector<std::int64_t> row_region;
  };
  std::map<std::string, RegionIndex> regions;
  mutable std::map<std::string, json> projected_cache;

  Impl(std::shared_ptr<const AppBundle> b, std::shared_ptr<const RecordTable> t)
      : bundle(std::move(b)), table(std::move(t)), cf(table), key_dim(cf.key_dimension()) {}

  // ------------------------------------------------------------ setup

  const Column* column_or_null(const std::string* name) const {
    if (!name) return nullptr;
    auto idx = table->column_index(*name);
    return idx ? &table->column(*idx) : nullptr;
  }

  const RegionIndex& region_index(const std::string& column) {
    auto it = regions.find(column);
    if (it != regions.end()) return it->second;
    const std::size_t col = *table->column_index(column);
    RegionIndex idx;
    std::set<std::string> distinct;
    for (std::size_t r = 0; r < table->row_count(); ++r) {
      if (!table->column(col).is_null(r)) distinct.insert(table->cell_text(r, col));
    }
    idx.keys.assign(distinct.begin(), distinct.end());
    idx.row_region.assign(table->row_count(), -1);
    for (std::size_t r = 0; r < table->row_count(); ++r) {
      if (table->column(col).is_null(r)) continue;
      auto pos = std::lower_bound(idx.keys.begin(), idx.keys.end(), table->cell_text(r, col));
      idx.row_region[r] = pos - idx.keys.begin();
    }
    return regions.emplace(column, std::move(idx)).first->second;
  }

  const FeatureSet* features_of(const ViewSpec& spec) const {
    const std::string* id = spec.binding("features");
    if (!id) return nullptr;
    auto it = bundle->feature_sets.find(*id);
    return it == bundle->feature_sets.end() ? nullptr : it->second.get();
  }

  std::pair<double, double> numeric_domain(const std::string& column) const {
    const Column& c = table->column(column);
    double lo = INFINITY;
    double hi = -INFINITY;
    for (std::size_t r = 0; r < table->row_count(); ++r) {
      if (c.is_null(r) || !std::isfinite(c.numbers[r])) continue;
      lo = std::min(lo, c.numbers[r]);
      hi = std::max(hi, c.numbers[r]);
    }
    return {lo, hi};
  }

  json domain_json(const std::string& column) const {
    auto [lo, hi] = numeric_domain(column);
    if (!(lo <= hi)) return nullptr;
    if (table->column(column).kind == ColumnKind::Date) {
      return json::array({format_iso_date(Date{static_cast<std::int32_t>(lo)}),
                          format_iso_date(Date{static_cast<std::int32_t>(hi)})});
    }
    return json::array({lo, hi});
  }

  void build_view(const ViewSpec& spec) {
    ViewState v;
    v.spec = &spec;
    const json& o = spec.options;
    auto bound = [&](std::string_view role) { return spec.binding(role); };
    switch (spec.kind) {
      case ViewKind::MarkerMap:
        v.dim = cf.create_dimension(*bound("point"), DimensionKind::Point);
        v.zoom = o.value("zoom", 12);
        v.radius_px = o.value("radius_px", 80.0);
        break;
      case ViewKind::HeatmapLayer:
        v.dim = cf.create_dimension(*bound("point"), DimensionKind::Point);
        v.cell_size = o.value("cell_size", 250.0);
        v.kernel_radius = o.value("radius", 750.0);
        v.mode = parse_heat_mode(o.value("mode", "local")).value_or(HeatMode::Local);
        v.global_grid = heat_payload(v, HeatMode::Global);
        break;
      case ViewKind::ChoroplethMap:
      case ViewKind::SmallMultiples: {
        v.dim = cf.create_dimension(*bound("region"), DimensionKind::Categorical);
        region_index(*bound("region"));
        for (const json& name : o.value("variables", json::array())) v.variables.push_back(name.get<std::string>());
        v.variable = v.variables.front();
        v.method = parse_class_method(o.value("method", "quantile")).value_or(ClassMethod::Quantile);
        v.k = static_cast<std::size_t>(o.value("k", 5));
        v.aggregate_sum = o.value("aggregate", "mean") == "sum";
        if (spec.kind == ViewKind::ChoroplethMap) {
          if (o.contains("projection")) v.projection = projection_by_name(o["projection"].get<std::string>());
          v.breaks = breaks_json(v, v.variable);
        } else {
          for (const json& p : o.value("projections", json::array())) {
            v.projections.push_back(*projection_by_name(p.get<std::string>()));
          }
          v.projection = v.projections.front();
          v.facet_projection = o.value("facet", "variable") == "projection";
          v.breaks = json::object();
          for (const std::string& name : v.variables) v.breaks[name] = breaks_json(v, name);
        }
        break;
      }
      case ViewKind::PropSymbolMap:
        v.dim = cf.create_dimension(*bound("region"), DimensionKind::Categorical);
        v.variable = *bound("value");
        v.group = cf.create_group(*v.dim, Binning::identity(), Reduction::sum(v.variable));
        v.max_radius = o.value("max_radius", 30.0);
        if (o.contains("projection") && o["projection"].is_string()) {
          v.projection = projection_by_name(o["projection"].get<std::string>());
        }
        break;
      case ViewKind::Histogram: {
        v.variable = *bound("value");
        v.dim = cf.create_dimension(v.variable, DimensionKind::Scalar);
        v.origin = o.value("origin", 0.0);
        if (o.contains("bin_width")) {
          v.bin_width = o["bin_width"].get<double>();
        } else if (o.contains("bin_widths") && !o["bin_widths"].empty()) {
          v.bin_width = o["bin_widths"][0].get<double>();
        } else {
          auto [lo, hi] = numeric_domain(v.variable);
          v.bin_width = (lo < hi) ? (hi - lo) / 10.0 : 1.0;
        }
        v.group = cf.create_group(*v.dim, Binning::fixed_width(v.origin, v.bin_width), Reduction::count());
        break;
      }
      case ViewKind::Boxplot: break;
      case ViewKind::Scatter: {
        v.dim = cf.create_dimension(table->column(table->key_column()).name, DimensionKind::Categorical);
        v.x = *bound("x");
        v.y = *bound("y");
        break;
      }
      case ViewKind::StackedBar:
        v.dim = cf.create_dimension(*bound("primary"), DimensionKind::Categorical);
        break;
      case ViewKind::Donut:
      case ViewKind::RowChart:
      case ViewKind::BarChart:
      case ViewKind::SelectMenu: {
        const std::string& col = *bound("dimension");
        const DimensionKind kind =
            table->column(col).kind == ColumnKind::TagList ? DimensionKind::Tag : DimensionKind::Categorical;
        v.dim = cf.create_dimension(col, kind);
        v.group = cf.create_group(*v.dim, Binning::identity(), Reduction::count());
        break;
      }
      case ViewKind::SeriesChart:
        v.dim = cf.create_dimension(*bound("date"), DimensionKind::Scalar);
        v.granularity = parse_granularity(o.value("granularity", "month")).value_or(TimeGranularity::Month);
        v.reduction = parse_series_reduction(o.value("reduction", bound("value") ? "mean" : "count"))
                          .value_or(SeriesReduction::Count);
        break;
      case ViewKind::RangeSlider:
        v.dim = cf.create_dimension(*bound("value"), DimensionKind::Scalar);
        v.domain = domain_json(*bound("value"));
        break;
      case ViewKind::DateSlider:
        v.dim = cf.create_dimension(*bound("date"), DimensionKind::Scalar);
        v.granularity = parse_granularity(o.value("granularity", "month")).value_or(TimeGranularity::Month);
        v.group = cf.create_group(*v.dim, Binning::time_bucket(v.granularity), Reduction::count());
        v.domain = domain_json(*bound("date"));
        break;
      case ViewKind::DataTable: v.page_size = static_cast<std::size_t>(o.value("page_size", 25)); break;
      case ViewKind::StatusBar: break;
    }
    by_id.emplace(spec.id, views.size());
    views.push_back(std::move(v));
  }

  // ---------------------------------------------------------- payloads

  /// Per-region value of `variable` over rows passing every filter except
  /// `exclude`; nullopt where a region has no contributing value.
  std::vector<std::optional<double>> region_values(const ViewState& v, const std::string& variable,
                                                   std::span<const DimensionId> exclude,
                                                   bool unfiltered) const {
    const RegionIndex& idx = regions.at(*v.spec->binding("region"));
    std::vector<double> sum(idx.keys.size(), 0.0);
    std::vector<std::size_t> count(idx.keys.size(), 0);
    auto add = [&](std::size_t row, double value) {
      const std::int64_t reg = idx.row_region[row];
      if (reg < 0) return;
      sum[reg] += value;
      ++count[reg];
    };
    if (unfiltered) {
      const Column& c = table->column(variable);
      for (std::size_t r = 0; r < table->row_count(); ++r) {
        if (!c.is_null(r) && std::isfinite(c.numbers[r])) add(r, c.numbers[r]);
      }
    } else {
      for (const ValueEntry& e : cf.values_for(variable, exclude)) {
        if (std::isfinite(e.value)) add(e.row, e.value);
      }
    }
    std::vector<std::optional<double>> out(idx.keys.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (count[i] > 0) out[i] = v.aggregate_sum ? sum[i] : sum[i] / static_cast<double>(count[i]);
    }
    return out;
  }

  ClassBreaks compute_breaks(const ViewState& v, const std::string& variable) const {
    std::vector<double> values;
    for (const auto& value : region_values(v, variable, {}, true)) {
      if (value) values.push_back(*value);
    }
    return classify(values, v.method, v.k);
  }

  json breaks_json(const ViewState& v, const std::string& variable) const {
    try {
      return codec::to_json(compute_breaks(v, variable));
    } catch (const Error& e) {
      return {{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}};
    }
  }

  json regions_json(const ViewState& v, const std::string& variable, const json& breaks) const {
    const RegionIndex& idx = regions.at(*v.spec->binding("region"));
    const DimensionId own[] = {*v.dim};
    const auto values = region_values(v, variable, own, false);
    std::vector<double> edges;
    if (breaks.contains("breaks")) edges = breaks["breaks"].get<std::vector<double>>();
    std::vector<std::uint8_t> selected(idx.keys.size(), 0);
    for (std::size_t r = 0; r < table->row_count(); ++r) {
      if (idx.row_region[r] >= 0 && cf.is_selected(r)) selected[idx.row_region[r]] = 1;
    }
    json out = json::array();
    for (std::size_t i = 0; i < idx.keys.size(); ++i) {
      json entry = {{"key", idx.keys[i]}, {"selected", selected[i] != 0}};
      if (values[i]) {
        entry["value"] = *values[i];
        auto cls = edges.empty() ? std::nullopt : assign_class(*values[i], edges);
        entry["class"] = cls ? json(*cls) : json(nullptr);
      } else {
        entry["value"] = nullptr;
        entry["class"] = nullptr;
      }
      out.push_back(std::move(entry));
    }
    return out;
  }

  json projected(const ViewState& v, const ProjectionSpec& proj) const {
    const FeatureSet* fs = features_of(*v.spec);
    if (!fs) return nullptr;
    const std::string cache_key = *v.spec->binding("features") + "|" + codec::dump(codec::to_json(proj));
    auto it = projected_cache.find(cache_key);
    if (it == projected_cache.end()) it = projected_cache.emplace(cache_key, project_features(proj, *fs)).first;
    return it->second;
  }

  json palette_json(const ViewState& v) const {
    const std::string name = v.spec->options.value("palette", "");
    auto it = bundle->palettes.find(name);
    json out = {{"name", name}, {"colors", json::array()}};
    if (it != bundle->palettes.end()) out["colors"] = it->second;
    return out;
  }

  json filter_json(const ViewState& v) const { return v.dim ? codec::to_json(cf.filter(*v.dim)) : json(nullptr); }

  json group_bins(const ViewState& v) const { return codec::to_json(cf.read_group(*v.group)); }

  std::vector<std::size_t> rows_except_own(const ViewState& v) const {
    if (!v.dim) return cf.selected_rows();
    const DimensionId own[] = {*v.dim};
    return cf.selected_rows(own);
  }

  json heat_payload(const ViewState& v, HeatMode mode) const {
    const Column& pts = table->column(*v.spec->binding("point"));
    const Column* weight = column_or_null(v.spec->binding("weight"));
    std::vector<WeightedPoint> points;
    auto add = [&](std::size_t r) {
      if (pts.is_null(r)) return;
      double w = 1.0;
      if (weight) {
        if (weight->is_null(r)) return;
        w = weight->numbers[r];
      }
      points.push_back({pts.points[r], w});
    };
    if (mode == HeatMode::Global) {
      for (std::size_t r = 0; r < table->row_count(); ++r) add(r);
    } else {
      for (std::size_t r : cf.selected_rows()) add(r);
    }
    json grid = codec::to_json(heat_grid(points, v.cell_size, v.kernel_radius, mode));
    grid["kernel_radius"] = v.kernel_radius;
    return grid;
  }

  json marker_payload(const ViewState& v) const {
    const Column& pts = table->column(*v.spec->binding("point"));
    std::vector<KeyedPoint> points;
    for (std::size_t r : rows_except_own(v)) {
      if (!pts.is_null(r)) points.push_back({table->key(r), pts.points[r]});
    }
    const ClusterResult result = cluster(points, v.zoom, v.radius_px);
    json clusters = json::array();
    for (const MarkerCluster& c : result.clusters) {
      json entry = {{"lon", c.centroid.lon}, {"lat", c.centroid.lat}, {"count", c.members.size()}};
      if (c.members.size() <= kMaxListedMembers) {
        entry["members"] = c.members;
        bool coincident = c.members.size() >= 2;
        const GeoPoint first = pts.points[*table->find_row(c.members.front())];
        for (const std::string& key : c.members) {
          const GeoPoint p = pts.points[*table->find_row(key)];
          if (p.lon != first.lon || p.lat != first.lat) {
            coincident = false;
            break;
          }
        }
        if (coincident) {
          json legs = json::array();
          for (const SpiderLeg& leg : spiderfy(c.members)) legs.push_back(json::array({leg.key, leg.dx, leg.dy}));
          entry["spider"] = std::move(legs);
        }
      }
      clusters.push_back(std::move(entry));
    }
    json selection = nullptr;
    if (const auto* sp = std::get_if<SpatialFilter>(&cf.filter(*v.dim))) selection = geometry_to_geojson(sp->geometry);
    return {{"zoom", v.zoom}, {"radius_px", v.radius_px}, {"clusters", std::move(clusters)},
            {"selection", std::move(selection)}};
  }

  json choropleth_payload(const ViewState& v) const {
    json p = {{"variable", v.variable},
              {"method", to_string(v.method)},
              {"k", v.k},
              {"legend", v.breaks},
              {"palette", palette_json(v)},
              {"regions", regions_json(v, v.variable, v.breaks)},
              {"filter", filter_json(v)}};
    p["projection"] = v.projection ? codec::to_json(*v.projection) : json(nullptr);
    p["features"] = v.projection ? projected(v, *v.projection) : json(nullptr);
    return p;
  }

  json small_multiples_payload(const ViewState& v) const {
    json panels = json::array();
    auto panel = [&](const std::string& variable, const ProjectionSpec& proj) {
      const json& breaks = v.breaks[variable];
      return json{{"variable", variable},
                  {"projection", codec::to_json(proj)},
                  {"legend", breaks},
                  {"regions", regions_json(v, variable, breaks)},
                  {"features", projected(v, proj)}};
    };
    if (v.facet_projection) {
      for (const ProjectionSpec& proj : v.projections) panels.push_back(panel(v.variable, proj));
    } else {
      for (const std::string& variable : v.variables) panels.push_back(panel(variable, *v.projection));
    }
    return {{"facet", v.facet_projection ? "projection" : "variable"},
            {"variable", v.variable},
            {"projection", codec::to_json(*v.projection)},
            {"method", to_string(v.method)},
            {"k", v.k},
            {"palette", palette_json(v)},
            {"panels", std::move(panels)},
            {"filter", filter_json(v)}};
  }

  json prop_symbol_payload(const ViewState& v) const {
    const GroupResult g = cf.read_group(*v.group);
    double vmax = 0.0;
    for (const Bin& b : g.bins) vmax = std::max(vmax, b.value);
    std::unordered_map<std::string, const Feature*> by_key;
    if (const FeatureSet* fs = features_of(*v.spec)) {
      for (const Feature& f : fs->features) by_key.emplace(f.key, &f);
    }
    json symbols = json::array();
    for (const Bin& b : g.bins) {
      const std::string key = std::holds_alternative<std::string>(b.key) ? std::get<std::string>(b.key)
                                                                          : format_number(std::get<double>(b.key));
      const double radius = (vmax > 0.0 && b.value > 0.0) ? v.max_radius * std::sqrt(b.value / vmax) : 0.0;
      json entry = {{"key", key}, {"value", b.value}, {"radius", radius}};
      auto f = by_key.find(key);
      if (f != by_key.end()) {
        const GeoPoint anchor = feature_anchor(*f->second);
        entry["lon"] = anchor.lon;
        entry["lat"] = anchor.lat;
        if (v.projection) {
          const ProjectedPoint q = project_forward(*v.projection, anchor);
          entry["x"] = q.x;
          entry["y"] = q.y;
        }
      }
      symbols.push_back(std::move(entry));
    }
    return {{"value", v.variable},
            {"max_radius", v.max_radius},
            {"projection", v.projection ? codec::to_json(*v.projection) : json(nullptr)},
            {"symbols", std::move(symbols)},
            {"filter", filter_json(v)}};
  }

  json histogram_payload(const ViewState& v) const {
    json widths = v.spec->options.value("bin_widths", json::array());
    return {{"value", v.variable}, {"origin", v.origin},    {"bin_width", v.bin_width},
            {"bin_widths", widths}, {"bins", group_bins(v)}, {"filter", filter_json(v)}};
  }

  json boxplot_payload(const ViewState& v) const {
    const Column& value = table->column(*v.spec->binding("value"));
    const Column* category = column_or_null(v.spec->binding("category"));
    std::map<std::string, std::vector<double>> samples;
    for (std::size_t r : cf.selected_rows()) {
      if (value.is_null(r) || !std::isfinite(value.numbers[r])) continue;
      std::string cat = "all";
      if (category) cat = category->is_null(r) ? std::string(kMissingBin) : category->texts[r];
      samples[cat].push_back(value.numbers[r]);
    }
    json groups = json::array();
    for (const auto& [cat, vals] : samples) {
      groups.push_back({{"category", cat}, {"n", vals.size()}, {"stats", codec::to_json(boxplot_stats(vals))}});
    }
    return {{"value", value.name}, {"category", category ? json(category->name) : json(nullptr)},
            {"groups", std::move(groups)}};
  }

  json scatter_payload(const ViewState& v) const {
    const Column& xc = table->column(v.x);
    const Column& yc = table->column(v.y);
    json points = json::array();
    std::vector<XY> fit_points;
    for (std::size_t r : rows_except_own(v)) {
      if (xc.is_null(r) || yc.is_null(r)) continue;
      const bool sel = cf.is_selected(r);
      points.push_back(json::array({table->key(r), xc.numbers[r], yc.numbers[r], sel}));
      fit_points.push_back({xc.numbers[r], yc.numbers[r]});
    }
    json fit = nullptr;
    try {
      fit = codec::to_json(linear_regression(fit_points));
    } catch (const Error&) {
    }
    json columns = v.spec->options.value("columns", json::array());
    return {{"x", v.x}, {"y", v.y}, {"columns", columns}, {"points", std::move(points)}, {"fit", std::move(fit)},
            {"filter", filter_json(v)}};
  }

  json stacked_payload(const ViewState& v) const {
    const Column& pc = table->column(*v.spec->binding("primary"));
    const Column& sc = table->column(*v.spec->binding("secondary"));
    std::vector<std::string> primary;
    std::vector<std::string> secondary;
    for (std::size_t r : rows_except_own(v)) {
      primary.push_back(pc.is_null(r) ? std::string(kMissingBin) : pc.texts[r]);
      secondary.push_back(sc.is_null(r) ? std::string(kMissingBin) : sc.texts[r]);
    }
    json stacks = json::array();
    for (const auto& [p, segs] : stacked_aggregate(primary, secondary)) {
      json segments = json::array();
      for (const auto& [s, n] : segs) segments.push_back(json::array({s, n}));
      stacks.push_back({{"primary", p}, {"segments", std::move(segments)}});
    }
    return {{"primary", pc.name}, {"secondary", sc.name}, {"stacks", std::move(stacks)}, {"filter", filter_json(v)}};
  }

  json series_payload(const ViewState& v) const {
    const Column& dc = table->column(*v.spec->binding("date"));
    const Column& cc = table->column(*v.spec->binding("category"));
    const Column* vc = column_or_null(v.spec->binding("value"));
    std::vector<SeriesSample> samples;
    for (std::size_t r : rows_except_own(v)) {
      if (dc.is_null(r)) continue;
      SeriesSample s;
      s.bucket = bucket_key(Date{static_cast<std::int32_t>(dc.numbers[r])}, v.granularity);
      s.category = cc.is_null(r) ? std::string(kMissingBin) : cc.texts[r];
      s.value = (vc && !vc->is_null(r)) ? vc->numbers[r] : (vc ? NAN : 1.0);
      samples.push_back(std::move(s));
    }
    json series = json::object();
    for (const auto& [cat, points] : series_aggregate(samples, v.reduction)) {
      json list = json::array();
      for (const auto& [bucket, value] : points) list.push_back(json::array({bucket, value}));
      series[cat] = std::move(list);
    }
    return {{"granularity", to_string(v.granularity)},
            {"reduction", v.reduction == SeriesReduction::Mean ? "mean" : "count"},
            {"series", std::move(series)},
            {"filter", filter_json(v)}};
  }

  json table_page(const RecordsQuery& query) const {
    const RecordsPage page = cf.records_view(query);
    json columns = json::array();
    for (const Column& c : table->columns()) columns.push_back(c.name);
    json rows = json::array();
    for (std::size_t r : page.rows) {
      json row = json::array();
      for (std::size_t c = 0; c < table->column_count(); ++c) {
        if (table->column(c).is_null(r)) row.push_back(nullptr);
        else row.push_back(table->cell_text(r, c));
      }
      rows.push_back(std::move(row));
    }
    json key_filter = codec::to_json(cf.filter(key_dim));
    json p = {{"columns", std::move(columns)},  {"rows", std::move(rows)}, {"total_matching", page.total_matching},
              {"offset", query.offset},          {"limit", query.limit},   {"search", query.search},
              {"highlight", key_filter}};
    p["sort"] = query.sort ? json{{"column", query.sort->column}, {"order", query.sort->ascending ? "asc" : "desc"}}
                           : json(nullptr);
    return p;
  }

  json payload(const ViewState& v) const {
    try {
      switch (v.spec->kind) {
        case ViewKind::MarkerMap: return marker_payload(v);
        case ViewKind::HeatmapLayer:
          return v.mode == HeatMode::Global ? v.global_grid : heat_payload(v, HeatMode::Local);
        case ViewKind::ChoroplethMap: return choropleth_payload(v);
        case ViewKind::SmallMultiples: return small_multiples_payload(v);
        case ViewKind::PropSymbolMap: return prop_symbol_payload(v);
        case ViewKind::Histogram: return histogram_payload(v);
        case ViewKind::Boxplot: return boxplot_payload(v);
        case ViewKind::Scatter: return scatter_payload(v);
        case ViewKind::StackedBar: return stacked_payload(v);
        case ViewKind::Donut:
        case ViewKind::RowChart:
        case ViewKind::BarChart:
        case ViewKind::SelectMenu:
          return {{"column", *v.spec->binding("dimension")}, {"bins", group_bins(v)}, {"filter", filter_json(v)}};
        case ViewKind::SeriesChart: return series_payload(v);
        case ViewKind::RangeSlider: return {{"domain", v.domain}, {"filter", filter_json(v)}};
        case ViewKind::DateSlider:
          return {{"granularity", to_string(v.granularity)},
                  {"domain", v.domain},
                  {"bins", group_bins(v)},
                  {"filter", filter_json(v)}};
        case ViewKind::DataTable: {
          RecordsQuery q;
          q.limit = v.page_size;
          return table_page(q);
        }
        case ViewKind::StatusBar: {
          auto [sel, total] = cf.selected_count();
          return {{"selected", sel},
                  {"total", total},
                  {"text", thousands(sel) + " selected out of " + thousands(total) + " records"}};
        }
      }
    } catch (const Error& e) {
      return {{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}};
    }
    return nullptr;
  }

  ViewUpdate view_update(const ViewState& v, json p) const {
    return ViewUpdate{revision, v.spec->id, v.spec->kind, std::move(p)};
  }

  StatusUpdate status() const {
    auto [sel, total] = cf.selected_count();
    return StatusUpdate{revision, sel, total};
  }

  void refresh_cache() {
    for (ViewState& v : views) v.pushed = codec::dump(payload(v));
  }

  std::vector<Notification> emit_changes() {
    std::vector<Notification> out{status()};
    for (ViewState& v : views) {
      json p = payload(v);
      std::string text = codec::dump(p);
      if (text == v.pushed) continue;
      v.pushed = std::move(text);
      out.push_back(view_update(v, std::move(p)));
    }
    return out;
  }

  // ---------------------------------------------------------- commands

  ViewState& view(const std::string& id) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorCode::UnknownView, "unknown view '" + id + "'");
    return views[it->second];
  }
  const ViewState& view(const std::string& id) const { return const_cast<Impl*>(this)->view(id); }

  DimensionId filter_dim(const ViewState& v, std::string_view command) const {
    if (!v.dim) kind_mismatch(*v.spec, command);
    return *v.dim;
  }

  ViewState& point_map(const std::string& id, std::string_view command) {
    ViewState& v = view(id);
    if (v.spec->kind != ViewKind::MarkerMap && v.spec->kind != ViewKind::HeatmapLayer) kind_mismatch(*v.spec, command);
    return v;
  }

  const Column& numeric_column(const std::string& name) const {
    const Column& c = table->column(name);
    if (c.kind != ColumnKind::Number) {
      throw Error(ErrorCode::KindMismatch, "column '" + name + "' is not numeric");
    }
    return c;
  }

  void set_variable(ViewState& v, const std::string& column) {
    numeric_column(column);
    switch (v.spec->kind) {
      case ViewKind::ChoroplethMap: {
        const json breaks = codec::to_json(compute_breaks(v, column));
        v.variable = column;
        v.breaks = breaks;
        break;
      }
      case ViewKind::SmallMultiples:
        if (!v.breaks.contains(column)) {
          v.breaks[column] = codec::to_json(compute_breaks(v, column));
          v.variables.push_back(column);
        }
        v.variable = column;
        break;
      case ViewKind::PropSymbolMap: {
        const GroupId g = cf.create_group(*v.dim, Binning::identity(), Reduction::sum(column));
        cf.dispose_group(*v.group);
        v.group = g;
        v.variable = column;
        break;
      }
      default: kind_mismatch(*v.spec, "SetVariable");
    }
  }

  void set_projection(ViewState& v, const ProjectionSpec& proj) {
    switch (v.spec->kind) {
      case ViewKind::ChoroplethMap:
      case ViewKind::PropSymbolMap:
      case ViewKind::SmallMultiples: break;
      default: kind_mismatch(*v.spec, "SetProjection");
    }
    validate(proj);
    if (const FeatureSet* fs = features_of(*v.spec)) {
      for (const Feature& f : fs->features) {
        if (const auto* pt = std::get_if<GeoPoint>(&f.geometry)) {
          project_forward(proj, *pt);
        } else {
          for (const Polygon& poly : std::get<MultiPolygon>(f.geometry).polygons) {
            for (const Ring& ring : poly.rings) {
              for (const GeoPoint& p : ring) project_forward(proj, p);
            }
          }
        }
      }
    }
    v.projection = proj;
  }

  void set_bin_width(ViewState& v, double width) {
    if (v.spec->kind != ViewKind::Histogram) kind_mismatch(*v.spec, "SetBinWidth");
    if (!(width > 0.0) || !std::isfinite(width)) throw Error(ErrorCode::InvalidRange, "bin width must be positive");
    const GroupId g = cf.create_group(*v.dim, Binning::fixed_width(v.origin, width), Reduction::count());
    cf.dispose_group(*v.group);
    v.group = g;
    v.bin_width = width;
  }

  void set_axes(ViewState& v, const std::string& x, const std::string& y) {
    if (v.spec->kind != ViewKind::Scatter) kind_mismatch(*v.spec, "SetAxes");
    numeric_column(x);
    numeric_column(y);
    v.x = x;
    v.y = y;
  }

  void apply(const Command& cmd) {
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, command::SetFilter>) {
            const ViewState& v = view(c.view);
            cf.set_filter(filter_dim(v, "SetFilter"), c.filter);
          } else if constexpr (std::is_same_v<T, command::ClearFilter>) {
            cf.clear_filter(filter_dim(view(c.view), "ClearFilter"));
          } else if constexpr (std::is_same_v<T, command::ClearAll>) {
            cf.clear_all_filters();
          } else if constexpr (std::is_same_v<T, command::SpatialSelect>) {
            const ViewState& v = point_map(c.map, "SpatialSelect");
            cf.set_filter(*v.dim, SpatialFilter{c.geometry});
          } else if constexpr (std::is_same_v<T, command::ClearSpatial>) {
            cf.clear_filter(*point_map(c.map, "ClearSpatial").dim);
          } else if constexpr (std::is_same_v<T, command::RowClick>) {
            cf.row_click(c.key);
          } else if constexpr (std::is_same_v<T, command::SetVariable>) {
            set_variable(view(c.map), c.column);
          } else if constexpr (std::is_same_v<T, command::SetProjection>) {
            set_projection(view(c.view), c.projection);
          } else if constexpr (std::is_same_v<T, command::SetBinWidth>) {
            set_bin_width(view(c.view), c.width);
          } else if constexpr (std::is_same_v<T, command::SetAxes>) {
            set_axes(view(c.view), c.x, c.y);
          }
        },
        cmd);
  }

  std::vector<Notification> query(const Command& cmd) const {
    return std::visit(
        [&](const auto& c) -> std::vector<Notification> {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, command::QueryView>) {
            const ViewState& v = view(c.view);
            return {view_update(v, payload(v))};
          } else if constexpr (std::is_same_v<T, command::QueryTable>) {
            const ViewState* target = nullptr;
            for (const ViewState& v : views) {
              if (v.spec->kind == ViewKind::DataTable) {
                target = &v;
                break;
              }
            }
            json page = table_page(c.query);
            return {ViewUpdate{revision, target ? target->spec->id : std::string(), ViewKind::DataTable,
                               std::move(page)}};
          } else if constexpr (std::is_same_v<T, command::QueryHeatmap>) {
            const ViewState& v = view(c.map);
            if (v.spec->kind != ViewKind::HeatmapLayer) kind_mismatch(*v.spec, "QueryHeatmap");
            json p = c.mode == HeatMode::Global ? v.global_grid : heat_payload(v, HeatMode::Local);
            return {view_update(v, std::move(p))};
          } else if constexpr (std::is_same_v<T, command::QueryStatus>) {
            return {status()};
          } else {
            return {};
          }
        },
        cmd);
  }

  // ---------------------------------------------------------- snapshot

  json snapshot() const {
    json filters = json::object();
    for (const ViewState& v : views) {
      if (v.dim) filters[v.spec->id] = codec::to_json(cf.filter(*v.dim));
    }
    filters[std::string(kKeyFilterSlot)] = codec::to_json(cf.filter(key_dim));
    json settings = json::object();
    for (const ViewState& v : views) {
      json s = json::object();
      switch (v.spec->kind) {
        case ViewKind::ChoroplethMap:
        case ViewKind::SmallMultiples:
        case ViewKind::PropSymbolMap:
          s["variable"] = v.variable;
          s["projection"] = v.projection ? codec::to_json(*v.projection) : json(nullptr);
          break;
        case ViewKind::Histogram: s["bin_width"] = v.bin_width; break;
        case ViewKind::Scatter:
          s["x"] = v.x;
          s["y"] = v.y;
          break;
        default: continue;
      }
      settings[v.spec->id] = std::move(s);
    }
    return {{"format", kSnapshotFormat}, {"bundle_hash", bundle->content_hash}, {"revision", revision},
            {"filters", std::move(filters)}, {"views", std::move(settings)}};
  }

  void restore(const json& snap) {
    auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidCommand, "malformed snapshot: " + msg); };
    if (!snap.is_object() || snap.value("format", "") != kSnapshotFormat) bad("unknown format");
    if (snap.value("bundle_hash", "") != bundle->content_hash) {
      throw Error(ErrorCode::SnapshotMismatch, "snapshot was taken against different bundle content");
    }
    if (!snap.contains("revision") || !snap["revision"].is_number_unsigned()) bad("revision");
    const json views_json = snap.value("views", json::object());
    for (const auto& [id, s] : views_json.items()) {
      ViewState& v = view(id);
      if (s.contains("variable") && s["variable"].get<std::string>() != v.variable) set_variable(v, s["variable"]);
      if (s.contains("projection") && !s["projection"].is_null()) {
        set_projection(v, codec::projection_from_json(s["projection"]));
      }
      if (s.contains("bin_width") && s["bin_width"].get<double>() != v.bin_width) set_bin_width(v, s["bin_width"]);
      if (s.contains("x")) set_axes(v, s["x"], s["y"]);
    }
    const json filters_json = snap.value("filters", json::object());
    for (const auto& [id, f] : filters_json.items()) {
      const DimensionId dim = id == kKeyFilterSlot ? key_dim : filter_dim(view(id), "restore");
      cf.set_filter(dim, codec::filter_from_json(f));
    }
    revision = snap["revision"].get<std::uint64_t>();
  }
};

// ------------------------------------------------------------ Session

Session::Session(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;
Session::~Session() = default;

Session Session::create(std::shared_ptr<const AppBundle> bundle) {
  ValidationReport report = validate_bundle(*bundle);
  auto table = bundle->records();
  if (report.ok() && !table) report.errors.push_back({"records", "bundle declares no record table"});
  if (!report.ok()) throw BundleInvalidError(std::move(report));
  auto impl = std::make_unique<Impl>(bundle, table);
  for (const ViewSpec& spec : bundle->views) impl->build_view(spec);
  impl->refresh_cache();
  return Session(std::move(impl));
}

Session Session::restore(std::shared_ptr<const AppBundle> bundle, const json& snapshot) {
  if (snapshot.is_object() && snapshot.contains("bundle_hash") &&
      snapshot.value("bundle_hash", "") != bundle->content_hash) {
    throw Error(ErrorCode::SnapshotMismatch, "snapshot was taken against different bundle content");
  }
  Session s = create(std::move(bundle));
  s.impl_->restore(snapshot);
  s.impl_->refresh_cache();
  return s;
}

std::vector<Notification> Session::dispatch(const Command& cmd) {
  try {
    if (!is_state_changing(cmd)) return impl_->query(cmd);
    impl_->apply(cmd);
  } catch (const Error& e) {
    return {ErrorNotice{impl_->revision, e.code(), e.what()}};
  }
  ++impl_->revision;
  return impl_->emit_changes();
}

std::vector<Notification> Session::full_state() const {
  std::vector<Notification> out{impl_->status()};
  for (const ViewState& v : impl_->views) out.push_back(impl_->view_update(v, impl_->payload(v)));
  return out;
}

std::uint64_t Session::revision() const noexcept { return impl_->revision; }
StatusUpdate Session::status() const { return impl_->status(); }

ViewUpdate Session::query_view(const std::string& view_id) const {
  const ViewState& v = impl_->view(view_id);
  return impl_->view_update(v, impl_->payload(v));
}

json Session::snapshot() const { return impl_->snapshot(); }
const AppBundle& Session::bundle() const noexcept { return *impl_->bundle; }
const Crossfilter& Session::engine() const noexcept { return impl_->cf; }

std::vector<std::string> Session::view_ids() const {
  std::vector<std::string> ids;
  for (const ViewState& v : impl_->views) ids.push_back(v.spec->id);
  return ids;
}

std::optional<DimensionId> Session::view_dimension(const std::string& view_id) const {
  return impl_->view(view_id).dim;
}

}  // namespace coordlens
