#include "coordlens/codec.hpp"

#include <cmath>
#include <cstdio>

#include "coordlens/bundle.hpp"
#include "coordlens/error.hpp"

namespace coordlens::codec {
namespace {

using nlohmann::json;

void write(const json& v, std::string& out) {
  switch (v.type()) {
    case json::value_t::null: out += "null"; break;
    case json::value_t::boolean: out += v.get<bool>() ? "true" : "false"; break;
    case json::value_t::number_integer: out += std::to_string(v.get<std::int64_t>()); break;
    case json::value_t::number_unsigned: out += std::to_string(v.get<std::uint64_t>()); break;
    case json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
      } else {
        out += format_number(d);
      }
      break;
    }
    case json::value_t::string: out += v.dump(); break;
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const json& item : v) {
        if (!first) out += ',';
        first = false;
        write(item, out);
      }
      out += ']';
      break;
    }
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        write(it.value(), out);
      }
      out += '}';
      break;
    }
    default: out += v.dump(); break;
  }
}

[[noreturn]] void bad(const std::string& message) { throw Error(ErrorCode::InvalidCommand, message); }

const json& field(const json& j, const char* name) {
  if (!j.contains(name)) bad(std::string("missing field '") + name + "'");
  return j.at(name);
}

std::string string_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_string()) bad(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

double bound(const json& v, const char* name) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    auto d = parse_iso_date(v.get<std::string>());
    if (!d) bad(std::string("range bound '") + name + "' is neither a number nor an ISO-8601 date");
    return d->days;
  }
  bad(std::string("range bound '") + name + "' must be a number or date");
}

std::set<std::string> string_set(const json& j, const char* name) {
  const json& list = field(j, name);
  if (!list.is_array()) bad(std::string("field '") + name + "' must be an array");
  std::set<std::string> out;
  for (const json& v : list) {
    if (v.is_string()) out.insert(v.get<std::string>());
    else if (v.is_number()) out.insert(format_number(v.get<double>()));
    else bad(std::string("field '") + name + "' must hold strings");
  }
  return out;
}

json string_list(const std::set<std::string>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(v);
  return out;
}

}  // namespace

std::string dump(const json& value) {
  std::string out;
  write(value, out);
  return out;
}

json to_json(const FilterSpec& spec) {
  return std::visit(
      [](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, NoFilter>) return {{"type", "none"}};
        else if constexpr (std::is_same_v<T, RangeFilter>) return {{"type", "range"}, {"lo", f.lo}, {"hi", f.hi}};
        else if constexpr (std::is_same_v<T, SetFilter>) return {{"type", "set"}, {"values", string_list(f.values)}};
        else if constexpr (std::is_same_v<T, TagAnyFilter>) return {{"type", "tag_any"}, {"values", string_list(f.values)}};
        else if constexpr (std::is_same_v<T, SpatialFilter>) return {{"type", "spatial"}, {"geometry", geometry_to_geojson(f.geometry)}};
        else return {{"type", "key"}, {"keys", string_list(f.keys)}};
      },
      spec);
}

FilterSpec filter_from_json(const json& j) {
  if (!j.is_object()) bad("filter must be an object");
  const std::string type = string_field(j, "type");
  if (type == "none") return NoFilter{};
  if (type == "range") return RangeFilter{bound(field(j, "lo"), "lo"), bound(field(j, "hi"), "hi")};
  if (type == "set") return SetFilter{string_set(j, "values")};
  if (type == "tag_any") return TagAnyFilter{string_set(j, "values")};
  if (type == "key") return KeyFilter{string_set(j, "keys")};
  if (type == "spatial") return SpatialFilter{geometry_from_geojson(field(j, "geometry"))};
  bad("unknown filter type '" + type + "'");
}

json to_json(const ProjectionSpec& spec) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SphericalMercator>) {
          return {{"name", "mercator"}, {"radius", p.radius_m}};
        } else if constexpr (std::is_same_v<T, Equirectangular>) {
          return {{"name", "equirectangular"}, {"standard_parallel", p.standard_parallel}, {"radius", p.radius_m}};
        } else if constexpr (std::is_same_v<T, AlbersConic>) {
          return {{"name", "albers"},         {"parallel1", p.parallel1},
                  {"parallel2", p.parallel2}, {"origin_lat", p.origin_lat},
                  {"central_meridian", p.central_meridian}, {"radius", p.radius_m}};
        } else {
          return {{"name", "stereographic"}, {"origin_lat", p.origin_lat},
                  {"central_meridian", p.central_meridian}, {"radius", p.radius_m}};
        }
      },
      spec);
}

ProjectionSpec projection_from_json(const json& j) {
  std::string name;
  if (j.is_string()) name = j.get<std::string>();
  else if (j.is_object()) name = string_field(j, "name");
  else bad("projection must be a name or an object");
  auto spec = projection_by_name(name);
  if (!spec) bad("unknown projection '" + name + "'");
  if (j.is_object()) {
    std::visit(
        [&](auto& p) {
          using T = std::decay_t<decltype(p)>;
          p.radius_m = j.value("radius", p.radius_m);
          if constexpr (std::is_same_v<T, Equirectangular>) {
            p.standard_parallel = j.value("standard_parallel", p.standard_parallel);
          } else if constexpr (std::is_same_v<T, AlbersConic>) {
            p.parallel1 = j.value("parallel1", p.parallel1);
            p.parallel2 = j.value("parallel2", p.parallel2);
            p.origin_lat = j.value("origin_lat", p.origin_lat);
            p.central_meridian = j.value("central_meridian", p.central_meridian);
          } else if constexpr (std::is_same_v<T, Stereographic>) {
            p.origin_lat = j.value("origin_lat", p.origin_lat);
            p.central_meridian = j.value("central_meridian", p.central_meridian);
          }
        },
        *spec);
  }
  validate(*spec);
  return *spec;
}

json to_json(const Command& cmd) {
  return std::visit(
      [](const auto& c) -> json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, command::SetFilter>) {
          return {{"cmd", "SetFilter"}, {"view", c.view}, {"filter", to_json(c.filter)}};
        } else if constexpr (std::is_same_v<T, command::ClearFilter>) {
          return {{"cmd", "ClearFilter"}, {"view", c.view}};
        } else if constexpr (std::is_same_v<T, command::ClearAll>) {
          return {{"cmd", "ClearAll"}};
        } else if constexpr (std::is_same_v<T, command::SpatialSelect>) {
          return {{"cmd", "SpatialSelect"}, {"map", c.map}, {"geometry", geometry_to_geojson(c.geometry)}};
        } else if constexpr (std::is_same_v<T, command::ClearSpatial>) {
          return {{"cmd", "ClearSpatial"}, {"map", c.map}};
        } else if constexpr (std::is_same_v<T, command::RowClick>) {
          return {{"cmd", "RowClick"}, {"key", c.key}};
        } else if constexpr (std::is_same_v<T, command::SetVariable>) {
          return {{"cmd", "SetVariable"}, {"map", c.map}, {"column", c.column}};
        } else if constexpr (std::is_same_v<T, command::SetProjection>) {
          return {{"cmd", "SetProjection"}, {"view", c.view}, {"projection", to_json(c.projection)}};
        } else if constexpr (std::is_same_v<T, command::SetBinWidth>) {
          return {{"cmd", "SetBinWidth"}, {"view", c.view}, {"width", c.width}};
        } else if constexpr (std::is_same_v<T, command::SetAxes>) {
          return {{"cmd", "SetAxes"}, {"view", c.view}, {"x", c.x}, {"y", c.y}};
        } else if constexpr (std::is_same_v<T, command::QueryView>) {
          return {{"cmd", "QueryView"}, {"view", c.view}};
        } else if constexpr (std::is_same_v<T, command::QueryTable>) {
          json j = {{"cmd", "QueryTable"}, {"search", c.query.search}, {"offset", c.query.offset},
                    {"limit", c.query.limit}};
          if (c.query.sort) {
            j["sort"] = {{"column", c.query.sort->column}, {"order", c.query.sort->ascending ? "asc" : "desc"}};
          }
          return j;
        } else if constexpr (std::is_same_v<T, command::QueryHeatmap>) {
          return {{"cmd", "QueryHeatmap"}, {"map", c.map}, {"mode", to_string(c.mode)}};
        } else {
          return {{"cmd", "QueryStatus"}};
        }
      },
      cmd);
}

Command command_from_json(const json& j) {
  if (!j.is_object()) bad("command must be a JSON object");
  const std::string name = string_field(j, "cmd");
  if (name == "SetFilter") return command::SetFilter{string_field(j, "view"), filter_from_json(field(j, "filter"))};
  if (name == "ClearFilter") return command::ClearFilter{string_field(j, "view")};
  if (name == "ClearAll") return command::ClearAll{};
  if (name == "SpatialSelect") {
    return command::SpatialSelect{string_field(j, "map"), geometry_from_geojson(field(j, "geometry"))};
  }
  if (name == "ClearSpatial") return command::ClearSpatial{string_field(j, "map")};
  if (name == "RowClick") {
    const json& key = field(j, "key");
    return command::RowClick{key.is_number() ? format_number(key.get<double>()) : string_field(j, "key")};
  }
  if (name == "SetVariable") return command::SetVariable{string_field(j, "map"), string_field(j, "column")};
  if (name == "SetProjection") {
    return command::SetProjection{string_field(j, "view"), projection_from_json(field(j, "projection"))};
  }
  if (name == "SetBinWidth") {
    const json& w = field(j, "width");
    if (!w.is_number()) bad("field 'width' must be a number");
    return command::SetBinWidth{string_field(j, "view"), w.get<double>()};
  }
  if (name == "SetAxes") return command::SetAxes{string_field(j, "view"), string_field(j, "x"), string_field(j, "y")};
  if (name == "QueryView") return command::QueryView{string_field(j, "view")};
  if (name == "QueryTable") {
    command::QueryTable q;
    if (j.contains("sort") && !j["sort"].is_null()) {
      const json& s = j["sort"];
      const std::string order = s.value("order", "asc");
      if (order != "asc" && order != "desc") bad("sort order must be asc or desc");
      q.query.sort = SortSpec{string_field(s, "column"), order == "asc"};
    }
    q.query.search = j.value("search", "");
    const auto offset = j.value("offset", 0LL);
    const auto limit = j.value("limit", 25LL);
    if (offset < 0 || limit < 0) bad("offset and limit must be non-negative");
    q.query.offset = static_cast<std::size_t>(offset);
    q.query.limit = static_cast<std::size_t>(limit);
    return q;
  }
  if (name == "QueryHeatmap") {
    auto mode = parse_heat_mode(j.value("mode", "local"));
    if (!mode) bad("heatmap mode must be global or local");
    return command::QueryHeatmap{string_field(j, "map"), *mode};
  }
  if (name == "QueryStatus") return command::QueryStatus{};
  bad("unknown command '" + name + "'");
}

json to_json(const Notification& note) {
  return std::visit(
      [](const auto& n) -> json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, StatusUpdate>) {
          return {{"type", "StatusUpdate"}, {"revision", n.revision}, {"selected", n.selected}, {"total", n.total}};
        } else if constexpr (std::is_same_v<T, ViewUpdate>) {
          return {{"type", "ViewUpdate"}, {"revision", n.revision}, {"view", n.view},
                  {"kind", to_string(n.kind)}, {"payload", n.payload}};
        } else {
          return {{"type", "Error"}, {"revision", n.revision}, {"code", to_string(n.code)}, {"message", n.message}};
        }
      },
      note);
}

json to_json(const BinKey& key) {
  return std::visit([](const auto& k) { return json(k); }, key);
}

json to_json(const GroupResult& group) {
  json bins = json::array();
  for (const Bin& b : group.bins) bins.push_back(json::array({to_json(b.key), b.value}));
  return bins;
}

json to_json(const ClassBreaks& breaks) {
  return {{"method", to_string(breaks.method)}, {"k", breaks.k}, {"breaks", breaks.breaks}};
}

json to_json(const HeatGrid& grid) {
  return {{"mode", to_string(grid.mode)}, {"origin_x", grid.origin_x}, {"origin_y", grid.origin_y},
          {"cell_size", grid.cell_size}, {"width", grid.width}, {"height", grid.height},
          {"intensities", grid.intensities}};
}

json to_json(const BoxplotStats& s) {
  return {{"min", s.min_whisker}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3},
          {"max_whisker", s.max_whisker}, {"outliers", s.outliers}};
}

json to_json(const RegressionFit& fit) {
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}, {"n", fit.n}};
}

json to_json(const ClusterResult& result) {
  json clusters = json::array();
  for (const MarkerCluster& c : result.clusters) {
    clusters.push_back({{"lon", c.centroid.lon}, {"lat", c.centroid.lat}, {"count", c.members.size()},
                        {"members", c.members}});
  }
  return {{"zoom", result.zoom}, {"radius_px", result.radius_px}, {"clusters", clusters}};
}

}  // namespace coordlens::codec
