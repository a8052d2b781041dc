#include "coordlens/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>

#include "coordlens/date.hpp"
#include "coordlens/error.hpp"
#include "coordlens/table.hpp"

namespace coordlens::synth {

using nlohmann::json;

std::uint64_t Rng::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
std::size_t Rng::below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

double Rng::normal(double mean, double sd) {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

AppBundle GeneratedBundle::load() const { return bundle_from_manifest(manifest, {}, memory_reader(files)); }

void GeneratedBundle::write(const std::filesystem::path& dir) const {
  auto put = [&](const std::filesystem::path& path, const std::string& bytes) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    out << bytes;
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  };
  put(dir / "app.config.json", manifest.dump(2) + "\n");
  for (const auto& [rel, bytes] : files) put(dir / rel, bytes);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string> header) : width_(header.size()) { row(header); }

  void row(std::initializer_list<std::string> cells) {
    bool first = true;
    for (const std::string& c : cells) {
      if (!first) text_ += ',';
      first = false;
      text_ += csv_field(c);
    }
    text_ += '\n';
  }
  std::size_t width() const { return width_; }
  const std::string& text() const { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

std::string num(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return format_number(std::round(v * scale) / scale);
}

std::string pick(Rng& rng, std::span<const std::string_view> values) { return std::string(values[rng.below(values.size())]); }

std::string weighted(Rng& rng, std::span<const std::pair<std::string_view, double>> choices) {
  double u = rng.uniform();
  for (const auto& [name, w] : choices) {
    if (u < w) return std::string(name);
    u -= w;
  }
  return std::string(choices.back().first);
}

json column(std::string name, std::string kind) { return {{"name", std::move(name)}, {"kind", std::move(kind)}}; }

json point_column(std::string name) {
  return {{"name", std::move(name)}, {"kind", "point"}, {"lon", "lon"}, {"lat", "lat"}};
}

json view(std::string id, std::string kind, json bindings = json::object(), json options = json::object()) {
  return {{"id", std::move(id)}, {"kind", std::move(kind)}, {"bindings", std::move(bindings)},
          {"options", std::move(options)}};
}

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

constexpr std::array<std::string_view, 33> kNmCounties = {
    "Bernalillo", "Catron",     "Chaves",     "Cibola",     "Colfax",     "Curry",    "De Baca",
    "Dona Ana",   "Eddy",       "Grant",      "Guadalupe",  "Harding",    "Hidalgo",  "Lea",
    "Lincoln",    "Los Alamos", "Luna",       "McKinley",   "Mora",       "Otero",    "Quay",
    "Rio Arriba", "Roosevelt",  "Sandoval",   "San Juan",   "San Miguel", "Santa Fe", "Sierra",
    "Socorro",    "Taos",       "Torrance",   "Union",      "Valencia"};

}  // namespace

GeneratedBundle tract_bundle(std::uint64_t seed) {
  constexpr int kRows = 18;
  constexpr int kCols = 34;
  constexpr double kWest = -109.05, kEast = -103.0, kSouth = 31.33, kNorth = 37.0;
  Rng rng(seed);
  CsvWriter csv({"GEOID", "county", "population", "poverty_rate", "median_income", "svi_overall",
                 "svi_socioeconomic", "svi_household", "svi_minority", "svi_housing", "energy_burden", "pm25",
                 "flood_risk", "low_access_pct", "snap_pct", "disadvantaged", "urban"});
  json features = json::array();
  const double dx = (kEast - kWest) / kCols;
  const double dy = (kNorth - kSouth) / kRows;
  for (int r = 0; r < kRows; ++r) {
    for (int c = 0; c < kCols; ++c) {
      const int county_idx = std::min(32, (r / 3) * 6 + c / 6);
      const std::string county(kNmCounties[county_idx]);
      char geoid[32];
      std::snprintf(geoid, sizeof geoid, "35%03d%06d", 2 * county_idx + 1, (r * kCols + c + 1) * 100);
      const double hardship = clamp(rng.normal(0.45, 0.2), 0.0, 1.0);
      const double poverty = clamp(5.0 + 45.0 * hardship + rng.normal(0.0, 4.0), 0.5, 65.0);
      const bool urban = rng.uniform() < 0.35;
      const double income = clamp(95000.0 - 90000.0 * hardship + rng.normal(0.0, 8000.0), 12000.0, 180000.0);
      auto svi = [&] { return clamp(hardship + rng.normal(0.0, 0.12), 0.0, 1.0); };
      const double s1 = svi(), s2 = svi(), s3 = svi(), s4 = svi();
      const double overall = (s1 + s2 + s3 + s4) / 4.0;
      const double energy = clamp(2.0 + 10.0 * hardship + rng.normal(0.0, 1.0), 0.5, 20.0);
      const double pm25 = clamp(rng.normal(urban ? 7.5 : 5.0, 1.0), 2.0, 12.0);
      const double flood = clamp(rng.uniform(0.0, 100.0), 0.0, 100.0);
      const double access = clamp((urban ? 15.0 : 45.0) + 30.0 * hardship + rng.normal(0.0, 10.0), 0.0, 100.0);
      const double snap = clamp(30.0 * hardship + rng.normal(0.0, 3.0), 0.0, 60.0);
      const bool missing_income = rng.uniform() < 0.01;
      csv.row({geoid, county, std::to_string(800 + rng.below(7000)), num(poverty, 2),
               missing_income ? std::string() : num(income, 0), num(overall, 4), num(s1, 4), num(s2, 4), num(s3, 4),
               num(s4, 4), num(energy, 2), num(pm25, 2), num(flood, 1), num(access, 2), num(snap, 2),
               poverty > 25.0 || energy > 8.0 ? "Yes" : "No", urban ? "Urban" : "Rural"});
      const double w = kWest + c * dx, e = w + dx, s = kSouth + r * dy, n = s + dy;
      features.push_back({{"type", "Feature"},
                          {"properties", {{"GEOID", geoid}, {"county", county}}},
                          {"geometry",
                           {{"type", "Polygon"},
                            {"coordinates", json::array({json::array({json::array({w, s}), json::array({e, s}),
                                                                      json::array({e, n}), json::array({w, n}),
                                                                      json::array({w, s})})})}}}});
    }
  }

  GeneratedBundle out;
  out.files["data/tracts.csv"] = csv.text();
  out.files["geo/tracts.geojson"] = json{{"type", "FeatureCollection"}, {"features", features}}.dump() + "\n";

  json columns = json::array({column("GEOID", "text"), column("county", "text"), column("population", "number"),
                              column("poverty_rate", "number"), column("median_income", "number")});
  for (const char* name : {"svi_overall", "svi_socioeconomic", "svi_household", "svi_minority", "svi_housing",
                           "energy_burden", "pm25", "flood_risk", "low_access_pct", "snap_pct"}) {
    columns.push_back(column(name, "number"));
  }
  columns.push_back(column("disadvantaged", "text"));
  columns.push_back(column("urban", "text"));

  const json region = {{"region", "GEOID"}, {"features", "tracts"}};
  out.manifest = {
      {"name", "New Mexico social justice"},
      {"layout", "multi_map_rows"},
      {"records", "tracts"},
      {"data", json::array({{{"id", "tracts"}, {"path", "data/tracts.csv"}, {"key", "GEOID"}, {"columns", columns}}})},
      {"geometries", json::array({{{"id", "tracts"}, {"path", "geo/tracts.geojson"}, {"key_property", "GEOID"}}})},
      {"joins", json::array({{{"table", "tracts"}, {"features", "tracts"}, {"key", "GEOID"}}})},
      {"palettes",
       {{"blues", {"#eff3ff", "#bdd7e7", "#6baed6", "#3182bd", "#08519c"}},
        {"reds", {"#fee5d9", "#fcae91", "#fb6a4a", "#de2d26", "#a50f15"}},
        {"purples", {"#f2f0f7", "#cbc9e2", "#9e9ac8", "#6a51a3"}}}},
      {"views",
       json::array({
           view("status", "status_bar"),
           view("cejst_map", "choropleth_map", region,
                {{"variables", {"energy_burden", "pm25", "flood_risk", "poverty_rate"}},
                 {"method", "quantile"}, {"k", 5}, {"palette", "blues"}}),
           view("svi_map", "choropleth_map", region,
                {{"variables", {"svi_overall", "svi_socioeconomic", "svi_household", "svi_minority", "svi_housing"}},
                 {"method", "jenks"}, {"k", 5}, {"palette", "reds"}}),
           view("food_map", "choropleth_map", region,
                {{"variables", {"low_access_pct", "snap_pct"}}, {"method", "equal_interval"}, {"k", 4},
                 {"palette", "purples"}, {"projection", "albers"}}),
           view("projection_multiples", "small_multiples", region,
                {{"variables", {"svi_overall"}}, {"projections", {"albers", "mercator", "equirectangular", "stereographic"}},
                 {"facet", "projection"}, {"method", "quantile"}, {"k", 5}, {"palette", "reds"}}),
           view("poverty_hist", "histogram", {{"value", "poverty_rate"}}, {{"bin_widths", {5, 10, 2.5}}}),
           view("county_bar", "bar_chart", {{"dimension", "county"}}),
           view("disadvantaged_donut", "donut", {{"dimension", "disadvantaged"}}),
           view("urban_donut", "donut", {{"dimension", "urban"}}),
           view("income_scatter", "scatter", {{"x", "median_income"}, {"y", "poverty_rate"}},
                {{"columns", {"median_income", "poverty_rate", "svi_overall", "energy_burden", "snap_pct"}}}),
           view("svi_box", "boxplot", {{"value", "svi_overall"}, {"category", "urban"}}),
           view("tracts_table", "data_table", json::object(), {{"page_size", 25}}),
       })}};
  return out;
}

GeneratedBundle crash_bundle(std::size_t records, std::uint64_t seed, bool with_maps) {
  constexpr double kWest = -106.75, kEast = -106.47, kSouth = 34.95, kNorth = 35.22;
  constexpr std::int32_t kFirstDay = 14610;  // 2010-01-01
  constexpr std::int32_t kLastDay = 19722;   // 2023-12-31
  constexpr std::array<std::pair<double, double>, 5> kHotspots = {
      {{-106.65, 35.08}, {-106.59, 35.10}, {-106.55, 35.13}, {-106.69, 35.05}, {-106.62, 35.15}}};
  constexpr std::array<std::pair<std::string_view, double>, 3> kCounties = {
      {{"Bernalillo", 0.93}, {"Sandoval", 0.05}, {"Valencia", 0.02}}};
  constexpr std::array<std::pair<std::string_view, double>, 4> kSeverity = {
      {{"Fatal", 0.03}, {"Suspected Serious Injury", 0.12}, {"Suspected Minor Injury", 0.45},
       {"Possible Injury", 0.40}}};

  Rng rng(seed);
  std::vector<std::pair<double, double>> intersections;
  for (int i = 0; i < 300; ++i) {
    const double lon = std::round(rng.uniform(kWest, kEast) * 1e6) / 1e6;
    const double lat = std::round(rng.uniform(kSouth, kNorth) * 1e6) / 1e6;
    intersections.emplace_back(lon, lat);
  }

  CsvWriter csv({"crash_id", "lon", "lat", "crash_date", "hour", "county", "city", "severity", "alcohol", "drugs",
                 "pedestrian"});
  for (std::size_t i = 0; i < records; ++i) {
    double lon, lat;
    if (rng.uniform() < 0.3) {
      std::tie(lon, lat) = intersections[rng.below(intersections.size())];
    } else {
      const auto [hx, hy] = kHotspots[rng.below(kHotspots.size())];
      lon = clamp(rng.normal(hx, 0.03), kWest, kEast);
      lat = clamp(rng.normal(hy, 0.025), kSouth, kNorth);
    }
    const std::int32_t day = kFirstDay + static_cast<std::int32_t>(rng.below(kLastDay - kFirstDay + 1));
    const std::string county = weighted(rng, kCounties);
    std::string city = "Albuquerque";
    if (county == "Sandoval") city = rng.uniform() < 0.8 ? "Rio Rancho" : "Unincorporated";
    else if (county == "Valencia") city = rng.uniform() < 0.7 ? "Los Lunas" : "Unincorporated";
    else if (rng.uniform() < 0.08) city = "Unincorporated";
    const double hour = std::floor(clamp(rng.normal(15.0, 5.0), 0.0, 23.999));
    char id[32];
    std::snprintf(id, sizeof id, "C%07zu", i + 1);
    csv.row({id, num(lon, 6), num(lat, 6), format_iso_date(Date{day}), num(hour, 0), county, city,
             weighted(rng, kSeverity), rng.uniform() < 0.06 ? "Yes" : "No", rng.uniform() < 0.04 ? "Yes" : "No",
             rng.uniform() < 0.05 ? "Yes" : "No"});
  }

  GeneratedBundle out;
  out.files["data/crashes.csv"] = csv.text();
  json columns = json::array({column("crash_id", "text"), point_column("location"), column("crash_date", "date"),
                              column("hour", "number")});
  for (const char* name : {"county", "city", "severity", "alcohol", "drugs", "pedestrian"}) {
    columns.push_back(column(name, "text"));
  }
  json views = json::array({view("status", "status_bar")});
  if (with_maps) {
    views.push_back(view("crash_map", "marker_map", {{"point", "location"}}, {{"zoom", 12}, {"radius_px", 80}}));
    views.push_back(view("crash_heat", "heatmap_layer", {{"point", "location"}},
                         {{"cell_size", 250}, {"radius", 750}, {"mode", "local"}}));
  }
  views.push_back(view("crash_date", "date_slider", {{"date", "crash_date"}}, {{"granularity", "month"}}));
  for (const char* name : {"county", "city", "severity"}) {
    views.push_back(view(std::string(name) + "_select", "select_menu", {{"dimension", name}}));
  }
  for (const char* name : {"alcohol", "drugs", "pedestrian"}) {
    views.push_back(view(std::string(name) + "_row", "row_chart", {{"dimension", name}}));
  }
  views.push_back(view("hour_hist", "histogram", {{"value", "hour"}}, {{"bin_width", 1}}));
  views.push_back(view("crash_table", "data_table", json::object(), {{"page_size", 25}}));

  out.manifest = {
      {"name", "Albuquerque traffic crashes"},
      {"layout", "single_map"},
      {"records", "crashes"},
      {"data",
       json::array({{{"id", "crashes"}, {"path", "data/crashes.csv"}, {"key", "crash_id"}, {"columns", columns}}})},
      {"palettes", {{"severity", {"#d73027", "#fc8d59", "#fee090", "#91bfdb"}}}},
      {"views", views}};
  return out;
}

GeneratedBundle pathogen_bundle(std::size_t records, std::uint64_t seed) {
  constexpr std::array<std::string_view, 5> kPathogens = {"Leptospira", "Hantavirus", "Trypanosoma cruzi",
                                                          "Rickettsia", "Leishmania"};
  constexpr std::array<std::string_view, 5> kHosts = {"Rattus rattus", "Proechimys semispinosus",
                                                      "Didelphis marsupialis", "Zygodontomys brevicauda",
                                                      "Oligoryzomys fulvescens"};
  constexpr std::array<std::string_view, 5> kParts = {"blood", "liver", "lung", "kidney", "spleen"};
  constexpr std::array<std::string_view, 6> kProvinces = {"Panama", "Colon", "Cocle", "Chiriqui", "Darien",
                                                          "Veraguas"};
  constexpr std::int32_t kFirstDay = 16436;  // 2015-01-01
  constexpr std::int32_t kLastDay = 19357;   // 2022-12-31

  Rng rng(seed);
  struct Site {
    std::string name;
    std::string province;
    double lon;
    double lat;
  };
  std::vector<Site> sites;
  for (int i = 0; i < 40; ++i) {
    sites.push_back({"S" + std::to_string(i + 1), std::string(kProvinces[rng.below(kProvinces.size())]),
                     std::round(rng.uniform(-82.9, -77.3) * 1e5) / 1e5, std::round(rng.uniform(7.3, 9.5) * 1e5) / 1e5});
  }

  CsvWriter csv({"sample_id", "site", "province", "lon", "lat", "collected", "pathogen", "host", "part", "ct_value",
                 "body_mass"});
  for (std::size_t i = 0; i < records; ++i) {
    const Site& site = sites[rng.below(sites.size())];
    std::vector<std::string> parts;
    for (std::string_view p : kParts) {
      if (rng.uniform() < 0.35) parts.emplace_back(p);
    }
    if (parts.empty()) parts.emplace_back(kParts[rng.below(kParts.size())]);
    std::string part_text;
    for (const std::string& p : parts) part_text += (part_text.empty() ? "" : ", ") + p;
    if (rng.uniform() < 0.03) part_text.clear();
    const std::int32_t day = kFirstDay + static_cast<std::int32_t>(rng.below(kLastDay - kFirstDay + 1));
    char id[32];
    std::snprintf(id, sizeof id, "P%05zu", i + 1);
    const bool missing_ct = rng.uniform() < 0.05;
    csv.row({id, site.name, site.province, num(site.lon, 5), num(site.lat, 5), format_iso_date(Date{day}),
             pick(rng, kPathogens), pick(rng, kHosts), part_text,
             missing_ct ? std::string() : num(clamp(rng.normal(28.0, 5.0), 12.0, 40.0), 2),
             num(clamp(rng.normal(180.0, 60.0), 20.0, 900.0), 1)});
  }

  GeneratedBundle out;
  out.files["data/samples.csv"] = csv.text();
  json columns = json::array({column("sample_id", "text"), column("site", "text"), column("province", "text"),
                              point_column("location"), column("collected", "date"), column("pathogen", "text"),
                              column("host", "text"), column("part", "tags"), column("ct_value", "number"),
                              column("body_mass", "number")});
  out.manifest = {
      {"name", "Panama pathogen tracking"},
      {"layout", "single_map"},
      {"records", "samples"},
      {"data",
       json::array({{{"id", "samples"}, {"path", "data/samples.csv"}, {"key", "sample_id"}, {"columns", columns}}})},
      {"palettes", {{"pathogens", {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e"}}}},
      {"views",
       json::array({
           view("status", "status_bar"),
           view("sample_map", "marker_map", {{"point", "location"}}, {{"zoom", 8}, {"radius_px", 60}}),
           view("pathogen_donut", "donut", {{"dimension", "pathogen"}}),
           view("host_bar", "bar_chart", {{"dimension", "host"}}),
           view("part_row", "row_chart", {{"dimension", "part"}}),
           view("province_select", "select_menu", {{"dimension", "province"}}),
           view("sample_series", "series_chart", {{"date", "collected"}, {"category", "pathogen"}},
                {{"granularity", "year"}, {"reduction", "count"}}),
           view("ct_box", "boxplot", {{"value", "ct_value"}, {"category", "pathogen"}}),
           view("mass_ct", "scatter", {{"x", "body_mass"}, {"y", "ct_value"}},
                {{"columns", {"body_mass", "ct_value"}}}),
           view("ct_range", "range_slider", {{"value", "ct_value"}}),
           view("province_stack", "stacked_bar", {{"primary", "province"}, {"secondary", "pathogen"}}),
           view("samples_table", "data_table", json::object(), {{"page_size", 25}}),
       })}};
  return out;
}

std::optional<GeneratedBundle> by_name(std::string_view name, std::uint64_t seed) {
  if (name == "tracts") return tract_bundle(seed);
  if (name == "crashes") return crash_bundle(kCrashCount, seed);
  if (name == "pathogens") return pathogen_bundle(400, seed);
  return std::nullopt;
}

}  // namespace coordlens::synth
