// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "coordlens/classify.hpp"
#include "coordlens/codec.hpp"
#include "coordlens/crossfilter.hpp"
#include "coordlens/error.hpp"
#include "coordlens/geometry.hpp"
#include "coordlens/heatgrid.hpp"
#include "coordlens/projection.hpp"
#include "coordlens/session.hpp"
#include "coordlens/stats.hpp"
#include "coordlens/synth.hpp"
#include "oracles.hpp"

using namespace coordlens;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::string first_failure;

  void fail(const std::string& why) {
    if (pass) first_failure = why;
    pass = false;
  }
};

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
std::size_t below(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
bool chance(Rng& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("coordlens_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// ------------------------------------------------------------ random geometry

Ring star_ring(Rng& rng, GeoPoint c, std::size_t n, double rmin, double rmax) {
  Ring ring;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
  const double phase = uniform(rng, 0.0, step);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = phase + step * (static_cast<double>(i) + uniform(rng, -0.4, 0.4));
    const double r = uniform(rng, rmin, rmax);
    ring.push_back({c.lon + r * std::cos(a), c.lat + r * std::sin(a)});
  }
  ring.push_back(ring.front());
  return ring;
}

Polygon random_polygon(Rng& rng, GeoPoint c, double scale) {
  const std::size_t n = 3 + below(rng, 10);
  Polygon p;
  const double rmin = 0.5 * scale;
  p.rings.push_back(star_ring(rng, c, n, rmin, scale));
  if (n >= 5 && chance(rng, 0.35)) p.rings.push_back(star_ring(rng, c, 3 + below(rng, 6), 0.05 * rmin, 0.35 * rmin));
  return p;
}

Geometry random_region(Rng& rng) {
  switch (below(rng, 4)) {
    case 0: {
      const double w = uniform(rng, -10, 8), s = uniform(rng, -10, 8);
      return BBox{w, s, w + uniform(rng, 0.5, 12), s + uniform(rng, 0.5, 12)};
    }
    case 1: return Circle{{uniform(rng, -10, 10), uniform(rng, -10, 10)}, uniform(rng, 1e5, 1.2e6)};
    case 2: return random_polygon(rng, {uniform(rng, -6, 6), uniform(rng, -6, 6)}, uniform(rng, 2, 9));
    default:
      return MultiPolygon{{random_polygon(rng, {uniform(rng, -8, -2), uniform(rng, -8, 8)}, uniform(rng, 1, 4)),
                           random_polygon(rng, {uniform(rng, 2, 8), uniform(rng, -8, 8)}, uniform(rng, 1, 4))}};
  }
}

// ------------------------------------------------------------ crossfilter oracle suite

struct DimChoice {
  std::string column;
  DimensionKind kind;
};

const std::vector<DimChoice> kDimPool = {
    {"num", DimensionKind::Scalar},      {"num2", DimensionKind::Scalar}, {"day", DimensionKind::Scalar},
    {"cat", DimensionKind::Categorical}, {"tags", DimensionKind::Tag},    {"loc", DimensionKind::Point},
    {"num", DimensionKind::Categorical}, {"day", DimensionKind::Categorical},
};

struct Trial {
  std::shared_ptr<const RecordTable> table;
  std::vector<DimChoice> dims;
  std::vector<std::pair<std::size_t, std::pair<Binning, Reduction>>> groups;  // dim index -> spec
  bool has_key_dim = false;
};

FilterSpec random_filter(Rng& rng, const RecordTable& t, const DimChoice& d) {
  if (chance(rng, 0.08)) return NoFilter{};
  switch (d.kind) {
    case DimensionKind::Scalar: {
      if (d.column == "day") {
        const double lo = 17800 + static_cast<double>(below(rng, 800));
        return RangeFilter{lo, lo + static_cast<double>(below(rng, 400))};
      }
      if (d.column == "num2") {
        const double lo = uniform(rng, -100, 100);
        return RangeFilter{lo, lo + uniform(rng, 0, 120)};
      }
      const double lo = (static_cast<double>(below(rng, 41)) - 20.0) * 0.5;
      return RangeFilter{lo, lo + static_cast<double>(below(rng, 24)) * 0.5};
    }
    case DimensionKind::Categorical: {
      SetFilter f;
      const std::size_t col = *t.column_index(d.column);
      const std::size_t n = 1 + below(rng, 3);
      for (std::size_t i = 0; i < n && t.row_count() > 0; ++i) {
        const std::size_t row = below(rng, t.row_count());
        if (!t.column(col).is_null(row)) f.values.insert(t.cell_text(row, col));
      }
      if (f.values.empty() || chance(rng, 0.1)) f.values.insert("c" + std::to_string(below(rng, 8)));
      return f;
    }
    case DimensionKind::Tag: {
      TagAnyFilter f;
      for (std::size_t i = 0; i < 4; ++i) {
        if (chance(rng, 0.4)) f.values.insert("t" + std::to_string(i));
      }
      if (f.values.empty()) f.values.insert("t" + std::to_string(below(rng, 5)));
      return f;
    }
    case DimensionKind::Point: return SpatialFilter{random_region(rng)};
  }
  return NoFilter{};
}

/// Invalid for the dimension, so the engine must throw and change nothing.
FilterSpec bad_filter(Rng& rng, const DimChoice& d) {
  if (d.kind == DimensionKind::Scalar) {
    return chance(rng, 0.5) ? FilterSpec{RangeFilter{5, 1}} : FilterSpec{SetFilter{{"x"}}};
  }
  if (d.kind == DimensionKind::Point) return SpatialFilter{Polygon{{{{0, 0}, {1, 1}, {0, 0}}}}};
  return RangeFilter{0, 1};
}

Trial random_trial(Rng& rng) {
  Trial t;
  oracle::RandomTableSpec spec;
  spec.rows = 1 + below(rng, 200);
  spec.null_rate = uniform(rng, 0.0, 0.3);
  spec.categories = 2 + below(rng, 6);
  spec.tags = 1 + below(rng, 5);
  t.table = std::make_shared<RecordTable>(oracle::random_table(rng, spec));
  const std::size_t ndims = 1 + below(rng, 5);
  for (std::size_t i = 0; i < ndims; ++i) t.dims.push_back(kDimPool[below(rng, kDimPool.size())]);
  for (std::size_t d = 0; d < t.dims.size(); ++d) {
    const DimChoice& dc = t.dims[d];
    if (dc.kind == DimensionKind::Point) continue;
    const std::size_t ngroups = below(rng, 3);
    for (std::size_t g = 0; g < ngroups; ++g) {
      Binning b = Binning::identity();
      if (dc.kind == DimensionKind::Scalar) {
        const std::size_t pick = below(rng, dc.column == "day" ? 3 : 2);
        if (pick == 1) b = Binning::fixed_width(uniform(rng, -3, 3), std::vector<double>{0.5, 1, 2.5, 3, 7}[below(rng, 5)]);
        if (pick == 2) b = Binning::time_bucket(chance(rng, 0.5) ? TimeGranularity::Month : TimeGranularity::Year);
      }
      Reduction r = Reduction::count();
      if (chance(rng, 0.5)) r = Reduction::sum(chance(rng, 0.5) ? "num2" : "num");
      t.groups.push_back({d, {b, r}});
    }
  }
  return t;
}

bool same_bins(const std::vector<Bin>& got, const std::vector<std::pair<BinKey, double>>& want, bool sum,
               std::string& why) {
  if (got.size() != want.size()) {
    why = "bin count " + std::to_string(got.size()) + " vs " + std::to_string(want.size());
    return false;
  }
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (!(got[i].key == want[i].first)) {
      why = "bin key mismatch at " + std::to_string(i);
      return false;
    }
    const bool ok = sum ? close_rel(got[i].value, want[i].second, 1e-9) : got[i].value == want[i].second;
    if (!ok) {
      why = "bin value " + fmt("%.17g", got[i].value) + " vs " + fmt("%.17g", want[i].second);
      return false;
    }
  }
  return true;
}

std::vector<std::pair<BinKey, double>> as_pairs(const std::vector<Bin>& bins) {
  std::vector<std::pair<BinKey, double>> out;
  for (const Bin& b : bins) out.emplace_back(b.key, b.value);
  return out;
}

std::pair<Outcome, Outcome> crossfilter_suite() {
  Outcome oracle_out, exclusion_out;
  Rng rng(20240601);
  const auto start = std::chrono::steady_clock::now();
  std::size_t commands = 0, checks = 0, rejected = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Trial t = random_trial(rng);
    Crossfilter cf(t.table);
    oracle::NaiveCrossfilter naive(*t.table);
    std::vector<DimensionId> dims;
    for (const auto& d : t.dims) {
      dims.push_back(cf.create_dimension(d.column, d.kind));
      naive.add_dimension(d.column, d.kind);
    }
    std::vector<GroupId> groups;
    for (const auto& [d, spec] : t.groups) {
      groups.push_back(cf.create_group(dims[d], spec.first, spec.second));
      naive.add_group(d, spec.first, spec.second);
    }
    std::optional<std::size_t> key_index;
    std::vector<DimChoice> choices = t.dims;

    const std::size_t ncmd = 1 + below(rng, 20);
    for (std::size_t c = 0; c < ncmd; ++c) {
      ++commands;
      const double roll = uniform(rng, 0, 1);
      const std::size_t d = below(rng, t.dims.size());
      std::string label;
      if (roll < 0.45) {
        FilterSpec f = random_filter(rng, *t.table, t.dims[d]);
        cf.set_filter(dims[d], f);
        naive.set_filter(d, f);
        label = "set_filter";
      } else if (roll < 0.55) {
        cf.clear_filter(dims[d]);
        naive.set_filter(d, NoFilter{});
        label = "clear_filter";
      } else if (roll < 0.60) {
        cf.clear_all_filters();
        for (std::size_t i = 0; i < naive.dimension_count(); ++i) naive.set_filter(i, NoFilter{});
        label = "clear_all";
      } else if (roll < 0.72) {
        const std::string key = t.table->key(below(rng, t.table->row_count()));
        if (!key_index) {
          key_index = naive.add_dimension(t.table->column(t.table->key_column()).name, DimensionKind::Categorical);
          choices.push_back({t.table->column(t.table->key_column()).name, DimensionKind::Categorical});
        }
        const auto* current = std::get_if<KeyFilter>(&naive.filter(*key_index));
        if (current && current->keys == std::set<std::string>{key}) naive.set_filter(*key_index, NoFilter{});
        else naive.set_filter(*key_index, KeyFilter{{key}});
        cf.row_click(key);
        label = "row_click";
      } else if (roll < 0.82 && t.dims[d].kind == DimensionKind::Categorical) {
        const auto f = random_filter(rng, *t.table, t.dims[d]);
        const std::string value = std::holds_alternative<SetFilter>(f) ? *std::get<SetFilter>(f).values.begin() : "c0";
        SetFilter next;
        if (const auto* s = std::get_if<SetFilter>(&naive.filter(d))) next = *s;
        if (!next.values.erase(value)) next.values.insert(value);
        if (next.values.empty()) naive.set_filter(d, NoFilter{});
        else naive.set_filter(d, next);
        cf.toggle_member(dims[d], value);
        label = "toggle_member";
      } else if (roll < 0.92) {
        const FilterSpec before = cf.filter(dims[d]);
        try {
          cf.set_filter(dims[d], bad_filter(rng, t.dims[d]));
          oracle_out.fail("invalid filter accepted in trial " + std::to_string(trial));
        } catch (const Error&) {
          ++rejected;
        }
        label = "invalid";
      } else {
        cf.set_filter(dims[d], NoFilter{});
        naive.set_filter(d, NoFilter{});
        label = "no_filter";
      }

      const std::string where = " (trial " + std::to_string(trial) + ", " + label + ")";
      const auto [selected, total] = cf.selected_count();
      if (selected != naive.selected_count() || total != t.table->row_count()) {
        oracle_out.fail("selected " + std::to_string(selected) + " vs " + std::to_string(naive.selected_count()) + where);
      }
      for (std::size_t g = 0; g < groups.size(); ++g) {
        ++checks;
        const auto got = cf.read_group(groups[g]).bins;
        const bool sum = t.groups[g].second.second.kind == Reduction::Kind::Sum;
        std::string why;
        if (!same_bins(got, naive.read_group(g), sum, why)) oracle_out.fail(why + where);

        // Own-filter exclusion: the naive evaluator with this dimension's
        // filter removed, and a fresh engine built without it.
        const std::size_t own = t.groups[g].first;
        oracle::NaiveCrossfilter without = naive;
        without.set_filter(own, NoFilter{});
        if (!same_bins(got, without.read_group(g), sum, why)) exclusion_out.fail("naive: " + why + where);

        Crossfilter fresh(t.table);
        std::vector<DimensionId> fdims;
        for (const auto& dc : t.dims) fdims.push_back(fresh.create_dimension(dc.column, dc.kind));
        if (key_index) fdims.push_back(fresh.key_dimension());
        for (std::size_t i = 0; i < fdims.size(); ++i) {
          if (i != own) fresh.set_filter(fdims[i], cf.filter(i < dims.size() ? dims[i] : cf.key_dimension()));
        }
        const auto fg = fresh.create_group(fdims[own], t.groups[g].second.first, t.groups[g].second.second);
        if (!same_bins(got, as_pairs(fresh.read_group(fg).bins), sum, why)) exclusion_out.fail("fresh: " + why + where);
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 60.0) oracle_out.fail("runtime " + fmt("%.1f", secs) + " s");
  oracle_out.detail = "500 trials, " + std::to_string(commands) + " commands, " + std::to_string(checks) +
                      " group reads, " + std::to_string(rejected) + " invalid filters rejected, " + fmt("%.1f", secs) +
                      " s";
  exclusion_out.detail = std::to_string(checks) + " group reads vs naive without own filter and fresh engine";
  return {oracle_out, exclusion_out};
}

// ------------------------------------------------------------ tags

std::set<std::string> naive_split(const std::string& text) {
  std::set<std::string> out;
  std::string cur;
  auto flush = [&] {
    const auto b = cur.find_first_not_of(' ');
    const auto e = cur.find_last_not_of(' ');
    if (b != std::string::npos) out.insert(cur.substr(b, e - b + 1));
    cur.clear();
  };
  for (char ch : text) {
    if (ch == ',') flush();
    else cur += ch;
  }
  flush();
  return out;
}

Outcome tag_semantics() {
  Outcome out;
  Rng rng(77);
  const std::vector<std::string> vocab = {"blood", "liver", "lung", "kidney", "spleen", "heart"};
  const std::vector<std::string> seps = {", ", ",", " , ", ",  "};
  std::size_t checks = 0;
  for (int table_no = 0; table_no < 100; ++table_no) {
    const std::size_t n = 1 + below(rng, 200);
    std::vector<std::optional<std::string>> raw(n);
    std::vector<std::string> cats(n);
    std::vector<std::vector<Cell>> rows;
    for (std::size_t r = 0; r < n; ++r) {
      std::string text;
      if (r == 0) {
        text = "blood, liver, lung";
      } else {
        const std::size_t k = 1 + below(rng, 5);
        for (std::size_t i = 0; i < k; ++i) {
          if (i) text += seps[below(rng, seps.size())];
          text += vocab[below(rng, vocab.size())];
        }
      }
      if (r > 0 && chance(rng, 0.08)) raw[r] = std::nullopt;
      else raw[r] = text;
      cats[r] = "g" + std::to_string(below(rng, 3));
      rows.push_back({std::string("r" + std::to_string(r)), raw[r] ? Cell{*raw[r]} : Cell{std::monostate{}},
                      cats[r]});
    }
    const std::vector<ColumnSpec> specs = {{"id", ColumnKind::Text}, {"part", ColumnKind::TagList},
                                           {"grp", ColumnKind::Text}};
    auto table = std::make_shared<RecordTable>(build_table(specs, rows, "id"));
    Crossfilter cf(table);
    const auto tag_dim = cf.create_dimension("part", DimensionKind::Tag);
    const auto grp_dim = cf.create_dimension("grp", DimensionKind::Categorical);
    const auto tag_group = cf.create_group(tag_dim, Binning::identity(), Reduction::count());

    for (int step = 0; step < 8; ++step) {
      std::set<std::string> any;
      for (const auto& v : vocab) {
        if (chance(rng, 0.3)) any.insert(v);
      }
      std::optional<std::string> grp;
      if (chance(rng, 0.5)) grp = "g" + std::to_string(below(rng, 3));
      if (any.empty()) cf.clear_filter(tag_dim);
      else cf.set_filter(tag_dim, TagAnyFilter{any});
      if (grp) cf.set_filter(grp_dim, SetFilter{{*grp}});
      else cf.clear_filter(grp_dim);

      std::map<std::string, double> want;
      std::size_t selected = 0;
      for (std::size_t r = 0; r < n; ++r) {
        const bool grp_ok = !grp || cats[r] == *grp;
        const std::set<std::string> tags = raw[r] ? naive_split(*raw[r]) : std::set<std::string>{};
        bool tag_ok = any.empty();
        for (const auto& tg : tags) tag_ok = tag_ok || any.count(tg) > 0;
        if (!any.empty() && !raw[r]) tag_ok = false;
        if (grp_ok && tag_ok) ++selected;
        if (grp_ok) {
          for (const auto& tg : tags) want[tg] += 1.0;
        }
      }
      ++checks;
      if (cf.selected_count().first != selected) out.fail("table " + std::to_string(table_no) + ": selected count");
      std::vector<std::pair<BinKey, double>> want_bins;
      for (const auto& [k, v] : want) want_bins.emplace_back(k, v);
      std::string why;
      if (!same_bins(cf.read_group(tag_group).bins, want_bins, false, why)) {
        out.fail("table " + std::to_string(table_no) + ": " + why);
      }
    }

    // The multi-part record alone contributes exactly one unit to each part.
    cf.clear_all_filters();
    cf.row_click("r0");
    const auto bins = cf.read_group(tag_group).bins;
    const std::vector<std::pair<BinKey, double>> lone = {
        {std::string("blood"), 1.0}, {std::string("liver"), 1.0}, {std::string("lung"), 1.0}};
    std::string why;
    if (!same_bins(bins, lone, false, why)) out.fail("\"blood, liver, lung\" record: " + why);
  }
  out.detail = "100 tables, " + std::to_string(checks) + " filter states, multi-part record counts once per part";
  return out;
}

// ------------------------------------------------------------ geometry

Outcome geometry_predicates() {
  Outcome out;
  Rng rng(4242);
  std::size_t inside = 0, near_edge = 0, with_holes = 0;
  for (int pair = 0; pair < 1000; ++pair) {
    const Polygon poly = random_polygon(rng, {uniform(rng, -150, 150), uniform(rng, -60, 60)}, uniform(rng, 0.01, 10));
    with_holes += poly.rings.size() > 1 ? 1 : 0;
    GeoPoint pt;
    while (true) {
      if (pair % 2 == 0) {
        const BBox b = envelope(poly);
        const double pw = (b.east - b.west) * 0.2, ph = (b.north - b.south) * 0.2;
        pt = {uniform(rng, b.west - pw, b.east + pw), uniform(rng, b.south - ph, b.north + ph)};
      } else {
        const Ring& ring = poly.rings[below(rng, poly.rings.size())];
        const std::size_t i = below(rng, ring.size() - 1);
        const GeoPoint a = ring[i], b = ring[i + 1];
        const double s = uniform(rng, 0.05, 0.95);
        const double len = std::hypot(b.lon - a.lon, b.lat - a.lat);
        const double off = std::pow(10.0, uniform(rng, -8.5, -3)) * (chance(rng, 0.5) ? 1 : -1);
        pt = {a.lon + s * (b.lon - a.lon) - off * (b.lat - a.lat) / len,
              a.lat + s * (b.lat - a.lat) + off * (b.lon - a.lon) / len};
      }
      if (oracle::distance_to_boundary(pt, poly) >= 1e-9) break;
    }
    near_edge += oracle::distance_to_boundary(pt, poly) < 1e-3 ? 1 : 0;
    const bool want = oracle::polygon_contains(poly, pt);
    inside += want ? 1 : 0;
    if (point_in_polygon(pt, poly) != want || SpatialPredicate(poly)(pt) != want) {
      out.fail("pair " + std::to_string(pair) + " disagrees with winding number");
    }
  }

  // Circle filters through the engine against a direct haversine scan.
  std::size_t circle_rows = 0, ambiguous = 0;
  for (int c = 0; c < 50; ++c) {
    auto table = std::make_shared<RecordTable>(oracle::random_table(rng, {.rows = 200, .null_rate = 0.05}));
    Crossfilter cf(table);
    const auto loc = cf.create_dimension("loc", DimensionKind::Point);
    const Circle circle{{uniform(rng, -10, 10), uniform(rng, -10, 10)}, uniform(rng, 5e4, 1.5e6)};
    cf.set_filter(loc, SpatialFilter{circle});
    const Column& col = table->column("loc");
    for (std::size_t r = 0; r < table->row_count(); ++r) {
      ++circle_rows;
      const bool want = !col.is_null(r) && oracle::great_circle_m(circle.center, col.points[r]) <= circle.radius_m;
      if (!col.is_null(r) && std::abs(oracle::great_circle_m(circle.center, col.points[r]) - circle.radius_m) < 1e-6) {
        ++ambiguous;
        continue;
      }
      if (cf.is_selected(r) != want) out.fail("circle " + std::to_string(c) + " row " + std::to_string(r));
    }
  }
  out.detail = "1000 pairs (" + std::to_string(inside) + " inside, " + std::to_string(near_edge) +
               " within 1e-3 deg of an edge, " + std::to_string(with_holes) + " with holes); " +
               std::to_string(circle_rows) + " circle rows, " + std::to_string(ambiguous) + " on the rim skipped";
  return out;
}

// ------------------------------------------------------------ projections

struct Scales {
  double h = 0, k = 0, sigma = 0;
};

Scales local_scales(const ProjectionSpec& spec, GeoPoint pt, double radius) {
  const double step = 1e-6;  // radians
  const double deg = step * 180.0 / std::numbers::pi;
  const auto f = [&](double dlon, double dlat) { return project_forward(spec, {pt.lon + dlon, pt.lat + dlat}); };
  const auto e = f(deg, 0), w = f(-deg, 0), n = f(0, deg), s = f(0, -deg);
  const double xl = (e.x - w.x) / (2 * step), yl = (e.y - w.y) / (2 * step);
  const double xp = (n.x - s.x) / (2 * step), yp = (n.y - s.y) / (2 * step);
  const double cphi = std::cos(pt.lat * std::numbers::pi / 180.0);
  return {std::hypot(xp, yp) / radius, std::hypot(xl, yl) / (radius * cphi),
          std::abs(xl * yp - xp * yl) / (radius * radius * cphi)};
}

Outcome projection_numerics() {
  Outcome out;
  Rng rng(99);
  double worst_area = 0, worst_merc = 0, worst_stereo = 0, worst_origin = 0;
  for (int i = 0; i < 100; ++i) {
    AlbersConic a;
    if (i > 0) {
      a.parallel1 = uniform(rng, 5, 55);
      a.parallel2 = a.parallel1 + uniform(rng, 2, 25);
      a.origin_lat = uniform(rng, 0, 60);
      a.central_meridian = uniform(rng, -170, 170);
    }
    const GeoPoint pt{a.central_meridian + uniform(rng, -60, 60), uniform(rng, 10, 70)};
    worst_area = std::max(worst_area, std::abs(local_scales(a, pt, a.radius_m).sigma - 1.0));
  }
  for (int i = 0; i < 100; ++i) {
    const SphericalMercator m;
    const GeoPoint pt{uniform(rng, -179, 179), uniform(rng, -80, 80)};
    const Scales s = local_scales(m, pt, m.radius_m);
    worst_merc = std::max(worst_merc, std::abs(s.h / s.k - 1.0));
  }
  for (int i = 0; i < 100; ++i) {
    Stereographic st;
    if (i % 2) {
      st.origin_lat = uniform(rng, -89, 89);
      st.central_meridian = uniform(rng, -170, 170);
    }
    GeoPoint pt;
    do {
      pt = {uniform(rng, -179, 179), uniform(rng, -85, 85)};
    } while (oracle::great_circle_m({st.central_meridian, st.origin_lat}, pt, 1.0) > 80.0 * std::numbers::pi / 180.0);
    const Scales s = local_scales(st, pt, st.radius_m);
    worst_stereo = std::max(worst_stereo, std::abs(s.h / s.k - 1.0));
  }
  for (int i = 0; i < 100; ++i) {
    AlbersConic a;
    a.parallel1 = uniform(rng, -60, 60);
    a.parallel2 = a.parallel1 + uniform(rng, 1, 20);
    a.origin_lat = uniform(rng, -80, 80);
    a.central_meridian = uniform(rng, -180, 180);
    Stereographic st{uniform(rng, -90, 90), uniform(rng, -180, 180)};
    const Equirectangular eq{uniform(rng, -80, 80)};
    const std::vector<std::pair<ProjectionSpec, GeoPoint>> cases = {
        {SphericalMercator{}, {0, 0}},
        {eq, {0, 0}},
        {a, {a.central_meridian, a.origin_lat}},
        {st, {st.central_meridian, st.origin_lat}},
    };
    for (const auto& [spec, origin] : cases) {
      const auto p = project_forward(spec, origin);
      worst_origin = std::max({worst_origin, std::abs(p.x), std::abs(p.y)});
    }
  }
  if (!(worst_area < 1e-6)) out.fail("albers area scale");
  if (!(worst_merc < 1e-6)) out.fail("mercator conformality");
  if (!(worst_stereo < 1e-6)) out.fail("stereographic conformality");
  if (!(worst_origin <= 1e-12)) out.fail("origin offset");
  out.detail = "max |sigma-1| " + fmt("%.2e", worst_area) + ", mercator |h/k-1| " + fmt("%.2e", worst_merc) +
               ", stereographic |h/k-1| " + fmt("%.2e", worst_stereo) + ", origin " + fmt("%.2e", worst_origin) + " m";
  return out;
}

// ------------------------------------------------------------ jenks

Outcome jenks_exhaustive() {
  Outcome out;
  Rng rng(314);
  std::size_t datasets = 0, ties = 0, too_few = 0;
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::size_t k = 2; k <= 4; ++k) {
      for (int rep = 0; rep < 150; ++rep) {
        std::vector<double> v(n);
        const int style = rep % 3;
        for (double& x : v) {
          if (style == 0) x = static_cast<double>(below(rng, 12));
          else if (style == 1) x = uniform(rng, -100, 100);
          else x = std::round(std::lognormal_distribution<double>(0, 1.5)(rng) * 10) / 10;
        }
        ++datasets;
        const auto want = oracle::exhaustive_jenks(v, k);
        if (!want) {
          ++too_few;
          try {
            classify(v, ClassMethod::Jenks, k);
            out.fail("accepted too few distinct values");
          } catch (const Error& e) {
            if (e.code() != ErrorCode::NotEnoughDistinct) out.fail("wrong error for too few distinct values");
          }
          continue;
        }
        const auto got = classify(v, ClassMethod::Jenks, k).breaks;
        if (want->unique) {
          if (got != want->breaks) out.fail("n=" + std::to_string(n) + " k=" + std::to_string(k) + " breaks differ");
        } else {
          ++ties;
          const long double ssd = oracle::partition_ssd(v, got);
          if (ssd - want->ssd > 1e-9L * (1.0L + want->ssd)) out.fail("tied optimum not attained");
        }
      }
    }
  }
  out.detail = std::to_string(datasets) + " datasets (n<=12, k<=4), " + std::to_string(ties) +
               " with tied optima checked by SSD, " + std::to_string(too_few) + " rejected for too few values";
  return out;
}

// ------------------------------------------------------------ statistics

Outcome statistics_kernels() {
  Outcome out;
  Rng rng(2718);
  double worst_fit = 0, worst_resid = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + below(rng, 200);
    std::vector<XY> pts(n);
    const double slope = uniform(rng, -5, 5), icpt = uniform(rng, -50, 50), noise = uniform(rng, 0, 10);
    for (auto& p : pts) {
      p.x = uniform(rng, -10, 10);
      p.y = icpt + slope * p.x + std::normal_distribution<double>(0, noise)(rng);
    }
    const RegressionFit fit = linear_regression(pts);
    const oracle::NormalFit ne = oracle::normal_equations(pts);
    const double ds = std::abs(fit.slope - static_cast<double>(ne.slope)) / std::max(1.0L, std::abs(ne.slope));
    const double di =
        std::abs(fit.intercept - static_cast<double>(ne.intercept)) / std::max(1.0L, std::abs(ne.intercept));
    worst_fit = std::max({worst_fit, ds, di});
    long double r0 = 0, r1 = 0;
    for (const auto& p : pts) {
      const long double r = p.y - (fit.intercept + fit.slope * static_cast<long double>(p.x));
      r0 += r;
      r1 += r * p.x;
    }
    worst_resid = std::max({worst_resid, static_cast<double>(std::abs(r0)), static_cast<double>(std::abs(r1))});
  }
  if (!(worst_fit <= 1e-12)) out.fail("regression vs normal equations " + fmt("%.2e", worst_fit));
  if (!(worst_resid <= 1e-9)) out.fail("residual sums " + fmt("%.2e", worst_resid));

  std::size_t box_sets = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> v(1 + below(rng, 60));
    for (double& x : v) {
      x = t % 2 ? std::round(uniform(rng, 0, 20)) : std::lognormal_distribution<double>(1, 1)(rng);
    }
    if (t % 7 == 0) v.push_back(1e4);
    ++box_sets;
    const BoxplotStats got = boxplot_stats(v);
    const oracle::NaiveBox want = oracle::naive_boxplot(v);
    if (got.q1 != want.q1 || got.median != want.median || got.q3 != want.q3 || got.min_whisker != want.lo_whisker ||
        got.max_whisker != want.hi_whisker || got.outliers != want.outliers) {
      out.fail("boxplot set " + std::to_string(t));
    }
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int q = 0; q < 5; ++q) {
      const double p = uniform(rng, 0, 1);
      if (quantile_sorted(sorted, p) != oracle::sorted_quantile(sorted, p)) out.fail("quantile p=" + fmt("%.6f", p));
    }
  }

  std::size_t hist_values = 0;
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> v(below(rng, 60));
    for (double& x : v) {
      const double roll = uniform(rng, 0, 1);
      x = roll < 0.03 ? NAN : roll < 0.05 ? INFINITY : std::round(uniform(rng, -50, 50) * 4) / 4;
    }
    hist_values += v.size();
    HistogramSpec spec;
    spec.origin = uniform(rng, -3, 3);
    spec.bin_width = std::vector<double>{0.25, 0.5, 1, 2.5, 7, 10}[below(rng, 6)];
    if (chance(rng, 0.4)) {
      const double lo = uniform(rng, -60, 20);
      spec.domain = std::pair{lo, lo + uniform(rng, 0, 80)};
    }
    const HistogramResult h = histogram(v, spec);
    std::size_t total = h.dropped;
    for (const auto& b : h.bins) total += b.count;
    if (total != v.size()) out.fail("histogram conservation in set " + std::to_string(t));
    // Every counted value lands in the bin floor((v - origin) / width).
    double lo = 0, hi = 0;
    bool any = false;
    for (double x : v) {
      if (!std::isfinite(x)) continue;
      lo = any ? std::min(lo, x) : x;
      hi = any ? std::max(hi, x) : x;
      any = true;
    }
    hi += spec.bin_width;
    if (spec.domain) std::tie(lo, hi) = *spec.domain;
    std::map<double, std::size_t> want;
    std::size_t kept = 0;
    for (double x : v) {
      if (!std::isfinite(x) || x < lo || x >= hi) continue;
      ++kept;
      ++want[spec.origin + std::floor((x - spec.origin) / spec.bin_width) * spec.bin_width];
    }
    std::map<double, std::size_t> got;
    for (const auto& b : h.bins) {
      if (b.count) got[b.lo] = b.count;
    }
    if (got != want || h.dropped != v.size() - kept) out.fail("histogram bins in set " + std::to_string(t));
  }
  out.detail = "1000 fits (max rel diff " + fmt("%.1e", worst_fit) + ", max residual sum " + fmt("%.1e", worst_resid) +
               "), " + std::to_string(box_sets) + " boxplots, 5000 quantiles, 10000 histograms over " +
               std::to_string(hist_values) + " values";
  return out;
}

// ------------------------------------------------------------ heat grid

Outcome heat_conservation() {
  Outcome out;
  Rng rng(1618);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + below(rng, 500);
    const double lon0 = uniform(rng, -170, 170), lat0 = uniform(rng, -70, 70), span = uniform(rng, 0.001, 0.5);
    std::vector<WeightedPoint> pts(n);
    double total = 0;
    for (auto& p : pts) {
      p = {{lon0 + uniform(rng, 0, span), lat0 + uniform(rng, 0, span)}, uniform(rng, 0.1, 5)};
      total += p.weight;
    }
    const double cell = uniform(rng, 50, 800);
    const double radius = uniform(rng, cell / 2, 6 * cell);
    const HeatGrid g = heat_grid(pts, cell, radius, HeatMode::Global);
    worst = std::max(worst, std::abs(g.total() - total) / total);
  }
  if (!(worst < 1e-6)) out.fail("relative mass error " + fmt("%.2e", worst));

  // Local grids from the session against a global grid over the same rows.
  const auto bundle = std::make_shared<const AppBundle>(synth::crash_bundle(6000, 3, true).load());
  Session s = Session::create(bundle);
  const std::vector<json> steps = {
      {{"cmd", "SetFilter"}, {"view", "severity_select"}, {"filter", {{"type", "set"}, {"values", {"Fatal", "Suspected Serious Injury"}}}}},
      {{"cmd", "SetFilter"}, {"view", "hour_hist"}, {"filter", {{"type", "range"}, {"lo", 16}, {"hi", 22}}}},
      {{"cmd", "SpatialSelect"}, {"map", "crash_map"}, {"geometry", {{"type", "BBox"}, {"bbox", {-106.7, 35.0, -106.58, 35.12}}}}},
      {{"cmd", "ClearFilter"}, {"view", "severity_select"}},
  };
  const Column& loc = s.engine().table().column("location");
  std::size_t compared = 0;
  for (const json& step : steps) {
    s.dispatch(codec::command_from_json(step));
    const auto notes = s.dispatch(command::QueryHeatmap{"crash_heat", HeatMode::Local});
    json local = std::get<ViewUpdate>(notes.at(0)).payload;
    std::vector<WeightedPoint> subset;
    for (std::size_t r : s.engine().selected_rows()) {
      if (!loc.is_null(r)) subset.push_back({loc.points[r], 1.0});
    }
    json global = codec::to_json(heat_grid(subset, local["cell_size"].get<double>(),
                                           local["kernel_radius"].get<double>(), HeatMode::Global));
    local.erase("mode");
    local.erase("kernel_radius");
    global.erase("mode");
    if (codec::dump(local) != codec::dump(global)) out.fail("local grid differs after " + step["cmd"].get<std::string>());
    ++compared;
  }
  out.detail = "100 point sets (max relative mass error " + fmt("%.1e", worst) + "), " + std::to_string(compared) +
               " filtered local grids equal global grids over the subset";
  return out;
}

// ------------------------------------------------------------ desk-scale states

struct ScriptStep {
  json command;
  std::function<bool(std::size_t)> keep;  // row predicate applied from here on; null clears all
};

std::string write_script(const fs::path& path, const std::vector<json>& lines) {
  std::string text;
  for (const json& l : lines) text += l.dump() + "\n";
  std::ofstream(path) << text;
  return text;
}

Outcome desk_scale() {
  Outcome out;
  std::string notes;

  const auto tracts = std::make_shared<const AppBundle>(synth::tract_bundle(1).load());
  Session ts = Session::create(tracts);
  const std::string tract_text = ts.query_view("status").payload.value("text", "");
  if (tract_text != "612 selected out of 612 records") out.fail("tracts report '" + tract_text + "'");
  notes += "tracts: \"" + tract_text + "\"";

  const auto crash_gen = synth::crash_bundle(synth::kCrashCount, 1, true);
  const auto crashes = std::make_shared<const AppBundle>(crash_gen.load());
  Session cs = Session::create(crashes);
  const StatusUpdate st = cs.status();
  if (st.selected != 68772 || st.total != 68772) out.fail("crashes report " + std::to_string(st.selected));
  notes += "; crashes: (" + std::to_string(st.selected) + ", " + std::to_string(st.total) + ")";

  // Scripted filters on the crash bundle with counts derived by direct scans.
  const RecordTable& t = cs.engine().table();
  const Column& date = t.column("crash_date");
  const Column& severity = t.column("severity");
  const Column& alcohol = t.column("alcohol");
  const Column& hour = t.column("hour");
  const Column& loc = t.column("location");
  const double d0 = parse_iso_date("2015-01-01")->days, d1 = parse_iso_date("2017-07-01")->days;

  std::vector<std::function<bool(std::size_t)>> active(6);
  enum { kDate, kSeverity, kAlcohol, kSpatial, kHour, kKey };
  std::vector<json> script;
  std::uint64_t revision = 0;
  auto expect = [&] {
    std::size_t n = 0;
    for (std::size_t r = 0; r < t.row_count(); ++r) {
      bool ok = true;
      for (const auto& f : active) ok = ok && (!f || f(r));
      n += ok ? 1 : 0;
    }
    script.push_back({{"cmd", "Expect"}, {"selected", n}, {"total", t.row_count()}, {"revision", revision}});
  };
  auto push = [&](json cmd) {
    script.push_back(std::move(cmd));
    ++revision;
    expect();
  };

  active[kDate] = [&](std::size_t r) { return !date.is_null(r) && date.numbers[r] >= d0 && date.numbers[r] < d1; };
  push({{"cmd", "SetFilter"}, {"view", "crash_date"}, {"filter", {{"type", "range"}, {"lo", "2015-01-01"}, {"hi", "2017-07-01"}}}});
  active[kSeverity] = [&](std::size_t r) {
    return !severity.is_null(r) && (severity.texts[r] == "Fatal" || severity.texts[r] == "Suspected Serious Injury");
  };
  push({{"cmd", "SetFilter"}, {"view", "severity_select"}, {"filter", {{"type", "set"}, {"values", {"Fatal", "Suspected Serious Injury"}}}}});
  active[kAlcohol] = [&](std::size_t r) { return !alcohol.is_null(r) && alcohol.texts[r] == "Yes"; };
  push({{"cmd", "SetFilter"}, {"view", "alcohol_row"}, {"filter", {{"type", "set"}, {"values", {"Yes"}}}}});
  active[kSpatial] = [&](std::size_t r) {
    const GeoPoint p = loc.points[r];
    return !loc.is_null(r) && p.lon >= -106.70 && p.lon <= -106.55 && p.lat >= 35.02 && p.lat <= 35.14;
  };
  push({{"cmd", "SpatialSelect"}, {"map", "crash_map"}, {"geometry", {{"type", "BBox"}, {"bbox", {-106.70, 35.02, -106.55, 35.14}}}}});
  active[kHour] = [&](std::size_t r) { return !hour.is_null(r) && hour.numbers[r] >= 18 && hour.numbers[r] < 24; };
  push({{"cmd", "SetFilter"}, {"view", "hour_hist"}, {"filter", {{"type", "range"}, {"lo", 18}, {"hi", 24}}}});
  active[kSeverity] = nullptr;
  push({{"cmd", "ClearFilter"}, {"view", "severity_select"}});
  active[kAlcohol] = nullptr;
  push({{"cmd", "ClearFilter"}, {"view", "alcohol_row"}});
  std::string clicked;
  for (std::size_t r = 0; r < t.row_count() && clicked.empty(); ++r) {
    if (active[kDate](r) && active[kSpatial](r) && active[kHour](r)) clicked = t.key(r);
  }
  active[kKey] = [&](std::size_t r) { return t.key(r) == clicked; };
  push({{"cmd", "RowClick"}, {"key", clicked}});
  active[kKey] = nullptr;
  push({{"cmd", "RowClick"}, {"key", clicked}});
  active[kSpatial] = nullptr;
  push({{"cmd", "ClearSpatial"}, {"map", "crash_map"}});
  std::fill(active.begin(), active.end(), nullptr);
  push({{"cmd", "ClearAll"}});

  const fs::path dir = scratch("desk");
  crash_gen.write(dir / "crashes");
  write_script(dir / "crashes.jsonl", script);
  std::ostringstream run1, run2, err1, err2;
  const int rc1 = cli::run_query(dir / "crashes", dir / "crashes.jsonl", {}, run1, err1);
  const int rc2 = cli::run_query(dir / "crashes", dir / "crashes.jsonl", {}, run2, err2);
  if (rc1 != cli::kOk || rc2 != cli::kOk) out.fail("crash script expectations: " + err1.str());
  if (run1.str() != run2.str()) out.fail("crash script output differs between runs");

  // Tract filters, counted the same way.
  synth::tract_bundle(1).write(dir / "tracts");
  const RecordTable& tt = ts.engine().table();
  const Column& county = tt.column("county");
  const Column& poverty = tt.column("poverty_rate");
  const Column& disadvantaged = tt.column("disadvantaged");
  std::vector<json> tract_script;
  const std::string c0 = county.texts[0];
  auto count_tracts = [&](auto pred) {
    std::size_t n = 0;
    for (std::size_t r = 0; r < tt.row_count(); ++r) n += pred(r) ? 1 : 0;
    return n;
  };
  auto in_county = [&](std::size_t r) { return !county.is_null(r) && county.texts[r] == c0; };
  auto poor = [&](std::size_t r) { return !poverty.is_null(r) && poverty.numbers[r] >= 20 && poverty.numbers[r] < 40; };
  auto flagged = [&](std::size_t r) { return !disadvantaged.is_null(r) && tt.cell_text(r, *tt.column_index("disadvantaged")) == "Yes"; };
  tract_script.push_back({{"cmd", "SetFilter"}, {"view", "county_bar"}, {"filter", {{"type", "set"}, {"values", {c0}}}}});
  tract_script.push_back({{"cmd", "Expect"}, {"selected", count_tracts(in_county)}, {"revision", 1}});
  tract_script.push_back({{"cmd", "SetFilter"}, {"view", "poverty_hist"}, {"filter", {{"type", "range"}, {"lo", 20}, {"hi", 40}}}});
  tract_script.push_back({{"cmd", "Expect"}, {"selected", count_tracts([&](std::size_t r) { return in_county(r) && poor(r); })}});
  tract_script.push_back({{"cmd", "ClearFilter"}, {"view", "county_bar"}});
  tract_script.push_back({{"cmd", "SetFilter"}, {"view", "disadvantaged_donut"}, {"filter", {{"type", "set"}, {"values", {"Yes"}}}}});
  tract_script.push_back({{"cmd", "Expect"}, {"selected", count_tracts([&](std::size_t r) { return poor(r) && flagged(r); })}, {"total", 612}, {"revision", 4}});
  write_script(dir / "tracts.jsonl", tract_script);
  std::ostringstream tr1, tr2, te1, te2;
  const int trc1 = cli::run_query(dir / "tracts", dir / "tracts.jsonl", {}, tr1, te1);
  const int trc2 = cli::run_query(dir / "tracts", dir / "tracts.jsonl", {}, tr2, te2);
  if (trc1 != cli::kOk || trc2 != cli::kOk) out.fail("tract script expectations: " + te1.str());
  if (tr1.str() != tr2.str()) out.fail("tract script output differs between runs");

  out.detail = notes + "; " + std::to_string(revision) + "-step crash script and 4-step tract script match scanned " +
               "counts, outputs byte-identical across two runs";
  return out;
}

// ------------------------------------------------------------ performance

Outcome performance_budget() {
  Outcome out;
  cli::BenchOptions opts;
  std::ostringstream report, err;
  if (cli::run_bench(opts, report, err) != cli::kOk) {
    out.fail("bench failed: " + err.str());
    return out;
  }
  const json r = json::parse(report.str());
  const double median = r["range_filter"]["median_ms"].get<double>();
  if (r["records"] != 68772) out.fail("record count");
  if (r["groups"] != 8) out.fail("group count");
  if (!(median < 100.0)) out.fail("range-filter median " + fmt("%.2f", median) + " ms");
  out.detail = std::to_string(r["records"].get<std::size_t>()) + " records, " +
               std::to_string(r["groups"].get<std::size_t>()) + " groups, range-filter median " + fmt("%.2f", median) +
               " ms over " + std::to_string(r["range_filter"]["samples"].get<std::size_t>()) + " samples (all ops median " +
               fmt("%.2f", r["median_ms"].get<double>()) + " ms, p95 " + fmt("%.2f", r["p95_ms"].get<double>()) + " ms)";
  return out;
}

// ------------------------------------------------------------ determinism

Outcome determinism() {
  Outcome out;
  const fs::path dir = scratch("determinism");
  synth::tract_bundle(5).write(dir / "tracts");
  const std::vector<json> head = {
      {{"cmd", "SetFilter"}, {"view", "county_bar"}, {"filter", {{"type", "set"}, {"values", {"Bernalillo", "Santa Fe", "Dona Ana"}}}}},
      {{"cmd", "SetVariable"}, {"map", "svi_map"}, {"column", "svi_housing"}},
      {{"cmd", "SetBinWidth"}, {"view", "poverty_hist"}, {"width", 2.5}},
      {{"cmd", "SetProjection"}, {"view", "food_map"}, {"projection", "stereographic"}},
      {{"cmd", "SetFilter"}, {"view", "poverty_hist"}, {"filter", {{"type", "range"}, {"lo", 10}, {"hi", 30}}}},
  };
  const std::vector<json> tail = {
      {{"cmd", "QueryTable"}, {"sort", {{"column", "median_income"}, {"order", "desc"}}}, {"limit", 10}},
      {{"cmd", "SetAxes"}, {"view", "income_scatter"}, {"x", "snap_pct"}, {"y", "energy_burden"}},
      {{"cmd", "SetFilter"}, {"view", "urban_donut"}, {"filter", {{"type", "set"}, {"values", {"Urban"}}}}},
      {{"cmd", "QueryView"}, {"view", "svi_box"}},
      {{"cmd", "ClearFilter"}, {"view", "county_bar"}},
      {{"cmd", "SetVariable"}, {"map", "cejst_map"}, {"column", "pm25"}},
      {{"cmd", "QueryView"}, {"view", "projection_multiples"}},
      {{"cmd", "ClearAll"}},
      {{"cmd", "QueryStatus"}},
  };
  std::vector<json> full = head;
  full.insert(full.end(), tail.begin(), tail.end());
  write_script(dir / "head.jsonl", head);
  write_script(dir / "tail.jsonl", tail);
  write_script(dir / "full.jsonl", full);

  cli::QueryOptions fs_opts;
  fs_opts.full_state = true;
  std::ostringstream a, b, e;
  cli::run_query(dir / "tracts", dir / "full.jsonl", fs_opts, a, e);
  cli::run_query(dir / "tracts", dir / "full.jsonl", fs_opts, b, e);
  if (a.str() != b.str() || a.str().empty()) out.fail("query output differs between runs");

  std::ostringstream whole, head_out, restored;
  cli::QueryOptions snap_opts;
  snap_opts.snapshot_to = dir / "snap.json";
  cli::run_query(dir / "tracts", dir / "full.jsonl", {}, whole, e);
  const int rc_head = cli::run_query(dir / "tracts", dir / "head.jsonl", snap_opts, head_out, e);
  cli::QueryOptions restore_opts;
  restore_opts.restore_from = dir / "snap.json";
  const int rc_restore = cli::run_query(dir / "tracts", dir / "tail.jsonl", restore_opts, restored, e);
  if (rc_head != cli::kOk || rc_restore != cli::kOk) out.fail("snapshot round trip exit codes: " + e.str());
  const auto whole_lines = lines_of(whole.str());
  const auto head_lines = lines_of(head_out.str());
  const auto restored_lines = lines_of(restored.str());
  const std::vector<std::string> replay_tail(whole_lines.begin() + static_cast<std::ptrdiff_t>(head_lines.size()),
                                             whole_lines.end());
  const std::vector<std::string> restore_tail(restored_lines.begin() + 1, restored_lines.end());
  if (!std::equal(head_lines.begin(), head_lines.end(), whole_lines.begin())) out.fail("head prefix differs");
  if (replay_tail != restore_tail) out.fail("restored session diverges from replay");

  // Session level: restore at revision 5 equals replay to revision 5.
  const auto bundle = std::make_shared<const AppBundle>(load_bundle(dir / "tracts"));
  Session replay = Session::create(bundle);
  for (const json& cmd : head) replay.dispatch(codec::command_from_json(cmd));
  std::ifstream snap_in(dir / "snap.json");
  const json snap = json::parse(snap_in);
  Session restored_session = Session::restore(bundle, snap);
  auto dump_all = [](const std::vector<Notification>& notes) {
    std::string s;
    for (const auto& n : notes) s += codec::dump(codec::to_json(n)) + "\n";
    return s;
  };
  if (replay.revision() != 5 || restored_session.revision() != 5) out.fail("revision after head is not 5");
  if (dump_all(replay.full_state()) != dump_all(restored_session.full_state())) out.fail("full state differs");
  if (codec::dump(replay.snapshot()) != codec::dump(restored_session.snapshot())) out.fail("snapshot differs");
  std::size_t compared = 0;
  for (const json& cmd : tail) {
    const Command c = codec::command_from_json(cmd);
    if (dump_all(replay.dispatch(c)) != dump_all(restored_session.dispatch(c))) out.fail("diverged on " + cmd.dump());
    ++compared;
  }
  out.detail = std::to_string(lines_of(a.str()).size()) + "-line query output identical across runs; restore at " +
               "revision 5 matches replay over " + std::to_string(compared) + " further commands";
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  std::optional<std::pair<Outcome, Outcome>> cf;
  auto cf_suite = [&]() -> std::pair<Outcome, Outcome>& {
    if (!cf) cf = crossfilter_suite();
    return *cf;
  };
  const std::vector<Criterion> criteria = {
      {"crossfilter-oracle", [&] { return cf_suite().first; }},
      {"own-filter-exclusion", [&] { return cf_suite().second; }},
      {"tag-semantics", tag_semantics},
      {"geometry-predicates", geometry_predicates},
      {"projection-numerics", projection_numerics},
      {"jenks-exhaustive", jenks_exhaustive},
      {"statistics-kernels", statistics_kernels},
      {"heatgrid-conservation", heat_conservation},
      {"desk-scale-states", desk_scale},
      {"performance-budget", performance_budget},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s  %-22s %s%s%s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                o.pass ? "" : " | first failure: ", o.first_failure.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
