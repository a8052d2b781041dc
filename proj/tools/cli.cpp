#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "coordlens/bundle.hpp"
#include "coordlens/classify.hpp"
#include "coordlens/codec.hpp"
#include "coordlens/error.hpp"
#include "coordlens/heatgrid.hpp"
#include "coordlens/projection.hpp"
#include "coordlens/session.hpp"
#include "coordlens/synth.hpp"

namespace coordlens::cli {

using nlohmann::json;

namespace {

std::optional<std::string> read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_error(std::ostream& err, const Error& e) { err << "error: " << to_string(e.code()) << ": " << e.what() << "\n"; }

/// Loads a bundle; environment problems come back as exit code 2.
std::optional<std::shared_ptr<const AppBundle>> open_bundle(const std::filesystem::path& path, std::ostream& err) {
  try {
    return std::make_shared<const AppBundle>(load_bundle(path));
  } catch (const Error& e) {
    print_error(err, e);
    return std::nullopt;
  }
}

std::optional<Session> open_session(std::shared_ptr<const AppBundle> bundle, std::ostream& err) {
  try {
    return Session::create(std::move(bundle));
  } catch (const BundleInvalidError& e) {
    err << "error: BundleInvalid: " << e.what() << "\n" << codec::dump(e.report().to_json()) << "\n";
  }
  return std::nullopt;
}

struct ScriptLine {
  std::size_t line_no = 0;
  json value;
};

/// Blank lines and lines starting with '#' are skipped.
std::vector<ScriptLine> split_script(const std::string& text) {
  std::vector<ScriptLine> lines;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.push_back({n, json::parse(line, nullptr, false)});
  }
  return lines;
}

/// Runs script lines against the session, writing notifications to `out`
/// when given. Returns false when any command failed or an Expect missed.
bool run_script(Session& session, const std::vector<ScriptLine>& lines, std::ostream* out, std::ostream& err) {
  bool ok = true;
  for (const ScriptLine& line : lines) {
    if (line.value.is_discarded()) {
      const ErrorNotice notice{session.revision(), ErrorCode::InvalidCommand,
                               "line " + std::to_string(line.line_no) + " is not valid JSON"};
      if (out) *out << codec::dump(codec::to_json(Notification{notice})) << "\n";
      err << "error: line " << line.line_no << ": not valid JSON\n";
      ok = false;
      continue;
    }
    if (line.value.is_object() && line.value.value("cmd", "") == "Expect") {
      const StatusUpdate s = session.status();
      std::string failure;
      if (line.value.contains("selected") && line.value["selected"] != s.selected) {
        failure = "selected " + std::to_string(s.selected) + ", expected " + line.value["selected"].dump();
      } else if (line.value.contains("total") && line.value["total"] != s.total) {
        failure = "total " + std::to_string(s.total) + ", expected " + line.value["total"].dump();
      } else if (line.value.contains("revision") && line.value["revision"] != s.revision) {
        failure = "revision " + std::to_string(s.revision) + ", expected " + line.value["revision"].dump();
      }
      if (!failure.empty()) {
        err << "expect failed at line " << line.line_no << ": " << failure << "\n";
        ok = false;
      }
      continue;
    }
    std::vector<Notification> notes;
    try {
      notes = session.dispatch(codec::command_from_json(line.value));
    } catch (const Error& e) {
      notes = {ErrorNotice{session.revision(), e.code(), e.what()}};
    }
    for (const Notification& n : notes) {
      if (const auto* e = std::get_if<ErrorNotice>(&n)) {
        err << "error: line " << line.line_no << ": " << to_string(e->code) << ": " << e->message << "\n";
        ok = false;
      }
      if (out) *out << codec::dump(codec::to_json(n)) << "\n";
    }
  }
  return ok;
}

const ViewSpec* find_map(const AppBundle& bundle, const std::string& id, std::ostream& err) {
  const ViewSpec* v = bundle.find_view(id);
  if (!v) err << "error: UnknownView: unknown view '" << id << "'\n";
  return v;
}

// ---------------------------------------------------------------- bench

bool has_group(ViewKind kind) {
  switch (kind) {
    case ViewKind::PropSymbolMap:
    case ViewKind::Histogram:
    case ViewKind::Donut:
    case ViewKind::RowChart:
    case ViewKind::BarChart:
    case ViewKind::SelectMenu:
    case ViewKind::DateSlider: return true;
    default: return false;
  }
}

struct BenchTarget {
  std::string view;
  DimensionKind kind;
  std::string column;
  double lo = 0.0;
  double hi = 0.0;
  bool integral = false;
  std::vector<std::string> values;
};

std::vector<BenchTarget> bench_targets(const Session& session) {
  const RecordTable& table = session.engine().table();
  std::vector<BenchTarget> targets;
  for (const ViewSpec& v : session.bundle().views) {
    auto dim = session.view_dimension(v.id);
    if (!dim) continue;
    const DimensionKind kind = session.engine().dimension_kind(*dim);
    if (kind == DimensionKind::Point) continue;
    if (v.kind == ViewKind::Scatter) continue;
    BenchTarget t;
    t.view = v.id;
    t.kind = kind;
    t.column = session.engine().dimension_column(*dim);
    const Column& col = table.column(t.column);
    if (kind == DimensionKind::Scalar) {
      t.lo = INFINITY;
      t.hi = -INFINITY;
      for (std::size_t r = 0; r < table.row_count(); ++r) {
        if (col.is_null(r)) continue;
        t.lo = std::min(t.lo, col.numbers[r]);
        t.hi = std::max(t.hi, col.numbers[r]);
      }
      if (!(t.lo <= t.hi)) continue;
      t.integral = col.kind == ColumnKind::Date;
    } else {
      std::set<std::string> distinct;
      const auto idx = *table.column_index(t.column);
      for (std::size_t r = 0; r < table.row_count(); ++r) {
        if (col.is_null(r)) continue;
        if (kind == DimensionKind::Tag) distinct.insert(col.tags[r].begin(), col.tags[r].end());
        else distinct.insert(table.cell_text(r, idx));
      }
      t.values.assign(distinct.begin(), distinct.end());
      if (t.values.empty()) continue;
    }
    targets.push_back(std::move(t));
  }
  return targets;
}

Command random_command(synth::Rng& rng, const std::vector<BenchTarget>& targets) {
  const double u = rng.uniform();
  if (u < 0.03) return command::ClearAll{};
  const BenchTarget& t = targets[rng.below(targets.size())];
  if (u < 0.13) return command::ClearFilter{t.view};
  if (t.kind == DimensionKind::Scalar) {
    double lo = t.lo + rng.uniform() * (t.hi - t.lo);
    double hi = lo + rng.uniform() * (t.hi - lo) + 1.0;
    if (t.integral) {
      lo = std::floor(lo);
      hi = std::floor(hi);
    }
    return command::SetFilter{t.view, RangeFilter{lo, hi}};
  }
  std::set<std::string> chosen{t.values[rng.below(t.values.size())]};
  if (rng.uniform() < 0.4) chosen.insert(t.values[rng.below(t.values.size())]);
  if (t.kind == DimensionKind::Tag) return command::SetFilter{t.view, TagAnyFilter{chosen}};
  return command::SetFilter{t.view, SetFilter{chosen}};
}

double percentile(std::vector<double> samples, double p) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  return quantile_sorted(samples, p);
}

std::string csv_number(double v) { return format_number(v); }

}  // namespace

std::uint64_t effective_seed(std::uint64_t flag_seed) {
  if (const char* env = std::getenv("COORDLENS_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return v;
  }
  return flag_seed;
}

int run_validate(const std::filesystem::path& bundle_path, std::ostream& out, std::ostream& err) {
  auto bundle = open_bundle(bundle_path, err);
  if (!bundle) return kEnvironmentFailure;
  const ValidationReport report = validate_bundle(**bundle);
  out << codec::dump(report.to_json()) << "\n";
  for (const Diagnostic& d : report.errors) err << "error: " << d.where << ": " << d.message << "\n";
  for (const Diagnostic& d : report.warnings) err << "warning: " << d.where << ": " << d.message << "\n";
  return report.ok() ? kOk : kDomainFailure;
}

int run_query(const std::filesystem::path& bundle_path, const std::filesystem::path& script_path,
              const QueryOptions& options, std::ostream& out, std::ostream& err) {
  auto bundle = open_bundle(bundle_path, err);
  if (!bundle) return kEnvironmentFailure;
  const auto script = read_text(script_path);
  if (!script) {
    err << "error: IoError: cannot read script '" << script_path.string() << "'\n";
    return kEnvironmentFailure;
  }
  std::optional<Session> session;
  if (options.restore_from) {
    const auto snap_text = read_text(*options.restore_from);
    if (!snap_text) {
      err << "error: IoError: cannot read snapshot '" << options.restore_from->string() << "'\n";
      return kEnvironmentFailure;
    }
    const json snap = json::parse(*snap_text, nullptr, false);
    try {
      session = Session::restore(*bundle, snap);
    } catch (const BundleInvalidError& e) {
      err << "error: BundleInvalid: " << e.what() << "\n";
      return kDomainFailure;
    } catch (const Error& e) {
      print_error(err, e);
      return kDomainFailure;
    }
  } else {
    session = open_session(*bundle, err);
    if (!session) return kDomainFailure;
  }

  if (options.full_state) {
    for (const Notification& n : session->full_state()) out << codec::dump(codec::to_json(n)) << "\n";
  } else {
    out << codec::dump(codec::to_json(Notification{session->status()})) << "\n";
  }
  const bool ok = run_script(*session, split_script(*script), &out, err);
  if (options.snapshot_to) {
    std::ofstream snap(*options.snapshot_to, std::ios::binary);
    snap << session->snapshot().dump() << "\n";
    if (!snap) {
      err << "error: IoError: cannot write snapshot '" << options.snapshot_to->string() << "'\n";
      return kEnvironmentFailure;
    }
  }
  return ok ? kOk : kDomainFailure;
}

int run_bench(const BenchOptions& options, std::ostream& out, std::ostream& err) {
  if (options.ops == 0 || (!options.bundle && options.records == 0)) {
    err << "error: InvalidRange: --records and --ops must be positive\n";
    return kDomainFailure;
  }
  std::shared_ptr<const AppBundle> bundle;
  if (options.bundle) {
    auto loaded = open_bundle(*options.bundle, err);
    if (!loaded) return kEnvironmentFailure;
    bundle = *loaded;
  } else {
    bundle = std::make_shared<const AppBundle>(synth::crash_bundle(options.records, options.seed, false).load());
  }
  auto session = open_session(bundle, err);
  if (!session) return kDomainFailure;
  const auto targets = bench_targets(*session);
  if (targets.empty()) {
    err << "error: NotApplicable: bundle has no filterable views\n";
    return kDomainFailure;
  }

  synth::Rng rng(options.seed);
  std::vector<Command> log;
  for (std::size_t i = 0; i < options.ops; ++i) log.push_back(random_command(rng, targets));
  std::string log_text;
  for (const Command& c : log) log_text += codec::dump(codec::to_json(c)) + "\n";
  if (options.print_log) {
    out << log_text;
    return kOk;
  }

  std::vector<double> all;
  std::vector<double> range;
  std::size_t errors = 0;
  for (const Command& c : log) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto notes = session->dispatch(c);
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    all.push_back(ms);
    if (const auto* sf = std::get_if<command::SetFilter>(&c); sf && std::holds_alternative<RangeFilter>(sf->filter)) {
      range.push_back(ms);
    }
    for (const Notification& n : notes) errors += std::holds_alternative<ErrorNotice>(n) ? 1 : 0;
  }
  std::size_t groups = 0;
  for (const ViewSpec& v : bundle->views) groups += has_group(v.kind) ? 1 : 0;
  const auto [selected, total] = session->engine().selected_count();
  json report = {{"records", total},
                 {"ops", options.ops},
                 {"seed", options.seed},
                 {"groups", groups},
                 {"views", bundle->views.size()},
                 {"samples", all.size()},
                 {"errors", errors},
                 {"final_selected", selected},
                 {"median_ms", percentile(all, 0.5)},
                 {"p95_ms", percentile(all, 0.95)},
                 {"max_ms", all.empty() ? 0.0 : *std::max_element(all.begin(), all.end())},
                 {"range_filter", {{"samples", range.size()},
                                   {"median_ms", percentile(range, 0.5)},
                                   {"p95_ms", percentile(range, 0.95)}}},
                 {"command_log_sha256", sha256_hex(log_text)}};
  out << report.dump() << "\n";
  return kOk;
}

int run_classify(const std::filesystem::path& bundle_path, const std::string& map_id, const ClassifyOptions& options,
                 std::ostream& out, std::ostream& err) {
  auto loaded = open_bundle(bundle_path, err);
  if (!loaded) return kEnvironmentFailure;
  const AppBundle& bundle = **loaded;
  const ValidationReport report = validate_bundle(bundle);
  if (!report.ok()) {
    err << "error: BundleInvalid: " << codec::dump(report.to_json()) << "\n";
    return kDomainFailure;
  }
  const ViewSpec* view = find_map(bundle, map_id, err);
  if (!view) return kDomainFailure;
  if (view->kind != ViewKind::ChoroplethMap && view->kind != ViewKind::SmallMultiples) {
    err << "error: KindMismatch: view '" << map_id << "' is a " << to_string(view->kind) << ", not a choropleth\n";
    return kDomainFailure;
  }
  const json& o = view->options;
  const std::string variable = options.variable.value_or(o["variables"][0].get<std::string>());
  const auto method = parse_class_method(options.method.value_or(o.value("method", "quantile")));
  if (!method) {
    err << "error: InvalidCommand: unknown method\n";
    return kDomainFailure;
  }
  const std::size_t k = options.k.value_or(static_cast<std::size_t>(o.value("k", 5)));
  const bool sum = o.value("aggregate", "mean") == "sum";

  try {
    const RecordTable& table = *bundle.records();
    const Column& value = table.column(variable);
    if (value.kind != ColumnKind::Number) throw Error(ErrorCode::KindMismatch, "column '" + variable + "' is not numeric");
    const std::size_t region_col = *table.column_index(*view->binding("region"));
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (std::size_t r = 0; r < table.row_count(); ++r) {
      if (table.column(region_col).is_null(r) || value.is_null(r) || !std::isfinite(value.numbers[r])) continue;
      auto& [s, n] = acc[table.cell_text(r, region_col)];
      s += value.numbers[r];
      ++n;
    }
    std::map<std::string, double> region_value;
    std::vector<double> values;
    for (const auto& [key, sn] : acc) {
      const double v = sum ? sn.first : sn.first / static_cast<double>(sn.second);
      region_value.emplace(key, v);
      values.push_back(v);
    }
    const ClassBreaks breaks = classify(values, *method, k);
    json features = json::array();
    const FeatureSet& fs = *bundle.feature_sets.at(*view->binding("features"));
    for (const Feature& f : fs.features) {
      auto it = region_value.find(f.key);
      json entry = {{"key", f.key}, {"value", nullptr}, {"class", nullptr}};
      if (it != region_value.end()) {
        entry["value"] = it->second;
        if (auto cls = assign_class(it->second, breaks.breaks)) entry["class"] = *cls;
      }
      features.push_back(std::move(entry));
    }
    json result = codec::to_json(breaks);
    result["map"] = map_id;
    result["variable"] = variable;
    result["features"] = std::move(features);
    out << codec::dump(result) << "\n";
  } catch (const Error& e) {
    print_error(err, e);
    return kDomainFailure;
  }
  return kOk;
}

int run_heatgrid(const std::filesystem::path& bundle_path, const std::string& map_id, const HeatgridOptions& options,
                 std::ostream& out, std::ostream& err) {
  auto loaded = open_bundle(bundle_path, err);
  if (!loaded) return kEnvironmentFailure;
  std::optional<std::string> script;
  if (options.script) {
    script = read_text(*options.script);
    if (!script) {
      err << "error: IoError: cannot read script '" << options.script->string() << "'\n";
      return kEnvironmentFailure;
    }
  }
  auto session = open_session(*loaded, err);
  if (!session) return kDomainFailure;
  const ViewSpec* view = find_map(**loaded, map_id, err);
  if (!view) return kDomainFailure;
  if (view->kind != ViewKind::HeatmapLayer && view->kind != ViewKind::MarkerMap) {
    err << "error: KindMismatch: view '" << map_id << "' has no point layer\n";
    return kDomainFailure;
  }
  if (script && !run_script(*session, split_script(*script), nullptr, err)) return kDomainFailure;

  const json& o = view->options;
  const double cell = options.cell.value_or(o.value("cell_size", 250.0));
  const double radius = options.radius.value_or(o.value("radius", 750.0));
  const auto mode = parse_heat_mode(options.mode.value_or(o.value("mode", "local")));
  if (!mode) {
    err << "error: InvalidCommand: mode must be global or local\n";
    return kDomainFailure;
  }
  const RecordTable& table = session->engine().table();
  const Column& pts = table.column(*view->binding("point"));
  const std::string* weight_name = view->binding("weight");
  const Column* weight = weight_name ? &table.column(*weight_name) : nullptr;
  std::vector<WeightedPoint> points;
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    if (*mode == HeatMode::Local && !session->engine().is_selected(r)) continue;
    if (pts.is_null(r) || (weight && weight->is_null(r))) continue;
    points.push_back({pts.points[r], weight ? weight->numbers[r] : 1.0});
  }
  try {
    const HeatGrid grid = heat_grid(points, cell, radius, *mode);
    out << "row,col,x,y,intensity\n";
    for (std::size_t row = 0; row < grid.height; ++row) {
      for (std::size_t col = 0; col < grid.width; ++col) {
        out << row << ',' << col << ',' << csv_number(grid.origin_x + (col + 0.5) * grid.cell_size) << ','
            << csv_number(grid.origin_y + (row + 0.5) * grid.cell_size) << ',' << csv_number(grid.at(row, col))
            << "\n";
      }
    }
  } catch (const Error& e) {
    print_error(err, e);
    return kDomainFailure;
  }
  return kOk;
}

int run_generate(const std::string& name, const std::filesystem::path& out_dir, std::uint64_t seed,
                 std::optional<std::size_t> records, std::ostream& err) {
  std::optional<synth::GeneratedBundle> generated;
  if (name == "crashes" && records) generated = synth::crash_bundle(*records, seed);
  else if (name == "pathogens" && records) generated = synth::pathogen_bundle(*records, seed);
  else generated = synth::by_name(name, seed);
  if (!generated) {
    err << "error: unknown bundle '" << name << "' (expected tracts, crashes or pathogens)\n";
    return kDomainFailure;
  }
  generated->files["index.html"] =
      "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>" + generated->manifest.value("name", name) +
      "</title></head>\n<body><pre id=\"manifest\"></pre>\n<script>\nfetch('app.config.json').then(r => r.json())"
      ".then(m => { document.getElementById('manifest').textContent = JSON.stringify(m, null, 2); });\n"
      "</script></body></html>\n";
  try {
    generated->write(out_dir);
  } catch (const Error& e) {
    print_error(err, e);
    return kEnvironmentFailure;
  }
  err << "wrote " << name << " bundle to " << out_dir.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- serve

struct StaticServer::Impl {
  std::filesystem::path root;
  httplib::Server server;
};

StaticServer::StaticServer(std::filesystem::path root) : impl_(std::make_unique<Impl>()) {
  impl_->root = std::move(root);
  impl_->server.set_file_extension_and_mimetype_mapping("geojson", "application/geo+json");
  impl_->server.set_file_extension_and_mimetype_mapping("csv", "text/csv");
  impl_->server.set_file_extension_and_mimetype_mapping("wasm", "application/wasm");
  impl_->server.set_mount_point("/", impl_->root.string());
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
}

StaticServer::~StaticServer() { stop(); }

std::optional<int> StaticServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) return std::nullopt;
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) return std::nullopt;
  return port;
}

void StaticServer::listen() { impl_->server.listen_after_bind(); }
void StaticServer::stop() { impl_->server.stop(); }
bool StaticServer::running() const { return impl_->server.is_running(); }

int run_serve(const std::filesystem::path& dir, const std::string& host, int port, std::ostream& err) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    err << "error: IoError: '" << dir.string() << "' is not a directory\n";
    return kEnvironmentFailure;
  }
  StaticServer server(dir);
  const auto bound = server.bind(host, port);
  if (!bound) {
    err << "error: IoError: cannot listen on " << host << ":" << port << "\n";
    return kEnvironmentFailure;
  }
  err << "serving " << dir.string() << " on http://" << host << ":" << *bound << "/\n";
  server.listen();
  return kOk;
}

}  // namespace coordlens::cli
