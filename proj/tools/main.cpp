#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
  using namespace coordlens::cli;
  CLI::App app{"coordlens: coordinated-view geovisualization engine"};
  app.require_subcommand(1);

  std::string bundle;
  std::string script;
  std::string map_id;

  auto* validate = app.add_subcommand("validate", "Check a bundle and print its validation report");
  validate->add_option("bundle", bundle, "Bundle directory or app.config.json")->required();

  QueryOptions query_opts;
  std::string restore_from;
  std::string snapshot_to;
  auto* query = app.add_subcommand("query", "Run a JSON-lines command script and print every notification");
  query->add_option("bundle", bundle, "Bundle directory or app.config.json")->required();
  query->add_option("script", script, "JSON-lines command script")->required();
  query->add_flag("--full-state", query_opts.full_state, "Emit every view at load, not only the status");
  query->add_option("--restore", restore_from, "Start from a snapshot file");
  query->add_option("--snapshot", snapshot_to, "Write the final snapshot to a file");

  BenchOptions bench_opts;
  std::string bench_bundle;
  auto* bench = app.add_subcommand("bench", "Time random filter commands on a synthetic or given bundle");
  bench->add_option("bundle", bench_bundle, "Bundle to benchmark (default: synthetic crash bundle)");
  bench->add_option("--records", bench_opts.records, "Synthetic record count")->capture_default_str();
  bench->add_option("--ops", bench_opts.ops, "Number of filter commands")->capture_default_str();
  bench->add_option("--seed", bench_opts.seed, "Seed (COORDLENS_SEED overrides)")->capture_default_str();
  bench->add_flag("--print-log", bench_opts.print_log, "Print the generated command log instead of timing it");

  ClassifyOptions classify_opts;
  auto* classify = app.add_subcommand("classify", "Emit classification breaks and per-feature classes");
  classify->add_option("bundle", bundle, "Bundle directory or app.config.json")->required();
  classify->add_option("map", map_id, "Choropleth view id")->required();
  classify->add_option("--method", classify_opts.method, "equal_interval, quantile or jenks");
  classify->add_option("--k", classify_opts.k, "Class count");
  classify->add_option("--variable", classify_opts.variable, "Numeric column (default: first map variable)");

  HeatgridOptions heat_opts;
  std::string heat_script;
  auto* heatgrid = app.add_subcommand("heatgrid", "Emit a heat grid as CSV");
  heatgrid->add_option("bundle", bundle, "Bundle directory or app.config.json")->required();
  heatgrid->add_option("map", map_id, "Heatmap or marker map view id")->required();
  heatgrid->add_option("--cell", heat_opts.cell, "Cell size in metres");
  heatgrid->add_option("--radius", heat_opts.radius, "Kernel radius in metres");
  heatgrid->add_option("--mode", heat_opts.mode, "global or local");
  heatgrid->add_option("--script", heat_script, "Commands applied before computing a local grid");

  std::string serve_dir;
  std::string host = "127.0.0.1";
  int port = 8000;
  auto* serve = app.add_subcommand("serve", "Serve an app directory over HTTP");
  serve->add_option("dir", serve_dir, "App directory")->required();
  serve->add_option("--port", port, "Port")->capture_default_str();
  serve->add_option("--host", host, "Address to bind")->capture_default_str();

  std::string gen_name;
  std::string gen_out;
  std::uint64_t gen_seed = 1;
  std::optional<std::size_t> gen_records;
  auto* generate = app.add_subcommand("generate", "Write a synthetic bundle (tracts, crashes, pathogens)");
  generate->add_option("name", gen_name, "Bundle name")->required();
  generate->add_option("out", gen_out, "Output directory")->required();
  generate->add_option("--seed", gen_seed, "Seed (COORDLENS_SEED overrides)")->capture_default_str();
  generate->add_option("--records", gen_records, "Record count for crashes or pathogens");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kEnvironmentFailure;
  }

  if (*validate) return run_validate(bundle, std::cout, std::cerr);
  if (*query) {
    if (!restore_from.empty()) query_opts.restore_from = restore_from;
    if (!snapshot_to.empty()) query_opts.snapshot_to = snapshot_to;
    return run_query(bundle, script, query_opts, std::cout, std::cerr);
  }
  if (*bench) {
    if (!bench_bundle.empty()) bench_opts.bundle = bench_bundle;
    bench_opts.seed = effective_seed(bench_opts.seed);
    return run_bench(bench_opts, std::cout, std::cerr);
  }
  if (*classify) return run_classify(bundle, map_id, classify_opts, std::cout, std::cerr);
  if (*heatgrid) {
    if (!heat_script.empty()) heat_opts.script = heat_script;
    return run_heatgrid(bundle, map_id, heat_opts, std::cout, std::cerr);
  }
  if (*serve) return run_serve(serve_dir, host, port, std::cerr);
  if (*generate) return run_generate(gen_name, gen_out, effective_seed(gen_seed), gen_records, std::cerr);
  return kEnvironmentFailure;
}
