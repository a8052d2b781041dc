#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

// Command implementations behind the coordlens executable. Each returns the
// process exit code: 0 success, 1 domain failure, 2 environment failure.
namespace coordlens::cli {

inline constexpr int kOk = 0;
inline constexpr int kDomainFailure = 1;
inline constexpr int kEnvironmentFailure = 2;

/// COORDLENS_SEED wins over the flag when set to an unsigned integer.
std::uint64_t effective_seed(std::uint64_t flag_seed);

int run_validate(const std::filesystem::path& bundle, std::ostream& out, std::ostream& err);

struct QueryOptions {
  bool full_state = false;  ///< emit every view at revision 0, not just the status
  std::optional<std::filesystem::path> restore_from;
  std::optional<std::filesystem::path> snapshot_to;
};

int run_query(const std::filesystem::path& bundle, const std::filesystem::path& script, const QueryOptions& options,
              std::ostream& out, std::ostream& err);

struct BenchOptions {
  std::optional<std::filesystem::path> bundle;  ///< synthetic crash-shaped bundle when absent
  std::size_t records = 68772;
  std::size_t ops = 200;
  std::uint64_t seed = 1;
  bool print_log = false;  ///< command log on stdout instead of the report
};

int run_bench(const BenchOptions& options, std::ostream& out, std::ostream& err);

struct ClassifyOptions {
  std::optional<std::string> method;
  std::optional<std::size_t> k;
  std::optional<std::string> variable;
};

int run_classify(const std::filesystem::path& bundle, const std::string& map_id, const ClassifyOptions& options,
                 std::ostream& out, std::ostream& err);

struct HeatgridOptions {
  std::optional<double> cell;
  std::optional<double> radius;
  std::optional<std::string> mode;
  std::optional<std::filesystem::path> script;  ///< commands applied before a local grid
};

int run_heatgrid(const std::filesystem::path& bundle, const std::string& map_id, const HeatgridOptions& options,
                 std::ostream& out, std::ostream& err);

int run_generate(const std::string& name, const std::filesystem::path& out_dir, std::uint64_t seed,
                 std::optional<std::size_t> records, std::ostream& err);

/// Static HTTP/1.1 file server over one directory; GET and HEAD only.
class StaticServer {
 public:
  explicit StaticServer(std::filesystem::path root);
  ~StaticServer();
  /// Returns the bound port, or nullopt when the address is unavailable.
  /// Port 0 picks a free port.
  std::optional<int> bind(const std::string& host, int port);
  void listen();  ///< blocks until stop()
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

int run_serve(const std::filesystem::path& dir, const std::string& host, int port, std::ostream& err);

}  // namespace coordlens::cli
