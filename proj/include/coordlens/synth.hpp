#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "coordlens/bundle.hpp"

// Seeded synthetic bundles shaped like the three reference apps. Output is
// identical across platforms for the same seed.
namespace coordlens::synth {

struct GeneratedBundle {
  nlohmann::json manifest;
  std::map<std::string, std::string> files;  ///< bundle-relative path -> bytes

  AppBundle load() const;
  /// Writes app.config.json and every file under `dir`. Throws Error(IoError).
  void write(const std::filesystem::path& dir) const;
};

/// Small portable generator (splitmix64) so sequences do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();                              ///< [0, 1)
  double uniform(double lo, double hi);          ///< [lo, hi)
  std::size_t below(std::size_t n);              ///< [0, n)
  double normal(double mean = 0.0, double sd = 1.0);

 private:
  std::uint64_t state_;
};

inline constexpr std::size_t kTractCount = 612;
inline constexpr std::size_t kCrashCount = 68772;

/// 612 rectangular census tracts over New Mexico with justice indicators.
GeneratedBundle tract_bundle(std::uint64_t seed = 1);

/// Albuquerque crash records: point, date, hour and six categorical columns.
/// `with_maps` adds the marker map and heatmap views.
GeneratedBundle crash_bundle(std::size_t records = kCrashCount, std::uint64_t seed = 1, bool with_maps = true);

/// Pathogen samples over Panama with coincident sites and multi-part tags.
GeneratedBundle pathogen_bundle(std::size_t records = 400, std::uint64_t seed = 1);

std::optional<GeneratedBundle> by_name(std::string_view name, std::uint64_t seed);

}  // namespace coordlens::synth
