#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "coordlens/geometry.hpp"

namespace coordlens {

/// Global grids use every record, local grids only the current selection.
enum class HeatMode { Global, Local };

std::string_view to_string(HeatMode mode);
std::optional<HeatMode> parse_heat_mode(std::string_view name);

struct WeightedPoint {
  GeoPoint point;
  double weight = 1.0;
};

/// Row-major raster in Web-Mercator meters; row 0 is the southern edge.
struct HeatGrid {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 0.0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> intensities;
  HeatMode mode = HeatMode::Global;

  double at(std::size_t row, std::size_t col) const { return intensities[row * width + col]; }
  double total() const;
};

/// Each point spreads its weight over the cells whose centers lie within
/// `kernel_radius` using the triangular falloff max(0, 1 - d / radius),
/// normalized so the deposited mass equals the weight. The grid spans the
/// projected bounding box padded by the kernel radius, so no mass is lost
/// at the edges. An empty input yields a 0x0 grid. Throws
/// Error(InvalidRange) for cell_size <= 0, kernel_radius < cell_size / 2, or
/// a negative/non-finite weight.
HeatGrid heat_grid(std::span<const WeightedPoint> points, double cell_size, double kernel_radius, HeatMode mode);

}  // namespace coordlens
