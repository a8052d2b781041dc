#include "coordlens/heatgrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "coordlens/error.hpp"
#include "coordlens/projection.hpp"

namespace coordlens {

std::string_view to_string(HeatMode mode) { return mode == HeatMode::Global ? "global" : "local"; }

std::optional<HeatMode> parse_heat_mode(std::string_view name) {
  if (name == "global") return HeatMode::Global;
  if (name == "local") return HeatMode::Local;
  return std::nullopt;
}

double HeatGrid::total() const { return std::accumulate(intensities.begin(), intensities.end(), 0.0); }

HeatGrid heat_grid(std::span<const WeightedPoint> points, double cell_size, double kernel_radius, HeatMode mode) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw Error(ErrorCode::InvalidRange, "cell size must be positive");
  if (!(kernel_radius >= cell_size / 2.0) || !std::isfinite(kernel_radius)) {
    throw Error(ErrorCode::InvalidRange, "kernel radius must be at least half the cell size");
  }
  HeatGrid grid;
  grid.cell_size = cell_size;
  grid.mode = mode;
  if (points.empty()) return grid;

  std::vector<ProjectedPoint> projected;
  projected.reserve(points.size());
  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_x;
  for (const WeightedPoint& wp : points) {
    if (!(wp.weight >= 0.0) || !std::isfinite(wp.weight)) {
      throw Error(ErrorCode::InvalidRange, "heat weights must be finite and non-negative");
    }
    auto p = project_forward(SphericalMercator{}, wp.point);
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
    projected.push_back(p);
  }

  grid.origin_x = min_x - kernel_radius;
  grid.origin_y = min_y - kernel_radius;
  grid.width = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((max_x - min_x + 2 * kernel_radius) / cell_size)));
  grid.height = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((max_y - min_y + 2 * kernel_radius) / cell_size)));
  grid.intensities.assign(grid.width * grid.height, 0.0);

  auto clamp_index = [](double v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n - 1)));
  };
  std::vector<std::pair<std::size_t, double>> deposit;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const ProjectedPoint p = projected[i];
    const double weight = points[i].weight;
    const std::size_t c0 = clamp_index(std::floor((p.x - kernel_radius - grid.origin_x) / cell_size), grid.width);
    const std::size_t c1 = clamp_index(std::floor((p.x + kernel_radius - grid.origin_x) / cell_size), grid.width);
    const std::size_t r0 = clamp_index(std::floor((p.y - kernel_radius - grid.origin_y) / cell_size), grid.height);
    const std::size_t r1 = clamp_index(std::floor((p.y + kernel_radius - grid.origin_y) / cell_size), grid.height);
    deposit.clear();
    double mass = 0.0;
    for (std::size_t r = r0; r <= r1; ++r) {
      const double cy = grid.origin_y + (static_cast<double>(r) + 0.5) * cell_size;
      for (std::size_t c = c0; c <= c1; ++c) {
        const double cx = grid.origin_x + (static_cast<double>(c) + 0.5) * cell_size;
        const double k = 1.0 - std::hypot(cx - p.x, cy - p.y) / kernel_radius;
        if (k > 0.0) {
          deposit.emplace_back(r * grid.width + c, k);
          mass += k;
        }
      }
    }
    if (mass > 0.0) {
      for (auto [cell, k] : deposit) grid.intensities[cell] += weight * k / mass;
    } else {
      const std::size_t c = clamp_index(std::floor((p.x - grid.origin_x) / cell_size), grid.width);
      const std::size_t r = clamp_index(std::floor((p.y - grid.origin_y) / cell_size), grid.height);
      grid.intensities[r * grid.width + c] += weight;
    }
  }
  return grid;
}

}  // namespace coordlens
