#include "coordlens/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include "coordlens/error.hpp"
#include "coordlens/projection.hpp"

namespace coordlens {
namespace {

double world_pixels(int zoom) { return 256.0 * std::ldexp(1.0, zoom); }

struct Working {
  double sx = 0.0;
  double sy = 0.0;
  PixelPoint centroid;
  double spread_bound = 0.0;  // upper bound on max member distance to centroid
  std::vector<std::size_t> members;
  std::int64_t cell = 0;
};

std::int64_t cell_key(std::int64_t cx, std::int64_t cy) { return (cx << 32) ^ (cy & 0xffffffff); }

}  // namespace

PixelPoint to_pixel(GeoPoint pt, int zoom) {
  const auto m = project_forward(SphericalMercator{}, pt);
  const double circumference = 2.0 * std::numbers::pi * kWebMercatorRadiusMeters;
  const double size = world_pixels(zoom);
  return {(m.x / circumference + 0.5) * size, (0.5 - m.y / circumference) * size};
}

GeoPoint from_pixel(PixelPoint px, int zoom) {
  const double size = world_pixels(zoom);
  const double mx = (px.x / size - 0.5) * 2.0 * std::numbers::pi;
  const double my = (0.5 - px.y / size) * 2.0 * std::numbers::pi;
  return {mx * 180.0 / std::numbers::pi, std::atan(std::sinh(my)) * 180.0 / std::numbers::pi};
}

ClusterResult cluster(std::span<const KeyedPoint> points, int zoom, double radius_px) {
  if (!(radius_px > 0.0) || !std::isfinite(radius_px)) {
    throw Error(ErrorCode::InvalidRange, "cluster radius must be positive");
  }
  if (zoom < 0 || zoom > 22) throw Error(ErrorCode::InvalidRange, "zoom must be within [0, 22]");

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].key < points[b].key; });

  std::vector<PixelPoint> px(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) px[i] = to_pixel(points[i].point, zoom);

  std::vector<Working> clusters;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> grid;
  auto cell_of = [&](PixelPoint p) {
    return std::pair<std::int64_t, std::int64_t>{static_cast<std::int64_t>(std::floor(p.x / radius_px)),
                                                  static_cast<std::int64_t>(std::floor(p.y / radius_px))};
  };
  auto move_cell = [&](std::size_t ci) {
    auto [cx, cy] = cell_of(clusters[ci].centroid);
    const std::int64_t key = cell_key(cx, cy);
    if (key == clusters[ci].cell) return;
    auto& old_bucket = grid[clusters[ci].cell];
    old_bucket.erase(std::find(old_bucket.begin(), old_bucket.end(), ci));
    clusters[ci].cell = key;
    grid[key].push_back(ci);
  };
  const double limit = 2.0 * radius_px;

  for (std::size_t idx : order) {
    const PixelPoint p = px[idx];
    auto [cx, cy] = cell_of(p);
    std::vector<std::pair<double, std::size_t>> candidates;
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(cell_key(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (std::size_t ci : it->second) {
          const double d = std::hypot(p.x - clusters[ci].centroid.x, p.y - clusters[ci].centroid.y);
          if (d <= radius_px) candidates.emplace_back(d, ci);
        }
      }
    }
    std::sort(candidates.begin(), candidates.end());

    bool joined = false;
    for (auto [dist, ci] : candidates) {
      Working& c = clusters[ci];
      const double n = static_cast<double>(c.members.size());
      const PixelPoint next{(c.sx + p.x) / (n + 1.0), (c.sy + p.y) / (n + 1.0)};
      const double shift = std::hypot(next.x - c.centroid.x, next.y - c.centroid.y);
      double bound = std::max(c.spread_bound + shift, std::hypot(p.x - next.x, p.y - next.y));
      if (bound > limit) {
        bound = std::hypot(p.x - next.x, p.y - next.y);
        for (std::size_t m : c.members) bound = std::max(bound, std::hypot(px[m].x - next.x, px[m].y - next.y));
        if (bound > limit) continue;
      }
      c.sx += p.x;
      c.sy += p.y;
      c.centroid = next;
      c.spread_bound = bound;
      c.members.push_back(idx);
      move_cell(ci);
      joined = true;
      break;
    }
    if (!joined) {
      Working c;
      c.sx = p.x;
      c.sy = p.y;
      c.centroid = p;
      c.members.push_back(idx);
      c.cell = cell_key(cx, cy);
      grid[c.cell].push_back(clusters.size());
      clusters.push_back(std::move(c));
    }
  }

  ClusterResult result{zoom, radius_px, {}};
  result.clusters.reserve(clusters.size());
  for (const Working& c : clusters) {
    MarkerCluster out;
    out.centroid_px = c.centroid;
    out.centroid = from_pixel(c.centroid, zoom);
    for (std::size_t m : c.members) out.members.push_back(points[m].key);
    result.clusters.push_back(std::move(out));
  }
  return result;
}

std::vector<SpiderLeg> spiderfy(std::size_t n, const SpiderfyParams& params) {
  if (n < 2) throw Error(ErrorCode::NotApplicable, "spiderfy needs at least 2 markers");
  std::vector<SpiderLeg> legs(n);
  if (n <= 8) {
    const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = step * static_cast<double>(i);
      legs[i].dx = params.base_radius_px * std::cos(angle);
      legs[i].dy = params.base_radius_px * std::sin(angle);
    }
    return legs;
  }
  double angle = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = params.base_radius_px + params.spacing_px * static_cast<double>(i);
    if (i > 0) angle += params.separation_px / r;
    legs[i].dx = r * std::cos(angle);
    legs[i].dy = r * std::sin(angle);
  }
  return legs;
}

std::vector<SpiderLeg> spiderfy(std::span<const std::string> keys, const SpiderfyParams& params) {
  auto legs = spiderfy(keys.size(), params);
  for (std::size_t i = 0; i < keys.size(); ++i) legs[i].key = keys[i];
  return legs;
}

}  // namespace coordlens
