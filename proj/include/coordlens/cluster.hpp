#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "coordlens/geometry.hpp"

namespace coordlens {

struct KeyedPoint {
  std::string key;
  GeoPoint point;
};

struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Web-Mercator pixel coordinates (256 px tiles) at an integer zoom.
PixelPoint to_pixel(GeoPoint pt, int zoom);
GeoPoint from_pixel(PixelPoint px, int zoom);

struct MarkerCluster {
  GeoPoint centroid;
  PixelPoint centroid_px;
  std::vector<std::string> members;
};

struct ClusterResult {
  int zoom = 0;
  double radius_px = 0.0;
  std::vector<MarkerCluster> clusters;
};

/// Greedy centroid clustering in pixel space. Points are visited in key
/// order; each joins the nearest cluster whose centroid lies within
/// `radius_px`, provided every member stays within 2 * radius_px of the
/// updated centroid, and otherwise seeds a new cluster. Throws
/// Error(InvalidRange) for radius_px <= 0 or zoom outside [0, 22].
ClusterResult cluster(std::span<const KeyedPoint> points, int zoom, double radius_px);

struct SpiderfyParams {
  double base_radius_px = 28.0;
  double spacing_px = 6.0;      ///< spiral radius growth per leg
  double separation_px = 24.0;  ///< arc length between consecutive spiral legs
};

struct SpiderLeg {
  std::string key;
  double dx = 0.0;
  double dy = 0.0;
};

/// Up to 8 legs sit evenly on one circle starting at angle 0; more legs
/// follow an Archimedean spiral. Throws Error(NotApplicable) for n < 2.
std::vector<SpiderLeg> spiderfy(std::size_t n, const SpiderfyParams& params = {});
std::vector<SpiderLeg> spiderfy(std::span<const std::string> keys, const SpiderfyParams& params = {});

}  // namespace coordlens
