#pragma once

#include <variant>
#include <vector>

namespace coordlens {

inline constexpr double kEarthRadiusMeters = 6371000.0;
inline constexpr double kWebMercatorRadiusMeters = 6378137.0;

struct GeoPoint {
  double lon = 0.0;  ///< degrees, [-180, 180]
  double lat = 0.0;  ///< degrees, [-90, 90]

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

bool is_valid(GeoPoint pt) noexcept;

/// Closed ring: at least 4 vertices, first == last.
using Ring = std::vector<GeoPoint>;

/// Exterior ring followed by zero or more holes.
struct Polygon {
  std::vector<Ring> rings;
};

struct MultiPolygon {
  std::vector<Polygon> polygons;
};

struct BBox {
  double west = 0.0;
  double south = 0.0;
  double east = 0.0;
  double north = 0.0;
};

struct Circle {
  GeoPoint center;
  double radius_m = 0.0;
};

using Geometry = std::variant<Polygon, MultiPolygon, BBox, Circle>;

/// Throws Error(InvalidGeometry) describing the first violated invariant.
void validate(const Polygon& poly);
void validate(const Geometry& geom);

/// Even-odd ray casting in the lon/lat plane over every ring, so holes
/// subtract from the exterior. Points exactly on an edge may land on either
/// side.
bool point_in_polygon(GeoPoint pt, const Polygon& poly);

/// Great-circle distance on a sphere of radius `radius_m`.
double haversine_distance(GeoPoint a, GeoPoint b, double radius_m = kEarthRadiusMeters);

/// Containment test for one validated geometry. Polygon inputs carry a
/// precomputed bounding box so the ray cast only runs for nearby points.
class SpatialPredicate {
 public:
  explicit SpatialPredicate(Geometry geom);

  bool operator()(GeoPoint pt) const;
  const Geometry& geometry() const noexcept { return geom_; }

 private:
  Geometry geom_;
  BBox envelope_{};
};

BBox envelope(const Polygon& poly);

}  // namespace coordlens
