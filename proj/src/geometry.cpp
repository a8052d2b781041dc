#include "coordlens/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "coordlens/error.hpp"

namespace coordlens {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool in_bbox(GeoPoint pt, const BBox& box) {
  return box.west <= pt.lon && pt.lon <= box.east && box.south <= pt.lat && pt.lat <= box.north;
}

// Count crossings of a rightward ray from pt with the ring's edges.
bool ring_odd_crossings(GeoPoint pt, const Ring& ring) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const GeoPoint& a = ring[i];
    const GeoPoint& b = ring[j];
    if ((a.lat > pt.lat) != (b.lat > pt.lat)) {
      double x_cross = a.lon + (pt.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
      if (pt.lon < x_cross) inside = !inside;
    }
  }
  return inside;
}

}  // namespace

bool is_valid(GeoPoint pt) noexcept {
  return std::isfinite(pt.lon) && std::isfinite(pt.lat) && pt.lon >= -180.0 && pt.lon <= 180.0 &&
         pt.lat >= -90.0 && pt.lat <= 90.0;
}

void validate(const Polygon& poly) {
  if (poly.rings.empty()) throw Error(ErrorCode::InvalidGeometry, "polygon has no rings");
  for (std::size_t r = 0; r < poly.rings.size(); ++r) {
    const Ring& ring = poly.rings[r];
    if (ring.size() < 4) {
      throw Error(ErrorCode::InvalidGeometry,
                  "ring " + std::to_string(r) + " has " + std::to_string(ring.size()) + " vertices (need >= 4)");
    }
    if (!(ring.front() == ring.back())) {
      throw Error(ErrorCode::InvalidGeometry, "ring " + std::to_string(r) + " is not closed");
    }
    for (const GeoPoint& pt : ring) {
      if (!is_valid(pt)) throw Error(ErrorCode::InvalidGeometry, "ring vertex out of bounds");
    }
  }
}

void validate(const Geometry& geom) {
  std::visit(
      [](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Polygon>) {
          validate(g);
        } else if constexpr (std::is_same_v<T, MultiPolygon>) {
          if (g.polygons.empty()) throw Error(ErrorCode::InvalidGeometry, "multipolygon is empty");
          for (const Polygon& p : g.polygons) validate(p);
        } else if constexpr (std::is_same_v<T, BBox>) {
          if (!(std::isfinite(g.west) && std::isfinite(g.east) && std::isfinite(g.south) &&
                std::isfinite(g.north))) {
            throw Error(ErrorCode::InvalidGeometry, "bbox has non-finite bounds");
          }
          if (g.west > g.east || g.south > g.north) {
            throw Error(ErrorCode::InvalidGeometry, "bbox requires west <= east and south <= north");
          }
        } else {
          if (!is_valid(g.center)) throw Error(ErrorCode::InvalidGeometry, "circle center out of bounds");
          if (!(g.radius_m > 0.0) || !std::isfinite(g.radius_m)) {
            throw Error(ErrorCode::InvalidGeometry, "circle radius must be positive");
          }
        }
      },
      geom);
}

bool point_in_polygon(GeoPoint pt, const Polygon& poly) {
  validate(poly);
  bool inside = false;
  for (const Ring& ring : poly.rings) {
    if (ring_odd_crossings(pt, ring)) inside = !inside;
  }
  return inside;
}

double haversine_distance(GeoPoint a, GeoPoint b, double radius_m) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * radius_m * std::asin(std::sqrt(h));
}

BBox envelope(const Polygon& poly) {
  BBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Ring& ring : poly.rings) {
    for (const GeoPoint& pt : ring) {
      box.west = std::min(box.west, pt.lon);
      box.east = std::max(box.east, pt.lon);
      box.south = std::min(box.south, pt.lat);
      box.north = std::max(box.north, pt.lat);
    }
  }
  return box;
}

SpatialPredicate::SpatialPredicate(Geometry geom) : geom_(std::move(geom)) {
  validate(geom_);
  if (const auto* poly = std::get_if<Polygon>(&geom_)) {
    envelope_ = envelope(*poly);
  } else if (const auto* multi = std::get_if<MultiPolygon>(&geom_)) {
    envelope_ = envelope(multi->polygons.front());
    for (const Polygon& p : multi->polygons) {
      BBox b = envelope(p);
      envelope_.west = std::min(envelope_.west, b.west);
      envelope_.east = std::max(envelope_.east, b.east);
      envelope_.south = std::min(envelope_.south, b.south);
      envelope_.north = std::max(envelope_.north, b.north);
    }
  }
}

bool SpatialPredicate::operator()(GeoPoint pt) const {
  return std::visit(
      [&](const auto& g) -> bool {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Polygon>) {
          if (!in_bbox(pt, envelope_)) return false;
          bool inside = false;
          for (const Ring& ring : g.rings) {
            if (ring_odd_crossings(pt, ring)) inside = !inside;
          }
          return inside;
        } else if constexpr (std::is_same_v<T, MultiPolygon>) {
          if (!in_bbox(pt, envelope_)) return false;
          for (const Polygon& p : g.polygons) {
            bool inside = false;
            for (const Ring& ring : p.rings) {
              if (ring_odd_crossings(pt, ring)) inside = !inside;
            }
            if (inside) return true;
          }
          return false;
        } else if constexpr (std::is_same_v<T, BBox>) {
          return in_bbox(pt, g);
        } else {
          return haversine_distance(g.center, pt) <= g.radius_m;
        }
      },
      geom_);
}

}  // namespace coordlens
