#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "coordlens/geometry.hpp"

namespace coordlens {

/// Latitude limit applied before the Mercator transform.
inline constexpr double kMercatorMaxLat = 85.06;

struct SphericalMercator {
  double radius_m = kWebMercatorRadiusMeters;
};

struct Equirectangular {
  double standard_parallel = 0.0;  ///< degrees
  double radius_m = kEarthRadiusMeters;
};

/// Defaults are the conterminous-US parameters.
struct AlbersConic {
  double parallel1 = 29.5;
  double parallel2 = 45.5;
  double origin_lat = 37.5;
  double central_meridian = -96.0;
  double radius_m = kEarthRadiusMeters;
};

struct Stereographic {
  double origin_lat = 90.0;
  double central_meridian = 0.0;
  double radius_m = kEarthRadiusMeters;
};

using ProjectionSpec = std::variant<SphericalMercator, Equirectangular, AlbersConic, Stereographic>;

struct ProjectedPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Throws Error(InvalidGeometry) for non-finite parameters and for an
/// Albers cone with sin(phi1) + sin(phi2) == 0.
void validate(const ProjectionSpec& spec);

/// Forward projection to planar meters. Mercator clamps latitude to
/// +/-kMercatorMaxLat; the stereographic antipode of its origin throws
/// Error(ProjectionSingularity).
ProjectedPoint project_forward(const ProjectionSpec& spec, GeoPoint pt);

std::string_view projection_name(const ProjectionSpec& spec);

/// "mercator", "equirectangular", "albers", "stereographic" with default
/// parameters.
std::optional<ProjectionSpec> projection_by_name(std::string_view name);

}  // namespace coordlens
