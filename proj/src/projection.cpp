#include "coordlens/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "coordlens/error.hpp"

namespace coordlens {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool finite_all(std::initializer_list<double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void require_radius(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidGeometry, "projection radius must be positive");
}

struct AlbersConstants {
  double n;
  double c;
  double rho0;
};

AlbersConstants albers_constants(const AlbersConic& p) {
  const double phi1 = p.parallel1 * kDegToRad;
  const double phi2 = p.parallel2 * kDegToRad;
  const double phi0 = p.origin_lat * kDegToRad;
  const double n = (std::sin(phi1) + std::sin(phi2)) / 2.0;
  const double c = std::cos(phi1) * std::cos(phi1) + 2.0 * n * std::sin(phi1);
  const double rho0 = p.radius_m * std::sqrt(c - 2.0 * n * std::sin(phi0)) / n;
  return {n, c, rho0};
}

}  // namespace

void validate(const ProjectionSpec& spec) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        require_radius(p.radius_m);
        if constexpr (std::is_same_v<T, Equirectangular>) {
          if (!finite_all({p.standard_parallel})) throw Error(ErrorCode::InvalidGeometry, "non-finite parallel");
        } else if constexpr (std::is_same_v<T, AlbersConic>) {
          if (!finite_all({p.parallel1, p.parallel2, p.origin_lat, p.central_meridian})) {
            throw Error(ErrorCode::InvalidGeometry, "non-finite Albers parameter");
          }
          if (std::sin(p.parallel1 * kDegToRad) + std::sin(p.parallel2 * kDegToRad) == 0.0) {
            throw Error(ErrorCode::InvalidGeometry, "Albers standard parallels must not be symmetric about the equator");
          }
        } else if constexpr (std::is_same_v<T, Stereographic>) {
          if (!finite_all({p.origin_lat, p.central_meridian})) {
            throw Error(ErrorCode::InvalidGeometry, "non-finite stereographic origin");
          }
        }
      },
      spec);
}

ProjectedPoint project_forward(const ProjectionSpec& spec, GeoPoint pt) {
  return std::visit(
      [&](const auto& p) -> ProjectedPoint {
        using T = std::decay_t<decltype(p)>;
        const double lambda = pt.lon * kDegToRad;
        if constexpr (std::is_same_v<T, SphericalMercator>) {
          const double phi = std::clamp(pt.lat, -kMercatorMaxLat, kMercatorMaxLat) * kDegToRad;
          // atanh(sin phi) == ln tan(pi/4 + phi/2), and is exactly 0 at the equator.
          return {p.radius_m * lambda, p.radius_m * std::atanh(std::sin(phi))};
        } else if constexpr (std::is_same_v<T, Equirectangular>) {
          const double phi = pt.lat * kDegToRad;
          return {p.radius_m * lambda * std::cos(p.standard_parallel * kDegToRad), p.radius_m * phi};
        } else if constexpr (std::is_same_v<T, AlbersConic>) {
          const auto k = albers_constants(p);
          const double phi = pt.lat * kDegToRad;
          const double rho = p.radius_m * std::sqrt(k.c - 2.0 * k.n * std::sin(phi)) / k.n;
          const double theta = k.n * (lambda - p.central_meridian * kDegToRad);
          return {rho * std::sin(theta), k.rho0 - rho * std::cos(theta)};
        } else {
          const double phi = pt.lat * kDegToRad;
          const double phi0 = p.origin_lat * kDegToRad;
          const double dl = lambda - p.central_meridian * kDegToRad;
          const double denom = 1.0 + std::sin(phi0) * std::sin(phi) + std::cos(phi0) * std::cos(phi) * std::cos(dl);
          if (denom <= 1e-12) {
            throw Error(ErrorCode::ProjectionSingularity, "point is the antipode of the stereographic origin");
          }
          const double k = 2.0 * p.radius_m / denom;
          return {k * std::cos(phi) * std::sin(dl),
                  k * (std::cos(phi0) * std::sin(phi) - std::sin(phi0) * std::cos(phi) * std::cos(dl))};
        }
      },
      spec);
}

std::string_view projection_name(const ProjectionSpec& spec) {
  switch (spec.index()) {
    case 0: return "mercator";
    case 1: return "equirectangular";
    case 2: return "albers";
    default: return "stereographic";
  }
}

std::optional<ProjectionSpec> projection_by_name(std::string_view name) {
  if (name == "mercator" || name == "web_mercator") return SphericalMercator{};
  if (name == "equirectangular") return Equirectangular{};
  if (name == "albers") return AlbersConic{};
  if (name == "stereographic") return Stereographic{};
  return std::nullopt;
}

}  // namespace coordlens
