#include "leocov/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "leocov/errors.hpp"

namespace leocov {
namespace {

constexpr double kSlantRelTol = 1e-9;
constexpr double kCapRelTol = 1e-9;
constexpr double kRadicandTol = 1e-12;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(name) + " must be positive and finite, got " +
                      std::to_string(v));
  }
}

}  // namespace

double max_slant_range(double earth_radius_km, double altitude_km) {
  require_positive(earth_radius_km, "earth radius");
  require_positive(altitude_km, "altitude");
  return std::sqrt(altitude_km * (altitude_km + 2.0 * earth_radius_km));
}

double cap_area(double earth_radius_km, double altitude_km) {
  require_positive(earth_radius_km, "earth radius");
  require_positive(altitude_km, "altitude");
  return 2.0 * std::numbers::pi * altitude_km * (earth_radius_km + altitude_km);
}

ShellGeometry::ShellGeometry(double earth_radius_km, double altitude_km)
    : earth_radius_(earth_radius_km),
      altitude_(altitude_km),
      max_slant_(max_slant_range(earth_radius_km, altitude_km)) {}

double ShellGeometry::cap_area() const {
  return leocov::cap_area(earth_radius_, altitude_);
}

double ShellGeometry::cap_area_within(double slant) const {
  const double r = checked_slant(slant, "cap_area_within");
  return std::numbers::pi * shell_radius() / earth_radius_ *
         (r - altitude_) * (r + altitude_);
}

double ShellGeometry::elevation_sine(double slant) const {
  // R_S^2 = R_E^2 + r^2 + 2 R_E r sin(el)
  return (max_slant_ * max_slant_ - slant * slant) / (2.0 * slant * earth_radius_);
}

double ShellGeometry::slant_at_elevation(double elevation_rad) const {
  if (!(elevation_rad >= 0.0) || elevation_rad > std::numbers::pi / 2) {
    throw DomainError("elevation must lie in [0, pi/2], got " +
                      std::to_string(elevation_rad));
  }
  const double s = std::sin(elevation_rad);
  const double re = earth_radius_;
  return -re * s + std::sqrt(re * re * s * s + max_slant_ * max_slant_);
}

double ShellGeometry::slant_at_offnadir(double sin_theta) const {
  const double rs = shell_radius();
  const double horizon = earth_radius_ / rs;
  if (sin_theta < 0.0 || sin_theta > horizon * (1.0 + kSlantRelTol)) {
    throw DomainError("off-nadir sine outside [0, R_E/R_S]: " +
                      std::to_string(sin_theta));
  }
  const double s = std::min(sin_theta, horizon);
  const double cos_theta = std::sqrt(1.0 - s * s);
  const double disc = std::max(0.0, earth_radius_ * earth_radius_ - rs * rs * s * s);
  return std::clamp(rs * cos_theta - std::sqrt(disc), altitude_, max_slant_);
}

double ShellGeometry::checked_slant(double slant, const char* what) const {
  const double lo = altitude_;
  const double hi = max_slant_;
  if (!(slant >= lo * (1.0 - kSlantRelTol)) || !(slant <= hi * (1.0 + kSlantRelTol))) {
    throw DomainError(std::string(what) + ": slant range " + std::to_string(slant) +
                      " km outside [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
  return std::clamp(slant, lo, hi);
}

double offnadir_sine(double slant, const ShellGeometry& geom) {
  const double r = geom.checked_slant(slant, "offnadir_sine");
  const double h = geom.altitude();
  const double re = geom.earth_radius();
  const double rs = geom.shell_radius();
  const double d = (h - r) * (h + r);  // h^2 - r^2
  double radicand = -d * (d + 4.0 * h * re + 4.0 * re * re) / (4.0 * r * r * rs * rs);
  if (radicand < 0.0 && radicand >= -kRadicandTol) radicand = 0.0;
  if (radicand < 0.0) {
    throw DomainError("offnadir_sine: negative radicand at r = " + std::to_string(r));
  }
  return std::sqrt(radicand);
}

double slant_from_cap_point(const Vec3& point, const ShellGeometry& geom) {
  const double rs = geom.shell_radius();
  const double re = geom.earth_radius();
  const double n = point.norm();
  if (std::abs(n - rs) > kCapRelTol * rs) {
    throw DomainError("slant_from_cap_point: point is not on the shell (|x| = " +
                      std::to_string(n) + " km)");
  }
  if (point.z < re - kCapRelTol * re) {
    throw DomainError("slant_from_cap_point: point lies below the visible cap (z = " +
                      std::to_string(point.z) + " km)");
  }
  const Vec3 user{0.0, 0.0, re};
  return (point - user).norm();
}

}  // namespace leocov
