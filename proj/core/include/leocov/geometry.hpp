#pragma once

#include <cmath>

namespace leocov {

/// Earth-centred position or direction, kilometres.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

/// Two concentric spheres: the Earth of radius R_E and the satellite shell
/// at altitude h. The typical user sits at (0, 0, R_E) and sees the cap of
/// the shell cut off by its tangent plane.
///
/// All lengths are kilometres.
class ShellGeometry {
 public:
  static constexpr double kEarthRadiusKm = 6371.0;

  ShellGeometry(double earth_radius_km, double altitude_km);
  explicit ShellGeometry(double altitude_km)
      : ShellGeometry(kEarthRadiusKm, altitude_km) {}

  double earth_radius() const { return earth_radius_; }
  double altitude() const { return altitude_; }
  double shell_radius() const { return earth_radius_ + altitude_; }
  /// Slant range to the sub-satellite point, R_min = h.
  double min_slant() const { return altitude_; }
  /// Slant range to the horizon, R_max = sqrt(R_S^2 - R_E^2).
  double max_slant() const { return max_slant_; }
  /// Area of the visible cap, 2 pi h R_S.
  double cap_area() const;

  /// Area of the part of the cap within slant range r of the user,
  /// pi (R_S / R_E) (r^2 - h^2).
  double cap_area_within(double slant) const;

  /// Sine of the elevation angle above the user's tangent plane at which a
  /// satellite at slant range r is seen. Not clamped.
  double elevation_sine(double slant) const;

  /// Slant range of a satellite seen at the given elevation (radians).
  double slant_at_elevation(double elevation_rad) const;

  /// Slant range of the cap point seen from the satellite at off-nadir angle
  /// with the given sine. Inverse of offnadir_sine on [0, R_E / R_S].
  double slant_at_offnadir(double sin_theta) const;

  /// Clamps r into [R_min, R_max] when it lies within a relative 1e-9 of the
  /// interval, otherwise throws DomainError naming `what`.
  double checked_slant(double slant, const char* what) const;

 private:
  double earth_radius_;
  double altitude_;
  double max_slant_;
};

double max_slant_range(double earth_radius_km, double altitude_km);
double cap_area(double earth_radius_km, double altitude_km);

/// sin(theta), theta being the angle at the satellite between nadir and the
/// direction to the user, for a satellite at slant range r.
double offnadir_sine(double slant, const ShellGeometry& geom);

/// Distance from the typical user to a point on the visible cap.
double slant_from_cap_point(const Vec3& point, const ShellGeometry& geom);

}  // namespace leocov
