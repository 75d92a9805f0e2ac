#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "leocov/channel.hpp"
#include "leocov/coverage_curve.hpp"
#include "leocov/geometry.hpp"
#include "leocov/rng.hpp"

namespace leocov {

/// Spherical Poisson point process on the shell; density per km^2.
struct Sppp {
  double density = 0.0;
};

/// Fixed number of satellites placed uniformly on the visible cap.
struct Bpp {
  int n_visible = 1;
};

/// P planes at RAAN spacing pi/P, S satellites per plane, phasing F.
struct WalkerStar {
  int planes = 1;
  int sats_per_plane = 1;
  double inclination_rad = 1.5707963267948966;
  int phasing = 0;
};

/// Positions from a CSV file with header x_km,y_km,z_km (Earth centred) or
/// lat_deg,lon_deg,alt_km.
struct Snapshot {
  std::string path;
  double alt_min_km = 0.0;
  double alt_max_km = 1e9;
  int freq_groups = 1;
  double min_elevation_rad = 0.0;
};

using ConstellationSpec = std::variant<Sppp, Bpp, WalkerStar, Snapshot>;

/// Parses "ppp", "bpp:N", "walker-star:P/S/F" or "snapshot:PATH". `density`
/// fills the PPP case.
ConstellationSpec parse_constellation(std::string_view text, double density = 0.0);
std::string describe(const ConstellationSpec& spec);

struct VisibilityOptions {
  /// Satellites below this elevation are not visible (radians).
  double min_elevation_rad = 0.0;
  /// Fixes the user latitude for 3-D constellations (radians). Unset places
  /// the user uniformly on the sphere, which for a rigid constellation is the
  /// same as a uniformly random rotation of it.
  std::optional<double> user_latitude_rad;
};

/// Largest visible slant range under the elevation mask.
double visible_slant_limit(const ShellGeometry& geom, double min_elevation_rad);
/// Area of the part of the cap above the elevation mask.
double visible_cap_area(const ShellGeometry& geom, double min_elevation_rad);
/// Density giving `k` satellites on average above the elevation mask.
double density_for_visible_count(double k, const ShellGeometry& geom, double min_elevation_rad);

struct SatelliteLink {
  double slant = 0.0;
  bool los = false;
  double fading = 0.0;
  double gain = 0.0;
  double alpha = 0.0;

  double received_power() const;
};

struct ConstellationRealization {
  std::vector<SatelliteLink> sats;
  std::uint64_t stream = 0;
};

/// Prepared sampler for one constellation model. Snapshot files are parsed
/// and Walker lattices built once, at construction.
class ConstellationSampler {
 public:
  ConstellationSampler(ConstellationSpec spec, const ShellGeometry& geom,
                       VisibilityOptions visibility = {});

  /// Slant ranges of the satellites visible in one realization.
  void sample_slants(Philox4x32& rng, std::vector<double>& out) const;

  ConstellationRealization realize(Philox4x32& rng, const ChannelModel& channel,
                                   const BeamGainModel& beam) const;

  const ShellGeometry& geometry() const { return geom_; }
  double slant_limit() const { return r_cut_; }
  /// Number of satellites in the source constellation (3-D models only).
  std::size_t source_size() const { return positions_.size(); }
  /// True when the source constellation holds no satellite at all.
  bool empty_source() const;

 private:
  void sample_positions(Philox4x32& rng, std::vector<double>& out) const;

  ConstellationSpec spec_;
  ShellGeometry geom_;
  VisibilityOptions vis_;
  double r_cut_;
  double expected_count_ = 0.0;
  std::vector<Vec3> positions_;  // unit vectors, snapshot only
  // Walker only: per plane (cos RAAN, sin RAAN); per satellite (cos u, sin u).
  std::vector<std::array<double, 2>> planes_;
  std::vector<std::array<double, 2>> phases_;
};

ConstellationRealization realize(const ConstellationSpec& spec, const ShellGeometry& geom,
                                 const ChannelModel& channel, const BeamGainModel& beam,
                                 Philox4x32& rng, const VisibilityOptions& visibility = {});

enum class Association { strongest, nearest };
std::string_view to_string(Association a);

struct SirSample {
  double sir = 0.0;  // +inf with a single satellite and no noise
  int serving = -1;  // -1 when no satellite is visible
  Association association = Association::strongest;

  bool empty() const { return serving < 0; }
  bool covered(double gamma) const { return !empty() && sir >= gamma; }
};

/// SIR at the typical user; `noise_power` > 0 turns it into an SINR.
SirSample sir_sample(const ConstellationRealization& real, Association association,
                     double noise_power = 0.0);

struct MonteCarloConfig {
  ShellGeometry geom{ShellGeometry::kEarthRadiusKm, 700.0};
  ChannelModel channel{};
  BeamGainModel beam = ConstantGain{};
  Association association = Association::strongest;
  VisibilityOptions visibility{};
  double noise_power = 0.0;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct MonteCarloEstimate {
  CoverageCurve curve;
  double mean_visible = 0.0;
  double empty_fraction = 0.0;
  std::size_t trials = 0;
};

/// Empirical coverage with 95% normal half-widths. Trial t draws from
/// Philox4x32(seed, t), so the result does not depend on the thread count.
MonteCarloEstimate estimate_coverage(const ConstellationSpec& spec,
                                     std::span<const double> gamma, std::size_t n_trials,
                                     const MonteCarloConfig& cfg);

}  // namespace leocov
