#pragma once

#include <random>
#include <variant>
#include <vector>

#include "leocov/geometry.hpp"

namespace leocov {

/// p_L(r) = exp(-beta cot(elevation(r))). beta = 0 means always LOS.
struct ExponentialBlockage {
  double beta = 0.0;
};

/// LOS iff r < r_los.
struct StepLos {
  double r_los_km = 0.0;
};

struct AlwaysLos {};

using LosModel = std::variant<ExponentialBlockage, StepLos, AlwaysLos>;

/// Distance-dependent LOS/NLOS channel. LOS links use path-loss exponent
/// alpha_los and Nakagami-m power fading, NLOS links alpha_nlos and
/// Rayleigh (unit-mean exponential power) fading.
struct ChannelModel {
  LosModel los = AlwaysLos{};
  double alpha_los = 2.0;
  double alpha_nlos = 2.0;
  int nakagami_m = 1;

  /// Throws DomainError when an invariant is violated for this geometry.
  void validate(const ShellGeometry& geom) const;
};

/// G_max (J1(u)/(2u) + 36 J3(u)/u^3)^2 with u = 2.07123 sin(theta)/sin(theta_3dB).
struct BesselBeam {
  double g_max = 1.0;
  double theta_3db_rad = 0.1;
};

/// g_los for r < r_los, g_nlos for r >= r_los.
struct StepGain {
  double g_los = 1.0;
  double g_nlos = 1.0;
  double r_los_km = 0.0;
};

struct ConstantGain {
  double g = 1.0;
};

using BeamGainModel = std::variant<BesselBeam, StepGain, ConstantGain>;

void validate_beam(const BeamGainModel& beam, const ShellGeometry& geom);

/// Scale factor mapping sin(theta)/sin(theta_3dB) to the pattern argument.
inline constexpr double kBesselHalfPowerArgument = 2.07123;

double los_probability(double slant, const ChannelModel& model, const ShellGeometry& geom);

/// P[H >= x] for unit-mean Nakagami-m power fading (integer m).
double nakagami_ccdf(double x, int m);

double beam_gain(double slant, const BeamGainModel& model, const ShellGeometry& geom);

/// Slant ranges where the gain model has nulls or jumps inside (R_min, R_max),
/// sorted. Integrators split there so every panel sees a smooth lobe.
std::vector<double> beam_breakpoints(const BeamGainModel& model, const ShellGeometry& geom);
std::vector<double> los_breakpoints(const ChannelModel& model, const ShellGeometry& geom);

struct FadingDraw {
  double power = 0.0;
  bool los = false;
};

/// Draws the LOS state with probability p_L(r), then the fading power:
/// Gamma(m, 1/m) on LOS links, Exp(1) on NLOS links. E[H] = 1 either way.
template <class Rng>
FadingDraw sample_fading(double slant, const ChannelModel& model, const ShellGeometry& geom,
                         Rng& rng) {
  const double p_los = los_probability(slant, model, geom);
  FadingDraw draw;
  draw.los = p_los >= 1.0 || (p_los > 0.0 && std::bernoulli_distribution(p_los)(rng));
  if (draw.los) {
    const double m = model.nakagami_m;
    draw.power = std::gamma_distribution<double>(m, 1.0 / m)(rng);
  } else {
    draw.power = std::exponential_distribution<double>(1.0)(rng);
  }
  return draw;
}

}  // namespace leocov
