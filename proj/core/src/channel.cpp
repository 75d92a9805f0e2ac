#include "leocov/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "leocov/errors.hpp"
#include "leocov/special_functions.hpp"

namespace leocov {
namespace {

constexpr double kArcsinTol = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

}  // namespace

void ChannelModel::validate(const ShellGeometry& geom) const {
  require(alpha_los > 0.0 && std::isfinite(alpha_los), "alpha_los must be positive");
  require(alpha_nlos > 0.0 && std::isfinite(alpha_nlos), "alpha_nlos must be positive");
  require(alpha_nlos >= alpha_los, "alpha_nlos must be at least alpha_los");
  require(nakagami_m >= 1, "nakagami_m must be a positive integer");
  std::visit(overloaded{
                 [](const ExponentialBlockage& e) {
                   require(e.beta >= 0.0 && std::isfinite(e.beta), "beta must be >= 0");
                 },
                 [&](const StepLos& s) {
                   require(s.r_los_km >= geom.min_slant() && s.r_los_km <= geom.max_slant(),
                           "r_los must lie in [R_min, R_max]");
                 },
                 [](const AlwaysLos&) {},
             },
             los);
}

void validate_beam(const BeamGainModel& beam, const ShellGeometry& geom) {
  std::visit(overloaded{
                 [](const BesselBeam& b) {
                   require(b.g_max > 0.0, "g_max must be positive");
                   require(b.theta_3db_rad > 0.0 && b.theta_3db_rad < std::numbers::pi / 2,
                           "theta_3db must lie in (0, pi/2)");
                 },
                 [&](const StepGain& s) {
                   require(s.g_los > 0.0 && s.g_nlos > 0.0, "step gains must be positive");
                   require(s.r_los_km >= geom.min_slant() && s.r_los_km <= geom.max_slant(),
                           "gain r_los must lie in [R_min, R_max]");
                 },
                 [](const ConstantGain& c) { require(c.g > 0.0, "gain must be positive"); },
             },
             beam);
}

double los_probability(double slant, const ChannelModel& model, const ShellGeometry& geom) {
  const double r = geom.checked_slant(slant, "los_probability");
  return std::visit(
      overloaded{
          [&](const ExponentialBlockage& e) {
            double s = geom.elevation_sine(r);
            if (s < -kArcsinTol || s > 1.0 + kArcsinTol) {
              throw DomainError("los_probability: arcsin argument " + std::to_string(s) +
                                " outside [0, 1]");
            }
            s = std::clamp(s, 0.0, 1.0);
            if (e.beta == 0.0) return 1.0;
            if (s == 0.0) return 0.0;
            const double cot = std::sqrt((1.0 - s) * (1.0 + s)) / s;
            return std::exp(-e.beta * cot);
          },
          [&](const StepLos& st) { return r < st.r_los_km ? 1.0 : 0.0; },
          [](const AlwaysLos&) { return 1.0; },
      },
      model.los);
}

double nakagami_ccdf(double x, int m) {
  if (!(x >= 0.0)) throw DomainError("nakagami_ccdf: x must be non-negative");
  if (m < 1) throw DomainError("nakagami_ccdf: m must be a positive integer");
  const double mx = m * x;
  if (mx == 0.0) return 1.0;
  // e^{-mx} sum_k (mx)^k / k!, accumulated in log space to survive large mx.
  const double log_mx = std::log(mx);
  double sum = 0.0;
  for (int k = 0; k < m; ++k) {
    sum += std::exp(-mx + k * log_mx - special::log_factorial(k));
  }
  return std::min(sum, 1.0);
}

double beam_gain(double slant, const BeamGainModel& model, const ShellGeometry& geom) {
  const double r = geom.checked_slant(slant, "beam_gain");
  return std::visit(
      overloaded{
          [&](const BesselBeam& b) {
            const double u =
                kBesselHalfPowerArgument * offnadir_sine(r, geom) / std::sin(b.theta_3db_rad);
            const double a = special::aperture_amplitude(u);
            return b.g_max * a * a;
          },
          [&](const StepGain& s) { return r < s.r_los_km ? s.g_los : s.g_nlos; },
          [](const ConstantGain& c) { return c.g; },
      },
      model);
}

std::vector<double> beam_breakpoints(const BeamGainModel& model, const ShellGeometry& geom) {
  std::vector<double> out;
  const double lo = geom.min_slant();
  const double hi = geom.max_slant();
  if (const auto* b = std::get_if<BesselBeam>(&model)) {
    const double scale = kBesselHalfPowerArgument / std::sin(b->theta_3db_rad);
    const double u_max = scale * geom.earth_radius() / geom.shell_radius();
    // Nulls of the amplitude pattern, found by scanning and bisection.
    constexpr double kStep = 0.25;
    constexpr std::size_t kMaxBreaks = 2000;
    double u0 = kStep;
    double f0 = special::aperture_amplitude(u0);
    for (double u1 = u0 + kStep; u1 <= u_max && out.size() < kMaxBreaks; u1 += kStep) {
      const double f1 = special::aperture_amplitude(u1);
      if ((f0 < 0.0) != (f1 < 0.0)) {
        double a = u0;
        double c = u1;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (a + c);
          if ((special::aperture_amplitude(mid) < 0.0) == (f0 < 0.0)) a = mid;
          else c = mid;
        }
        const double r = geom.slant_at_offnadir(0.5 * (a + c) / scale);
        if (r > lo && r < hi) out.push_back(r);
      }
      u0 = u1;
      f0 = f1;
    }
  } else if (const auto* s = std::get_if<StepGain>(&model)) {
    if (s->r_los_km > lo && s->r_los_km < hi) out.push_back(s->r_los_km);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> los_breakpoints(const ChannelModel& model, const ShellGeometry& geom) {
  std::vector<double> out;
  if (const auto* s = std::get_if<StepLos>(&model.los)) {
    if (s->r_los_km > geom.min_slant() && s->r_los_km < geom.max_slant()) {
      out.push_back(s->r_los_km);
    }
  }
  return out;
}

}  // namespace leocov
