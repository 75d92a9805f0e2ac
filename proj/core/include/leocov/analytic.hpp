#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "leocov/channel.hpp"
#include "leocov/coverage_curve.hpp"
#include "leocov/geometry.hpp"
#include "leocov/quadrature.hpp"

namespace leocov {

/// Everything the analytical pipeline needs: geometry, channel, beam and the
/// satellite density lambda (per km^2). Noise is deliberately absent; the
/// analysis is interference limited.
struct AnalyticConfig {
  ShellGeometry geom{ShellGeometry::kEarthRadiusKm, 700.0};
  ChannelModel channel{};
  BeamGainModel beam = ConstantGain{};
  double density = 0.0;
  QuadratureOptions quad{};

  /// K = lambda |A|, the mean number of visible satellites.
  double mean_visible() const { return density * geom.cap_area(); }
  /// 2 pi lambda R_S / R_E, the radial weight of the cap measure.
  double radial_weight() const;

  void validate() const;
};

/// Density giving a mean of `k` satellites on the full visible cap.
double density_for_mean_visible(double k, const ShellGeometry& geom);

/// Interference Laplace transform L(s) = exp(-eta(s)) of the aggregate
/// interference over the whole visible cap, plus its s-derivatives.
///
/// The object keeps a cache of channel samples (p_L(v), G(v) v^-alpha) keyed
/// by quadrature panel, so repeated evaluations at different s only pay for
/// the rational part of the integrand.
///
/// The Laplace-side accessors (laplace, scaled_laplace_derivatives) go
/// through a lazily built table: ln s is cut into cells of width 2 and each
/// cell holds a degree-16 Chebyshev interpolant of e_0..e_{m-1}, fitted to
/// directly integrated values and checked against one extra direct value.
/// Cells failing the check fall back to direct integration. The e_j are
/// superpositions of logistic-type curves in ln s, analytic in a strip of
/// half-width pi, so the interpolants converge geometrically. One instance
/// per thread.
class InterferenceLaplace {
 public:
  explicit InterferenceLaplace(AnalyticConfig cfg);

  const AnalyticConfig& config() const { return cfg_; }

  double eta(double s);
  double laplace(double s);

  /// e_j = s^j eta^(j)(s) / j! for j = 0..k_max.
  std::vector<double> scaled_eta_derivatives(double s, int k_max);

  /// l_k = s^k L^(k)(s) / k! for k = 0..k_max. Obtained from
  /// l_k = -(1/k) sum_{j<k} (k - j) e_{k-j} l_j, which is the Leibniz
  /// recursion L^(k) = -sum_j C(k-1, j) eta^(k-j) L^(j) in scaled form.
  std::vector<double> scaled_laplace_derivatives(double s, int k_max);

  /// L^(k)(s) for k = 0..k_max; requires s > 0 and k_max <= m - 1.
  std::vector<double> laplace_derivatives(double s, int k_max);

  /// Integration edges on [R_min, R_max] including beam nulls and LOS steps.
  std::span<const double> edges() const { return edges_; }

  std::size_t cached_panels() const { return cache_.size(); }
  std::size_t table_cells() const { return cells_.size(); }

  /// Disables the ln s table; every evaluation integrates directly.
  void set_direct(bool direct) { direct_ = direct; }

 private:
  struct ChannelNode {
    double v;
    double p_los;
    double a_los;   // v^-alpha_L G(v)
    double b_nlos;  // v^-alpha_N G(v)
  };
  using PanelSamples = std::array<ChannelNode, GaussKronrod15::kNodes>;
  struct PanelKey {
    std::uint64_t a;
    std::uint64_t b;
    bool operator==(const PanelKey&) const = default;
  };
  struct PanelKeyHash {
    std::size_t operator()(const PanelKey& k) const noexcept {
      return std::hash<std::uint64_t>{}(k.a * 0x9E3779B97F4A7C15ULL ^ k.b);
    }
  };

  struct Cell {
    bool direct = false;
    std::vector<double> coeffs;  // (kTableDegree + 1) per component
  };
  static constexpr int kTableDegree = 16;
  static constexpr double kCellWidth = 2.0;

  const PanelSamples& samples(double a, double b);
  const Cell& cell(long index);
  std::vector<double> tabulated_eta(double s, int k_max);
  // Refinement stops once eta is known to exceed saturate_at.
  std::vector<double> eta_terms(double s, int k_max, double saturate_at);

  AnalyticConfig cfg_;
  std::vector<double> edges_;
  std::unordered_map<PanelKey, PanelSamples, PanelKeyHash> cache_;
  std::unordered_map<long, Cell> cells_;
  int table_terms_ = 1;
  bool direct_ = false;
};

double laplace_eta(double s, const AnalyticConfig& cfg);
std::vector<double> laplace_derivatives(double s, int k_max, const AnalyticConfig& cfg);

/// Coverage probability P[SIR >= gamma] under strongest-satellite association.
/// Exact for gamma > 1 (0 dB); an upper bound at or below 0 dB, which is
/// recorded in CoverageCurve::upper_bound_only. Grid points are evaluated on
/// `threads` workers; results do not depend on the worker count.
CoverageCurve coverage_exact(std::span<const double> gamma, const AnalyticConfig& cfg,
                             unsigned threads = 1);

/// Single-threshold form of coverage_exact reusing an existing engine.
double coverage_exact_at(double gamma, InterferenceLaplace& engine);

}  // namespace leocov
