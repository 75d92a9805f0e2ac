#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "leocov/analytic.hpp"
#include "leocov/montecarlo.hpp"
#include "leocov/units.hpp"

using namespace leocov;

namespace {

MonteCarloConfig fig3_mc(double beta) {
  MonteCarloConfig c;
  c.geom = ShellGeometry(700.0);
  c.channel.los = ExponentialBlockage{beta};
  c.channel.alpha_los = 2.0;
  c.channel.alpha_nlos = 3.0;
  c.channel.nakagami_m = 3;
  c.beam = BesselBeam{db_to_linear(20.0), deg_to_rad(0.2)};
  return c;
}

SatelliteLink link(double slant, double fading) {
  SatelliteLink s;
  s.slant = slant;
  s.los = true;
  s.fading = fading;
  s.gain = 1.0;
  s.alpha = 2.0;
  return s;
}

}  // namespace

TEST(Constellation, ParseAndDescribe) {
  EXPECT_TRUE(std::holds_alternative<Bpp>(parse_constellation("bpp:5")));
  EXPECT_EQ(std::get<Bpp>(parse_constellation("bpp:5")).n_visible, 5);
  const auto w = std::get<WalkerStar>(parse_constellation("walker-star:60/25/1"));
  EXPECT_EQ(w.planes, 60);
  EXPECT_EQ(w.sats_per_plane, 25);
  EXPECT_EQ(w.phasing, 1);
  EXPECT_NEAR(std::get<Sppp>(parse_constellation("ppp", 2e-7)).density, 2e-7, 0.0);
  EXPECT_THROW(parse_constellation("hexagon"), DomainError);
  EXPECT_THROW(parse_constellation("bpp:0"), DomainError);
}

TEST(Constellation, PoissonMeanVisible) {
  const ShellGeometry g(700.0);
  ConstellationSampler s(Sppp{density_for_mean_visible(10.0, g)}, g);
  std::vector<double> r;
  double sum = 0.0;
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    Philox4x32 rng(8, t);
    s.sample_slants(rng, r);
    sum += static_cast<double>(r.size());
  }
  EXPECT_NEAR(sum / n, 10.0, 0.1);
}

TEST(Constellation, BinomialCountIsExact) {
  const ShellGeometry g(700.0);
  ConstellationSampler s(Bpp{5}, g);
  std::vector<double> r;
  for (int t = 0; t < 1000; ++t) {
    Philox4x32 rng(9, t);
    s.sample_slants(rng, r);
    ASSERT_EQ(r.size(), 5u);
    for (double v : r) {
      EXPECT_GE(v, g.min_slant());
      EXPECT_LE(v, g.max_slant());
    }
  }
}

// One-sample Kolmogorov-Smirnov against F(r) = (r^2 - h^2) / (R_max^2 - h^2).
TEST(Constellation, SlantLawPassesKolmogorovSmirnov) {
  const ShellGeometry g(550.0);
  ConstellationSampler s(Bpp{10}, g);
  std::vector<double> all;
  std::vector<double> r;
  for (int t = 0; t < 2000; ++t) {
    Philox4x32 rng(10, t);
    s.sample_slants(rng, r);
    all.insert(all.end(), r.begin(), r.end());
  }
  std::sort(all.begin(), all.end());
  const double h2 = g.min_slant() * g.min_slant();
  const double m2 = g.max_slant() * g.max_slant();
  const double n = static_cast<double>(all.size());
  double d = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double f = (all[i] * all[i] - h2) / (m2 - h2);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  EXPECT_LT(d, 1.628 / std::sqrt(n));  // 1% critical value
}

TEST(Constellation, MinimumElevationCut) {
  const ShellGeometry g(425.0);
  VisibilityOptions vis;
  vis.min_elevation_rad = deg_to_rad(25.0);
  const double k = 4.3;
  ConstellationSampler s(Sppp{density_for_visible_count(k, g, vis.min_elevation_rad)}, g, vis);
  std::vector<double> r;
  double sum = 0.0;
  const int n = 20000;
  for (int t = 0; t < n; ++t) {
    Philox4x32 rng(12, t);
    s.sample_slants(rng, r);
    for (double v : r) EXPECT_LE(v, s.slant_limit() * (1.0 + 1e-12));
    sum += static_cast<double>(r.size());
  }
  EXPECT_NEAR(sum / n, k, 0.05);
}

TEST(Constellation, WalkerCalibration) {
  const ShellGeometry g(425.0);
  VisibilityOptions vis;
  vis.min_elevation_rad = deg_to_rad(25.0);
  vis.user_latitude_rad = deg_to_rad(37.5);
  ConstellationSampler s(WalkerStar{60, 25, std::numbers::pi / 2, 1}, g, vis);
  std::vector<double> r;
  double sum = 0.0;
  const int n = 20000;
  for (int t = 0; t < n; ++t) {
    Philox4x32 rng(13, t);
    s.sample_slants(rng, r);
    sum += static_cast<double>(r.size());
  }
  EXPECT_NEAR(sum / n, 4.3, 0.3);
}

TEST(Sir, SingleSatelliteAlwaysCovered) {
  ConstellationRealization real;
  real.sats.push_back(link(800.0, 0.3));
  const auto s = sir_sample(real, Association::strongest);
  EXPECT_TRUE(std::isinf(s.sir));
  EXPECT_TRUE(s.covered(1e300));
  EXPECT_TRUE(sir_sample(ConstellationRealization{}, Association::nearest).empty());
}

TEST(Sir, SymmetricPairIsZeroDb) {
  ConstellationRealization real;
  real.sats.push_back(link(900.0, 1.3));
  real.sats.push_back(link(900.0, 1.3));
  EXPECT_EQ(sir_sample(real, Association::strongest).sir, 1.0);
  EXPECT_EQ(sir_sample(real, Association::nearest).sir, 1.0);
}

TEST(Sir, StrongestDominatesNearest) {
  const MonteCarloConfig c = fig3_mc(0.2);
  ConstellationSampler s(Sppp{density_for_mean_visible(10.0, c.geom)}, c.geom);
  for (int t = 0; t < 5000; ++t) {
    Philox4x32 rng(14, t);
    const auto real = s.realize(rng, c.channel, c.beam);
    const auto a = sir_sample(real, Association::strongest);
    const auto b = sir_sample(real, Association::nearest);
    if (a.empty()) continue;
    EXPECT_GE(a.sir, b.sir);
  }
}

TEST(Estimate, TinyThresholdGivesNonEmptyFraction) {
  MonteCarloConfig c = fig3_mc(0.2);
  const std::vector<double> gamma{1e-300};
  const auto e = estimate_coverage(Sppp{density_for_mean_visible(2.0, c.geom)}, gamma, 20000, c);
  EXPECT_NEAR(e.curve.values[0], 1.0 - e.empty_fraction, 1e-12);
  EXPECT_NEAR(e.empty_fraction, std::exp(-2.0), 0.01);
}

TEST(Estimate, DeterministicAcrossThreadCounts) {
  MonteCarloConfig c = fig3_mc(0.57);
  const auto gamma = gamma_grid_from_db(std::vector<double>{-5.0, 0.0, 5.0, 10.0});
  const Sppp spec{density_for_mean_visible(10.0, c.geom)};
  c.threads = 1;
  const auto a = estimate_coverage(spec, gamma, 4000, c);
  c.threads = 4;
  const auto b = estimate_coverage(spec, gamma, 4000, c);
  c.threads = 3;
  const auto d = estimate_coverage(spec, gamma, 4000, c);
  EXPECT_EQ(a.curve.values, b.curve.values);
  EXPECT_EQ(a.curve.values, d.curve.values);
  EXPECT_EQ(*a.curve.ci_halfwidth, *b.curve.ci_halfwidth);
  EXPECT_EQ(a.mean_visible, d.mean_visible);
}

TEST(Estimate, ConfidenceHalfWidth) {
  MonteCarloConfig c = fig3_mc(0.2);
  const auto gamma = gamma_grid_from_db(std::vector<double>{3.0});
  const auto e = estimate_coverage(Bpp{4}, gamma, 10000, c);
  const double p = e.curve.values[0];
  EXPECT_NEAR((*e.curve.ci_halfwidth)[0], 1.96 * std::sqrt(p * (1 - p) / 10000.0), 1e-15);
}

TEST(Estimate, AgreesWithExactAtFiveDb) {
  MonteCarloConfig c = fig3_mc(0.57);
  AnalyticConfig a;
  a.geom = c.geom;
  a.channel = c.channel;
  a.beam = c.beam;
  a.density = density_for_mean_visible(10.0, a.geom);
  const std::vector<double> gamma{db_to_linear(5.0)};
  const double exact = coverage_exact(gamma, a).values[0];
  const auto est = estimate_coverage(Sppp{a.density}, gamma, 100000, c);
  EXPECT_NEAR(est.curve.values[0], exact, 0.015);
}
