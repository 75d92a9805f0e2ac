#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "leocov/analytic.hpp"
#include "leocov/bounds.hpp"
#include "leocov/montecarlo.hpp"
#include "leocov/rng.hpp"
#include "leocov/units.hpp"

using namespace leocov;

namespace {

AnalyticConfig bessel_config(double theta_deg) {
  AnalyticConfig c;
  c.geom = ShellGeometry(700.0);
  c.channel.los = ExponentialBlockage{0.2};
  c.channel.alpha_los = 2.0;
  c.channel.alpha_nlos = 3.0;
  c.channel.nakagami_m = 3;
  c.beam = BesselBeam{db_to_linear(20.0), deg_to_rad(theta_deg)};
  c.density = density_for_mean_visible(10.0, c.geom);
  return c;
}

std::vector<double> gamma_db_grid(int n) {
  std::vector<double> db;
  for (int i = 0; i < n; ++i) db.push_back(1.0 + 19.0 * i / std::max(1, n - 1));
  return gamma_grid_from_db(db);
}

}  // namespace

static void BM_Philox(benchmark::State& state) {
  Philox4x32 rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(rng());
}
BENCHMARK(BM_Philox);

static void BM_BeamGain(benchmark::State& state) {
  const auto c = bessel_config(5.0);
  double r = 700.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(beam_gain(r, c.beam, c.geom));
    r = r > 3000.0 ? 700.0 : r + 0.7;
  }
}
BENCHMARK(BM_BeamGain);

// Direct eta integration at one argument; range(0) is theta_3dB in tenths of a degree.
static void BM_LaplaceEtaDirect(benchmark::State& state) {
  const auto c = bessel_config(state.range(0) / 10.0);
  InterferenceLaplace engine(c);
  double t = 5.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(engine.eta(std::exp(t)));
    t = t > 30.0 ? 5.0 : t + 0.37;
  }
}
BENCHMARK(BM_LaplaceEtaDirect)->Arg(2)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);

static void BM_LaplaceTabulated(benchmark::State& state) {
  const auto c = bessel_config(0.2);
  InterferenceLaplace engine(c);
  for (double t = 0.0; t < 40.0; t += 1.0) engine.scaled_laplace_derivatives(std::exp(t), 2);
  double t = 5.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(engine.scaled_laplace_derivatives(std::exp(t), 2));
    t = t > 30.0 ? 5.0 : t + 0.37;
  }
}
BENCHMARK(BM_LaplaceTabulated)->Unit(benchmark::kMicrosecond);

static void BM_CoverageExact(benchmark::State& state) {
  const auto c = bessel_config(state.range(0) / 10.0);
  const auto gamma = gamma_db_grid(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(coverage_exact(gamma, c, 1));
}
BENCHMARK(BM_CoverageExact)->Args({2, 20})->Args({100, 20})->Unit(benchmark::kMillisecond);

static void BM_CoverageBoundUpper(benchmark::State& state) {
  const auto c = bessel_config(10.0);
  const auto gamma = gamma_db_grid(20);
  for (auto _ : state) benchmark::DoNotOptimize(coverage_bound(gamma, c, kappa_upper(3), 1));
}
BENCHMARK(BM_CoverageBoundUpper)->Unit(benchmark::kMillisecond);

static void BM_ClosedForm(benchmark::State& state) {
  StepModelConfig c;
  c.geom = ShellGeometry(700.0);
  c.r_los = 1500.0;
  c.m = 3;
  c.density = density_for_mean_visible(10.0, c.geom);
  const auto p = BoundParams::make(c, kappa_upper(3), 0.6);
  const auto gamma = gamma_db_grid(21);
  for (auto _ : state) benchmark::DoNotOptimize(coverage_closed_form(gamma, c, p));
}
BENCHMARK(BM_ClosedForm)->Unit(benchmark::kMicrosecond);

static void BM_OptimalDensity(benchmark::State& state) {
  const ShellGeometry g(700.0);
  for (auto _ : state) benchmark::DoNotOptimize(optimal_density(2.0, 3.0, g));
}
BENCHMARK(BM_OptimalDensity)->Unit(benchmark::kMicrosecond);

// Monte Carlo throughput; range(0) selects PPP (0), BPP (1) or Walker star (2).
static void BM_MonteCarlo(benchmark::State& state) {
  const auto a = bessel_config(5.0);
  MonteCarloConfig mc;
  mc.geom = ShellGeometry(425.0);
  mc.channel = a.channel;
  mc.beam = a.beam;
  mc.threads = 1;
  mc.visibility.min_elevation_rad = deg_to_rad(25.0);
  mc.visibility.user_latitude_rad = deg_to_rad(37.5);
  ConstellationSpec spec;
  switch (state.range(0)) {
    case 0:
      spec = Sppp{density_for_visible_count(4.3, mc.geom, mc.visibility.min_elevation_rad)};
      break;
    case 1:
      spec = Bpp{4};
      break;
    default:
      spec = WalkerStar{60, 25, std::numbers::pi / 2, 1};
  }
  const auto gamma = gamma_db_grid(21);
  const std::size_t trials = 10000;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_coverage(spec, gamma, trials, mc));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * trials));
}
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
