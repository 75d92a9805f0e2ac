// Acceptance suite: one PASS/FAIL line per primary criterion.
// Exit status is the number of failing criteria.
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "leocov/analytic.hpp"
#include "leocov/bounds.hpp"
#include "leocov/geometry.hpp"
#include "leocov/montecarlo.hpp"
#include "leocov/rng.hpp"
#include "leocov/units.hpp"

using namespace leocov;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::vector<double> db_range(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

AnalyticConfig fig3_config(double beta) {
  AnalyticConfig c;
  c.geom = ShellGeometry(700.0);
  c.channel.los = ExponentialBlockage{beta};
  c.channel.alpha_los = 2.0;
  c.channel.alpha_nlos = 3.0;
  c.channel.nakagami_m = 3;
  c.beam = BesselBeam{db_to_linear(20.0), deg_to_rad(0.2)};
  c.density = density_for_mean_visible(10.0, c.geom);
  return c;
}

MonteCarloConfig mc_from(const AnalyticConfig& a, std::uint64_t seed) {
  MonteCarloConfig m;
  m.geom = a.geom;
  m.channel = a.channel;
  m.beam = a.beam;
  m.seed = seed;
  m.threads = 0;
  return m;
}

StepModelConfig fig5_config(double r_los) {
  StepModelConfig c;
  c.geom = ShellGeometry(700.0);
  c.r_los = r_los;
  c.alpha_los = 2.0;
  c.alpha_nlos = 4.0;
  c.m = 3;
  c.density = density_for_mean_visible(10.0, c.geom);
  return c;
}

// 1. Exact coverage agrees with simulation for gamma in 1..20 dB.
Outcome criterion1() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const auto gamma = gamma_grid_from_db(db_range(1.0, 20.0, 20));
  std::string parts;
  for (double beta : {0.048, 0.2, 0.57}) {
    const AnalyticConfig cfg = fig3_config(beta);
    const auto exact = coverage_exact(gamma, cfg, 0);
    const auto mc = estimate_coverage(Sppp{cfg.density}, gamma, 100000, mc_from(cfg, 101));
    double worst = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      worst = std::max(worst, std::abs(exact.values[i] - mc.curve.values[i]));
    }
    o.pass &= worst <= 0.015;
    parts += fmt::format(" beta={}: max|d|={:.4f};", beta, worst);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.pass &= secs <= 300.0;
  o.detail = fmt::format("{} runtime {:.1f} s (limit 0.015, 300 s)", parts, secs);
  return o;
}

// 2. bound_lower <= exact <= bound_upper; simulation inside within 3 sigma.
Outcome criterion2() {
  Outcome o;
  const auto db = db_range(-10.0, 20.0, 31);
  const auto gamma = gamma_grid_from_db(db);
  std::string parts;
  for (double beta : {0.048, 0.57}) {
    const AnalyticConfig cfg = fig3_config(beta);
    const auto lo = coverage_bound(gamma, cfg, 1.0, 0);
    const auto hi = coverage_bound(gamma, cfg, kappa_upper(3), 0);
    const auto ex = coverage_exact(gamma, cfg, 0);
    const auto mc = estimate_coverage(Sppp{cfg.density}, gamma, 100000, mc_from(cfg, 202));
    double order = 0.0;
    double outside = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      order = std::max({order, lo.values[i] - ex.values[i], ex.values[i] - hi.values[i]});
      if (db[i] > 0.0) {
        const double sigma = (*mc.curve.ci_halfwidth)[i] / 1.96;
        const double v = mc.curve.values[i];
        outside = std::max({outside, lo.values[i] - (v + 3.0 * sigma), (v - 3.0 * sigma) - hi.values[i]});
      }
    }
    o.pass &= order <= 1e-6 && outside <= 0.0;
    parts += fmt::format(" beta={}: order violation {:.2e}, MC excess {:.2e};", beta,
                         std::max(order, 0.0), std::max(outside, 0.0));
  }
  o.detail = parts;
  return o;
}

// 3. With Rayleigh fading bounds and exact coincide.
Outcome criterion3() {
  Outcome o;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto gamma = gamma_grid_from_db(db_range(-10.0, 20.0, 50));
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    AnalyticConfig c;
    c.geom = ShellGeometry(400.0 + 1200.0 * u(rng));
    c.channel.los = ExponentialBlockage{0.02 + 0.6 * u(rng)};
    c.channel.alpha_los = 2.0 + u(rng);
    c.channel.alpha_nlos = c.channel.alpha_los + 0.5 + u(rng);
    c.channel.nakagami_m = 1;
    c.beam = BesselBeam{db_to_linear(10.0 + 20.0 * u(rng)), deg_to_rad(2.0 + 10.0 * u(rng))};
    c.density = density_for_mean_visible(3.0 + 20.0 * u(rng), c.geom);
    const auto ex = coverage_exact(gamma, c, 0);
    const auto lo = coverage_bound(gamma, c, 1.0, 0);
    const auto hi = coverage_bound(gamma, c, kappa_upper(1), 0);
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      worst = std::max({worst, std::abs(ex.values[i] - lo.values[i]), std::abs(ex.values[i] - hi.values[i])});
    }
  }
  o.pass = worst <= 1e-8;
  o.detail = fmt::format(" max |bound - exact| = {:.2e} over 3 configs x 50 points (limit 1e-8)", worst);
  return o;
}

// 4. Closed form against direct quadrature of the same kappa bound, and the
// ordering in R_los.
Outcome criterion4() {
  Outcome o;
  const auto gamma = gamma_grid_from_db(db_range(0.0, 20.0, 21));
  std::vector<std::vector<double>> curves;
  std::string parts;
  for (double r_los : {1500.0, 1700.0, 2300.0}) {
    const StepModelConfig c = fig5_config(r_los);
    const auto cf = coverage_closed_form(gamma, c, BoundParams::make(c, kappa_upper(3), 0.6));
    const auto direct = coverage_bound(gamma, c.to_analytic(), kappa_upper(3), 0);
    double worst = 0.0;
    double at = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      const double d = std::abs(cf.values[i] - direct.values[i]);
      if (d > worst) {
        worst = d;
        at = linear_to_db(gamma[i]);
      }
    }
    o.pass &= worst <= 0.05;
    parts += fmt::format(" R_los={}: max|d|={:.4f} at {:.0f} dB;", r_los, worst, at);
    curves.push_back(cf.values);
  }
  bool ordered = true;
  for (std::size_t i = 1; i < gamma.size(); ++i) {
    ordered &= curves[0][i] >= curves[1][i] && curves[1][i] >= curves[2][i];
  }
  o.pass &= ordered;
  o.detail = parts + fmt::format(" ordering 1500>=1700>=2300: {} (limit 0.05)", ordered ? "yes" : "no");
  return o;
}

// 5. Optimal density against a brute-force argmax; K* identity.
Outcome criterion5() {
  Outcome o;
  double worst_rel = 0.0;
  double worst_id = 0.0;
  for (double h : {400.0, 700.0, 1000.0}) {
    const ShellGeometry g(h);
    for (double db : {0.0, 3.0, 5.0}) {
      const double gamma = db_to_linear(db);
      const auto opt = optimal_density(gamma, 3.0, g);
      double best = -1.0;
      double best_lambda = 0.0;
      const int n = 4000;
      for (int i = 0; i < n; ++i) {
        const double lambda = std::pow(10.0, -11.0 + 8.0 * i / (n - 1));
        const double v = coverage_lower_homogeneous_at(gamma, lambda, g, 3.0);
        if (v > best) {
          best = v;
          best_lambda = lambda;
        }
      }
      worst_rel = std::max(worst_rel, std::abs(best_lambda / opt.lambda_star - 1.0));
      const double k = std::log1p(2.0 * g.earth_radius() / h) / rho_homogeneous(gamma, 3.0, g);
      worst_id = std::max(worst_id, std::abs(opt.k_star / k - 1.0));
    }
  }
  o.pass = worst_rel <= 0.02 && worst_id <= 1e-10;
  o.detail = fmt::format(" argmax rel. error {:.2e} (limit 2e-2); K* identity {:.2e} (limit 1e-10)",
                         worst_rel, worst_id);
  return o;
}

// 6. PPP, BPP and Walker star at mean visible 4.3, 25 deg minimum elevation.
Outcome criterion6() {
  Outcome o;
  AnalyticConfig a;
  a.geom = ShellGeometry(425.0);
  a.channel.los = ExponentialBlockage{0.35};
  a.channel.alpha_los = 3.0;
  a.channel.alpha_nlos = 4.0;
  a.channel.nakagami_m = 3;
  a.beam = BesselBeam{db_to_linear(20.0), deg_to_rad(5.0)};
  MonteCarloConfig mc = mc_from(a, 606);
  mc.visibility.min_elevation_rad = deg_to_rad(25.0);
  mc.visibility.user_latitude_rad = deg_to_rad(37.5);
  const double k = 4.3;
  const auto gamma = gamma_grid_from_db(db_range(0.0, 20.0, 21));
  const auto ppp = estimate_coverage(
      Sppp{density_for_visible_count(k, a.geom, mc.visibility.min_elevation_rad)}, gamma, 100000, mc);
  const auto bpp = estimate_coverage(Bpp{static_cast<int>(std::lround(k))}, gamma, 100000, mc);
  const auto walker = estimate_coverage(WalkerStar{60, 25, std::numbers::pi / 2, 1}, gamma, 100000, mc);
  auto gap = [&](const MonteCarloEstimate& x, const MonteCarloEstimate& y) {
    double w = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      w = std::max(w, std::abs(x.curve.values[i] - y.curve.values[i]));
    }
    return w;
  };
  const double pb = gap(ppp, bpp);
  const double pw = gap(ppp, walker);
  const double bw = gap(bpp, walker);
  const bool calibrated = std::abs(walker.mean_visible - 4.3) <= 0.3;
  o.pass = pb <= 0.05 && pw <= 0.05 && bw <= 0.05 && calibrated;
  o.detail = fmt::format(
      " max gaps PPP-BPP {:.4f}, PPP-Walker {:.4f}, BPP-Walker {:.4f} (limit 0.05);"
      " Walker mean visible {:.3f} (4.3 +- 0.3)",
      pb, pw, bw, walker.mean_visible);
  return o;
}

bool interior_max(const std::vector<double>& v) {
  const auto it = std::max_element(v.begin(), v.end());
  return it != v.begin() && it + 1 != v.end();
}

// 7. Closed form vanishes at high density; Fig. 8 interior maximum; Fig. 9
// non-monotone with interior structure.
Outcome criterion7() {
  Outcome o;
  std::string parts;
  bool vanishes = true;
  for (double r_los : {1500.0, 1700.0, 2300.0}) {
    StepModelConfig c = fig5_config(r_los);
    const std::vector<double> gamma{db_to_linear(5.0)};
    double prev = 2.0;
    for (double k : {1e1, 1e2, 1e3, 1e4, 1e5}) {
      c.density = density_for_mean_visible(k, c.geom);
      const double v = coverage_closed_form(gamma, c, BoundParams::make(c, kappa_upper(3), 0.6)).values[0];
      vanishes &= v <= prev + 1e-12;
      prev = v;
    }
    vanishes &= prev < 1e-3;
  }
  parts += fmt::format(" closed form -> 0 as lambda grows: {};", vanishes ? "yes" : "no");

  bool fig8 = true;
  for (double beta : {0.048, 0.35}) {
    for (double db : {0.0, 5.0, 10.0}) {
      AnalyticConfig c;
      c.geom = ShellGeometry(700.0);
      c.channel.los = ExponentialBlockage{beta};
      c.channel.alpha_los = 2.5;
      c.channel.alpha_nlos = 4.0;
      c.channel.nakagami_m = 3;
      c.beam = BesselBeam{db_to_linear(20.0), deg_to_rad(10.0)};
      c.quad.rel_tol = 1e-7;
      std::vector<double> v;
      for (int i = 0; i < 22; ++i) {
        c.density = std::pow(10.0, -8.0 + 3.5 * i / 21.0);
        InterferenceLaplace engine(c);
        v.push_back(coverage_exact_at(db_to_linear(db), engine));
      }
      fig8 &= interior_max(v);
    }
  }
  parts += fmt::format(" density sweep interior maximum: {};", fig8 ? "yes" : "no");

  bool fig9 = true;
  for (double beta : {0.048, 0.35}) {
    for (double db : {0.0, 5.0, 10.0}) {
      std::vector<double> v;
      for (int i = 0; i < 29; ++i) {
        AnalyticConfig c;
        c.geom = ShellGeometry(200.0 + 100.0 * i);
        c.channel.los = ExponentialBlockage{beta};
        c.channel.alpha_los = 2.5;
        c.channel.alpha_nlos = 4.0;
        c.channel.nakagami_m = 3;
        c.beam = BesselBeam{db_to_linear(20.0), deg_to_rad(10.0)};
        c.quad.rel_tol = 1e-7;
        c.density = density_for_mean_visible(10.0, c.geom);
        InterferenceLaplace engine(c);
        v.push_back(coverage_exact_at(db_to_linear(db), engine));
      }
      int turns = 0;
      for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        turns += (v[i] - v[i - 1]) * (v[i + 1] - v[i]) < 0.0;
      }
      fig9 &= turns >= 1 && interior_max(v);
    }
  }
  parts += fmt::format(" altitude sweep non-monotone with interior extremum: {}", fig9 ? "yes" : "no");
  o.pass = vanishes && fig8 && fig9;
  o.detail = parts;
  return o;
}

// 8. Numerical invariants.
Outcome criterion8() {
  Outcome o;
  AnalyticConfig c = fig3_config(0.2);
  c.beam = BesselBeam{100.0, deg_to_rad(5.0)};
  InterferenceLaplace engine(c);
  bool signs = true;
  double fd_worst = 0.0;
  for (double t = 0.0; t <= 40.0; t += 2.0) {
    const double s = std::exp(t);
    const auto l = engine.laplace_derivatives(s, 2);
    for (int k = 0; k < 3; ++k) signs &= (k % 2 ? -1.0 : 1.0) * l[k] >= 0.0;
  }
  for (double s : {1e4, 1e6, 1e8, 1e10}) {
    const double h = 1e-5 * s;
    const double fd = (std::exp(-laplace_eta(s + h, c)) - std::exp(-laplace_eta(s - h, c))) / (2.0 * h);
    fd_worst = std::max(fd_worst, std::abs(laplace_derivatives(s, 1, c)[1] / fd - 1.0));
  }

  // KS on slant ranges.
  ConstellationSampler sampler(Bpp{10}, c.geom);
  std::vector<double> all;
  std::vector<double> r;
  for (int t = 0; t < 2000; ++t) {
    Philox4x32 rng(808, t);
    sampler.sample_slants(rng, r);
    all.insert(all.end(), r.begin(), r.end());
  }
  std::sort(all.begin(), all.end());
  const double h2 = c.geom.min_slant() * c.geom.min_slant();
  const double m2 = c.geom.max_slant() * c.geom.max_slant();
  const double n = static_cast<double>(all.size());
  double d = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double f = (all[i] * all[i] - h2) / (m2 - h2);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double ks_crit = 1.628 / std::sqrt(n);

  // Unit-mean fading.
  Philox4x32 rng(909);
  double sum = 0.0;
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) sum += sample_fading(700.0 + (i % 2300), c.channel, c.geom, rng).power;
  const double mean_h = sum / draws;

  double horizon = 0.0;
  for (double h : {300.0, 700.0, 1500.0}) {
    const ShellGeometry g(h);
    horizon = std::max(horizon, std::abs(offnadir_sine(g.max_slant(), g) - g.earth_radius() / g.shell_radius()));
  }
  o.pass = signs && fd_worst <= 1e-4 && d < ks_crit && std::abs(mean_h - 1.0) <= 0.005 && horizon <= 1e-12;
  o.detail = fmt::format(
      " sign pattern {}; FD rel. error {:.2e} (1e-4); KS D={:.4f} < {:.4f}; E[H]={:.4f};"
      " horizon identity error {:.1e}",
      signs ? "ok" : "violated", fd_worst, d, ks_crit, mean_h, horizon);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Analytic-MC agreement", criterion1},   {"Sandwich bounds", criterion2},
      {"m=1 collapse", criterion3},            {"Closed form", criterion4},
      {"Optimal density", criterion5},         {"Constellation-model concordance", criterion6},
      {"Asymptotics and shape", criterion7},   {"Numerical invariants", criterion8}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string(" threw: ") + e.what()};
    }
    failures += !o.pass;
    fmt::print("criterion {} {}: {} |{}\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail);
    std::fflush(stdout);
  }
  return failures;
}
