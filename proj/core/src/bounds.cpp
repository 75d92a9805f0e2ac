#include "leocov/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "leocov/channel.hpp"
#include "leocov/errors.hpp"
#include "leocov/special_functions.hpp"
#include "parallel.hpp"

namespace leocov {
namespace {

template <class PointFn>
CoverageCurve radial_curve(std::span<const double> gamma, const AnalyticConfig& cfg,
                           unsigned threads, MethodTag tag, PointFn&& point) {
  validate_gamma_grid(gamma);
  cfg.validate();
  CoverageCurve curve;
  curve.method = tag;
  curve.gamma.assign(gamma.begin(), gamma.end());
  curve.values.assign(gamma.size(), 0.0);
  curve.upper_bound_only.assign(gamma.size(), false);

  const unsigned workers = detail::resolve_threads(threads, gamma.size());
  std::vector<std::optional<InterferenceLaplace>> engines(workers);
  detail::parallel_for(gamma.size(), workers, [&](unsigned w, std::size_t i) {
    if (!engines[w]) engines[w].emplace(cfg);
    curve.values[i] = point(gamma[i], *engines[w]);
  });
  return curve;
}

// Integral of f(u) du over [lo, hi], taken in t = ln u so that limits
// spanning many decades stay cheap.
template <class F>
double integrate_log(F&& f, double lo, double hi, const QuadratureOptions& quad) {
  if (!(lo > 0.0) || !(hi > 0.0)) throw DomainError("integration limits must be positive");
  if (hi <= lo) return 0.0;
  const double a = std::log(lo);
  const double b = std::log(hi);
  std::vector<double> breaks;
  if (a < 0.0 && b > 0.0) breaks.push_back(0.0);
  return integrate([&](double t) { const double u = std::exp(t); return f(u) * u; }, a, b,
                   quad, breaks);
}

void require_closed_form(const StepModelConfig& cfg) {
  cfg.validate();
  if (std::abs(cfg.alpha_nlos - 2.0 * cfg.alpha_los) > 1e-12 * cfg.alpha_los) {
    throw UnsupportedConfiguration(
        "closed form requires alpha_nlos = 2 alpha_los (got alpha_los=" +
        std::to_string(cfg.alpha_los) + ", alpha_nlos=" + std::to_string(cfg.alpha_nlos) + ")");
  }
}

double cap_constant(const StepModelConfig& cfg) {
  return std::numbers::pi * cfg.density * cfg.geom.shell_radius() / cfg.geom.earth_radius();
}

// e^{x^2} erfc(x) for x >= 0.
double erfcx(double x) {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  const double r = 1.0 / (2.0 * x * x);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return series / (x * std::sqrt(std::numbers::pi));
}

struct RhoPair {
  double los;
  double nlos;
};

RhoPair rho_pair(double x, double alpha, const BoundParams& p, const StepModelConfig& cfg) {
  return {rho_los(x, alpha, p, cfg), rho_nlos(x, alpha, p, cfg)};
}

enum class ErfMode { two_exponential, exact };

double closed_form_at(double gamma, const StepModelConfig& cfg, const BoundParams& params,
                      ErfMode mode) {
  const double c = cap_constant(cfg);
  const double r_min = cfg.geom.min_slant();
  const double r_max = cfg.geom.max_slant();
  const double r_los = cfg.r_los;
  const double sqrt_cpi = std::sqrt(c * std::numbers::pi);

  auto psi1 = [](double R, const RhoPair& rho) { return R * (rho.nlos + R * rho.los); };
  auto psi2 = [&](double R, const RhoPair& rho) {
    return 4.0 / 3.0 * psi1(R, rho) + rho.nlos * rho.nlos / (12.0 * rho.los);
  };
  // X such that e^{-X^2} e^{c rho_N^2 / (4 rho_L)} = e^{-c Psi1(R)}.
  auto erf_arg = [&](double R, const RhoPair& rho) {
    return std::sqrt(c / (4.0 * rho.los)) * (rho.nlos + 2.0 * R * rho.los);
  };

  // NLOS serving link: radii enter squared.
  double nlos_block = 0.0;
  {
    const RhoPair rho = rho_pair(gamma / cfg.g_nlos, cfg.alpha_nlos, params, cfg);
    const double lo = r_los * r_los;
    const double hi = r_max * r_max;
    if (mode == ErfMode::two_exponential) {
      nlos_block = 0.25 * std::sqrt(c * std::numbers::pi / rho.los) *
                   ((std::exp(-c * psi1(lo, rho)) - std::exp(-c * psi1(hi, rho))) / 3.0 +
                    std::exp(-c * psi2(lo, rho)) - std::exp(-c * psi2(hi, rho)));
    } else {
      nlos_block = 0.5 * std::sqrt(c * std::numbers::pi / rho.los) *
                   (std::exp(-c * psi1(lo, rho)) * erfcx(erf_arg(lo, rho)) -
                    std::exp(-c * psi1(hi, rho)) * erfcx(erf_arg(hi, rho)));
    }
  }

  // LOS serving link: radii enter linearly.
  const int m = cfg.m;
  double los_sum = 0.0;
  for (int l = 1; l <= m; ++l) {
    const double z = l * m * gamma * params.kappa / cfg.g_los;
    const RhoPair rho = rho_pair(z, cfg.alpha_los, params, cfg);
    const double e1_min = std::exp(-c * psi1(r_min, rho));
    const double e1_los = std::exp(-c * psi1(r_los, rho));
    double block = (e1_min - e1_los) / rho.los;
    if (mode == ErfMode::two_exponential) {
      block += sqrt_cpi * rho.nlos / (4.0 * std::pow(rho.los, 1.5)) *
               ((e1_los - e1_min) / 3.0 + std::exp(-c * psi2(r_los, rho)) -
                std::exp(-c * psi2(r_min, rho)));
    } else {
      block += sqrt_cpi * rho.nlos / (2.0 * std::pow(rho.los, 1.5)) *
               (e1_los * erfcx(erf_arg(r_los, rho)) - e1_min * erfcx(erf_arg(r_min, rho)));
    }
    los_sum += special::binomial(m, l) * ((l % 2) ? 1.0 : -1.0) * block;
  }
  return nlos_block + los_sum;
}

CoverageCurve closed_curve(std::span<const double> gamma, const StepModelConfig& cfg,
                           const BoundParams& params, ErfMode mode, MethodTag tag) {
  require_closed_form(cfg);
  validate_gamma_grid(gamma);
  (void)BoundParams::make(cfg, params.kappa, params.epsilon);
  CoverageCurve curve;
  curve.method = tag;
  curve.gamma.assign(gamma.begin(), gamma.end());
  curve.upper_bound_only.assign(gamma.size(), false);
  for (double g : gamma) curve.values.push_back(closed_form_at(g, cfg, params, mode));
  return curve;
}

}  // namespace

double kappa_upper(int m) {
  if (m < 1) throw DomainError("Nakagami m must be a positive integer");
  return std::exp(-special::log_factorial(m) / m);
}

double alzer_ccdf(double x, int m, double kappa) {
  if (!(x >= 0.0)) throw DomainError("alzer_ccdf: x must be non-negative");
  if (m < 1) throw DomainError("Nakagami m must be a positive integer");
  if (!(kappa >= kappa_upper(m) * (1.0 - 1e-12) && kappa <= 1.0 + 1e-12)) {
    throw DomainError("alzer_ccdf: kappa must lie in [(m!)^(-1/m), 1]");
  }
  // 1 - (1 - e^{-y})^m = -expm1(m log1p(-e^{-y}))
  const double e = std::exp(-m * kappa * x);
  if (e >= 1.0) return 1.0;
  return -std::expm1(m * std::log1p(-e));
}

double coverage_bound_at(double gamma, double kappa, InterferenceLaplace& engine) {
  if (!(gamma > 0.0)) throw DomainError("SIR threshold must be positive");
  const AnalyticConfig& cfg = engine.config();
  const int m = cfg.channel.nakagami_m;
  std::vector<double> weights(m + 1);
  for (int l = 1; l <= m; ++l) weights[l] = special::binomial(m, l) * ((l % 2) ? 1.0 : -1.0);

  auto integrand = [&](double r) {
    const double p = los_probability(r, cfg.channel, cfg.geom);
    const double g = beam_gain(r, cfg.beam, cfg.geom);
    if (!(g > 0.0)) return 0.0;
    double los = 0.0;
    if (p > 0.0) {
      const double base = m * kappa * gamma * std::pow(r, cfg.channel.alpha_los) / g;
      for (int l = 1; l <= m; ++l) los += weights[l] * engine.laplace(l * base);
    }
    double nlos = 0.0;
    if (p < 1.0) nlos = engine.laplace(gamma * std::pow(r, cfg.channel.alpha_nlos) / g);
    return (p * los + (1.0 - p) * nlos) * r;
  };

  const auto edges = engine.edges();
  const std::vector<double> interior(edges.begin() + 1, edges.end() - 1);
  return cfg.radial_weight() *
         integrate(integrand, edges.front(), edges.back(), cfg.quad, interior);
}

CoverageCurve coverage_bound(std::span<const double> gamma, const AnalyticConfig& cfg,
                             double kappa, unsigned threads) {
  const int m = cfg.channel.nakagami_m;
  const double ku = kappa_upper(m);
  if (!(kappa >= ku * (1.0 - 1e-12) && kappa <= 1.0 + 1e-12)) {
    throw DomainError("kappa must lie between (m!)^(-1/m) and 1");
  }
  MethodTag tag = MethodTag::bound_approx;
  if (kappa == 1.0) {
    tag = MethodTag::bound_lower;
  } else if (kappa == ku) {
    tag = MethodTag::bound_upper;
  }
  auto curve = radial_curve(gamma, cfg, threads, tag, [&](double g, InterferenceLaplace& e) {
    return coverage_bound_at(g, kappa, e);
  });
  for (std::size_t i = 0; i < gamma.size(); ++i) curve.upper_bound_only[i] = gamma[i] <= 1.0;
  return curve;
}

void StepModelConfig::validate() const {
  if (!(r_los >= geom.min_slant() && r_los <= geom.max_slant())) {
    throw DomainError("r_los must lie in [R_min, R_max]");
  }
  if (!(g_los > 0.0) || !(g_nlos > 0.0)) throw DomainError("step gains must be positive");
  if (!(alpha_los > 0.0) || !(alpha_nlos >= alpha_los)) {
    throw DomainError("path-loss exponents must satisfy 0 < alpha_los <= alpha_nlos");
  }
  if (m < 1) throw DomainError("Nakagami m must be a positive integer");
  if (!(density > 0.0) || !std::isfinite(density)) {
    throw DomainError("density must be positive and finite");
  }
}

AnalyticConfig StepModelConfig::to_analytic(const QuadratureOptions& quad) const {
  validate();
  AnalyticConfig a;
  a.geom = geom;
  a.channel.los = StepLos{r_los};
  a.channel.alpha_los = alpha_los;
  a.channel.alpha_nlos = alpha_nlos;
  a.channel.nakagami_m = m;
  a.beam = StepGain{g_los, g_nlos, r_los};
  a.density = density;
  a.quad = quad;
  return a;
}

double BoundParams::epsilon_min(const StepModelConfig& cfg) {
  const double r_min = cfg.geom.min_slant();
  const double r_max = cfg.geom.max_slant();
  const double r_los = cfg.r_los;
  const double al = cfg.alpha_los;
  const double an = cfg.alpha_nlos;
  double lo = 0.0;
  for (double a : {al, an}) {
    const double first = std::pow(r_min, (a + al) / (2.0 * a)) /
                         (std::sqrt(r_max) * std::pow(r_los, al / (2.0 * a)));
    const double second = std::sqrt(r_min) * std::pow(r_los, an / (2.0 * a)) /
                          std::pow(r_max, (a + an) / (2.0 * a));
    lo = std::max({lo, first, second});
  }
  return lo;
}

BoundParams BoundParams::make(const StepModelConfig& cfg, double kappa, double epsilon) {
  cfg.validate();
  const double ku = kappa_upper(cfg.m);
  if (!(kappa >= ku * (1.0 - 1e-12) && kappa <= 1.0 + 1e-12)) {
    throw DomainError("kappa must lie between (m!)^(-1/m) and 1");
  }
  const double lo = epsilon_min(cfg);
  if (!(epsilon >= lo && epsilon <= 1.0)) {
    throw DomainError("epsilon=" + std::to_string(epsilon) + " outside its validity window [" +
                      std::to_string(lo) + ", 1]");
  }
  return BoundParams{kappa, epsilon};
}

double rho_los(double x, double alpha, const BoundParams& params, const StepModelConfig& cfg) {
  if (!(x > 0.0)) throw DomainError("rho_los: x must be positive");
  (void)BoundParams::make(cfg, params.kappa, params.epsilon);
  const double eps = params.epsilon;
  const double al = cfg.alpha_los;
  const double q = 2.0 * alpha / al;
  const double p = std::pow(x * cfg.g_los / cfg.m, 2.0 / al);
  const double r_min = cfg.geom.min_slant();
  const double lo = r_min * r_min / std::pow(eps * cfg.geom.max_slant(), q) / p;
  const double hi = cfg.r_los * cfg.r_los / std::pow(r_min / eps, q) / p;
  const int m = cfg.m;
  auto f = [&](double u) { return -std::expm1(-m * std::log1p(std::pow(u, -0.5 * al))); };
  return p * integrate_log(f, lo, hi, QuadratureOptions{});
}

double rho_nlos(double x, double alpha, const BoundParams& params, const StepModelConfig& cfg) {
  if (!(x > 0.0)) throw DomainError("rho_nlos: x must be positive");
  (void)BoundParams::make(cfg, params.kappa, params.epsilon);
  const double eps = params.epsilon;
  const double an = cfg.alpha_nlos;
  const double q = 2.0 * alpha / an;
  const double p = std::pow(x * cfg.g_nlos, 2.0 / an);
  const double r_min = cfg.geom.min_slant();
  const double r_max = cfg.geom.max_slant();
  const double lo = cfg.r_los * cfg.r_los / std::pow(eps * r_max, q) / p;
  const double hi = r_max * r_max / std::pow(r_min / eps, q) / p;
  auto f = [&](double u) { return 1.0 / (1.0 + std::pow(u, 0.5 * an)); };
  return p * integrate_log(f, lo, hi, QuadratureOptions{});
}

CoverageCurve coverage_closed_form(std::span<const double> gamma, const StepModelConfig& cfg,
                                   const BoundParams& params) {
  return closed_curve(gamma, cfg, params, ErfMode::two_exponential, MethodTag::closed_form);
}

CoverageCurve coverage_closed_form_erf(std::span<const double> gamma,
                                       const StepModelConfig& cfg, const BoundParams& params) {
  return closed_curve(gamma, cfg, params, ErfMode::exact, MethodTag::closed_form);
}

CoverageCurve coverage_lower_closed(std::span<const double> gamma, const StepModelConfig& cfg) {
  return closed_curve(gamma, cfg, BoundParams{1.0, 1.0}, ErfMode::two_exponential,
                      MethodTag::bound_lower);
}

double rho_homogeneous(double gamma, double alpha, const ShellGeometry& geom) {
  if (!(gamma > 0.0)) throw DomainError("rho_homogeneous: gamma must be positive");
  if (!(alpha > 0.0)) throw DomainError("rho_homogeneous: alpha must be positive");
  const double scale = std::pow(gamma, -2.0 / alpha);
  const double ratio = geom.min_slant() / geom.max_slant();
  const double lo = scale * ratio * ratio;
  const double hi = scale / (ratio * ratio);
  auto f = [&](double u) { return 1.0 / (1.0 + std::pow(u, 0.5 * alpha)); };
  return integrate_log(f, lo, hi, QuadratureOptions{}) / scale;
}

double coverage_lower_homogeneous_at(double gamma, double density, const ShellGeometry& geom,
                                     double alpha) {
  if (!(density > 0.0)) throw DomainError("density must be positive");
  const double rho = rho_homogeneous(gamma, alpha, geom);
  const double a = std::numbers::pi * density * geom.shell_radius() / geom.earth_radius() * rho;
  const double r_min2 = geom.min_slant() * geom.min_slant();
  const double r_max2 = geom.max_slant() * geom.max_slant();
  // e^{-a Rmin^2} - e^{-a Rmax^2} without cancellation at small a.
  return std::exp(-a * r_min2) * -std::expm1(-a * (r_max2 - r_min2)) / rho;
}

CoverageCurve coverage_lower_homogeneous(std::span<const double> gamma, double density,
                                         const ShellGeometry& geom, double alpha) {
  validate_gamma_grid(gamma);
  CoverageCurve curve;
  curve.method = MethodTag::homogeneous_lb;
  curve.gamma.assign(gamma.begin(), gamma.end());
  curve.upper_bound_only.assign(gamma.size(), false);
  for (double g : gamma) {
    curve.values.push_back(coverage_lower_homogeneous_at(g, density, geom, alpha));
  }
  return curve;
}

OptimalDensity optimal_density(double gamma, double alpha, const ShellGeometry& geom) {
  const double rho = rho_homogeneous(gamma, alpha, geom);
  const double h = geom.altitude();
  const double re = geom.earth_radius();
  const double log_term = std::log1p(2.0 * re / h);
  OptimalDensity out;
  out.lambda_star = re * log_term / (2.0 * std::numbers::pi * geom.shell_radius() * h * re * rho);
  out.k_star = out.lambda_star * geom.cap_area();
  return out;
}

}  // namespace leocov
