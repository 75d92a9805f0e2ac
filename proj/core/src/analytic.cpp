#include "leocov/analytic.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "leocov/errors.hpp"
#include "leocov/special_functions.hpp"
#include "parallel.hpp"

namespace leocov {
namespace {

constexpr std::size_t kMaxCachedPanels = 1u << 16;
// exp(-eta) and every l_k vanish in double precision well before this.
constexpr double kEtaSaturation = 2000.0;

std::vector<double> merged_edges(const AnalyticConfig& cfg) {
  std::vector<double> edges{cfg.geom.min_slant()};
  for (double r : beam_breakpoints(cfg.beam, cfg.geom)) edges.push_back(r);
  for (double r : los_breakpoints(cfg.channel, cfg.geom)) edges.push_back(r);
  edges.push_back(cfg.geom.max_slant());
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace

double AnalyticConfig::radial_weight() const {
  return 2.0 * std::numbers::pi * density * geom.shell_radius() / geom.earth_radius();
}

void AnalyticConfig::validate() const {
  channel.validate(geom);
  validate_beam(beam, geom);
  if (!(density > 0.0) || !std::isfinite(density)) {
    throw DomainError("density must be positive and finite");
  }
  if (!(quad.rel_tol > 0.0 && quad.rel_tol <= 1e-3) ||
      !(quad.abs_tol > 0.0 && quad.abs_tol <= 1e-3)) {
    throw DomainError("quadrature tolerances must lie in (0, 1e-3]");
  }
}

double density_for_mean_visible(double k, const ShellGeometry& geom) {
  if (!(k > 0.0)) throw DomainError("mean visible count must be positive");
  return k / geom.cap_area();
}

InterferenceLaplace::InterferenceLaplace(AnalyticConfig cfg)
    : cfg_(std::move(cfg)), edges_(merged_edges(cfg_)) {
  cfg_.validate();
  table_terms_ = cfg_.channel.nakagami_m;
}

const InterferenceLaplace::Cell& InterferenceLaplace::cell(long index) {
  if (auto it = cells_.find(index); it != cells_.end()) return it->second;
  constexpr int n = kTableDegree;
  const std::size_t dim = static_cast<std::size_t>(table_terms_);
  const double t0 = kCellWidth * static_cast<double>(index);
  const double half = 0.5 * kCellWidth;
  auto direct_at = [&](double x) {
    return eta_terms(std::exp(t0 + half * (1.0 + x)), table_terms_ - 1, kEtaSaturation);
  };

  std::vector<std::vector<double>> f(n + 1);
  for (int k = 0; k <= n; ++k) f[k] = direct_at(std::cos(std::numbers::pi * k / n));

  Cell c;
  c.coeffs.assign((n + 1) * dim, 0.0);
  for (int j = 0; j <= n; ++j) {
    for (std::size_t d = 0; d < dim; ++d) {
      double acc = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double w = (k == 0 || k == n) ? 0.5 : 1.0;
        acc += w * f[k][d] * std::cos(std::numbers::pi * j * k / n);
      }
      c.coeffs[j * dim + d] = acc * 2.0 / n * ((j == 0 || j == n) ? 0.5 : 1.0);
    }
  }

  // Check halfway between the two central nodes.
  const double probe = std::cos(std::numbers::pi * (n / 2 + 0.5) / n);
  const auto expected = direct_at(probe);
  for (std::size_t d = 0; d < dim; ++d) {
    double b1 = 0.0;
    double b2 = 0.0;
    for (int j = n; j >= 1; --j) {
      const double b0 = 2.0 * probe * b1 - b2 + c.coeffs[j * dim + d];
      b2 = b1;
      b1 = b0;
    }
    const double got = probe * b1 - b2 + c.coeffs[d];
    const double scale = std::max(std::abs(expected[d]), std::abs(expected[0]));
    const double tol =
        100.0 * std::max(cfg_.quad.abs_tol, cfg_.quad.rel_tol * scale);
    if (!(std::abs(got - expected[d]) <= tol)) c.direct = true;
  }
  if (c.direct) c.coeffs.clear();
  return cells_.emplace(index, std::move(c)).first->second;
}

std::vector<double> InterferenceLaplace::tabulated_eta(double s, int k_max) {
  if (direct_ || k_max >= table_terms_ || !(s > 0.0) || !std::isfinite(s)) {
    return eta_terms(s, k_max, kEtaSaturation);
  }
  const double t = std::log(s);
  const long index = static_cast<long>(std::floor(t / kCellWidth));
  const Cell& c = cell(index);
  if (c.direct) return eta_terms(s, k_max, kEtaSaturation);

  const std::size_t dim = static_cast<std::size_t>(table_terms_);
  const double half = 0.5 * kCellWidth;
  const double x = std::clamp((t - kCellWidth * static_cast<double>(index)) / half - 1.0, -1.0, 1.0);
  std::vector<double> e(static_cast<std::size_t>(k_max) + 1);
  for (std::size_t d = 0; d < e.size(); ++d) {
    double b1 = 0.0;
    double b2 = 0.0;
    for (int j = kTableDegree; j >= 1; --j) {
      const double b0 = 2.0 * x * b1 - b2 + c.coeffs[j * dim + d];
      b2 = b1;
      b1 = b0;
    }
    e[d] = x * b1 - b2 + c.coeffs[d];
  }
  // eta >= 0 and the signed terms keep their sign; interpolation noise must
  // not flip them.
  e[0] = std::max(e[0], 0.0);
  return e;
}

const InterferenceLaplace::PanelSamples& InterferenceLaplace::samples(double a, double b) {
  const PanelKey key{std::bit_cast<std::uint64_t>(a), std::bit_cast<std::uint64_t>(b)};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  if (cache_.size() >= kMaxCachedPanels) cache_.clear();

  PanelSamples out{};
  const auto x = GaussKronrod15::nodes(a, b);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    const double g = beam_gain(v, cfg_.beam, cfg_.geom);
    out[i] = ChannelNode{v, los_probability(v, cfg_.channel, cfg_.geom),
                         g * std::pow(v, -cfg_.channel.alpha_los),
                         g * std::pow(v, -cfg_.channel.alpha_nlos)};
  }
  return cache_.emplace(key, out).first->second;
}

std::vector<double> InterferenceLaplace::scaled_eta_derivatives(double s, int k_max) {
  return eta_terms(s, k_max, std::numeric_limits<double>::infinity());
}

std::vector<double> InterferenceLaplace::eta_terms(double s, int k_max, double saturate_at) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("Laplace argument must be >= 0");
  if (k_max < 0) throw DomainError("derivative order must be non-negative");
  const std::size_t dim = static_cast<std::size_t>(k_max) + 1;
  if (s == 0.0) return std::vector<double>(dim, 0.0);

  const int m = cfg_.channel.nakagami_m;
  std::vector<double> los_coeff(dim);  // (-1)^j C(m+j-1, j)
  for (std::size_t j = 0; j < dim; ++j) {
    const int jj = static_cast<int>(j);
    los_coeff[j] = (jj % 2 ? -1.0 : 1.0) * special::binomial(m + jj - 1, jj);
  }

  auto panel = [&](double a, double b, std::span<double> out) {
    const PanelSamples& nodes = samples(a, b);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const ChannelNode& n = nodes[i];
      double* f = &out[i * dim];
      const double x = n.a_los * s / m;
      const double y = n.b_nlos * s;
      const double p = n.p_los;
      const double q = 1.0 - p;
      const double log1p_x = std::log1p(x);
      // j = 0: 1 - p (1+x)^-m - q (1+y)^-1, written without cancellation.
      f[0] = n.v * (p * -std::expm1(-m * log1p_x) + q * (y / (1.0 + y)));
      if (dim == 1) continue;
      const double base_los = p * std::exp(-m * log1p_x);
      const double t = x / (1.0 + x);
      const double base_nlos = q / (1.0 + y);
      const double u = y / (1.0 + y);
      double t_pow = 1.0;
      double u_pow = 1.0;
      for (std::size_t j = 1; j < dim; ++j) {
        t_pow *= t;
        u_pow *= u;
        const double sign = (j % 2) ? -1.0 : 1.0;
        f[j] = -n.v * (los_coeff[j] * base_los * t_pow + sign * base_nlos * u_pow);
      }
    }
  };

  // The derivative terms only ever enter alongside eta itself, so they are
  // resolved to eta's scale rather than their own.
  QuadratureOptions quad = cfg_.quad;
  quad.scale_by_first = true;
  const double w = cfg_.radial_weight();
  auto e = integrate_panels(dim, panel, edges_, quad, nullptr, saturate_at / w);
  for (double& v : e) v *= w;
  return e;
}

double InterferenceLaplace::eta(double s) { return scaled_eta_derivatives(s, 0)[0]; }

double InterferenceLaplace::laplace(double s) {
  if (!(s >= 0.0)) throw DomainError("Laplace argument must be >= 0");
  return std::exp(-tabulated_eta(s, 0)[0]);
}

std::vector<double> InterferenceLaplace::scaled_laplace_derivatives(double s, int k_max) {
  if (!(s >= 0.0)) throw DomainError("Laplace argument must be >= 0");
  if (k_max < 0) throw DomainError("derivative order must be non-negative");
  const auto e = tabulated_eta(s, k_max);
  std::vector<double> l(e.size(), 0.0);
  l[0] = std::exp(-e[0]);
  for (std::size_t k = 1; k < l.size(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      acc += static_cast<double>(k - j) * e[k - j] * l[j];
    }
    l[k] = -acc / static_cast<double>(k);
  }
  return l;
}

std::vector<double> InterferenceLaplace::laplace_derivatives(double s, int k_max) {
  if (!(s > 0.0)) throw DomainError("laplace_derivatives requires s > 0");
  if (k_max > cfg_.channel.nakagami_m - 1) {
    throw DomainError("laplace_derivatives: k_max must not exceed m - 1");
  }
  auto l = scaled_laplace_derivatives(s, k_max);
  // L^(k) = l_k k! / s^k
  double factor = 1.0;
  for (std::size_t k = 1; k < l.size(); ++k) {
    factor *= static_cast<double>(k) / s;
    l[k] *= factor;
  }
  return l;
}

double laplace_eta(double s, const AnalyticConfig& cfg) {
  return InterferenceLaplace(cfg).eta(s);
}

std::vector<double> laplace_derivatives(double s, int k_max, const AnalyticConfig& cfg) {
  // One-off evaluation: building a table cell would cost more than it saves.
  InterferenceLaplace engine(cfg);
  engine.set_direct(true);
  return engine.laplace_derivatives(s, k_max);
}

double coverage_exact_at(double gamma, InterferenceLaplace& engine) {
  if (!(gamma > 0.0)) throw DomainError("SIR threshold must be positive");
  const AnalyticConfig& cfg = engine.config();
  const int m = cfg.channel.nakagami_m;
  const double alpha_l = cfg.channel.alpha_los;
  const double alpha_n = cfg.channel.alpha_nlos;

  auto integrand = [&](double r) {
    const double p = los_probability(r, cfg.channel, cfg.geom);
    const double g = beam_gain(r, cfg.beam, cfg.geom);
    if (!(g > 0.0)) return 0.0;
    double los = 0.0;
    if (p > 0.0) {
      const double s = m * gamma * std::pow(r, alpha_l) / g;
      // sum_k (-s)^k L^(k)(s) / k! = sum_k (-1)^k l_k
      const auto l = engine.scaled_laplace_derivatives(s, m - 1);
      for (std::size_t k = 0; k < l.size(); ++k) los += (k % 2 ? -l[k] : l[k]);
    }
    double nlos = 0.0;
    if (p < 1.0) nlos = engine.laplace(gamma * std::pow(r, alpha_n) / g);
    return (p * los + (1.0 - p) * nlos) * r;
  };

  const auto edges = engine.edges();
  const double lo = edges.front();
  const double hi = edges.back();
  const std::vector<double> interior(edges.begin() + 1, edges.end() - 1);
  return cfg.radial_weight() * integrate(integrand, lo, hi, cfg.quad, interior);
}

CoverageCurve coverage_exact(std::span<const double> gamma, const AnalyticConfig& cfg,
                             unsigned threads) {
  validate_gamma_grid(gamma);
  cfg.validate();
  CoverageCurve curve;
  curve.method = MethodTag::exact;
  curve.gamma.assign(gamma.begin(), gamma.end());
  curve.values.assign(gamma.size(), 0.0);
  curve.upper_bound_only.resize(gamma.size());
  for (std::size_t i = 0; i < gamma.size(); ++i) curve.upper_bound_only[i] = gamma[i] <= 1.0;

  const unsigned workers = detail::resolve_threads(threads, gamma.size());
  std::vector<std::optional<InterferenceLaplace>> engines(workers);
  detail::parallel_for(gamma.size(), workers, [&](unsigned w, std::size_t i) {
    if (!engines[w]) engines[w].emplace(cfg);
    curve.values[i] = coverage_exact_at(gamma[i], *engines[w]);
  });
  return curve;
}

}  // namespace leocov
