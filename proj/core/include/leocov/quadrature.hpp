#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "leocov/errors.hpp"

namespace leocov {

struct QuadratureOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;
  /// Measure every component's relative tolerance against
  /// max(|I_c|, |I_0|) instead of |I_c| alone.
  bool scale_by_first = false;
};

struct QuadratureStats {
  std::size_t panels = 0;
  std::size_t evaluations = 0;
  double max_error = 0.0;
};

/// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
struct GaussKronrod15 {
  static constexpr std::size_t kNodes = 15;
  // Abscissae in increasing order.
  static constexpr std::array<double, kNodes> abscissae{
      -0.991455371120812639206854697526329, -0.949107912342758524526189684047851,
      -0.864864423359769072789712788640926, -0.741531185599394439863864773280788,
      -0.586087235467691130294144845693013, -0.405845151377397166906606412076961,
      -0.207784955007898467600689403773245, 0.0,
      0.207784955007898467600689403773245,  0.405845151377397166906606412076961,
      0.586087235467691130294144845693013,  0.741531185599394439863864773280788,
      0.864864423359769072789712788640926,  0.949107912342758524526189684047851,
      0.991455371120812639206854697526329};
  static constexpr std::array<double, kNodes> kronrod_weights{
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
      0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
      0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
      0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
      0.022935322010529224963732008058970};
  // Gauss weights live on the odd-indexed Kronrod abscissae.
  static constexpr std::array<double, kNodes> gauss_weights{
      0.0, 0.129484966168869693270611432679082, 0.0, 0.279705391489276667901467771423780,
      0.0, 0.381830050505118944950369775488975, 0.0, 0.417959183673469387755102040816327,
      0.0, 0.381830050505118944950369775488975, 0.0, 0.279705391489276667901467771423780,
      0.0, 0.129484966168869693270611432679082, 0.0};

  static std::array<double, kNodes> nodes(double a, double b) {
    std::array<double, kNodes> x{};
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    for (std::size_t i = 0; i < kNodes; ++i) x[i] = c + h * abscissae[i];
    return x;
  }
};

/// Globally adaptive Gauss-Kronrod integration of a vector-valued integrand.
///
/// `panel` is called as panel(a, b, values) and must write the integrand at
/// the 15 nodes GaussKronrod15::nodes(a, b) into `values`, node-major
/// (values[node * dim + component]). Initial panels are the intervals between
/// consecutive `edges` (at least two, increasing). Every component must meet
/// max(abs_tol, rel_tol |I_i|); otherwise the panel with the worst scaled
/// error is bisected until `max_subdivisions` bisections have been spent, at
/// which point NumericalError is thrown.
///
/// When component 0 is known to exceed `saturate_at` (estimate minus error
/// estimate), refinement stops early; callers use this when only a lower
/// bound matters past that point.
template <class PanelFn>
std::vector<double> integrate_panels(std::size_t dim, PanelFn&& panel,
                                     std::span<const double> edges,
                                     const QuadratureOptions& opt,
                                     QuadratureStats* stats = nullptr,
                                     double saturate_at =
                                         std::numeric_limits<double>::infinity()) {
  using GK = GaussKronrod15;
  if (edges.size() < 2) throw DomainError("integrate_panels: need at least two edges");

  struct Panel {
    double a;
    double b;
    std::vector<double> estimate;
    std::vector<double> error;
  };
  std::vector<Panel> pool;
  std::vector<double> values(GK::kNodes * dim);
  std::size_t evaluations = 0;

  auto evaluate = [&](double a, double b) {
    panel(a, b, std::span<double>(values));
    evaluations += GK::kNodes;
    Panel p{a, b, std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    const double h = 0.5 * (b - a);
    for (std::size_t c = 0; c < dim; ++c) {
      double kronrod = 0.0;
      double gauss = 0.0;
      for (std::size_t i = 0; i < GK::kNodes; ++i) {
        const double f = values[i * dim + c];
        kronrod += GK::kronrod_weights[i] * f;
        gauss += GK::gauss_weights[i] * f;
      }
      p.estimate[c] = h * kronrod;
      p.error[c] = std::abs(h * (kronrod - gauss));
    }
    return p;
  };

  std::vector<double> total(dim, 0.0);
  std::vector<double> total_error(dim, 0.0);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i + 1] >= edges[i])) {
      throw DomainError("integrate_panels: edges must be non-decreasing");
    }
    if (edges[i + 1] == edges[i]) continue;
    pool.push_back(evaluate(edges[i], edges[i + 1]));
    for (std::size_t c = 0; c < dim; ++c) {
      total[c] += pool.back().estimate[c];
      total_error[c] += pool.back().error[c];
    }
  }

  auto tolerance = [&](std::size_t c) {
    const double scale =
        opt.scale_by_first ? std::max(std::abs(total[c]), std::abs(total[0])) : std::abs(total[c]);
    return std::max(opt.abs_tol, opt.rel_tol * scale);
  };
  auto score = [&](const Panel& p) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) s = std::max(s, p.error[c] / tolerance(c));
    return s;
  };
  auto converged = [&] {
    for (std::size_t c = 0; c < dim; ++c) {
      if (!(total_error[c] <= tolerance(c))) return false;
    }
    return true;
  };

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> queue;
  for (std::size_t i = 0; i < pool.size(); ++i) queue.emplace(score(pool[i]), i);

  int bisections = 0;
  while (!converged()) {
    if (queue.empty() || total[0] - total_error[0] > saturate_at) break;
    const auto [worst, index] = queue.top();
    queue.pop();
    const double a = pool[index].a;
    const double b = pool[index].b;
    const double mid = 0.5 * (a + b);
    const double scale = std::max(std::abs(a), std::abs(b));
    if (!(mid > a && mid < b) ||
        b - a <= 64.0 * std::numeric_limits<double>::epsilon() * scale) {
      continue;  // at roundoff level; accept as is
    }
    if (bisections >= opt.max_subdivisions * static_cast<int>(std::max<std::size_t>(1, edges.size() - 1))) {
      std::string detail;
      for (std::size_t c = 0; c < dim; ++c) {
        detail += " [" + std::to_string(c) + "] estimate=" + std::to_string(total[c]) +
                  " error=" + std::to_string(total_error[c]) +
                  " tol=" + std::to_string(tolerance(c));
      }
      throw NumericalError("adaptive quadrature on [" + std::to_string(edges.front()) +
                           ", " + std::to_string(edges.back()) + "] did not converge after " +
                           std::to_string(bisections) + " subdivisions;" + detail +
                           "; worst panel [" + std::to_string(a) + ", " + std::to_string(b) +
                           "]");
    }
    ++bisections;
    Panel left = evaluate(a, mid);
    Panel right = evaluate(mid, b);
    for (std::size_t c = 0; c < dim; ++c) {
      total[c] += left.estimate[c] + right.estimate[c] - pool[index].estimate[c];
      total_error[c] += left.error[c] + right.error[c] - pool[index].error[c];
    }
    pool[index] = std::move(left);
    pool.push_back(std::move(right));
    queue.emplace(score(pool[index]), index);
    queue.emplace(score(pool.back()), pool.size() - 1);
    (void)worst;
  }

  // Re-sum in panel order so the result does not carry update roundoff.
  std::vector<double> result(dim, 0.0);
  double max_error = 0.0;
  std::vector<double> err(dim, 0.0);
  for (const auto& p : pool) {
    for (std::size_t c = 0; c < dim; ++c) {
      result[c] += p.estimate[c];
      err[c] += p.error[c];
    }
  }
  for (double e : err) max_error = std::max(max_error, e);
  if (stats) {
    stats->panels = pool.size();
    stats->evaluations = evaluations;
    stats->max_error = max_error;
  }
  return result;
}

/// Scalar convenience wrapper: integrates f over [a, b], splitting first at
/// the given interior points.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureOptions& opt = {},
                 std::span<const double> interior = {}, QuadratureStats* stats = nullptr) {
  std::vector<double> edges;
  edges.reserve(interior.size() + 2);
  edges.push_back(a);
  for (double x : interior) {
    if (x > a && x < b) edges.push_back(x);
  }
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  auto panel = [&](double lo, double hi, std::span<double> out) {
    const auto x = GaussKronrod15::nodes(lo, hi);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  };
  return integrate_panels(1, panel, edges, opt, stats)[0];
}

}  // namespace leocov
