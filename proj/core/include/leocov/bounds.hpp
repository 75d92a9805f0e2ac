#pragma once

#include <span>

#include "leocov/analytic.hpp"
#include "leocov/coverage_curve.hpp"
#include "leocov/geometry.hpp"
#include "leocov/quadrature.hpp"

namespace leocov {

/// (m!)^(-1/m), the kappa of the upper bound.
double kappa_upper(int m);

/// Alzer's two-sided bound on the Nakagami-m power CCDF:
/// 1 - (1 - e^{-mx})^m <= P[H > x] <= 1 - (1 - e^{-m kappa x})^m.
double alzer_ccdf(double x, int m, double kappa);
inline double alzer_ccdf_lower(double x, int m) { return alzer_ccdf(x, m, 1.0); }
inline double alzer_ccdf_upper(double x, int m) { return alzer_ccdf(x, m, kappa_upper(m)); }

/// Coverage with the Nakagami CCDF replaced by the kappa-parameterised Alzer
/// form. kappa = 1 gives a lower bound, kappa = (m!)^(-1/m) an upper bound,
/// anything in between an approximation (tag bound_approx). Raw values.
CoverageCurve coverage_bound(std::span<const double> gamma, const AnalyticConfig& cfg,
                             double kappa, unsigned threads = 1);
double coverage_bound_at(double gamma, double kappa, InterferenceLaplace& engine);

/// Step LOS (LOS iff r < r_los) with a matching step beam gain.
struct StepModelConfig {
  ShellGeometry geom{ShellGeometry::kEarthRadiusKm, 700.0};
  double r_los = 1500.0;
  double g_los = 1.0;
  double g_nlos = 1.0;
  double alpha_los = 2.0;
  double alpha_nlos = 4.0;
  int m = 1;
  double density = 0.0;

  void validate() const;
  AnalyticConfig to_analytic(const QuadratureOptions& quad = {}) const;
};

/// kappa and epsilon of the step-model closed form.
struct BoundParams {
  double kappa = 1.0;
  double epsilon = 1.0;

  /// Lower end of the admissible epsilon window for this configuration.
  static double epsilon_min(const StepModelConfig& cfg);
  /// Validates kappa in [(m!)^(-1/m), 1] and epsilon in (epsilon_min, 1].
  static BoundParams make(const StepModelConfig& cfg, double kappa, double epsilon = 0.6);
};

double rho_los(double x, double alpha, const BoundParams& params, const StepModelConfig& cfg);
double rho_nlos(double x, double alpha, const BoundParams& params, const StepModelConfig& cfg);

/// Closed-form coverage approximation for the step models, with erf
/// replaced by its two-exponential approximation. Requires
/// alpha_nlos = 2 alpha_los.
CoverageCurve coverage_closed_form(std::span<const double> gamma, const StepModelConfig& cfg,
                                   const BoundParams& params);

/// The same expression one step earlier, with the error function kept.
CoverageCurve coverage_closed_form_erf(std::span<const double> gamma,
                                       const StepModelConfig& cfg, const BoundParams& params);

/// Closed form at kappa = epsilon = 1, tagged bound_lower.
CoverageCurve coverage_lower_closed(std::span<const double> gamma, const StepModelConfig& cfg);

/// gamma^(2/alpha) times the integral of 1/(1 + u^(alpha/2)) between
/// gamma^(-2/alpha) R_min^2/R_max^2 and gamma^(-2/alpha) R_max^2/R_min^2.
double rho_homogeneous(double gamma, double alpha, const ShellGeometry& geom);

/// Lower bound for homogeneous Rayleigh channels with constant gain.
CoverageCurve coverage_lower_homogeneous(std::span<const double> gamma, double density,
                                         const ShellGeometry& geom, double alpha);
double coverage_lower_homogeneous_at(double gamma, double density, const ShellGeometry& geom,
                                     double alpha);

struct OptimalDensity {
  double lambda_star = 0.0;  // per km^2
  double k_star = 0.0;       // mean visible satellites
};

/// Density maximising the homogeneous lower bound.
OptimalDensity optimal_density(double gamma, double alpha, const ShellGeometry& geom);

}  // namespace leocov
