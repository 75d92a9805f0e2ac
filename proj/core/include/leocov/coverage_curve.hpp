#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace leocov {

enum class MethodTag {
  exact,
  bound_lower,
  bound_upper,
  bound_approx,
  closed_form,
  homogeneous_lb,
  monte_carlo,
};

std::string_view to_string(MethodTag tag);

/// Coverage probability over a grid of SIR thresholds.
///
/// `values` are the raw numbers produced by the method. Analytical
/// expressions can exceed one at low thresholds; clamped() gives the
/// presentation form min(P, 1).
struct CoverageCurve {
  std::vector<double> gamma;  // linear SIR thresholds, strictly increasing
  std::vector<double> values;
  MethodTag method = MethodTag::exact;
  std::optional<std::vector<double>> ci_halfwidth;
  /// Points where the analytical expression is only an upper bound on the
  /// true coverage (threshold at or below 0 dB).
  std::vector<bool> upper_bound_only;

  std::size_t size() const { return gamma.size(); }
  std::vector<double> gamma_db() const;
  std::vector<double> clamped() const;
  double clamped(std::size_t i) const;
};

/// Throws DomainError unless the grid is non-empty, positive and strictly
/// increasing.
void validate_gamma_grid(std::span<const double> gamma);

std::vector<double> gamma_grid_from_db(std::span<const double> db);

}  // namespace leocov
