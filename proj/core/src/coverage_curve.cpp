#include "leocov/coverage_curve.hpp"

#include <algorithm>
#include <cmath>

#include "leocov/errors.hpp"
#include "leocov/units.hpp"

namespace leocov {

std::string_view to_string(MethodTag tag) {
  switch (tag) {
    case MethodTag::exact: return "exact";
    case MethodTag::bound_lower: return "bound_lower";
    case MethodTag::bound_upper: return "bound_upper";
    case MethodTag::bound_approx: return "bound_approx";
    case MethodTag::closed_form: return "closed_form";
    case MethodTag::homogeneous_lb: return "homogeneous_lb";
    case MethodTag::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

std::vector<double> CoverageCurve::gamma_db() const {
  std::vector<double> out(gamma.size());
  std::transform(gamma.begin(), gamma.end(), out.begin(), linear_to_db);
  return out;
}

std::vector<double> CoverageCurve::clamped() const {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = clamped(i);
  return out;
}

double CoverageCurve::clamped(std::size_t i) const {
  return std::clamp(values.at(i), 0.0, 1.0);
}

void validate_gamma_grid(std::span<const double> gamma) {
  if (gamma.empty()) throw DomainError("SIR grid is empty");
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (!(gamma[i] > 0.0) || !std::isfinite(gamma[i])) {
      throw DomainError("SIR thresholds must be positive and finite");
    }
    if (i > 0 && !(gamma[i] > gamma[i - 1])) {
      throw DomainError("SIR grid must be strictly increasing");
    }
  }
}

std::vector<double> gamma_grid_from_db(std::span<const double> db) {
  std::vector<double> out(db.size());
  std::transform(db.begin(), db.end(), out.begin(), db_to_linear);
  return out;
}

}  // namespace leocov
