#include "leocov/special_functions.hpp"

#include <cmath>
#include <numbers>

#include "leocov/errors.hpp"

namespace leocov::special {
namespace {

constexpr double kSeriesLimit = 16.0;

// sum_k (-1)^k (x/2)^(2k) / (k! (k+n)!), i.e. J_n(x) / (x/2)^n.
double divided_series(int n, double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  for (int i = 1; i <= n; ++i) term /= i;
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<double>(k) * (k + n));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Hankel expansion J_nu(x) ~ sqrt(2/(pi x)) (P cos chi - Q sin chi).
double hankel(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 120; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(term) > last) break;  // asymptotic series started to diverge
    last = std::abs(term);
    // k odd feeds Q, k even feeds P, with alternating signs in pairs.
    const int r = k % 4;
    if (r == 1) q += term;
    else if (r == 2) p -= term;
    else if (r == 3) q -= term;
    else p += term;
    if (last < 1e-17) break;
  }
  const double chi = x - (0.5 * nu + 0.25) * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

void require_nonnegative(double x) {
  if (!(x >= 0.0)) throw DomainError("Bessel argument must be non-negative");
}

}  // namespace

double bessel_j0(double x) {
  require_nonnegative(x);
  return x < kSeriesLimit ? divided_series(0, x) : hankel(0, x);
}

double bessel_j1(double x) {
  require_nonnegative(x);
  return x < kSeriesLimit ? 0.5 * x * divided_series(1, x) : hankel(1, x);
}

double bessel_j3(double x) {
  require_nonnegative(x);
  if (x < kSeriesLimit) {
    const double h = 0.5 * x;
    return h * h * h * divided_series(3, x);
  }
  const double j0 = hankel(0, x);
  const double j1 = hankel(1, x);
  const double j2 = 2.0 / x * j1 - j0;
  return 4.0 / x * j2 - j1;
}

double aperture_amplitude(double u) {
  require_nonnegative(u);
  if (u < kSeriesLimit) {
    // J1(u)/(2u) = S1/4, 36 J3(u)/u^3 = 36 S3/8 with S_n the divided series.
    return 0.25 * divided_series(1, u) + 4.5 * divided_series(3, u);
  }
  return bessel_j1(u) / (2.0 * u) + 36.0 * bessel_j3(u) / (u * u * u);
}

double log_factorial(int n) {
  if (n < 0) throw DomainError("log_factorial of a negative integer");
  return std::lgamma(static_cast<double>(n) + 1.0);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double result = 1.0;
  for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

}  // namespace leocov::special
