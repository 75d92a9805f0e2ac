#pragma once

namespace leocov::special {

/// Bessel functions of the first kind for x >= 0. Power series below
/// x = 16, Hankel asymptotic expansion above (J3 by upward recurrence,
/// which is stable for x > 3). Absolute error below 1e-12 on [0, 1e4].
double bessel_j0(double x);
double bessel_j1(double x);
double bessel_j3(double x);

/// J1(u)/(2u) + 36 J3(u)/u^3, the aperture amplitude pattern normalised to
/// one at u = 0. Evaluated through the divided series near the origin, so
/// there is no removable singularity to special-case.
double aperture_amplitude(double u);

double log_factorial(int n);
double binomial(int n, int k);

}  // namespace leocov::special
