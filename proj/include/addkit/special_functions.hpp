#pragma once

#include <complex>

namespace addkit {

/// Principal-branch-free complex log-gamma: returns a value whose real part
/// is ln|Gamma(z)| and whose imaginary part is some argument of Gamma(z).
/// Lanczos (g = 7, 9 terms) for Re z >= 0.5, reflection below.
std::complex<double> log_gamma(std::complex<double> z);

/// ln|Gamma(z)|, the only part most callers need.
double log_abs_gamma(std::complex<double> z);

/// Complex digamma by upward recurrence to |z| >= 10 followed by the
/// asymptotic series; reflection for Re z < 0.5.
std::complex<double> digamma(std::complex<double> z);

}  // namespace addkit
