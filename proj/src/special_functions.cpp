#include "addkit/special_functions.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace addkit {

namespace {

constexpr double lanczos_g = 7.0;
constexpr std::array<double, 9> lanczos_coeffs = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

const std::complex<double> half_log_two_pi{0.5 * std::log(2.0 * std::numbers::pi), 0.0};

// log sin(pi z); for large |Im z| sin overflows, so the dominant
// exponential is factored out (imaginary part then defined modulo 2 pi)
std::complex<double> log_sin_pi(std::complex<double> z) {
  using C = std::complex<double>;
  constexpr double pi = std::numbers::pi;
  if (std::abs(z.imag()) < 20.0) return std::log(std::sin(pi * z));
  if (z.imag() < 0.0) return std::conj(log_sin_pi(std::conj(z)));
  const C i{0.0, 1.0};
  return -i * pi * z + std::log(1.0 - std::exp(2.0 * i * pi * z)) + std::log(C(0.0, 0.5));
}

}  // namespace

std::complex<double> log_gamma(std::complex<double> z) {
  using C = std::complex<double>;
  constexpr double pi = std::numbers::pi;
  if (z.real() < 0.5) {
    // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
    return C(std::log(pi), 0.0) - log_sin_pi(z) - log_gamma(1.0 - z);
  }
  const C w = z - 1.0;
  C sum = lanczos_coeffs[0];
  for (std::size_t i = 1; i < lanczos_coeffs.size(); ++i) {
    sum += lanczos_coeffs[i] / (w + static_cast<double>(i));
  }
  const C t = w + lanczos_g + 0.5;
  return half_log_two_pi + (w + 0.5) * std::log(t) - t + std::log(sum);
}

double log_abs_gamma(std::complex<double> z) { return log_gamma(z).real(); }

std::complex<double> digamma(std::complex<double> z) {
  using C = std::complex<double>;
  constexpr double pi = std::numbers::pi;
  if (z.real() < 0.5) {
    return digamma(1.0 - z) - pi / std::tan(pi * z);
  }
  C shift = 0.0;
  while (std::abs(z) < 10.0) {
    shift -= 1.0 / z;
    z += 1.0;
  }
  // psi(z) ~ ln z - 1/(2z) - sum B_{2k} / (2k z^{2k})
  static constexpr std::array<double, 7> b = {1.0 / 12.0,   -1.0 / 120.0, 1.0 / 252.0,  -1.0 / 240.0,
                                              1.0 / 132.0,  -691.0 / 32760.0, 1.0 / 12.0};
  const C inv2 = 1.0 / (z * z);
  C series = 0.0;
  C power = inv2;
  for (double c : b) {
    series += c * power;
    power *= inv2;
  }
  return shift + std::log(z) - 0.5 / z - series;
}

}  // namespace addkit
