#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace addkit {

/// Uniform tensor grid on [-L, L)^n with N points per axis.
///
/// Spatial nodes are x_j = -L + j dx with dx = 2L / N; frequency nodes are
/// xi_k = -Xi + k dxi with dxi = pi / L and cutoff Xi = pi N / (2 L), so
/// dx * dxi * N = 2 pi. half_width == 0 means "choose L from the symbol's
/// decay" and is resolved by the density engine.
struct GridSpec {
  int dimension = 1;
  std::size_t points = 4096;
  double half_width = 0.0;

  bool resolved() const noexcept { return half_width > 0.0; }
  double spacing() const noexcept;
  double frequency_spacing() const noexcept;
  double cutoff() const noexcept;
  double coordinate(std::size_t j) const noexcept;
  double frequency(std::size_t k) const noexcept;
  std::size_t size() const noexcept;

  /// Throws Error(domain) unless n in {1, 2} and N is a power of two >= 64.
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

using ComplexVector = std::vector<std::complex<double>>;

/// Discrete Fourier pair on a resolved grid, in the convention
///   F(xi_k)  = sum_j u(x_j) e^{-i x_j xi_k} dx^n
///   u(x_j)   = (dxi / 2pi)^n sum_k F(xi_k) e^{i x_j xi_k}
/// which are exact inverses of each other. Arrays are row-major with the
/// first coordinate varying slowest.
class SpectralTransform {
 public:
  explicit SpectralTransform(const GridSpec& grid);

  ComplexVector forward(std::span<const std::complex<double>> values) const;
  ComplexVector inverse(std::span<const std::complex<double>> spectrum) const;

  /// Real convenience overloads.
  ComplexVector forward(std::span<const double> values) const;
  std::vector<double> inverse_real(std::span<const std::complex<double>> spectrum) const;

  /// Samples f at every frequency node (point of length n).
  std::vector<double> sample_spectrum(const std::function<double(std::span<const double>)>& f) const;
  /// Samples f at every spatial node.
  std::vector<double> sample_space(const std::function<double(std::span<const double>)>& f) const;

  const GridSpec& grid() const noexcept { return grid_; }

 private:
  void execute(ComplexVector& data, int sign) const;

  GridSpec grid_;
};

/// Applies the Fourier multiplier m (sampled at frequency nodes) to real
/// grid data: inverse(m * forward(u)), real part.
std::vector<double> apply_multiplier(const SpectralTransform& transform, std::span<const double> values,
                                     std::span<const double> multiplier);

}  // namespace addkit
