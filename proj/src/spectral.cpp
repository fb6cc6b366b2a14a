#include "addkit/spectral.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "addkit/error.hpp"

namespace addkit {

double GridSpec::spacing() const noexcept { return 2.0 * half_width / static_cast<double>(points); }

double GridSpec::frequency_spacing() const noexcept { return std::numbers::pi / half_width; }

double GridSpec::cutoff() const noexcept {
  return std::numbers::pi * static_cast<double>(points) / (2.0 * half_width);
}

double GridSpec::coordinate(std::size_t j) const noexcept {
  return -half_width + static_cast<double>(j) * spacing();
}

double GridSpec::frequency(std::size_t k) const noexcept {
  return -cutoff() + static_cast<double>(k) * frequency_spacing();
}

std::size_t GridSpec::size() const noexcept { return dimension == 2 ? points * points : points; }

void GridSpec::validate() const {
  if (dimension != 1 && dimension != 2) {
    throw Error(ErrorCode::domain, "grid dimension must be 1 or 2");
  }
  if (points < 64 || !std::has_single_bit(points)) {
    throw Error(ErrorCode::domain, "grid points per axis must be a power of two >= 64");
  }
  if (!(half_width >= 0.0) || !std::isfinite(half_width)) {
    throw Error(ErrorCode::domain, "grid half-width must be finite and nonnegative");
  }
}

namespace {

// FFTW planning is not thread-safe; plans are created once per shape and
// reused through the new-array execute interface, which is.
class PlanCache {
 public:
  fftw_plan get(int dimension, std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(dimension, n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    const std::size_t total = dimension == 2 ? n * n : n;
    auto* buf = fftw_alloc_complex(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = dimension == 2
                      ? fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), buf, buf, sign, flags)
                      : fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, flags);
    fftw_free(buf);
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

// (-1)^(j1 + j2) for the flattened index.
inline double checker_sign(std::size_t flat, std::size_t n, int dimension) {
  const std::size_t s = dimension == 2 ? (flat / n + flat % n) : flat;
  return (s & 1u) ? -1.0 : 1.0;
}

}  // namespace

SpectralTransform::SpectralTransform(const GridSpec& grid) : grid_(grid) {
  grid_.validate();
  if (!grid_.resolved()) throw Error(ErrorCode::domain, "spectral transform needs a resolved grid");
}

void SpectralTransform::execute(ComplexVector& data, int sign) const {
  fftw_plan plan = plan_cache().get(grid_.dimension, grid_.points, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

// With x_j = -L + j dx and xi_k = -Xi + k dxi and N divisible by 4,
// e^{-i x_j xi_k} = (-1)^{j+k} e^{-2 pi i j k / N}; the same identity per axis in 2D.
ComplexVector SpectralTransform::forward(std::span<const std::complex<double>> values) const {
  const std::size_t total = grid_.size();
  if (values.size() != total) throw Error(ErrorCode::grid_mismatch, "forward: value count does not match grid");
  ComplexVector data(values.begin(), values.end());
  for (std::size_t i = 0; i < total; ++i) data[i] *= checker_sign(i, grid_.points, grid_.dimension);
  execute(data, FFTW_FORWARD);
  const double scale = std::pow(grid_.spacing(), grid_.dimension);
  for (std::size_t i = 0; i < total; ++i) data[i] *= scale * checker_sign(i, grid_.points, grid_.dimension);
  return data;
}

ComplexVector SpectralTransform::inverse(std::span<const std::complex<double>> spectrum) const {
  const std::size_t total = grid_.size();
  if (spectrum.size() != total) throw Error(ErrorCode::grid_mismatch, "inverse: spectrum size does not match grid");
  ComplexVector data(spectrum.begin(), spectrum.end());
  for (std::size_t i = 0; i < total; ++i) data[i] *= checker_sign(i, grid_.points, grid_.dimension);
  execute(data, FFTW_BACKWARD);
  const double scale = std::pow(grid_.frequency_spacing() / (2.0 * std::numbers::pi), grid_.dimension);
  for (std::size_t i = 0; i < total; ++i) data[i] *= scale * checker_sign(i, grid_.points, grid_.dimension);
  return data;
}

ComplexVector SpectralTransform::forward(std::span<const double> values) const {
  ComplexVector c(values.begin(), values.end());
  return forward(std::span<const std::complex<double>>(c));
}

std::vector<double> SpectralTransform::inverse_real(std::span<const std::complex<double>> spectrum) const {
  ComplexVector c = inverse(spectrum);
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

std::vector<double> SpectralTransform::sample_spectrum(
    const std::function<double(std::span<const double>)>& f) const {
  std::vector<double> out(grid_.size());
  double p[2];
  if (grid_.dimension == 1) {
    for (std::size_t k = 0; k < grid_.points; ++k) {
      p[0] = grid_.frequency(k);
      out[k] = f(std::span<const double>(p, 1));
    }
  } else {
    for (std::size_t a = 0; a < grid_.points; ++a) {
      p[0] = grid_.frequency(a);
      for (std::size_t b = 0; b < grid_.points; ++b) {
        p[1] = grid_.frequency(b);
        out[a * grid_.points + b] = f(std::span<const double>(p, 2));
      }
    }
  }
  return out;
}

std::vector<double> SpectralTransform::sample_space(
    const std::function<double(std::span<const double>)>& f) const {
  std::vector<double> out(grid_.size());
  double p[2];
  if (grid_.dimension == 1) {
    for (std::size_t j = 0; j < grid_.points; ++j) {
      p[0] = grid_.coordinate(j);
      out[j] = f(std::span<const double>(p, 1));
    }
  } else {
    for (std::size_t a = 0; a < grid_.points; ++a) {
      p[0] = grid_.coordinate(a);
      for (std::size_t b = 0; b < grid_.points; ++b) {
        p[1] = grid_.coordinate(b);
        out[a * grid_.points + b] = f(std::span<const double>(p, 2));
      }
    }
  }
  return out;
}

std::vector<double> apply_multiplier(const SpectralTransform& transform, std::span<const double> values,
                                     std::span<const double> multiplier) {
  if (multiplier.size() != values.size()) {
    throw Error(ErrorCode::grid_mismatch, "multiplier and data sizes differ");
  }
  ComplexVector spec = transform.forward(values);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= multiplier[k];
  return transform.inverse_real(spec);
}

}  // namespace addkit
