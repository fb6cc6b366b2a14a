#include "addkit/closed_form_oracle.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "addkit/density_engine.hpp"
#include "addkit/error.hpp"
#include "addkit/special_functions.hpp"

namespace addkit {

namespace {

constexpr double pi = std::numbers::pi;

double norm_squared(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

void check_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::domain, "oracle densities are singular at t = 0");
}

}  // namespace

OraclePair gaussian_pair(const TimeProfile& h, int dimension) {
  if (dimension < 1) throw Error(ErrorCode::domain, "dimension must be positive");
  OraclePair pair{"gaussian", dimension, SymbolFamily::gaussian(dimension, h), {}, {}, {}};
  const double n = dimension;
  pair.p = [h, n](double t, std::span<const double> x) {
    check_time(t);
    const double ht = h(t);
    return std::pow(4.0 * pi * ht, -0.5 * n) * std::exp(-norm_squared(x) / (4.0 * ht));
  };
  pair.phi = [h, n](double t, std::span<const double> x) {
    check_time(t);
    const double H = h(1.0 / t);
    return std::pow(pi, -0.5 * n) * std::pow(H, 0.5 * n) * std::exp(-norm_squared(x) * H);
  };
  return pair;
}

OraclePair poisson_laplace_pair(const TimeProfile& h, int dimension) {
  if (dimension != 1 && dimension != 2) throw Error(ErrorCode::domain, "poisson oracle supports n = 1, 2");
  OraclePair pair{"poisson", dimension, SymbolFamily::poisson(dimension, h), {}, {}, {}};
  pair.notes = "density uses |x|^2 in the kernel denominator; the |x/h|^2 variant is not a Fourier pair of e^{-h|xi|}";
  const double n = dimension;
  const double pcoef = std::pow(pi, -0.5 * (n + 1.0)) * std::tgamma(0.5 * (n + 1.0));
  const double phicoef = std::pow(2.0, -0.5 * n) * std::pow(2.0 * pi, -0.5 * n) * std::sqrt(pi) / std::tgamma(0.5 * (n + 1.0));
  pair.p = [h, n, pcoef](double t, std::span<const double> x) {
    check_time(t);
    const double ht = h(t);
    return pcoef * ht / std::pow(ht * ht + norm_squared(x), 0.5 * (n + 1.0));
  };
  pair.phi = [h, n, phicoef](double t, std::span<const double> x) {
    check_time(t);
    const double H = h(1.0 / t);
    return phicoef * std::pow(H, n) * std::exp(-H * std::sqrt(norm_squared(x)));
  };
  return pair;
}

double coshlog_density(double h, double x) {
  if (!(h > 0.0)) throw Error(ErrorCode::domain, "coshlog density needs h > 0");
  const double log_value = (h - 2.0) * std::numbers::ln2 + 2.0 * log_abs_gamma({0.5 * h, 0.5 * x}) - std::log(pi) -
                           std::lgamma(h);
  return std::exp(log_value);
}

double coshlog_density(const TimeProfile& h, double t, double x) {
  check_time(t);
  return coshlog_density(h(t), x);
}

OraclePair coshlog_pair(const TimeProfile& h) {
  OraclePair pair{"coshlog", 1, SymbolFamily::coshlog(h), {}, {}, {}};
  pair.notes = "density includes the 1/Gamma(h) factor of the Beta-function normalization";
  pair.p = [h](double t, std::span<const double> x) { return coshlog_density(h, t, x[0]); };
  pair.phi = [h](double t, std::span<const double> x) {
    check_time(t);
    const double H = h(1.0 / t);
    // int sech^H = sqrt(pi) Gamma(H/2) / Gamma((H+1)/2)
    const double log_norm = 0.5 * std::log(pi) + std::lgamma(0.5 * H) - std::lgamma(0.5 * (H + 1.0));
    return std::exp(-H * log_cosh(x[0]) - log_norm);
  };
  return pair;
}

double coshlog_delta_squared_exact(double h, double x) {
  return -2.0 * (log_abs_gamma({0.5 * h, 0.5 * x}) - log_abs_gamma({0.5 * h, 0.0}));
}

double coshlog_delta_squared(double h, double x, int terms, int first_index) {
  if (terms < 1) throw Error(ErrorCode::domain, "series needs at least one term");
  if (!(h > 0.0)) throw Error(ErrorCode::domain, "series needs h > 0");
  const double x2 = x * x;
  if (x2 == 0.0) return 0.0;
  double sum = 0.0;
  for (int j = first_index; j < first_index + terms; ++j) {
    const double a = h + 2.0 * j;
    sum += std::log1p(x2 / (a * a));
  }
  // sum_{j >= J} f(j) ~ int_{J - 1/2}^inf f(u) du with f(u) = ln(1 + x^2/(h+2u)^2)
  const double a0 = h + 2.0 * (first_index + terms) - 1.0;
  const double ax = std::abs(x);
  sum += 0.5 * (2.0 * ax * std::atan(ax / a0) - a0 * std::log1p(x2 / (a0 * a0)));
  return sum;
}

double coshlog_delta_squared(double h, double x) {
  int terms = 16;
  double prev = coshlog_delta_squared(h, x, terms);
  while (terms < (1 << 22)) {
    terms *= 2;
    const double next = coshlog_delta_squared(h, x, terms);
    if (std::abs(next - prev) <= 1e-13 * std::max(1.0, std::abs(next))) return next;
    prev = next;
  }
  return prev;
}

// ---------------------------------------------------------------------------
// Lewis fixtures

namespace {

double sinh_fixture_p(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-4) return 2.0 / (pi * pi) * (1.0 - ax * ax / 6.0);
  if (ax > 700.0) return 0.0;
  return 2.0 * ax / (pi * pi * std::sinh(ax));
}

double sech2(double y) {
  const double c = std::cosh(y);
  return std::isfinite(c) ? 1.0 / (c * c) : 0.0;
}

double sinc2_p(double x) {
  if (x == 0.0) return 1.0 / pi;
  const double s = std::sin(x) / x;
  return s * s / pi;
}

double triangle(double xi) { return 0.5 * std::max(1.0 - std::abs(xi) / 2.0, 0.0); }

double sech_p(double x) {
  const double c = std::cosh(std::sqrt(pi / 2.0) * x);
  return std::isfinite(c) ? 1.0 / (std::sqrt(2.0 * pi) * c) : 0.0;
}

// Normalized transform of a sampled real density on the grid (real part).
std::vector<double> sampled_transform(const std::function<double(double)>& p, const GridSpec& grid) {
  SpectralTransform ft(grid);
  auto values = ft.sample_space([&](std::span<const double> x) { return p(x[0]); });
  ComplexVector spec = ft.forward(std::span<const double>(values));
  std::vector<double> out(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) out[k] = spec[k].real();
  return out;
}

}  // namespace

CheckReport LewisFixture::check(double tol) const {
  CheckReport rep;
  rep.name = "lewis:" + name;
  const auto spec = sampled_transform(p, grid);
  const std::size_t k0 = grid.points / 2;
  if (self_adjoint) {
    // (2 pi)^{-1/2} int p(x) e^{-i x xi} dx = p(xi)
    double sup = 0.0;
    for (std::size_t k = 0; k < spec.size(); ++k) {
      sup = std::max(sup, std::abs(spec[k] / std::sqrt(2.0 * pi) - p(grid.frequency(k))));
    }
    rep.add_bound("sup_error_self_adjoint", sup, tol);
    return rep;
  }
  const double phi0 = phi(0.0);
  double sup = 0.0;
  double outside = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double xi = grid.frequency(k);
    const double shape = spec[k] / spec[k0];
    sup = std::max(sup, std::abs(shape - phi(xi) / phi0));
    if (name == "sinc2" && std::abs(xi) >= 2.0) outside = std::max(outside, std::abs(shape));
  }
  rep.add_bound("sup_error_normalized", sup, tol);
  if (name == "sinc2") rep.add_bound("support_leak", outside, 1e-6, "|FT| for |xi| >= 2");
  return rep;
}

std::vector<LewisFixture> lewis_fixtures() {
  std::vector<LewisFixture> out;
  out.push_back({"x_over_sinh", sinh_fixture_p, [](double xi) { return 0.25 * pi * sech2(0.5 * pi * xi); }, false,
                 GridSpec{1, std::size_t{1} << 14, 0.05 * (1 << 13)}});
  // Tails of sinc^2 decay like 1/x^2: truncation error ~ 1/(pi L), so L = 2^20.
  out.push_back({"sinc2", sinc2_p, triangle, false, GridSpec{1, std::size_t{1} << 21, double(1 << 20)}});
  out.push_back({"sech_self_adjoint", sech_p, sech_p, true, GridSpec{1, std::size_t{1} << 14, 0.05 * (1 << 13)}});
  return out;
}

double lewis_sinh_printed_form_error() {
  const GridSpec grid{1, std::size_t{1} << 14, 0.05 * (1 << 13)};
  const auto spec = sampled_transform(sinh_fixture_p, grid);
  const std::size_t k0 = grid.points / 2;
  double sup = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double xi = grid.frequency(k);
    sup = std::max(sup, std::abs(spec[k] / spec[k0] - 1.0 / std::cosh(0.5 * pi * xi)));
  }
  return sup;
}

// ---------------------------------------------------------------------------
// Cross-validation against the spectral engine

CheckReport oracle_cross_validation(const OraclePair& pair, double t, GridSpec grid, double tol) {
  CheckReport rep;
  rep.name = "oracle:" + pair.tag;
  DensityTable table = density_grid(pair.family, 0.0, t, grid);
  SpectralTransform ft(table.grid);
  auto oracle = ft.sample_space([&](std::span<const double> x) { return pair.p(t, x); });
  double sup = 0.0;
  for (std::size_t j = 0; j < oracle.size(); ++j) sup = std::max(sup, std::abs(oracle[j] - table.values[j]));
  rep.add_bound("density_sup_error", sup, tol, "oracle p vs spectral inversion");

  auto phi = adjoint_density_function(pair.family, t);
  double sup_phi = 0.0;
  auto phi_oracle = ft.sample_space([&](std::span<const double> x) { return pair.phi(t, x); });
  auto phi_engine = ft.sample_space(phi);
  for (std::size_t j = 0; j < phi_oracle.size(); ++j) sup_phi = std::max(sup_phi, std::abs(phi_oracle[j] - phi_engine[j]));
  rep.add_bound("adjoint_sup_error", sup_phi, tol, "oracle Phi vs engine adjoint density");
  return rep;
}

CheckReport oracle_adjointness_check(const OraclePair& pair, double t, GridSpec grid, double tol) {
  CheckReport rep;
  rep.name = "oracle_adjointness:" + pair.tag;
  if (pair.dimension != 1) throw Error(ErrorCode::domain, "oracle adjointness check is one-dimensional");
  grid.dimension = 1;
  if (!grid.resolved()) grid = resolve_grid(pair.family, 0.0, t, grid);
  const auto spec = sampled_transform([&](double x) { return pair.density(t, x); }, grid);
  const std::size_t k0 = grid.points / 2;
  const double phi0 = pair.adjoint(1.0 / t, 0.0);
  double sup = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    sup = std::max(sup, std::abs(spec[k] / spec[k0] - pair.adjoint(1.0 / t, grid.frequency(k)) / phi0));
  }
  rep.add_bound("sup_error", sup, tol, "normalized FT of oracle p_t vs oracle Phi_{1/t}");
  return rep;
}

}  // namespace addkit
