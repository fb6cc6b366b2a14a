#include "addkit/density_engine.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "addkit/diagnostics.hpp"
#include "addkit/error.hpp"
#include "addkit/parallel.hpp"
#include "addkit/quadrature.hpp"
#include "addkit/special_functions.hpp"

namespace addkit {

namespace {

constexpr double pi = std::numbers::pi;
// e^{-40} ~ 4e-18: spectral mass beyond this level is below double resolution.
constexpr double point_level = 40.0;

double norm(std::span<const double> x) {
  if (x.size() == 1) return std::abs(x[0]);
  if (x.size() == 2) return std::hypot(x[0], x[1]);
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

void check_point(const SymbolFamily& family, std::span<const double> x) {
  if (static_cast<int>(x.size()) != family.dimension()) {
    throw Error(ErrorCode::domain, "point dimension does not match " + family.description());
  }
}

void check_times(double s, double t) {
  if (!(s >= 0.0) || !std::isfinite(t)) throw Error(ErrorCode::domain, "times must be finite and nonnegative");
  if (s > t) throw Error(ErrorCode::reversed_time, "density requires s <= t");
  if (s == t) throw Error(ErrorCode::domain, "density requires s < t (p_{s,s} is a point mass)");
}

// Four-point Lagrange weights for fractional offset u in [0, 1) at nodes -1, 0, 1, 2.
void lagrange4(double u, double w[4]) {
  w[0] = -u * (u - 1.0) * (u - 2.0) / 6.0;
  w[1] = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
  w[2] = -(u + 1.0) * u * (u - 2.0) / 2.0;
  w[3] = (u + 1.0) * u * (u - 1.0) / 6.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// DensityTable

double DensityTable::value(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != grid.dimension) throw Error(ErrorCode::grid_mismatch, "point dimension does not match table");
  const double dx = grid.spacing();
  const auto n = static_cast<long>(grid.points);
  long base[2] = {0, 0};
  double w[2][4] = {};
  for (int d = 0; d < grid.dimension; ++d) {
    const double pos = (x[static_cast<std::size_t>(d)] + grid.half_width) / dx;
    if (!(pos >= 0.0) || pos > static_cast<double>(n - 1)) return 0.0;
    const double fl = std::floor(pos);
    base[d] = static_cast<long>(fl);
    lagrange4(pos - fl, w[d]);
  }
  auto at = [&](long i, long j) -> double {
    if (i < 0 || i >= n || j < 0 || j >= n) return 0.0;
    return values[static_cast<std::size_t>(i * n + j)];
  };
  double v = 0.0;
  if (grid.dimension == 1) {
    for (int a = 0; a < 4; ++a) {
      const long i = base[0] - 1 + a;
      if (i >= 0 && i < n) v += w[0][a] * values[static_cast<std::size_t>(i)];
    }
  } else {
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) v += w[0][a] * w[1][b] * at(base[0] - 1 + a, base[1] - 1 + b);
    }
  }
  return v;
}

double DensityTable::origin_value() const {
  const std::size_t mid = grid.points / 2;
  return grid.dimension == 1 ? values[mid] : values[mid * grid.points + mid];
}

// ---------------------------------------------------------------------------
// Grids

GridSpec default_grid(int dimension) {
  return GridSpec{dimension, dimension == 1 ? std::size_t{4096} : std::size_t{512}, 0.0};
}

double frequency_cutoff(const SymbolFamily& family, double s, double t, double level) {
  const auto n = static_cast<std::size_t>(family.dimension());
  std::vector<double> xi(n, 0.0);
  auto axis_min = [&](double r) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(xi.begin(), xi.end(), 0.0);
      xi[i] = r;
      m = std::min(m, family.Q(s, t, xi));
    }
    return m;
  };
  double hi = 1.0;
  while (axis_min(hi) < level) {
    hi *= 2.0;
    if (hi > 1e15) throw Error(ErrorCode::insufficient_decay, "e^{-Q} does not decay for " + family.description());
  }
  double lo = 0.0;
  while (axis_min(lo) >= level && lo > 0.0) lo *= 0.5;  // unreachable for Q(0) = 0, kept for safety
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (axis_min(mid) >= level ? hi : lo) = mid;
  }
  return hi;
}

GridSpec resolve_grid(const SymbolFamily& family, double s, double t, GridSpec grid, const DensityOptions& options) {
  if (grid.dimension != family.dimension()) {
    if (grid == GridSpec{}) {
      grid = default_grid(family.dimension());
    } else {
      throw Error(ErrorCode::grid_mismatch, "grid dimension does not match " + family.description());
    }
  }
  grid.validate();
  const double level = std::log(1.0 / options.tail_eps);
  if (!grid.resolved()) {
    const double cutoff = frequency_cutoff(family, s, t, level);
    grid.half_width = pi * static_cast<double>(grid.points) / (2.0 * cutoff);
    return grid;
  }
  const auto n = static_cast<std::size_t>(family.dimension());
  std::vector<double> xi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(xi.begin(), xi.end(), 0.0);
    xi[i] = grid.cutoff();
    if (family.Q(s, t, xi) < level) {
      throw Error(ErrorCode::insufficient_decay,
                  "frequency cutoff " + std::to_string(grid.cutoff()) + " leaves e^{-Q} above tail_eps; use a larger N or smaller L");
    }
  }
  return grid;
}

DensityTable density_from_spectrum(const GridSpec& grid, const std::function<double(std::span<const double>)>& spectrum) {
  SpectralTransform ft(grid);
  std::vector<double> spec = ft.sample_spectrum(spectrum);
  ComplexVector c(spec.begin(), spec.end());
  DensityTable table;
  table.grid = grid;
  table.values = ft.inverse_real(c);
  const double cell = std::pow(grid.spacing(), grid.dimension);
  double mass = 0.0;
  double clipped = 0.0;
  for (double& v : table.values) {
    if (v < 0.0) {
      clipped -= v;
      v = 0.0;
    }
    mass += v;
  }
  table.total_mass = mass * cell;
  table.clipped_mass = clipped * cell;
  return table;
}

DensityTable density_grid(const SymbolFamily& family, double s, double t, GridSpec grid, const DensityOptions& options) {
  check_times(s, t);
  grid = resolve_grid(family, s, t, grid, options);
  DensityTable table = density_from_spectrum(grid, [&](std::span<const double> xi) { return std::exp(-family.Q(s, t, xi)); });
  table.s = s;
  table.t = t;
  table.family_id = family.description();
  if (std::abs(table.total_mass - 1.0) > 1e-6) {
    warn("density table for " + family.description() + " has mass " + std::to_string(table.total_mass));
  }
  if (table.clipped_mass > 1e-10) {
    warn("density table for " + family.description() + " clipped negative mass " + std::to_string(table.clipped_mass));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Pointwise densities

namespace {

double density_point_1d(const SymbolFamily& family, double s, double t, double x) {
  const double cutoff = frequency_cutoff(family, s, t, point_level);
  auto g = [&](double xi) { return std::exp(-family.Q(s, t, xi)); };
  const double l1 = quad::integrate(g, 0.0, cutoff, {0.0, 1e-12}).value;
  if (x == 0.0) return l1 / pi;
  const double v = quad::integrate_cosine(g, x, cutoff, 1e-14, l1).value / pi;
  return std::max(v, 0.0);
}

// Radial n-dimensional family at radius r; only n = 2 needs the Bessel kernel.
double density_point_radial2(const SymbolFamily& family, double s, double t, double r) {
  const double cutoff = frequency_cutoff(family, s, t, point_level);
  auto g = [&](double rho) { return std::exp(-family.Q_radial(s, t, rho)) * rho; };
  const double l1 = quad::integrate(g, 0.0, cutoff, {0.0, 1e-12}).value;
  if (r == 0.0) return l1 / (2.0 * pi);
  std::vector<double> breaks{0.0};
  const double step = pi / r;
  const std::size_t panels = std::min<std::size_t>(200000, static_cast<std::size_t>(std::ceil(cutoff / step)));
  const double width = cutoff / static_cast<double>(std::max<std::size_t>(panels, 1));
  for (std::size_t i = 1; i <= std::max<std::size_t>(panels, 1); ++i) breaks.push_back(width * static_cast<double>(i));
  breaks.back() = cutoff;
  auto h = [&](double rho) { return g(rho) * std::cyl_bessel_j(0.0, r * rho); };
  const double v = quad::integrate(h, breaks, {1e-14 * l1, 0.0}, 40 * breaks.size() + 4000).value / (2.0 * pi);
  return std::max(v, 0.0);
}

}  // namespace

double density_point(const SymbolFamily& family, double s, double t, std::span<const double> x) {
  check_point(family, x);
  check_times(s, t);
  if (family.kind() == FamilyKind::direct_sum) {
    double v = 1.0;
    std::size_t offset = 0;
    for (const auto& c : family.components()) {
      const auto m = static_cast<std::size_t>(c.dimension());
      v *= density_point(c, s, t, x.subspan(offset, m));
      offset += m;
    }
    return v;
  }
  if (family.dimension() == 1) return density_point_1d(family, s, t, x[0]);
  if (family.dimension() == 2 && family.radial()) return density_point_radial2(family, s, t, norm(x));
  throw Error(ErrorCode::domain, "pointwise densities support n <= 2 and direct sums of such families");
}

double density_point(const SymbolFamily& family, double s, double t, double x) {
  return density_point(family, s, t, std::span<const double>(&x, 1));
}

double density_peak(const SymbolFamily& family, double s, double t) {
  std::vector<double> origin(static_cast<std::size_t>(family.dimension()), 0.0);
  return density_point(family, s, t, origin);
}

// ---------------------------------------------------------------------------
// sigma and the adjoint exponent

bool has_closed_form_sigma(const SymbolFamily& family) {
  switch (family.kind()) {
    case FamilyKind::gaussian:
    case FamilyKind::poisson:
    case FamilyKind::coshlog:
      return true;
    case FamilyKind::direct_sum:
      return std::all_of(family.components().begin(), family.components().end(),
                         [](const SymbolFamily& c) { return has_closed_form_sigma(c); });
    case FamilyKind::custom:
      return false;
  }
  return false;
}

namespace {

// ln sigma_t(x) and its derivative in H = h(1/t) for the built-in shapes.
double closed_log_sigma(const SymbolFamily& family, double t, std::span<const double> x) {
  if (family.kind() == FamilyKind::direct_sum) {
    double v = 0.0;
    std::size_t offset = 0;
    for (const auto& c : family.components()) {
      const auto m = static_cast<std::size_t>(c.dimension());
      v += closed_log_sigma(c, t, x.subspan(offset, m));
      offset += m;
    }
    return v;
  }
  const double H = family.profile()(1.0 / t);
  const double r = norm(x);
  const double n = family.dimension();
  switch (family.kind()) {
    case FamilyKind::gaussian:
      return -r * r / (4.0 * H);
    case FamilyKind::poisson: {
      const double u = r / H;
      if (u > 1e100) return -0.5 * (n + 1.0) * (2.0 * std::log(u) + std::log1p(1.0 / (u * u)));
      return -0.5 * (n + 1.0) * std::log1p(u * u);
    }
    case FamilyKind::coshlog:
      return 2.0 * (log_abs_gamma({0.5 * H, 0.5 * r}) - log_abs_gamma({0.5 * H, 0.0}));
    default:
      throw Error(ErrorCode::domain, "no closed-form sigma for " + family.description());
  }
}

double closed_adjoint(const SymbolFamily& family, double t, std::span<const double> x) {
  if (family.kind() == FamilyKind::direct_sum) {
    double v = 0.0;
    std::size_t offset = 0;
    for (const auto& c : family.components()) {
      const auto m = static_cast<std::size_t>(c.dimension());
      v += closed_adjoint(c, t, x.subspan(offset, m));
      offset += m;
    }
    return v;
  }
  const TimeProfile& h = family.profile();
  const double H = h(1.0 / t);
  const double chain = h.derivative(1.0 / t) / (t * t);
  const double r = norm(x);
  const double n = family.dimension();
  switch (family.kind()) {
    case FamilyKind::gaussian:
      return chain * r * r / (4.0 * H * H);
    case FamilyKind::poisson:
      return chain * (n + 1.0) * r * r / (H * (H * H + r * r));
    case FamilyKind::coshlog:
      return chain * (digamma({0.5 * H, 0.5 * r}).real() - digamma({0.5 * H, 0.0}).real());
    default:
      throw Error(ErrorCode::domain, "no closed-form adjoint exponent for " + family.description());
  }
}

}  // namespace

double log_sigma(const SymbolFamily& family, double t, std::span<const double> x, SigmaSource source) {
  check_point(family, x);
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::domain, "sigma_t requires t > 0");
  if (source == SigmaSource::automatic) {
    source = has_closed_form_sigma(family) ? SigmaSource::closed_form : SigmaSource::quadrature;
  }
  if (source == SigmaSource::closed_form) {
    if (!has_closed_form_sigma(family)) throw Error(ErrorCode::domain, "no closed-form sigma for " + family.description());
    return closed_log_sigma(family, t, x);
  }
  if (norm(x) == 0.0) return 0.0;
  const double num = density_point(family, 0.0, 1.0 / t, x);
  const double den = density_peak(family, 0.0, 1.0 / t);
  const double ratio = num / den;
  if (!(ratio >= 1e-300)) {
    throw Error(ErrorCode::step_underflow, "sigma underflows for " + family.description());
  }
  return std::log(ratio);
}

double log_sigma(const SymbolFamily& family, double t, double x, SigmaSource source) {
  return log_sigma(family, t, std::span<const double>(&x, 1), source);
}

double sigma(const SymbolFamily& family, double t, std::span<const double> x, SigmaSource source) {
  const double v = std::exp(log_sigma(family, t, x, source));
  if (v > 1.0 + 1e-9) {
    warn("sigma exceeds 1 for " + family.description() + ": the density is not unimodal at the origin");
  }
  return v;
}

double sigma(const SymbolFamily& family, double t, double x, SigmaSource source) {
  return sigma(family, t, std::span<const double>(&x, 1), source);
}

double adjoint_exponent(const SymbolFamily& family, double t, std::span<const double> x, AdjointMode mode) {
  check_point(family, x);
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::domain, "A(t, x) requires t > 0");
  const bool closed_available = has_closed_form_sigma(family) && family.has_derivative();
  if (mode == AdjointMode::automatic) mode = closed_available ? AdjointMode::closed_form : AdjointMode::finite_difference;
  if (mode == AdjointMode::closed_form) {
    if (!closed_available) throw Error(ErrorCode::domain, "no closed-form adjoint exponent for " + family.description());
    return closed_adjoint(family, t, x);
  }
  if (norm(x) == 0.0) return 0.0;
  const double dt = std::max(1e-4, 1e-4 * t);
  if (!(t - dt > 0.0)) throw Error(ErrorCode::domain, "finite-difference step leaves t > 0");
  const double floor = std::log(1e-300);
  const double up = log_sigma(family, t + dt, x);
  const double down = log_sigma(family, t - dt, x);
  if (up < floor || down < floor) throw Error(ErrorCode::step_underflow, "sigma below 1e-300 in finite difference");
  return -(up - down) / (2.0 * dt);
}

double adjoint_exponent(const SymbolFamily& family, double t, double x, AdjointMode mode) {
  return adjoint_exponent(family, t, std::span<const double>(&x, 1), mode);
}

// ---------------------------------------------------------------------------
// Adjoint and rho densities

std::function<double(std::span<const double>)> adjoint_density_function(const SymbolFamily& family, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::domain, "Phi_t requires t > 0");
  const double norm_const = std::pow(2.0 * pi, family.dimension()) * density_peak(family, 0.0, 1.0 / t);
  return [family, t, norm_const](std::span<const double> x) {
    return std::exp(-family.Q(0.0, 1.0 / t, x)) / norm_const;
  };
}

double adjoint_density(const SymbolFamily& family, double t, std::span<const double> x) {
  check_point(family, x);
  return adjoint_density_function(family, t)(x);
}

double adjoint_density(const SymbolFamily& family, double t, double x) {
  return adjoint_density(family, t, std::span<const double>(&x, 1));
}

double rho_density(const SymbolFamily& family, double t, std::span<const double> xi) {
  check_point(family, xi);
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::domain, "rho_t requires t > 0");
  const double norm_const = std::pow(2.0 * pi, family.dimension()) * density_peak(family, 0.0, t);
  return std::exp(-family.Q(0.0, t, xi)) / norm_const;
}

double rho_density(const SymbolFamily& family, double t, double xi) {
  return rho_density(family, t, std::span<const double>(&xi, 1));
}

CheckReport adjointness_check(const SymbolFamily& family, double t, GridSpec grid, double tol) {
  CheckReport rep;
  rep.name = "adjointness";
  DensityTable table = density_grid(family, 0.0, t, grid);
  SpectralTransform ft(table.grid);
  ComplexVector spec = ft.forward(std::span<const double>(table.values));
  const std::size_t mid = table.grid.points / 2;
  const std::size_t k0 = table.grid.dimension == 1 ? mid : mid * table.grid.points + mid;
  const double s0 = spec[k0].real();
  auto phi = adjoint_density_function(family, 1.0 / t);
  const std::vector<double> zero(static_cast<std::size_t>(family.dimension()), 0.0);
  const double phi0 = phi(zero);
  std::vector<double> target = ft.sample_spectrum([&](std::span<const double> xi) { return phi(xi) / phi0; });
  double sup = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    sup = std::max(sup, std::abs(spec[k] / s0 - target[k]));
  }
  rep.add_bound("sup_error", sup, tol, "normalized FT of p_t vs normalized Phi_{1/t}");
  rep.add_bound("mass_defect", std::abs(table.total_mass - 1.0), 1e-6);
  return rep;
}

// ---------------------------------------------------------------------------
// Tail ratio

double tail_ratio(const SymbolFamily& family, double delta, double t) {
  if (!(delta > 0.0)) throw Error(ErrorCode::domain, "tail_ratio requires delta > 0");
  if (!(t > 0.0)) throw Error(ErrorCode::domain, "tail_ratio requires t > 0");
  const double scale = frequency_cutoff(family, 0.0, t, 1.0);
  const quad::Tolerance tol{0.0, 1e-13};
  if (family.radial()) {
    const int n = family.dimension();
    auto g = [&](double r) { return std::pow(r, n - 1) * std::exp(-family.Q_radial(0.0, t, r)); };
    const double outer = quad::integrate_to_infinity(g, delta, tol, scale).value;
    const double inner = quad::integrate(g, 0.0, delta, tol).value;
    return outer / (inner + outer);
  }
  if (family.dimension() != 2) throw Error(ErrorCode::domain, "tail_ratio supports radial families and n = 2");
  // Polar coordinates; all supported summands are even in each coordinate,
  // so a quarter turn suffices.
  auto radial_integral = [&](double theta, bool outer_part) {
    const double c = std::cos(theta), s = std::sin(theta);
    auto g = [&](double r) {
      const double xi[2] = {r * c, r * s};
      return r * std::exp(-family.Q(0.0, t, xi));
    };
    return outer_part ? quad::integrate_to_infinity(g, delta, tol, scale).value : quad::integrate(g, 0.0, delta, tol).value;
  };
  const quad::Tolerance ang{0.0, 1e-11};
  const double outer = quad::integrate([&](double th) { return radial_integral(th, true); }, 0.0, pi / 2, ang).value;
  const double inner = quad::integrate([&](double th) { return radial_integral(th, false); }, 0.0, pi / 2, ang).value;
  return outer / (inner + outer);
}

}  // namespace addkit
