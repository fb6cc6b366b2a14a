#include "addkit/metric_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "addkit/diagnostics.hpp"
#include "addkit/error.hpp"
#include "addkit/quadrature.hpp"

namespace addkit {

namespace {

constexpr double pi = std::numbers::pi;

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

}  // namespace

struct MetricHandle::Cache {
  std::mutex mutex;
  std::map<double, double> volumes;
};

MetricHandle::MetricHandle(MetricKind kind, int dimension, PairFunction rho, BallShape shape, std::string description)
    : kind_(kind),
      dimension_(dimension),
      rho_(std::move(rho)),
      shape_(shape),
      description_(std::move(description)),
      cache_(std::make_shared<Cache>()) {
  if (dimension_ < 1) throw Error(ErrorCode::domain, "metric dimension must be positive");
}

double MetricHandle::operator()(std::span<const double> u, std::span<const double> v) const {
  if (static_cast<int>(u.size()) != dimension_ || static_cast<int>(v.size()) != dimension_) {
    throw Error(ErrorCode::domain, "point dimension does not match metric " + description_);
  }
  return rho_(u, v);
}

double MetricHandle::operator()(double u, double v) const {
  return (*this)(std::span<const double>(&u, 1), std::span<const double>(&v, 1));
}

double MetricHandle::from_origin(std::span<const double> x) const {
  std::vector<double> zero(x.size(), 0.0);
  return (*this)(x, zero);
}

// ---------------------------------------------------------------------------
// Constructors

namespace {

std::vector<double> difference(std::span<const double> u, std::span<const double> v) {
  std::vector<double> d(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) d[i] = u[i] - v[i];
  return d;
}

bool all_components_monotone(const SymbolFamily& family) {
  return std::all_of(family.components().begin(), family.components().end(),
                     [](const SymbolFamily& c) { return c.radial_monotone(); });
}

}  // namespace

MetricHandle metric_dQ(const SymbolFamily& family, double s, double t) {
  if (s > t) throw Error(ErrorCode::reversed_time, "d_Q requires s <= t");
  if (!(s >= 0.0) || !(t > s)) throw Error(ErrorCode::degenerate_family, "d_Q with s = t vanishes identically");
  BallShape shape = BallShape::general;
  const bool separable =
      family.kind() == FamilyKind::direct_sum && family.dimension() == 2 && all_components_monotone(family);
  if (family.radial_monotone()) {
    shape = BallShape::radial_monotone;
  } else if (separable) {
    shape = BallShape::separable;
  }
  auto rho = [family, s, t](std::span<const double> u, std::span<const double> v) {
    const auto d = difference(u, v);
    return std::sqrt(std::max(0.0, family.Q(s, t, d)));
  };
  std::ostringstream desc;
  desc << "d_Q[" << family.description() << ", s=" << s << ", t=" << t << "]";
  MetricHandle m(MetricKind::dQ, family.dimension(), rho, shape, desc.str());
  if (separable) {
    for (const auto& c : family.components()) m.factors.push_back(metric_dQ(c, s, t));
  }
  return m;
}

MetricHandle metric_deltaQ(const SymbolFamily& family, double t, SigmaSource source) {
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::domain, "delta_Q requires t > 0");
  const int n = family.dimension();
  auto rho = [family, t, source](std::span<const double> u, std::span<const double> v) {
    const auto d = difference(u, v);
    const double value = -log_sigma(family, 1.0 / t, d, source);
    if (value < -1e-9) warn("sigma exceeds 1 in delta_Q for " + family.description() + ": density not unimodal");
    return std::sqrt(std::max(0.0, value));
  };
  BallShape shape = BallShape::general;
  if (has_closed_form_sigma(family)) {
    if (family.kind() != FamilyKind::direct_sum) {
      shape = BallShape::radial_monotone;
    } else if (n == 2 && family.components().size() == 2) {
      shape = BallShape::separable;
    }
  } else if (family.radial()) {
    // Unimodality of custom densities is sampled along a ray.
    bool monotone = true;
    double prev = 0.0;
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (double r : log_spaced(1e-3, 1e2, 8)) {
      x[0] = r;
      const double v = -log_sigma(family, 1.0 / t, x, source);
      if (v < prev) monotone = false;
      prev = v;
    }
    if (monotone) shape = BallShape::radial_monotone;
  }
  std::ostringstream desc;
  desc << "delta_Q[" << family.description() << ", t=" << t << "]";
  MetricHandle m(MetricKind::deltaQ, n, rho, shape, desc.str());
  if (shape == BallShape::separable) {
    for (const auto& c : family.components()) m.factors.push_back(metric_deltaQ(c, t, source));
  }
  return m;
}

MetricHandle make_metric(MetricHandle::PairFunction rho, int dimension, BallShape shape, std::string description) {
  return MetricHandle(MetricKind::custom, dimension, std::move(rho), shape, std::move(description));
}

// ---------------------------------------------------------------------------
// Axioms

CheckReport metric_axioms_check(const MetricHandle& metric, std::size_t num_triples, std::uint64_t seed, double tol,
                                double box) {
  CheckReport rep;
  rep.name = "metric_axioms";
  const auto n = static_cast<std::size_t>(metric.dimension());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-box, box);
  std::vector<double> u(n), v(n), w(n);
  double worst_identity = 0.0, worst_symmetry = 0.0, worst_triangle = -std::numeric_limits<double>::infinity();
  double worst_negative = 0.0;
  // the triangle note keeps the first violating triple (the lattice one comes first)
  std::string identity_witness, symmetry_witness, triangle_witness;
  for (std::size_t k = 0; k <= num_triples; ++k) {
    if (k == 0) {
      std::fill(u.begin(), u.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      std::fill(w.begin(), w.end(), 0.0);
      v[0] = 1.0;
      w[0] = 2.0;
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        u[i] = coord(rng);
        v[i] = coord(rng);
        w[i] = coord(rng);
      }
    }
    const double uu = std::abs(metric(u, u));
    if (uu > worst_identity) {
      worst_identity = uu;
      identity_witness = "u=" + format_point(u);
    }
    const double uv = metric(u, v), vu = metric(v, u), vw = metric(v, w), uw = metric(u, w);
    worst_negative = std::min({worst_negative, uv, vw, uw});
    if (std::abs(uv - vu) > worst_symmetry) {
      worst_symmetry = std::abs(uv - vu);
      symmetry_witness = "u=" + format_point(u) + " v=" + format_point(v);
    }
    const double excess = uw - uv - vw;
    if (excess > worst_triangle) worst_triangle = excess;
    if (excess > tol && triangle_witness.empty()) {
      std::ostringstream os;
      os.precision(17);
      os << "u=" << format_point(u) << " v=" << format_point(v) << " w=" << format_point(w) << " rho(u,w)=" << uw
         << " rho(u,v)+rho(v,w)=" << uv + vw;
      triangle_witness = os.str();
    }
  }
  rep.add_bound("identity", worst_identity, tol, identity_witness);
  rep.add_bound("nonnegativity", -worst_negative, tol);
  rep.add_bound("symmetry", worst_symmetry, tol, symmetry_witness);
  rep.add_bound("triangle", std::max(worst_triangle, 0.0), tol, triangle_witness);
  return rep;
}

// ---------------------------------------------------------------------------
// Ball volumes

namespace {

// sup{lambda : rho(lambda e, 0) < r} for rho monotone along the ray.
double ray_radius(const MetricHandle& m, std::span<const double> direction, double r) {
  const auto n = direction.size();
  std::vector<double> x(n);
  auto along = [&](double lambda) {
    for (std::size_t i = 0; i < n; ++i) x[i] = lambda * direction[i];
    return m.from_origin(x);
  };
  double hi = 1.0;
  while (true) {
    const double rho = along(hi);
    if (!std::isfinite(rho))
      throw Error(ErrorCode::evaluation, "metric is not finite at distance " + std::to_string(hi) + " for " + m.description());
    if (rho >= r) break;
    hi *= 2.0;
    if (hi > m.domain_limit) {
      throw Error(ErrorCode::unbounded_ball, "ball of radius " + std::to_string(r) + " reaches the domain limit for " +
                                                 m.description());
    }
  }
  double lo = 0.5 * hi;
  while (along(lo) >= r) {
    lo *= 0.5;
    if (lo < 1e-300) return 0.0;
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    (along(mid) < r ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double unit_ball_volume(int n) { return std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0); }

double cell_count_volume(const MetricHandle& m, double r) {
  const int n = m.dimension();
  if (n > 2) throw Error(ErrorCode::domain, "cell counting supports n <= 2");
  // Box large enough that rho >= r along its boundary samples.
  double half = 1.0;
  auto boundary_inside = [&](double b) {
    if (n == 1) return m.from_origin(b) < r || m.from_origin(-b) < r;
    for (int k = 0; k < 64; ++k) {
      const double s = -b + 2.0 * b * k / 64.0;
      const double pts[4][2] = {{s, b}, {s, -b}, {b, s}, {-b, s}};
      for (const auto& p : pts) {
        if (m.from_origin(p) < r) return true;
      }
    }
    return false;
  };
  while (boundary_inside(half)) {
    half *= 2.0;
    if (half > m.domain_limit) throw Error(ErrorCode::unbounded_ball, "ball reaches the domain limit for " + m.description());
  }
  const std::size_t cells = m.grid_cells;
  const double h = 2.0 * half / static_cast<double>(cells);
  std::size_t inside = 0;
  if (n == 1) {
    for (std::size_t i = 0; i < cells; ++i) {
      const double x = -half + (static_cast<double>(i) + 0.5) * h;
      if (m.from_origin(x) < r) ++inside;
    }
    return static_cast<double>(inside) * h;
  }
  double p[2];
  for (std::size_t i = 0; i < cells; ++i) {
    p[0] = -half + (static_cast<double>(i) + 0.5) * h;
    for (std::size_t j = 0; j < cells; ++j) {
      p[1] = -half + (static_cast<double>(j) + 0.5) * h;
      if (m.from_origin(p) < r) ++inside;
    }
  }
  return static_cast<double>(inside) * h * h;
}

double compute_volume(const MetricHandle& m, double r) {
  const int n = m.dimension();
  switch (m.shape()) {
    case BallShape::radial_monotone: {
      std::vector<double> e(static_cast<std::size_t>(n), 0.0);
      e[0] = 1.0;
      const double R = ray_radius(m, e, r);
      return n == 1 ? 2.0 * R : unit_ball_volume(n) * std::pow(R, n);
    }
    case BallShape::star_shaped: {
      if (n != 2) throw Error(ErrorCode::domain, "star-shaped volumes are two-dimensional");
      // area = 1/2 int_0^{2pi} R(theta)^2 = int_0^pi R(theta)^2 by central symmetry
      auto f = [&](double theta) {
        const double e[2] = {std::cos(theta), std::sin(theta)};
        const double R = ray_radius(m, e, r);
        return R * R;
      };
      const double breaks[5] = {0.0, 0.25 * pi, 0.5 * pi, 0.75 * pi, pi};
      return quad::integrate(f, breaks, {0.0, 1e-10}, 2000).value;
    }
    case BallShape::separable: {
      // |B| = int_{-R1}^{R1} |B_2(sqrt(r^2 - rho_1(x)^2))| dx, outer axis the shorter one
      if (m.factors.size() != 2) throw Error(ErrorCode::domain, "separable metric needs two factors");
      const double e = 1.0;
      const std::span<const double> unit(&e, 1);
      const double R0 = ray_radius(m.factors[0], unit, r);
      const double R1 = ray_radius(m.factors[1], unit, r);
      const MetricHandle& outer = R0 <= R1 ? m.factors[0] : m.factors[1];
      const MetricHandle& inner = R0 <= R1 ? m.factors[1] : m.factors[0];
      const double R = std::min(R0, R1);
      auto f = [&](double x) {
        const double d = outer.from_origin(x);
        const double rest = r * r - d * d;
        return rest > 0.0 ? 2.0 * ray_radius(inner, unit, std::sqrt(rest)) : 0.0;
      };
      return 2.0 * quad::integrate(f, 0.0, R, {0.0, 1e-11}).value;
    }
    case BallShape::general:
      return cell_count_volume(m, r);
  }
  return 0.0;
}

}  // namespace

double ball_volume(const MetricHandle& metric, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::domain, "ball radius must be positive and finite");
  auto& cache = metric.cache();
  {
    std::lock_guard lock(cache.mutex);
    auto it = cache.volumes.find(r);
    if (it != cache.volumes.end()) return it->second;
  }
  const double v = compute_volume(metric, r);
  if (!(v > 0.0)) {
    throw Error(ErrorCode::zero_volume, "ball of radius " + std::to_string(r) + " has zero volume at the available resolution");
  }
  std::lock_guard lock(cache.mutex);
  cache.volumes.emplace(r, v);
  return v;
}

BallVolumeCurve ball_volume_curve(const MetricHandle& metric, std::span<const double> radii) {
  BallVolumeCurve curve;
  curve.method = metric.shape() == BallShape::radial_monotone ? "bisection"
                 : metric.shape() == BallShape::star_shaped   ? "polar_bisection"
                 : metric.shape() == BallShape::separable     ? "fiber_bisection"
                                                              : "grid_count";
  for (double r : radii) {
    curve.radii.push_back(r);
    curve.volumes.push_back(ball_volume(metric, r));
  }
  return curve;
}

std::vector<double> log_spaced(double lo, double hi, int per_decade) {
  const double decades = std::log10(hi / lo);
  const int count = static_cast<int>(std::round(decades * per_decade)) + 1;
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = lo * std::pow(10.0, decades * i / std::max(count - 1, 1));
  }
  return out;
}

DoublingReport doubling_estimate(const MetricHandle& metric, std::span<const double> r_grid) {
  if (r_grid.size() < 2) throw Error(ErrorCode::domain, "doubling estimate needs a radius grid");
  const auto [lo_it, hi_it] = std::minmax_element(r_grid.begin(), r_grid.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(lo > 0.0) || std::log10(hi / lo) < 3.0 - 1e-9) {
    throw Error(ErrorCode::domain, "doubling estimate needs radii spanning at least 3 decades");
  }
  DoublingReport rep;
  const double inner_limit = hi / 10.0;
  rep.c0_inner = 0.0;
  for (double r : r_grid) {
    const double ratio = ball_volume(metric, 2.0 * r) / ball_volume(metric, r);
    rep.ratios.push_back(ratio);
    rep.c0 = std::max(rep.c0, ratio);
    if (r <= inner_limit * (1.0 + 1e-12)) rep.c0_inner = std::max(rep.c0_inner, ratio);
  }
  rep.pass = std::isfinite(rep.c0) && std::abs(rep.c0 - rep.c0_inner) < 0.1 * rep.c0;
  return rep;
}

DoublingReport doubling_estimate(const MetricHandle& metric) {
  const auto grid = log_spaced(1e-3, 1e3, 10);
  return doubling_estimate(metric, grid);
}

double peak_via_ball_integral(const MetricHandle& metric) {
  auto f = [&](double u) { return u > 0.0 ? ball_volume(metric, u) * std::exp(-u * u) * 2.0 * u : 0.0; };
  const double integral = quad::integrate_to_infinity(f, 0.0, {0.0, 1e-11}, 1.0).value;
  return integral * std::pow(2.0 * pi, -metric.dimension());
}

std::function<double(std::span<const double>)> dual_reconstruction(const MetricHandle& prefactor,
                                                                    const MetricHandle& exponent) {
  const double peak = peak_via_ball_integral(prefactor);
  return [peak, exponent](std::span<const double> x) {
    const double d = exponent.from_origin(x);
    return peak * std::exp(-d * d);
  };
}

// ---------------------------------------------------------------------------
// Dual formulas

namespace {

// Sup relative error of `approx` against `reference` over nodes where the
// reference exceeds 1e-10; at most about 1024 nodes are visited. `screen`
// (flat node index) can skip nodes known to lie far below that level.
std::pair<double, std::string> sup_relative_error(const GridSpec& grid, bool frequency_nodes,
                                                  const std::function<double(std::span<const double>)>& approx,
                                                  const std::function<double(std::span<const double>)>& reference,
                                                  const std::function<bool(std::size_t)>& screen = {}) {
  const std::size_t n = grid.points;
  auto node = [&](std::size_t i) { return frequency_nodes ? grid.frequency(i) : grid.coordinate(i); };
  double worst = 0.0;
  std::string where;
  auto visit = [&](std::span<const double> x) {
    const double ref = reference(x);
    if (!(ref > 1e-10)) return;
    const double err = std::abs(approx(x) - ref) / ref;
    if (err > worst || !std::isfinite(err)) {
      worst = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
      where = format_point(x);
    }
  };
  if (grid.dimension == 1) {
    const std::size_t stride = std::max<std::size_t>(1, n / 1024);
    for (std::size_t i = n / 2 % stride; i < n; i += stride) {
      if (screen && !screen(i)) continue;
      const double x = node(i);
      visit(std::span<const double>(&x, 1));
    }
  } else {
    const std::size_t stride = std::max<std::size_t>(1, n / 32);
    for (std::size_t a = n / 2 % stride; a < n; a += stride) {
      for (std::size_t b = n / 2 % stride; b < n; b += stride) {
        if (screen && !screen(a * n + b)) continue;
        const double x[2] = {node(a), node(b)};
        visit(x);
      }
    }
  }
  return {worst, where};
}

}  // namespace

CheckReport dual_formula_check(const SymbolFamily& family, double t, GridSpec grid, double tol) {
  if (!(t > 0.0)) throw Error(ErrorCode::domain, "dual formulas need t > 0");
  CheckReport rep;
  rep.name = "dual_formula";
  const std::vector<double> origin(static_cast<std::size_t>(family.dimension()), 0.0);

  // p_t = [ball integral of d_{Q_t}] e^{-delta_{Q_t}^2}
  const MetricHandle d_t = metric_dQ(family, 0.0, t);
  const MetricHandle delta_t = metric_deltaQ(family, t);
  const auto p_rec = dual_reconstruction(d_t, delta_t);
  const double p_peak = density_peak(family, 0.0, t);
  const double p_peak_rec = p_rec(origin);
  rep.add_bound("p_peak_relative_error", std::abs(p_peak_rec - p_peak) / p_peak, tol,
                "ball integral " + std::to_string(p_peak_rec));
  const GridSpec p_grid = resolve_grid(family, 0.0, t, grid);
  // the FFT table locates the region p > 1e-10; pointwise quadrature is the reference there
  const DensityTable table = density_grid(family, 0.0, t, p_grid);
  auto [p_err, p_where] = sup_relative_error(
      p_grid, false, p_rec, [&](std::span<const double> x) { return density_point(family, 0.0, t, x); },
      [&](std::size_t flat) { return table.values[flat] > 1e-11; });
  rep.add_bound("p_sup_relative_error", p_err, tol, "worst at x=" + p_where);

  // Phi_t = [ball integral of delta_{Q_{1/t}}] e^{-d_{Q_{1/t}}^2}
  const MetricHandle d_inv = metric_dQ(family, 0.0, 1.0 / t);
  const MetricHandle delta_inv = metric_deltaQ(family, 1.0 / t);
  const auto phi_rec = dual_reconstruction(delta_inv, d_inv);
  const auto phi = adjoint_density_function(family, t);
  const double phi_peak = phi(origin);
  const double phi_peak_rec = phi_rec(origin);
  rep.add_bound("phi_peak_relative_error", std::abs(phi_peak_rec - phi_peak) / phi_peak, tol,
                "ball integral " + std::to_string(phi_peak_rec));
  const GridSpec phi_grid = resolve_grid(family, 0.0, 1.0 / t, grid);
  auto [phi_err, phi_where] = sup_relative_error(phi_grid, true, phi_rec, phi);
  rep.add_bound("phi_sup_relative_error", phi_err, tol, "worst at x=" + phi_where);
  return rep;
}

}  // namespace addkit
