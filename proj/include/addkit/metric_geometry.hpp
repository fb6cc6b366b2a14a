#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "addkit/check.hpp"
#include "addkit/density_engine.hpp"
#include "addkit/symbol_core.hpp"

namespace addkit {

enum class MetricKind { dQ, deltaQ, custom };

/// Shape of the balls B(0, r), which selects the volume algorithm.
enum class BallShape {
  radial_monotone,  // interval / disc: radius by bisection
  star_shaped,      // 2D, monotone along every ray: polar integral of the radius
  separable,        // rho^2 = rho_1(x_1)^2 + rho_2(x_2)^2 with 1D monotone factors
  general,          // cell counting
};

/// Evaluable (pseudo-)metric rho(u, v) on R^n with a memoized ball-volume
/// cache shared between copies.
class MetricHandle {
 public:
  using PairFunction = std::function<double(std::span<const double>, std::span<const double>)>;

  MetricHandle(MetricKind kind, int dimension, PairFunction rho, BallShape shape, std::string description);

  double operator()(std::span<const double> u, std::span<const double> v) const;
  double operator()(double u, double v) const;
  /// rho(x, 0)
  double from_origin(std::span<const double> x) const;
  double from_origin(double x) const { return from_origin(std::span<const double>(&x, 1)); }

  MetricKind kind() const noexcept { return kind_; }
  int dimension() const noexcept { return dimension_; }
  BallShape shape() const noexcept { return shape_; }
  bool radial_monotone() const noexcept { return shape_ == BallShape::radial_monotone; }
  const std::string& description() const noexcept { return description_; }

  /// Balls reaching beyond this distance from the origin are reported as unbounded.
  double domain_limit = 1e300;
  /// Cells per axis for cell counting.
  std::size_t grid_cells = 2048;
  /// One-dimensional factor metrics of a separable handle.
  std::vector<MetricHandle> factors;

  struct Cache;
  Cache& cache() const { return *cache_; }

 private:
  MetricKind kind_;
  int dimension_;
  PairFunction rho_;
  BallShape shape_;
  std::string description_;
  std::shared_ptr<Cache> cache_;
};

/// d(xi, eta) = Q_{t,s}(xi - eta)^{1/2}. Requires s < t.
MetricHandle metric_dQ(const SymbolFamily& family, double s, double t);

/// delta(x, y) = (-ln sigma_{1/t}(x - y))^{1/2}: the shape of p_t.
MetricHandle metric_deltaQ(const SymbolFamily& family, double t, SigmaSource source = SigmaSource::automatic);

/// Wraps an arbitrary candidate (used for falsification examples).
MetricHandle make_metric(MetricHandle::PairFunction rho, int dimension, BallShape shape, std::string description);

/// Identity, symmetry and triangle inequality on the lattice triple
/// (0, e1, 2 e1) followed by seeded random triples in [-R, R]^n.
CheckReport metric_axioms_check(const MetricHandle& metric, std::size_t num_triples, std::uint64_t seed,
                                double tol = 1e-10, double box = 5.0);

/// Lebesgue measure of B(0, r). Throws Error(unbounded_ball) when the ball
/// reaches domain_limit and Error(domain) for r <= 0.
double ball_volume(const MetricHandle& metric, double r);

struct BallVolumeCurve {
  std::vector<double> radii;
  std::vector<double> volumes;
  std::string method;
};

BallVolumeCurve ball_volume_curve(const MetricHandle& metric, std::span<const double> radii);

/// Log-spaced radii, `per_decade` points per decade over [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int per_decade);

struct DoublingReport {
  double c0 = 0.0;        // max V(2r)/V(r) over the grid
  double c0_inner = 0.0;  // same with the last decade removed
  bool pass = false;
  std::vector<double> ratios;
};

/// Pass when c0 is finite and the estimate moves by less than 10% when the
/// outermost decade is added. Requires the grid to span at least 3 decades.
DoublingReport doubling_estimate(const MetricHandle& metric, std::span<const double> r_grid);
DoublingReport doubling_estimate(const MetricHandle& metric);

/// (2 pi)^{-n} int_0^inf V(sqrt r) e^{-r} dr, evaluated as
/// (2 pi)^{-n} int_0^inf V(u) e^{-u^2} 2u du with adaptive Gauss-Kronrod.
double peak_via_ball_integral(const MetricHandle& metric);

/// x -> peak_via_ball_integral(prefactor) * exp(-exponent(x, 0)^2). Both dual
/// formulas use this with the two metrics in opposite roles.
std::function<double(std::span<const double>)> dual_reconstruction(const MetricHandle& prefactor,
                                                                    const MetricHandle& exponent);

/// Reconstructs p_t from (d_{Q_t}, delta_{Q_t}) and Phi_t from
/// (delta_{Q_{1/t}}, d_{Q_{1/t}}) and compares with pointwise references on
/// grid nodes where the reference exceeds 1e-10 (sup relative error).
CheckReport dual_formula_check(const SymbolFamily& family, double t, GridSpec grid, double tol);

}  // namespace addkit
