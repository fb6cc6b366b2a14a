#pragma once

#include <span>
#include <vector>

#include "addkit/check.hpp"
#include "addkit/density_engine.hpp"
#include "addkit/spectral.hpp"
#include "addkit/symbol_core.hpp"

namespace addkit {

/// Immutable grid function with its sup and discrete L2 norms.
class FunctionGrid {
 public:
  /// Throws Error(domain) for an unresolved grid, a size mismatch or a
  /// non-finite value.
  FunctionGrid(GridSpec grid, ComplexVector values);
  FunctionGrid(GridSpec grid, std::span<const double> values);

  static FunctionGrid sample(const GridSpec& grid, const FieldFunction& f);

  const GridSpec& grid() const noexcept { return grid_; }
  const ComplexVector& values() const noexcept { return values_; }
  std::vector<double> real() const;
  /// max |Im u| <= tol * sup norm
  bool is_real(double tol = 1e-12) const;

  double sup_norm() const noexcept { return sup_; }
  /// (sum |u|^2 dx^n)^{1/2}
  double l2_norm() const noexcept { return l2_; }
  /// Re sum u dx^n
  double integral() const;
  double min_real() const;

 private:
  GridSpec grid_;
  ComplexVector values_;
  double sup_ = 0.0;
  double l2_ = 0.0;
};

double sup_distance(const FunctionGrid& a, const FunctionGrid& b);
double l2_distance(const FunctionGrid& a, const FunctionGrid& b);

/// Smooth bump e^{1 - 1/(1 - (|x|/radius)^2)} with sup 1.
FunctionGrid bump_function(const GridSpec& grid, double radius = 5.0);

/// inverse(m(xi) * forward(u)).
FunctionGrid apply_multiplier(const FunctionGrid& u, const FieldFunction& m);

/// H_{t,s}: multiplier e^{-(Q(t) - Q(s))}. Requires 0 <= s <= t.
FunctionGrid apply_H(const SymbolFamily& family, double s, double t, const FunctionGrid& u);
/// V(t, s): multiplier sigma_t / sigma_s = e^{-int_s^t A}. Requires 0 < s <= t.
FunctionGrid apply_V(const SymbolFamily& family, double s, double t, const FunctionGrid& u);
/// S_t: multiplier sigma_t. Requires t > 0.
FunctionGrid apply_S(const SymbolFamily& family, double t, const FunctionGrid& u);
/// q(t, D) u
FunctionGrid apply_q(const SymbolFamily& family, double t, const FunctionGrid& u);
/// A(t, D) u
FunctionGrid apply_A(const SymbolFamily& family, double t, const FunctionGrid& u);

/// Composition, identity and both time derivatives for H and V at
/// s <= r <= t. Derivatives use central differences with step 1e-4 t
/// and are skipped when s = t.
CheckReport fundamental_solution_check(const SymbolFamily& family, double s, double r, double t,
                                       const FunctionGrid& u, double tol);

/// p_{t,r} * p_{r,s} = p_{t,s} on density tables, and the matching
/// multiplier identity for the gamma measures.
CheckReport chapman_kolmogorov_check(const SymbolFamily& family, double s, double r, double t, GridSpec grid,
                                     double tol);

}  // namespace addkit
