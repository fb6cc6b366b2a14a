#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "addkit/check.hpp"
#include "addkit/spectral.hpp"
#include "addkit/symbol_core.hpp"

namespace addkit {

using TimeDensity = std::function<double(double, std::span<const double>)>;

/// Closed-form transition density p(t, .) and adjoint density Phi(t, .) of
/// one symbol family.
struct OraclePair {
  std::string tag;
  int dimension = 1;
  SymbolFamily family;
  TimeDensity p;
  TimeDensity phi;
  std::string notes;

  double density(double t, double x) const { return p(t, std::span<const double>(&x, 1)); }
  double adjoint(double t, double x) const { return phi(t, std::span<const double>(&x, 1)); }
};

/// p = (4 pi h(t))^{-n/2} e^{-|x|^2/(4h(t))}, Phi = pi^{-n/2} h(1/t)^{n/2} e^{-|x|^2 h(1/t)}.
OraclePair gaussian_pair(const TimeProfile& h, int dimension = 1);

/// Poisson kernel p = pi^{-(n+1)/2} Gamma((n+1)/2) h / (h^2 + |x|^2)^{(n+1)/2}
/// and the Laplace-type adjoint c_n h(1/t)^n e^{-h(1/t)|x|}; n in {1, 2}.
OraclePair poisson_laplace_pair(const TimeProfile& h, int dimension = 1);

/// p = 2^{h-2} |Gamma((h+ix)/2)|^2 / (pi Gamma(h)) with h = h(t), and
/// Phi = cosh(x)^{-H} Gamma((H+1)/2) / (sqrt(pi) Gamma(H/2)) with H = h(1/t).
OraclePair coshlog_pair(const TimeProfile& h);

/// The coshlog density for a given value of h(t), evaluated in log space.
double coshlog_density(double h, double x);
double coshlog_density(const TimeProfile& h, double t, double x);

/// -ln |Gamma((h+ix)/2) / Gamma(h/2)|^2 by log-gamma.
double coshlog_delta_squared_exact(double h, double x);

/// Partial sum of ln(1 + x^2/(h+2j)^2) over J terms starting at j =
/// first_index, plus the midpoint-integral tail from the next index on.
double coshlog_delta_squared(double h, double x, int terms, int first_index = 0);

/// Doubles the number of terms from 16 until two estimates agree to 1e-13.
double coshlog_delta_squared(double h, double x);

/// Fixture from the adjoint-pair catalogue: p and its adjoint Phi, both
/// probability densities on the line.
struct LewisFixture {
  std::string name;
  std::function<double(double)> p;
  std::function<double(double)> phi;
  bool self_adjoint = false;
  GridSpec grid;  // grid on which the numerical transform is taken

  /// Numerical FT of p (normalized at 0) against Phi/Phi(0); the sinc^2
  /// fixture also checks that the transform vanishes for |xi| >= 2, the
  /// self-adjoint fixture compares (2 pi)^{-1/2} p^ with p unnormalized.
  CheckReport check(double tol = 1e-5) const;
};

/// x/sinh, sinc^2 and the self-adjoint sech fixture.
std::vector<LewisFixture> lewis_fixtures();

/// Sup error of the single-power form pi / (4 cosh(pi xi / 2)) against the
/// normalized transform of 2x/(pi^2 sinh x); nonzero, documents the erratum.
double lewis_sinh_printed_form_error();

/// Oracle p(t, .) against density_grid of the oracle's own family on the
/// given grid (sup abs error) and oracle Phi against adjoint_density.
CheckReport oracle_cross_validation(const OraclePair& pair, double t, GridSpec grid, double tol);

/// Normalized FT of the oracle's p(t, .) sampled on the grid against the
/// oracle's Phi(1/t, .) shape.
CheckReport oracle_adjointness_check(const OraclePair& pair, double t, GridSpec grid, double tol);

}  // namespace addkit
