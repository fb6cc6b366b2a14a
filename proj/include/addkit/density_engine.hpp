#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "addkit/check.hpp"
#include "addkit/spectral.hpp"
#include "addkit/symbol_core.hpp"

namespace addkit {

/// Density values on a resolved grid, row-major in 2D.
struct DensityTable {
  GridSpec grid;
  std::vector<double> values;
  double s = 0.0;
  double t = 0.0;
  double total_mass = 0.0;    // trapezoidal (periodic) sum times cell volume
  double clipped_mass = 0.0;  // mass of negative ringing set to zero
  std::string family_id;

  /// Four-point (bicubic in 2D) Lagrange interpolation; zero outside the grid.
  double value(std::span<const double> x) const;
  double value(double x) const { return value(std::span<const double>(&x, 1)); }
  /// Value at the grid node x = 0.
  double origin_value() const;
};

struct DensityOptions {
  double tail_eps = 1e-14;
};

/// Default grid for a family: N = 4096 in 1D, N = 512 in 2D, automatic L.
GridSpec default_grid(int dimension);

/// Smallest cutoff Xi (per axis) with Q_{t,s}(Xi e_i) >= level for all axes.
/// Throws Error(insufficient_decay) when no such Xi below 1e15 exists.
double frequency_cutoff(const SymbolFamily& family, double s, double t, double level);

/// Fills in L = pi N / (2 Xi) when grid.half_width == 0; otherwise checks
/// that the given window captures e^{-Q} down to tail_eps.
GridSpec resolve_grid(const SymbolFamily& family, double s, double t, GridSpec grid,
                      const DensityOptions& options = {});

/// p_{t,s} on the grid by fast Fourier inversion of e^{-Q_{t,s}}.
DensityTable density_grid(const SymbolFamily& family, double s, double t, GridSpec grid = {},
                          const DensityOptions& options = {});

/// Inverse transform of an arbitrary real spectrum on a resolved grid, with
/// the same clipping and bookkeeping as density_grid.
DensityTable density_from_spectrum(const GridSpec& grid, const std::function<double(std::span<const double>)>& spectrum);

/// Pointwise p_{t,s}(x). 1D: cosine quadrature; 2D radial: Hankel
/// transform; direct sums: product of the summand densities.
double density_point(const SymbolFamily& family, double s, double t, std::span<const double> x);
double density_point(const SymbolFamily& family, double s, double t, double x);

/// p_{t,s}(0) = (2pi)^{-n} int e^{-Q_{t,s}}.
double density_peak(const SymbolFamily& family, double s, double t);

enum class SigmaSource { automatic, closed_form, quadrature };
enum class AdjointMode { automatic, closed_form, finite_difference };

/// Built-in product families (and direct sums of them) have closed-form sigma.
bool has_closed_form_sigma(const SymbolFamily& family);

/// ln sigma_t(x) with sigma_t = p_{1/t}/p_{1/t}(0).
double log_sigma(const SymbolFamily& family, double t, std::span<const double> x,
                 SigmaSource source = SigmaSource::automatic);
double log_sigma(const SymbolFamily& family, double t, double x, SigmaSource source = SigmaSource::automatic);

/// sigma_t(x); warns when the value exceeds 1 + 1e-9 (non-unimodal density).
double sigma(const SymbolFamily& family, double t, std::span<const double> x,
             SigmaSource source = SigmaSource::automatic);
double sigma(const SymbolFamily& family, double t, double x, SigmaSource source = SigmaSource::automatic);

/// A(t, x) = -d/dt ln sigma_t(x). Finite differences use
/// dt = max(1e-4, 1e-4 t) and throw Error(step_underflow) if sigma < 1e-300.
double adjoint_exponent(const SymbolFamily& family, double t, std::span<const double> x,
                        AdjointMode mode = AdjointMode::automatic);
double adjoint_exponent(const SymbolFamily& family, double t, double x, AdjointMode mode = AdjointMode::automatic);

/// Phi_t(x) = e^{-Q(1/t, x)} / ((2pi)^n p_{1/t}(0)), a probability density.
double adjoint_density(const SymbolFamily& family, double t, std::span<const double> x);
double adjoint_density(const SymbolFamily& family, double t, double x);

/// Phi_t as a callable with the normalizer computed once.
std::function<double(std::span<const double>)> adjoint_density_function(const SymbolFamily& family, double t);

/// rho_t(xi) = e^{-Q(t, xi)} / ((2pi)^n p_t(0)); rho_{1/t} = Phi_t.
double rho_density(const SymbolFamily& family, double t, std::span<const double> xi);
double rho_density(const SymbolFamily& family, double t, double xi);

/// Normalized FFT of the p_t table against Phi_{1/t}(xi)/Phi_{1/t}(0) on the
/// frequency grid; passes iff the sup error is <= tol.
CheckReport adjointness_check(const SymbolFamily& family, double t, GridSpec grid, double tol);

/// int_{|xi|>delta} e^{-Q(t,xi)} dxi / int e^{-Q(t,xi)} dxi.
double tail_ratio(const SymbolFamily& family, double delta, double t);

}  // namespace addkit
