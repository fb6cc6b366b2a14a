#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "addkit/check.hpp"
#include "addkit/density_engine.hpp"
#include "addkit/nd_validator.hpp"
#include "addkit/symbol_core.hpp"

namespace addkit {

/// Counter-based uniform variates keyed by (seed, path, interval, component).
double keyed_uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t interval, std::uint64_t component);

/// Inverse-CDF sampler for a one-dimensional density table, optionally
/// mixed with an atom at the origin.
class IncrementSampler {
 public:
  /// Throws Error(non_normalized_table) when |mass - 1| > 1e-6 and
  /// Error(domain) for 2D tables.
  explicit IncrementSampler(const DensityTable& table, double atom = 0.0);

  /// Cumulative distribution of the continuous part (cubic Hermite with the
  /// density as slopes, which is monotone for trapezoidal CDFs).
  double cdf(double x) const;
  /// Quantile of the mixture; bisection to 1e-12 in probability.
  double inverse(double p) const;

  double atom() const noexcept { return atom_; }
  const GridSpec& grid() const noexcept { return grid_; }

 private:
  double continuous_inverse(double p) const;

  GridSpec grid_;
  std::vector<double> density_;
  std::vector<double> cumulative_;
  double atom_ = 0.0;
};

IncrementSampler build_sampler(const DensityTable& table);

enum class ProcessTag { Y, X };
std::string to_string(ProcessTag tag);
ProcessTag process_tag_from_string(const std::string& s);

struct ProcessPath {
  std::size_t id = 0;
  std::vector<double> times;
  std::vector<Point> positions;
  ProcessTag tag = ProcessTag::Y;
  std::uint64_t seed = 0;
};

struct SimulationOptions {
  std::size_t grid_points = std::size_t{1} << 20;
  /// Spatial refinement relative to the decay-resolved grid.
  double oversample = 8.0;
};

/// One-dimensional family pieces along the coordinate axes: the summands of
/// a direct sum, or the axes of an isotropic Gaussian. Throws
/// Error(domain) for 2D families that do not factor.
std::vector<SymbolFamily> coordinate_factors(const SymbolFamily& family);

/// Sampler for Y_t - Y_s (law mu_{t,s}) of a 1D family.
IncrementSampler increment_sampler_Y(const SymbolFamily& family, double s, double t, const SimulationOptions& opt = {});

/// Spot check that the multiplier m is positive definite on two random
/// point sets of radius scale and 10 scale; throws Error(assumption_violation).
void require_positive_definite(const std::function<double(double)>& m, double scale, const std::string& what);

/// Sampler for X_t - X_s (law gamma_{t,s}, Fourier transform sigma_t / sigma_s)
/// of a 1D family. The limit of the multiplier at infinity becomes an atom
/// at the origin. Requires a closed-form sigma (Error(domain) otherwise).
/// Throws Error(assumption_violation) when the multiplier fails a
/// positive-definiteness spot check.
IncrementSampler increment_sampler_X(const SymbolFamily& family, double s, double t, const SimulationOptions& opt = {});

/// Paths started at the origin at time_grid[0] = 0.
std::vector<ProcessPath> simulate_paths(const SymbolFamily& family, std::span<const double> time_grid, std::size_t num_paths,
                                        std::uint64_t seed, ProcessTag tag, const SimulationOptions& opt = {});

/// Empirical mean of cos(xi . Z_t) against e^{-Q(t, xi)} (Y) or sigma_t(xi)
/// (X); each probe passes within tol_sigmas * sqrt((1 - m^2) / N).
CheckReport empirical_cf_check(const std::vector<ProcessPath>& paths, const SymbolFamily& family, double t,
                               std::span<const Point> probes, double tol_sigmas);
CheckReport empirical_cf_check(const std::vector<ProcessPath>& paths, const SymbolFamily& family, double t,
                               std::span<const double> probes, double tol_sigmas);

/// Increments of coordinate `component` over interval index k (between
/// times[k] and times[k + 1]).
std::vector<double> path_increments(const std::vector<ProcessPath>& paths, std::size_t k, std::size_t component = 0);

/// Two-sample Kolmogorov-Smirnov statistic and its critical value at level alpha.
double ks_statistic(std::vector<double> a, std::vector<double> b);
double ks_critical_value(std::size_t n, std::size_t m, double alpha = 0.01);

}  // namespace addkit
