#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "addkit/density_engine.hpp"
#include "addkit/symbol_core.hpp"
#include "json.hpp"

namespace addkit {

using Point = std::vector<double>;

/// Finite point set in R^n (at most 64 points, pairwise distinct).
struct PointSet {
  int dimension = 1;
  std::vector<Point> points;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return points.size(); }
  /// Throws Error(domain) on a bad size, wrong dimension or repeated point.
  void validate() const;
};

/// The grid {0, 1, 2}^n.
PointSet lattice_point_set(int dimension);

/// The origin plus m - 1 points uniform in [-R, R]^n.
PointSet random_point_set(int dimension, std::size_t m, double radius, std::uint64_t seed);

/// Smallest eigenvalue of M_ij = f(xi_i - xi_j). Throws Error(evaluation)
/// on a non-finite entry.
double pd_min_eigenvalue(const FieldFunction& f, const PointSet& ps);

/// Re sum_ij c_i conj(c_j) psi(xi_i - xi_j) for weights summing to zero.
double constrained_nd_form(const FieldFunction& psi, const PointSet& ps, std::span<const std::complex<double>> c);

struct NdConfig {
  std::size_t num_point_sets = 16;
  std::size_t set_size = 12;
  std::vector<double> s_scales = default_scales();
  std::size_t num_weight_vectors = 256;
  /// Relative tolerance; a matrix test allows tol * m * max|entry|.
  double tol = 1e-9;
  std::uint64_t seed = 42;

  /// 8 log-spaced scales in [1e-3, 1e3].
  static std::vector<double> default_scales();
};

struct ScaleResult {
  double scale = 0.0;
  double min_eigenvalue = 0.0;  // worst over point sets
  double threshold = 0.0;       // allowed negative excursion for that worst set
  bool pass = true;
};

struct NdWitness {
  std::vector<Point> points;
  std::vector<std::complex<double>> weights;
  double value = 0.0;
};

struct NdReport {
  double t = 0.0;  // time of the exponent, 0 when not applicable
  std::vector<ScaleResult> scales;
  /// Largest constrained form over the sampled weights.
  double worst_form = 0.0;
  double worst_form_threshold = 0.0;
  /// max of the constrained form over unit zero-sum weights on each set.
  double projected_max = 0.0;
  double projected_threshold = 0.0;
  std::vector<NdWitness> witnesses;
  /// Extra conditions (A(t,0) = 0, A >= -tol) for Basic Assumption I.
  std::vector<CheckItem> extra;
  double tol = 0.0;
  bool pass = false;

  /// "no violation found" or "violation found".
  std::string verdict() const;
  nlohmann::ordered_json to_json() const;
};

/// Schoenberg sweep (e^{-s psi} positive definite for every scale) plus
/// direct constrained forms. A falsifier: passing means no violation found.
NdReport is_negative_definite(const FieldFunction& psi, int dimension, const NdConfig& cfg = {});

/// is_negative_definite on xi -> A(t, xi) for each t, plus A(t, 0) = 0 and A >= -tol.
std::vector<NdReport> validate_basic_assumption_I(const SymbolFamily& family, std::span<const double> t_grid,
                                                  const NdConfig& cfg = {});

}  // namespace addkit
