#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "addkit/expression.hpp"
#include "json.hpp"

namespace addkit {

using ScalarFunction = std::function<double(double)>;
using FieldFunction = std::function<double(std::span<const double>)>;

/// Monotone time change h with h(0) = 0; the derivative is optional.
class TimeProfile {
 public:
  TimeProfile(ScalarFunction h, ScalarFunction hprime, std::string description);

  /// h(t) = c t
  static TimeProfile linear(double c = 1.0);
  /// h(t) = t^p, p > 0
  static TimeProfile power(double p);
  /// h(t) = sum_k c_k t^k; requires c_0 = 0
  static TimeProfile polynomial(std::vector<double> coeffs);
  /// h and (optionally empty) h' given as expressions in t
  static TimeProfile from_expressions(const std::string& h, const std::string& hprime);

  double operator()(double t) const;
  /// Throws Error(missing_derivative) when the profile has no h'.
  double derivative(double t) const;
  bool has_derivative() const noexcept { return static_cast<bool>(hprime_); }
  const std::string& description() const noexcept { return description_; }
  /// Config form understood by profile_from_json.
  const nlohmann::ordered_json& to_json() const noexcept { return config_; }

  /// Checks h(0) = 0, h > 0 and strict increase on 64 log-spaced points per
  /// decade over [1e-6, 1e6]. Throws Error(domain).
  void validate() const;

 private:
  ScalarFunction h_;
  ScalarFunction hprime_;
  std::string description_;
  nlohmann::ordered_json config_;
};

enum class FamilyKind { gaussian, poisson, coshlog, direct_sum, custom };

std::string to_string(FamilyKind kind);

/// Time-dependent symbol q(t, xi) with accumulated exponent
/// Q_{t,s}(xi) = int_s^t q(tau, xi) dtau.
///
/// Built-in families and custom product families have the form
/// Q_{t,s} = (h(t) - h(s)) psi_0(xi). Custom rate families only know
/// q(t, |xi|) and integrate in time. Immutable and cheap to copy.
class SymbolFamily {
 public:
  static SymbolFamily gaussian(int dimension = 1, TimeProfile profile = TimeProfile::linear());
  static SymbolFamily poisson(int dimension = 1, TimeProfile profile = TimeProfile::linear());
  static SymbolFamily coshlog(TimeProfile profile = TimeProfile::linear());
  /// psi_0(xi) = base(|xi|)
  static SymbolFamily custom_product(int dimension, TimeProfile profile, const std::string& base);
  /// q(t, xi) = rate(|xi|, t)
  static SymbolFamily custom_rate(int dimension, const std::string& rate);

  /// Replaces the comparability reference psi (default: psi_0).
  SymbolFamily with_reference(FieldFunction psi, std::string description) const;

  FamilyKind kind() const noexcept;
  int dimension() const noexcept;
  const std::string& description() const noexcept;

  /// True when Q_{t,s} = (h(t) - h(s)) psi_0.
  bool is_product() const noexcept;
  /// Throws Error(domain) for non-product families.
  const TimeProfile& profile() const;
  /// Summands of a direct sum (empty otherwise).
  const std::vector<SymbolFamily>& components() const noexcept;

  /// Q depends on |xi| only.
  bool radial() const noexcept;
  /// Radial and nondecreasing in |xi| (makes d_Q balls intervals/discs).
  bool radial_monotone() const noexcept;
  bool has_derivative() const noexcept;

  double base(std::span<const double> xi) const;
  double reference(std::span<const double> xi) const;
  const std::string& reference_description() const noexcept;

  double q(double t, std::span<const double> xi) const;
  double Q(double s, double t, std::span<const double> xi) const;
  double Q(double t, std::span<const double> xi) const { return Q(0.0, t, xi); }

  /// Radial shortcut: Q_{t,s} at any xi with |xi| = r. Radial families only.
  double Q_radial(double s, double t, double r) const;

  // 1D conveniences
  double q(double t, double xi) const { return q(t, std::span<const double>(&xi, 1)); }
  double Q(double s, double t, double xi) const { return Q(s, t, std::span<const double>(&xi, 1)); }

  /// Canonical JSON description (round-trips through family_from_json for
  /// families built from configs or built-in constructors).
  nlohmann::ordered_json to_json() const;

  struct Impl;

 private:
  explicit SymbolFamily(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  friend SymbolFamily direct_sum(const SymbolFamily&, const SymbolFamily&);

  std::shared_ptr<const Impl> impl_;
};

/// Family on R^{n1+n2} with Q = Q1(xi) + Q2(eta).
SymbolFamily direct_sum(const SymbolFamily& f1, const SymbolFamily& f2);

/// {"kind": ..., "dimension": n, "profile": {"form": "t"|"t^2"|"sqrt(t)"|"poly", "coeffs": [...]}}
/// plus "components" for direct sums, "base" or "q" expressions for custom
/// kinds and an optional "reference" expression. Throws Error(config).
SymbolFamily family_from_json(const nlohmann::json& config);
TimeProfile profile_from_json(const nlohmann::json& config);

/// "builtin:gaussian", "builtin:poisson", "builtin:coshlog" with h(t) = t, n = 1.
SymbolFamily builtin_family(const std::string& name);

struct ComparabilityReport {
  double kappa0 = 0.0;
  double kappa1 = 0.0;
  double max_condition = 1e6;
  bool pass = false;
  std::string message;
};

/// Estimates kappa0 <= q(t, xi)/psi(xi) <= kappa1 over the samples. Fails
/// when kappa0 <= 0, kappa1 is not finite, or kappa1/kappa0 > max_condition.
/// Throws Error(domain) for a zero sample and Error(reference_not_positive)
/// when psi vanishes at a nonzero sample.
ComparabilityReport comparability_bounds(const SymbolFamily& family, const FieldFunction& psi,
                                         std::span<const std::vector<double>> xi_samples,
                                         std::span<const double> t_samples, double max_condition = 1e6);

/// Same with the family's own reference exponent.
ComparabilityReport comparability_bounds(const SymbolFamily& family,
                                         std::span<const std::vector<double>> xi_samples,
                                         std::span<const double> t_samples, double max_condition = 1e6);

}  // namespace addkit
