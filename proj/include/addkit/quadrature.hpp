#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace addkit::quad {

using Integrand = std::function<double(double)>;

struct Tolerance {
  double absolute = 0.0;
  double relative = 1e-12;
};

struct Result {
  double value = 0.0;
  double error = 0.0;      // Kronrod-Gauss difference, summed over subintervals
  std::size_t intervals = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) on [a, b]: the interval with the
/// largest error estimate is bisected until the total error is below
/// max(abs, rel * |I|) or the interval budget is exhausted.
Result integrate(const Integrand& f, double a, double b, Tolerance tol = {},
                 std::size_t max_intervals = 4000);

/// Same driver seeded with the given breakpoints (sorted, at least two).
Result integrate(const Integrand& f, std::span<const double> breaks, Tolerance tol = {},
                 std::size_t max_intervals = 20000);

/// Integral of f over [a, inf) for f decaying at least exponentially.
/// Panels of doubling width are added until a panel contributes less than
/// 1e-17 of the running total.
Result integrate_to_infinity(const Integrand& f, double a, Tolerance tol = {},
                             double first_panel = 1.0);

/// Integral of g(xi) cos(omega xi) over [0, upper]. The interval is split
/// into panels of roughly one period so that the adaptive driver sees
/// smooth, non-oscillating pieces. The error target is taken relative to
/// the integral of |g|, or to `scale` when it is positive.
Result integrate_cosine(const Integrand& g, double omega, double upper, double rel_tol = 1e-12,
                        double scale = 0.0);

}  // namespace addkit::quad
