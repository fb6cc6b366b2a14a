#include "addkit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "addkit/error.hpp"

namespace addkit::quad {

namespace {

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment apply_rule(const Integrand& f, double a, double b) {
  using kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
  using gauss = boost::math::quadrature::gauss<double, 7>;
  static const auto& xk = kronrod::abscissa();
  static const auto& wk = kronrod::weights();
  static const auto& wg = gauss::weights();

  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(mid);
  double k = wk[0] * fc;
  double g = 0.0;
  // Gauss-7 nodes sit at the even Kronrod indices (0, 2, 4, 6).
  g += wg[0] * fc;
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const double dx = half * xk[i];
    const double s = f(mid - dx) + f(mid + dx);
    k += wk[i] * s;
    if (i % 2 == 0) g += wg[i / 2] * s;
  }
  k *= half;
  g *= half;
  if (!std::isfinite(k)) {
    throw Error(ErrorCode::evaluation, "non-finite integrand value on [" + std::to_string(a) +
                                           ", " + std::to_string(b) + "]");
  }
  return {a, b, k, std::fabs(k - g)};
}

Result drive(const Integrand& f, std::span<const double> breaks, Tolerance tol,
             std::size_t max_intervals) {
  std::priority_queue<Segment> heap;
  double total = 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] == breaks[i]) continue;
    Segment s = apply_rule(f, breaks[i], breaks[i + 1]);
    total += s.value;
    err += s.error;
    heap.push(s);
  }
  std::size_t count = heap.size();
  while (!heap.empty() && count < max_intervals) {
    const double target = std::max(tol.absolute, tol.relative * std::fabs(total));
    if (err <= target) break;
    Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted in floating point
    heap.pop();
    Segment left = apply_rule(f, worst.a, mid);
    Segment right = apply_rule(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Re-sum to remove drift from the incremental updates.
  double value = 0.0;
  double error = 0.0;
  std::vector<Segment> parts;
  parts.reserve(heap.size());
  while (!heap.empty()) {
    parts.push_back(heap.top());
    heap.pop();
  }
  std::sort(parts.begin(), parts.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
  for (const auto& p : parts) {
    value += p.value;
    error += p.error;
  }
  return {value, error, parts.size()};
}

}  // namespace

Result integrate(const Integrand& f, double a, double b, Tolerance tol, std::size_t max_intervals) {
  if (a == b) return {};
  if (a > b) {
    Result r = integrate(f, b, a, tol, max_intervals);
    r.value = -r.value;
    return r;
  }
  const double breaks[2] = {a, b};
  return drive(f, breaks, tol, max_intervals);
}

Result integrate(const Integrand& f, std::span<const double> breaks, Tolerance tol,
                 std::size_t max_intervals) {
  if (breaks.size() < 2 || !std::is_sorted(breaks.begin(), breaks.end())) {
    throw Error(ErrorCode::domain, "quadrature breakpoints must be sorted and at least two");
  }
  return drive(f, breaks, tol, std::max(max_intervals, breaks.size()));
}

Result integrate_to_infinity(const Integrand& f, double a, Tolerance tol, double first_panel) {
  Result total;
  double lo = a;
  double width = first_panel;
  for (int panel = 0; panel < 200; ++panel) {
    const double hi = lo + width;
    Result r = integrate(f, lo, hi, tol);
    total.value += r.value;
    total.error += r.error;
    total.intervals += r.intervals;
    if (panel > 2 && std::fabs(r.value) <= 1e-17 * std::fabs(total.value)) return total;
    lo = hi;
    width *= 2.0;
  }
  throw Error(ErrorCode::insufficient_decay, "half-line integrand does not decay");
}

Result integrate_cosine(const Integrand& g, double omega, double upper, double rel_tol, double scale) {
  omega = std::fabs(omega);
  std::vector<double> breaks{0.0};
  // Small panels near the origin where spectra may have endpoint kinks.
  const double period = omega > 0.0 ? 2.0 * std::numbers::pi / omega : upper;
  const std::size_t panels = std::min<std::size_t>(
      200000, static_cast<std::size_t>(std::ceil(upper / std::min(period, upper))));
  const double width = upper / static_cast<double>(panels);
  for (std::size_t i = 1; i <= panels; ++i) breaks.push_back(width * static_cast<double>(i));
  breaks.back() = upper;

  const double l1 = scale > 0.0 ? scale
                                : integrate([&](double x) { return std::fabs(g(x)); }, breaks, {0.0, 1e-6}).value;
  auto h = [&](double x) { return g(x) * std::cos(omega * x); };
  return integrate(h, breaks, {rel_tol * l1, 0.0}, 40 * breaks.size() + 4000);
}

}  // namespace addkit::quad
