#include "addkit/evolution_ops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "addkit/error.hpp"

namespace addkit {

FunctionGrid::FunctionGrid(GridSpec grid, ComplexVector values) : grid_(grid), values_(std::move(values)) {
  grid_.validate();
  if (!grid_.resolved()) throw Error(ErrorCode::domain, "function grids need a resolved grid");
  if (values_.size() != grid_.size()) throw Error(ErrorCode::domain, "value count does not match the grid");
  double sum2 = 0.0;
  for (const auto& v : values_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw Error(ErrorCode::evaluation, "non-finite grid value");
    sup_ = std::max(sup_, std::abs(v));
    sum2 += std::norm(v);
  }
  l2_ = std::sqrt(sum2 * std::pow(grid_.spacing(), grid_.dimension));
}

FunctionGrid::FunctionGrid(GridSpec grid, std::span<const double> values)
    : FunctionGrid(grid, ComplexVector(values.begin(), values.end())) {}

FunctionGrid FunctionGrid::sample(const GridSpec& grid, const FieldFunction& f) {
  SpectralTransform tr(grid);
  return FunctionGrid(grid, tr.sample_space(f));
}

std::vector<double> FunctionGrid::real() const {
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(), [](const auto& v) { return v.real(); });
  return out;
}

bool FunctionGrid::is_real(double tol) const {
  return std::all_of(values_.begin(), values_.end(), [&](const auto& v) { return std::abs(v.imag()) <= tol * sup_; });
}

double FunctionGrid::integral() const {
  double sum = 0.0;
  for (const auto& v : values_) sum += v.real();
  return sum * std::pow(grid_.spacing(), grid_.dimension);
}

double FunctionGrid::min_real() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& v : values_) m = std::min(m, v.real());
  return m;
}

namespace {

void require_same_grid(const FunctionGrid& a, const FunctionGrid& b) {
  if (!(a.grid() == b.grid())) throw Error(ErrorCode::grid_mismatch, "function grids differ");
}

void require_family_grid(const SymbolFamily& family, const FunctionGrid& u) {
  if (family.dimension() != u.grid().dimension) {
    throw Error(ErrorCode::grid_mismatch, "grid dimension does not match " + family.description());
  }
}

// ln sigma_t with the limit sigma_0 = 1
double log_sigma_at(const SymbolFamily& family, double t, std::span<const double> xi) {
  return t == 0.0 ? 0.0 : log_sigma(family, t, xi);
}

FunctionGrid scaled_difference(const FunctionGrid& a, const FunctionGrid& b, double scale) {
  require_same_grid(a, b);
  ComplexVector out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (a.values()[i] - b.values()[i]) * scale;
  return FunctionGrid(a.grid(), std::move(out));
}

FunctionGrid one_sided_difference(const FunctionGrid& f0, const FunctionGrid& f1, const FunctionGrid& f2, double step) {
  ComplexVector out(f0.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (-3.0 * f0.values()[i] + 4.0 * f1.values()[i] - f2.values()[i]) / (2.0 * step);
  }
  return FunctionGrid(f0.grid(), std::move(out));
}

FunctionGrid negated(const FunctionGrid& u) {
  ComplexVector out(u.values());
  for (auto& v : out) v = -v;
  return FunctionGrid(u.grid(), std::move(out));
}

}  // namespace

double sup_distance(const FunctionGrid& a, const FunctionGrid& b) {
  require_same_grid(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

double l2_distance(const FunctionGrid& a, const FunctionGrid& b) { return scaled_difference(a, b, 1.0).l2_norm(); }

FunctionGrid bump_function(const GridSpec& grid, double radius) {
  return FunctionGrid::sample(grid, [radius](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    const double z = r2 / (radius * radius);
    return z < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z)) : 0.0;
  });
}

FunctionGrid apply_multiplier(const FunctionGrid& u, const FieldFunction& m) {
  SpectralTransform tr(u.grid());
  const auto mult = tr.sample_spectrum(m);
  auto spectrum = tr.forward(u.values());
  for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= mult[k];
  return FunctionGrid(u.grid(), tr.inverse(spectrum));
}

FunctionGrid apply_H(const SymbolFamily& family, double s, double t, const FunctionGrid& u) {
  require_family_grid(family, u);
  if (s > t) throw Error(ErrorCode::reversed_time, "H_{t,s} requires s <= t");
  if (s < 0.0) throw Error(ErrorCode::domain, "H_{t,s} requires s >= 0");
  if (s == t) return u;
  return apply_multiplier(u, [&](std::span<const double> xi) { return std::exp(-family.Q(s, t, xi)); });
}

FunctionGrid apply_V(const SymbolFamily& family, double s, double t, const FunctionGrid& u) {
  require_family_grid(family, u);
  if (s > t) throw Error(ErrorCode::reversed_time, "V(t, s) requires s <= t");
  if (!(s > 0.0)) throw Error(ErrorCode::domain, "V(t, s) requires s > 0");
  if (s == t) return u;
  return apply_multiplier(u, [&](std::span<const double> xi) {
    return std::exp(log_sigma(family, t, xi) - log_sigma(family, s, xi));
  });
}

FunctionGrid apply_S(const SymbolFamily& family, double t, const FunctionGrid& u) {
  require_family_grid(family, u);
  if (!(t > 0.0)) throw Error(ErrorCode::domain, "S_t requires t > 0");
  return apply_multiplier(u, [&](std::span<const double> xi) { return std::exp(log_sigma(family, t, xi)); });
}

FunctionGrid apply_q(const SymbolFamily& family, double t, const FunctionGrid& u) {
  require_family_grid(family, u);
  return apply_multiplier(u, [&](std::span<const double> xi) { return family.q(t, xi); });
}

FunctionGrid apply_A(const SymbolFamily& family, double t, const FunctionGrid& u) {
  require_family_grid(family, u);
  return apply_multiplier(u, [&](std::span<const double> xi) { return adjoint_exponent(family, t, xi); });
}

namespace {

using Evolution = std::function<FunctionGrid(double, double, const FunctionGrid&)>;
using Generator = std::function<FunctionGrid(double, const FunctionGrid&)>;

// Items (a)-(d) for an evolution E(s, t) with generator G: dE/dt = -G(t) E,
// dE/ds = E G(s).
void evolution_items(CheckReport& rep, const std::string& prefix, const Evolution& E, const Generator& G, double s,
                     double r, double t, double lower, const FunctionGrid& u, double tol) {
  const double scale = std::max(1.0, u.sup_norm());
  const FunctionGrid ets = E(s, t, u);
  rep.add_bound(prefix + "composition", sup_distance(E(r, t, E(s, r, u)), ets), tol * scale);
  rep.add_bound(prefix + "identity", sup_distance(E(s, s, u), u), tol * scale);
  if (s == t) {
    rep.add(prefix + "d_dt", 0.0, tol, true, "skipped: degenerate times s = t");
    rep.add(prefix + "d_ds", 0.0, tol, true, "skipped: degenerate times s = t");
    return;
  }
  {
    const double dt = 1e-4 * t;
    const FunctionGrid fd = scaled_difference(E(s, t + dt, u), E(s, t - dt, u), 0.5 / dt);
    const FunctionGrid exact = negated(G(t, ets));
    std::ostringstream note;
    note << "step " << dt;
    rep.add_bound(prefix + "d_dt", sup_distance(fd, exact), tol * (1.0 + exact.sup_norm()), note.str());
  }
  {
    const double ds = 1e-4 * t;
    const FunctionGrid exact = E(s, t, G(s, u));
    std::string note = "step " + std::to_string(ds);
    FunctionGrid fd = s - ds > lower ? scaled_difference(E(s + ds, t, u), E(s - ds, t, u), 0.5 / ds)
                                     : one_sided_difference(ets, E(s + ds, t, u), E(s + 2.0 * ds, t, u), ds);
    if (!(s - ds > lower)) note += ", one-sided";
    rep.add_bound(prefix + "d_ds", sup_distance(fd, exact), tol * (1.0 + exact.sup_norm()), note);
  }
}

}  // namespace

CheckReport fundamental_solution_check(const SymbolFamily& family, double s, double r, double t,
                                       const FunctionGrid& u, double tol) {
  if (!(0.0 <= s && s <= r && r <= t)) throw Error(ErrorCode::domain, "times must satisfy 0 <= s <= r <= t");
  require_family_grid(family, u);
  CheckReport rep;
  rep.name = "fundamental_solution";
  evolution_items(
      rep, "H_", [&](double a, double b, const FunctionGrid& v) { return apply_H(family, a, b, v); },
      [&](double tau, const FunctionGrid& v) { return apply_q(family, tau, v); }, s, r, t, 0.0, u, tol);
  if (s > 0.0) {
    evolution_items(
        rep, "V_", [&](double a, double b, const FunctionGrid& v) { return apply_V(family, a, b, v); },
        [&](double tau, const FunctionGrid& v) { return apply_A(family, tau, v); }, s, r, t, 0.0, u, tol);
  } else {
    rep.add("V_all", 0.0, tol, true, "skipped: V(t, s) needs s > 0");
  }
  return rep;
}

CheckReport chapman_kolmogorov_check(const SymbolFamily& family, double s, double r, double t, GridSpec grid,
                                     double tol) {
  if (!(0.0 <= s && s < r && r < t)) throw Error(ErrorCode::domain, "Chapman-Kolmogorov needs 0 <= s < r < t");
  CheckReport rep;
  rep.name = "chapman_kolmogorov";
  // the narrowest increment needs the widest frequency window
  if (!grid.resolved()) {
    GridSpec best = resolve_grid(family, s, t, grid);
    for (auto [a, b] : {std::pair{s, r}, std::pair{r, t}}) {
      const GridSpec g = resolve_grid(family, a, b, grid);
      if (g.cutoff() > best.cutoff()) best = g;
    }
    grid = best;
  }
  const DensityTable p_tr = density_grid(family, r, t, grid);
  const DensityTable p_rs = density_grid(family, s, r, grid);
  const DensityTable p_ts = density_grid(family, s, t, grid);
  SpectralTransform tr(grid);
  auto f1 = tr.forward(p_tr.values);
  const auto f2 = tr.forward(p_rs.values);
  for (std::size_t k = 0; k < f1.size(); ++k) f1[k] *= f2[k];
  const auto conv = tr.inverse_real(f1);
  double err = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < conv.size(); ++i) {
    err = std::max(err, std::abs(conv[i] - p_ts.values[i]));
    peak = std::max(peak, p_ts.values[i]);
  }
  std::ostringstream note;
  note << "N=" << grid.points << " L=" << grid.half_width << " peak " << peak;
  rep.add_bound("density_sup_error", err, tol, note.str());

  // gamma_{t,s} has Fourier transform sigma_t / sigma_s
  const auto ls = tr.sample_spectrum([&](std::span<const double> xi) { return log_sigma_at(family, s, xi); });
  const auto lr = tr.sample_spectrum([&](std::span<const double> xi) { return log_sigma_at(family, r, xi); });
  const auto lt = tr.sample_spectrum([&](std::span<const double> xi) { return log_sigma_at(family, t, xi); });
  double gerr = 0.0;
  for (std::size_t k = 0; k < ls.size(); ++k) {
    const double composed = std::exp(lt[k] - lr[k]) * std::exp(lr[k] - ls[k]);
    gerr = std::max(gerr, std::abs(composed - std::exp(lt[k] - ls[k])));
  }
  rep.add_bound("gamma_multiplier_sup_error", gerr, tol);
  return rep;
}

}  // namespace addkit
