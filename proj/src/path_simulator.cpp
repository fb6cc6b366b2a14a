#include "addkit/path_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "addkit/diagnostics.hpp"
#include "addkit/error.hpp"
#include "addkit/parallel.hpp"

namespace addkit {

namespace {

constexpr double pi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double keyed_uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t interval, std::uint64_t component) {
  std::uint64_t x = splitmix64(seed);
  x = splitmix64(x ^ path);
  x = splitmix64(x ^ (interval * 0x100000001b3ULL));
  x = splitmix64(x ^ (component + 0x632be59bd9b4e019ULL));
  // midpoint of one of 2^53 equal cells: strictly inside (0, 1)
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------
// Sampler

IncrementSampler::IncrementSampler(const DensityTable& table, double atom) : grid_(table.grid), atom_(atom) {
  if (grid_.dimension != 1) throw Error(ErrorCode::domain, "increment samplers are one-dimensional");
  if (!(atom >= 0.0 && atom < 1.0)) throw Error(ErrorCode::domain, "atom weight must lie in [0, 1)");
  const double dx = grid_.spacing();
  const std::size_t n = table.values.size();
  double mass = 0.0;
  for (double v : table.values) mass += v;
  mass *= dx;
  if (!(std::abs(mass - 1.0) <= 1e-6)) {
    std::ostringstream os;
    os << "density table has mass " << mass << ", not 1";
    throw Error(ErrorCode::non_normalized_table, os.str());
  }
  // periodic closure: node N carries the value of node 0
  density_.resize(n + 1);
  for (std::size_t j = 0; j < n; ++j) density_[j] = table.values[j] / mass;
  density_[n] = density_[0];
  // trapezoid with the Euler-Maclaurin end correction dx^2 (p'_j - p'_{j+1}) / 12,
  // slopes by periodic central differences
  std::vector<double> slope(n + 1);
  for (std::size_t j = 0; j < n; ++j) slope[j] = (density_[(j + 1) % n] - density_[(j + n - 1) % n]) / (2.0 * dx);
  slope[n] = slope[0];
  cumulative_.assign(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double step = 0.5 * dx * (density_[j] + density_[j + 1]) + dx * dx * (slope[j] - slope[j + 1]) / 12.0;
    cumulative_[j + 1] = cumulative_[j] + std::max(step, 0.0);
  }
  const double total = cumulative_[n];
  for (auto& c : cumulative_) c /= total;
  for (auto& d : density_) d /= total;
}

double IncrementSampler::cdf(double x) const {
  const double L = grid_.half_width, dx = grid_.spacing();
  if (x <= -L) return 0.0;
  if (x >= L) return 1.0;
  const double pos = (x + L) / dx;
  const auto j = std::min(static_cast<std::size_t>(pos), density_.size() - 2);
  const double u = pos - static_cast<double>(j);
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u, h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  const double f = h00 * cumulative_[j] + h10 * dx * density_[j] + h01 * cumulative_[j + 1] + h11 * dx * density_[j + 1];
  return std::clamp(f, cumulative_[j], cumulative_[j + 1]);
}

double IncrementSampler::continuous_inverse(double p) const {
  const double L = grid_.half_width, dx = grid_.spacing();
  if (p <= 0.0) return -L;
  if (p >= 1.0) return L;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), p);
  const auto j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cumulative_.begin() - 1, 0));
  double lo = -L + static_cast<double>(j) * dx, hi = lo + dx;
  for (int it2 = 0; it2 < 100; ++it2) {
    const double mid = 0.5 * (lo + hi);
    const double f = cdf(mid);
    if (std::abs(f - p) <= 1e-12 || !(mid > lo && mid < hi)) return mid;
    (f < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double IncrementSampler::inverse(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::domain, "probability outside [0, 1]");
  if (atom_ == 0.0) return continuous_inverse(p);
  const double below = (1.0 - atom_) * cdf(0.0);
  if (p < below) return continuous_inverse(p / (1.0 - atom_));
  if (p <= below + atom_) return 0.0;
  return continuous_inverse((p - atom_) / (1.0 - atom_));
}

IncrementSampler build_sampler(const DensityTable& table) { return IncrementSampler(table); }

std::string to_string(ProcessTag tag) { return tag == ProcessTag::Y ? "Y" : "X"; }

ProcessTag process_tag_from_string(const std::string& s) {
  if (s == "Y" || s == "y") return ProcessTag::Y;
  if (s == "X" || s == "x") return ProcessTag::X;
  throw Error(ErrorCode::config, "process must be Y or X, got '" + s + "'");
}

// ---------------------------------------------------------------------------
// Increment laws

std::vector<SymbolFamily> coordinate_factors(const SymbolFamily& family) {
  if (family.dimension() == 1) return {family};
  if (family.kind() == FamilyKind::direct_sum) {
    for (const auto& c : family.components()) {
      if (c.dimension() != 1) throw Error(ErrorCode::domain, "direct-sum summands must be one-dimensional for simulation");
    }
    return family.components();
  }
  if (family.kind() == FamilyKind::gaussian) {
    return std::vector<SymbolFamily>(static_cast<std::size_t>(family.dimension()),
                                     SymbolFamily::gaussian(1, family.profile()));
  }
  throw Error(ErrorCode::domain, "simulation in dimension > 1 needs a direct sum or the Gaussian family, got " +
                                     family.description());
}

IncrementSampler increment_sampler_Y(const SymbolFamily& family, double s, double t, const SimulationOptions& opt) {
  if (family.dimension() != 1) throw Error(ErrorCode::domain, "increment samplers are one-dimensional");
  const GridSpec base = resolve_grid(family, s, t, GridSpec{1, opt.grid_points, 0.0});
  const GridSpec grid{1, opt.grid_points, base.half_width / opt.oversample};
  return IncrementSampler(density_grid(family, s, t, grid));
}

namespace {

double log_sigma_or_zero(const SymbolFamily& family, double t, double xi) {
  return t == 0.0 ? 0.0 : log_sigma(family, t, xi);
}

}  // namespace

void require_positive_definite(const std::function<double(double)>& m, double scale, const std::string& what) {
  for (double radius : {scale, 10.0 * scale}) {
    const PointSet ps = random_point_set(1, 16, radius, 0x9d2c5680ULL);
    auto f = [&](std::span<const double> xi) { return m(xi[0]); };
    const double lam = pd_min_eigenvalue(f, ps);
    if (lam < -1e-9 * 16.0 * std::abs(m(0.0))) {
      std::ostringstream os;
      os << what << " is not positive definite: smallest eigenvalue " << lam << " on points in [-" << radius << ", "
         << radius << "]";
      throw Error(ErrorCode::assumption_violation, os.str());
    }
  }
}

IncrementSampler increment_sampler_X(const SymbolFamily& family, double s, double t, const SimulationOptions& opt) {
  if (family.dimension() != 1) throw Error(ErrorCode::domain, "increment samplers are one-dimensional");
  if (!(0.0 <= s && s < t)) throw Error(ErrorCode::domain, "X increments need 0 <= s < t");
  if (!has_closed_form_sigma(family)) {
    throw Error(ErrorCode::domain, "X increments need a closed-form sigma; " + family.description() + " has none");
  }
  // multiplier sigma_t / sigma_s; an underflowing sigma counts as zero
  auto m = [&](double xi) {
    try {
      return std::exp(log_sigma_or_zero(family, t, xi) - log_sigma_or_zero(family, s, xi));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::step_underflow) return 0.0;
      throw;
    }
  };
  // limit at infinity: an atom at the origin
  const double m_a = m(1e10), m_b = m(1e11);
  const double atom = (std::abs(m_a - m_b) <= 1e-6 * m_b && m_b > 1e-12) ? m_b : 0.0;
  if (atom >= 1.0 - 1e-12) throw Error(ErrorCode::domain, "X increment is degenerate at the origin");
  auto c = [&](double xi) { return (m(xi) - atom) / (1.0 - atom); };

  // characteristic frequency and decay of the continuous part
  double xi_half = 1.0;
  while (c(xi_half) > 0.5 && xi_half < 1e12) xi_half *= 2.0;
  while (c(0.5 * xi_half) <= 0.5 && xi_half > 1e-12) xi_half *= 0.5;
  double xi_decay = xi_half;
  while (c(xi_decay) > 1e-14 && xi_decay < 1e12 * xi_half) xi_decay *= 2.0;

  std::ostringstream what;
  what << "sigma_t / sigma_s for " << family.description() << " on [" << s << ", " << t << "]";
  require_positive_definite(m, xi_half, what.str());

  // window: at least 1000 characteristic lengths, widened until the outer
  // tenth of the window carries no more mass than the truncation ringing
  const double n = static_cast<double>(opt.grid_points);
  const double min_half_width = 1000.0 / xi_half;
  double half_width = pi * n / (2.0 * std::min(opt.oversample * xi_decay, pi * n / (2.0 * min_half_width)));
  GridSpec grid;
  DensityTable table;
  for (int attempt = 0;; ++attempt) {
    grid = GridSpec{1, opt.grid_points, half_width};
    table = density_from_spectrum(grid, [&](std::span<const double> xi) { return c(xi[0]); });
    double outer = 0.0;
    for (std::size_t j = 0; j < table.values.size(); ++j) {
      if (std::abs(grid.coordinate(j)) > 0.9 * half_width) outer += table.values[j];
    }
    if (outer * grid.spacing() <= std::max(1e-10, 10.0 * table.clipped_mass) || attempt == 12) break;
    half_width *= 2.0;
  }
  // a multiplier still alive at the cutoff rings; the Fejer (triangle) window
  // keeps the inverted density nonnegative
  const double cut = grid.cutoff();
  if (c(cut) > 1e-12 && table.clipped_mass > 1e-10) {
    table = density_from_spectrum(grid, [&](std::span<const double> xi) {
      return c(xi[0]) * std::max(0.0, 1.0 - std::abs(xi[0]) / cut);
    });
  }
  if (table.clipped_mass > 1e-10) {
    std::ostringstream os;
    os << "X increment density on [" << s << ", " << t << "] for " << family.description() << ": clipped mass "
       << table.clipped_mass;
    warn(os.str());
  }
  // renormalize after clipping
  double mass = 0.0;
  for (double v : table.values) mass += v;
  mass *= grid.spacing();
  for (auto& v : table.values) v /= mass;
  table.total_mass = 1.0;
  return IncrementSampler(table, atom);
}

// ---------------------------------------------------------------------------
// Paths

std::vector<ProcessPath> simulate_paths(const SymbolFamily& family, std::span<const double> time_grid, std::size_t num_paths,
                                        std::uint64_t seed, ProcessTag tag, const SimulationOptions& opt) {
  if (time_grid.size() < 2 || time_grid[0] != 0.0) throw Error(ErrorCode::domain, "time grid must start at 0 with at least two times");
  for (std::size_t k = 1; k < time_grid.size(); ++k) {
    if (!(time_grid[k] > time_grid[k - 1])) throw Error(ErrorCode::domain, "time grid must be strictly increasing");
  }
  const auto factors = coordinate_factors(family);
  const std::size_t intervals = time_grid.size() - 1;
  std::vector<std::vector<IncrementSampler>> samplers(intervals);
  for (std::size_t k = 0; k < intervals; ++k) {
    for (const auto& f : factors) {
      samplers[k].push_back(tag == ProcessTag::Y ? increment_sampler_Y(f, time_grid[k], time_grid[k + 1], opt)
                                                 : increment_sampler_X(f, time_grid[k], time_grid[k + 1], opt));
    }
  }
  std::vector<ProcessPath> paths(num_paths);
  const std::vector<double> times(time_grid.begin(), time_grid.end());
  parallel_for(num_paths, [&](std::size_t id) {
    ProcessPath& p = paths[id];
    p.id = id;
    p.times = times;
    p.tag = tag;
    p.seed = seed;
    p.positions.assign(times.size(), Point(factors.size(), 0.0));
    for (std::size_t k = 0; k < intervals; ++k) {
      for (std::size_t c = 0; c < factors.size(); ++c) {
        p.positions[k + 1][c] = p.positions[k][c] + samplers[k][c].inverse(keyed_uniform(seed, id, k, c));
      }
    }
  });
  return paths;
}

CheckReport empirical_cf_check(const std::vector<ProcessPath>& paths, const SymbolFamily& family, double t,
                               std::span<const Point> probes, double tol_sigmas) {
  if (paths.empty()) throw Error(ErrorCode::domain, "no paths");
  const auto& times = paths.front().times;
  const auto it = std::find_if(times.begin(), times.end(), [&](double x) { return std::abs(x - t) <= 1e-12 * std::max(1.0, t); });
  if (it == times.end()) throw Error(ErrorCode::domain, "time " + std::to_string(t) + " is not on the path grid");
  const auto k = static_cast<std::size_t>(it - times.begin());
  const ProcessTag tag = paths.front().tag;
  const double N = static_cast<double>(paths.size());
  CheckReport rep;
  rep.name = "empirical_cf";
  for (const auto& xi : probes) {
    if (xi.size() != static_cast<std::size_t>(family.dimension())) throw Error(ErrorCode::domain, "probe dimension mismatch");
    double sum = 0.0;
    for (const auto& p : paths) {
      if (p.tag != tag || p.times.size() != times.size()) throw Error(ErrorCode::domain, "paths do not share a time grid");
      double dot = 0.0;
      for (std::size_t c = 0; c < xi.size(); ++c) dot += xi[c] * (p.positions[k][c] - p.positions[0][c]);
      sum += std::cos(dot);
    }
    const double empirical = sum / N;
    const double reference = tag == ProcessTag::Y ? std::exp(-family.Q(0.0, t, xi)) : std::exp(log_sigma(family, t, xi));
    const double band = tol_sigmas * std::sqrt(std::max(0.0, 1.0 - reference * reference) / N) + 1e-12;
    std::ostringstream name, note;
    name << "cf_xi=";
    for (std::size_t c = 0; c < xi.size(); ++c) name << (c ? "," : "") << xi[c];
    note.precision(10);
    note << "empirical " << empirical << " reference " << reference;
    rep.add_bound(name.str(), std::abs(empirical - reference), band, note.str());
  }
  return rep;
}

CheckReport empirical_cf_check(const std::vector<ProcessPath>& paths, const SymbolFamily& family, double t,
                               std::span<const double> probes, double tol_sigmas) {
  std::vector<Point> pts;
  for (double p : probes) {
    Point xi(static_cast<std::size_t>(family.dimension()), 0.0);
    xi[0] = p;
    pts.push_back(std::move(xi));
  }
  return empirical_cf_check(paths, family, t, pts, tol_sigmas);
}

std::vector<double> path_increments(const std::vector<ProcessPath>& paths, std::size_t k, std::size_t component) {
  std::vector<double> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    if (k + 1 >= p.positions.size()) throw Error(ErrorCode::domain, "interval index out of range");
    out.push_back(p.positions[k + 1][component] - p.positions[k][component]);
  }
  return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::domain, "KS statistic needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return c * std::sqrt((dn + dm) / (dn * dm));
}

}  // namespace addkit
