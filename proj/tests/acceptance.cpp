// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "addkit/closed_form_oracle.hpp"
#include "addkit/density_engine.hpp"
#include "addkit/diagnostics.hpp"
#include "addkit/error.hpp"
#include "addkit/evolution_ops.hpp"
#include "addkit/metric_geometry.hpp"
#include "addkit/nd_validator.hpp"
#include "addkit/path_simulator.hpp"
#include "addkit/symbol_core.hpp"

using namespace addkit;

namespace {

constexpr double pi = std::numbers::pi;

const SymbolFamily gauss = SymbolFamily::gaussian(1, TimeProfile::linear());
const SymbolFamily poisson = SymbolFamily::poisson(1, TimeProfile::linear());
const SymbolFamily coshlog = SymbolFamily::coshlog(TimeProfile::linear());

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double item(const CheckReport& rep, const std::string& name) {
  for (const auto& i : rep.items)
    if (i.name == name) return i.value;
  throw Error(ErrorCode::domain, "report " + rep.name + " has no item " + name);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// 1: Gaussian transition and adjoint densities against their closed forms.
void gaussian_master(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  const DensityTable t = density_grid(gauss, 0.0, 1.0, GridSpec{1, 4096, 0.0});
  double p_err = 0.0, phi_err = 0.0;
  for (std::size_t j = 0; j < t.grid.points; ++j) {
    const double x = t.grid.coordinate(j);
    p_err = std::max(p_err, std::abs(t.values[j] - std::exp(-x * x / 4.0) / std::sqrt(4.0 * pi)));
    phi_err = std::max(phi_err, std::abs(adjoint_density(gauss, 1.0, x) - std::exp(-x * x) / std::sqrt(pi)));
  }
  const double secs = elapsed(start);
  o.detail << "p sup err " << p_err << ", Phi sup err " << phi_err << ", " << secs << " s ";
  o.require(p_err < 1e-8, "p sup error < 1e-8");
  o.require(phi_err < 1e-8, "Phi sup error < 1e-8");
  o.require(secs < 1.0, "runtime < 1 s");
}

// 2: p_t from the ball integral of d_Q and the exponent delta_Q.
void dual_p(Outcome& o) {
  const struct {
    const SymbolFamily* fam;
    double t;
    const char* name;
  } cases[] = {{&gauss, 1.0, "gaussian"}, {&poisson, 1.0, "poisson"}, {&coshlog, 2.0, "coshlog"}};
  for (const auto& c : cases) {
    const auto rep = dual_formula_check(*c.fam, c.t, GridSpec{}, 1e-5);
    const double err = item(rep, "p_sup_relative_error");
    o.detail << c.name << " " << err << "; ";
    o.require(err < 1e-5, std::string(c.name) + " p sup relative error < 1e-5");
    o.require(item(rep, "p_peak_relative_error") < 1e-5, std::string(c.name) + " p peak");
  }
  const double g = peak_via_ball_integral(metric_dQ(gauss, 0.0, 1.0));
  const double p = peak_via_ball_integral(metric_dQ(poisson, 0.0, 1.0));
  o.detail << "peaks " << g << ", " << p;
  o.require(rel(g, 0.2820948) < 1e-5 && rel(g, 0.5 / std::sqrt(pi)) < 1e-10, "gaussian peak 0.2820948");
  o.require(rel(p, 0.3183099) < 1e-5 && rel(p, 1.0 / pi) < 1e-10, "poisson peak 0.3183099");
}

// 3: Phi_t from the ball integral of delta_{Q_{1/t}} and the exponent d_{Q_{1/t}}.
void dual_phi(Outcome& o) {
  const struct {
    const SymbolFamily* fam;
    const char* name;
  } cases[] = {{&gauss, "gaussian"}, {&poisson, "poisson"}, {&coshlog, "coshlog"}};
  for (const auto& c : cases) {
    const auto rep = dual_formula_check(*c.fam, 1.0, GridSpec{}, 1e-5);
    const double err = item(rep, "phi_sup_relative_error");
    o.detail << c.name << " " << err << "; ";
    o.require(err < 1e-5, std::string(c.name) + " Phi sup relative error < 1e-5");
  }
  const double g = peak_via_ball_integral(metric_deltaQ(gauss, 1.0));
  o.detail << "gaussian Phi peak " << g;
  o.require(rel(g, 0.5641896) < 1e-5, "gaussian Phi peak 0.5641896");
}

// 4: normalized FT of p_t against normalized Phi_{1/t}.
void adjointness(Outcome& o) {
  const struct {
    const SymbolFamily* fam;
    double tol;
    const char* name;
  } cases[] = {{&gauss, 1e-6, "gaussian"}, {&poisson, 1e-5, "poisson"}, {&coshlog, 1e-5, "coshlog"}};
  for (const auto& c : cases) {
    double worst = 0.0;
    bool ok = true;
    for (double t : {0.5, 1.0, 2.0}) {
      const auto rep = adjointness_check(*c.fam, t, GridSpec{}, c.tol);
      worst = std::max(worst, item(rep, "sup_error"));
      ok = ok && rep.pass();
    }
    o.detail << c.name << " " << worst << "; ";
    o.require(ok, std::string(c.name) + " sup error within tolerance");
  }
}

// 5: the falsifier accepts stable exponents and ln cosh and rejects |xi|^3.
void falsifier(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
    const auto rep = is_negative_definite([alpha](std::span<const double> x) { return std::pow(std::abs(x[0]), alpha); }, 1);
    o.require(rep.pass, "|xi|^" + std::to_string(alpha) + " passes");
  }
  o.require(is_negative_definite([](std::span<const double> x) { return log_cosh(x[0]); }, 1).pass, "ln cosh passes");
  const auto cube = is_negative_definite([](std::span<const double> x) { return std::pow(std::abs(x[0]), 3.0); }, 1);
  o.require(!cube.pass, "|xi|^3 fails");
  bool witness = false;
  for (const auto& w : cube.witnesses) {
    const bool points = w.points.size() == 3 && w.points[0] == Point{0.0} && w.points[1] == Point{1.0} && w.points[2] == Point{2.0};
    const bool weights = w.weights.size() == 3 && w.weights[0] == 1.0 && w.weights[1] == -2.0 && w.weights[2] == 1.0;
    if (points && weights && std::abs(w.value - 8.0) < 1e-12) witness = true;
  }
  o.require(witness, "witness {0,1,2}, (1,-2,1), +8");
  const double secs = elapsed(start);
  o.detail << "|xi|^3 witness value 8: " << (witness ? "found" : "missing") << ", " << secs << " s";
  o.require(secs < 5.0, "runtime < 5 s");
}

FunctionGrid random_function(const GridSpec& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> c(-8.0, 8.0), a(-1.0, 1.0), w(0.3, 2.0);
  std::vector<std::array<double, 3>> terms(6);
  for (auto& tm : terms) tm = {c(rng), a(rng), w(rng)};
  return FunctionGrid::sample(grid, [terms](std::span<const double> x) {
    double v = 0.0;
    for (const auto& tm : terms) v += tm[1] * std::exp(-std::pow((x[0] - tm[0]) / tm[2], 2));
    return v;
  });
}

// 6: fundamental-solution items and contractions.
void fundamental(Outcome& o) {
  const GridSpec grid{1, 4096, 40.0};
  const FunctionGrid b = bump_function(grid);
  const struct {
    const SymbolFamily* fam;
    double tol;
    const char* name;
  } cases[] = {{&gauss, 1e-5, "gaussian"}, {&poisson, 1e-4, "poisson"}};
  for (const auto& c : cases) {
    const auto rep = fundamental_solution_check(*c.fam, 0.2, 0.5, 1.0, b, c.tol);
    o.detail << c.name << " " << rep.items.size() << " items " << (rep.pass() ? "pass" : "FAIL") << "; ";
    o.require(rep.pass(), std::string(c.name) + " itemized checks");
    for (std::uint64_t seed : {1, 2, 3}) {
      const FunctionGrid u = random_function(grid, seed);
      for (const FunctionGrid& v : {apply_H(*c.fam, 0.2, 1.0, u), apply_V(*c.fam, 0.2, 1.0, u), apply_S(*c.fam, 1.0, u)}) {
        o.require(v.sup_norm() <= u.sup_norm() * (1.0 + 1e-12), std::string(c.name) + " sup contraction");
        o.require(v.l2_norm() <= u.l2_norm() * (1.0 + 1e-12), std::string(c.name) + " L2 contraction");
      }
    }
  }
}

// 7: Chapman-Kolmogorov on all built-ins.
void chapman_kolmogorov(Outcome& o) {
  for (const auto* fam : {&gauss, &poisson, &coshlog}) {
    const auto rep = chapman_kolmogorov_check(*fam, 0.0, 0.5, 1.0, GridSpec{}, 1e-6);
    o.detail << to_string(fam->kind()) << " " << item(rep, "density_sup_error") << "; ";
    o.require(rep.pass(), to_string(fam->kind()) + " sup error < 1e-6");
  }
}

// 8: tail ratio of the frequency weights.
void tail_limit(Outcome& o) {
  for (double t : {1.0, 4.0, 9.0}) {
    const double v = tail_ratio(gauss, 1.0, t);
    o.detail << "t=" << t << " " << v << "; ";
    o.require(std::abs(v - std::erfc(std::sqrt(t))) < 1e-8, "erfc(sqrt t) at t=" + std::to_string(t));
  }
  o.require(std::abs(tail_ratio(gauss, 1.0, 1.0) - 0.1572992) < 1e-7, "value 0.1572992");
  o.require(std::abs(tail_ratio(gauss, 1.0, 4.0) - 0.0046777) < 1e-7, "value 0.0046777");
  o.require(std::abs(tail_ratio(gauss, 1.0, 9.0) - 2.209e-5) < 1e-8, "value 2.209e-5");
  for (const auto* fam : {&gauss, &poisson, &coshlog}) {
    double prev = INFINITY;
    bool decreasing = true;
    for (int k = 1; k <= 10; ++k) {
      const double v = tail_ratio(*fam, 1.0, 0.5 * k);
      decreasing = decreasing && v < prev;
      prev = v;
    }
    o.require(decreasing, to_string(fam->kind()) + " strictly decreasing");
  }
}

// 9: the mollifier S_t on a bump.
void mollifier(Outcome& o) {
  const GridSpec grid{1, 4096, 40.0};
  const FunctionGrid b = bump_function(grid);
  double prev = INFINITY;
  for (double t : {1.0, 0.1, 0.01}) {
    const double d = sup_distance(apply_S(gauss, t, b), b);
    o.detail << "t=" << t << " " << d << "; ";
    o.require(d < prev, "monotone decrease");
    prev = d;
  }
  // leading order for the heat flow e^{(t/4) Laplacian}: (t/4) |u''|_inf
  const auto& v = b.values();
  const double dx = grid.spacing();
  double upp = 0.0;
  for (std::size_t j = 1; j + 1 < grid.points; ++j)
    upp = std::max(upp, std::abs(v[j + 1].real() - 2.0 * v[j].real() + v[j - 1].real()) / (dx * dx));
  o.detail << "predicted (t/4)|u''| at t=0.01: " << 0.0025 * upp << "; ";
  o.require(prev < 1e-3, "below 1e-3 at t = 0.01");
}

// 10: coshlog special-function values.
void coshlog_values(Outcome& o) {
  const double a = coshlog_density(2.0, 0.0), b = coshlog_density(2.0, 2.0);
  o.detail << a << ", " << b << "; ";
  o.require(std::abs(a - 1.0 / pi) < 1e-10, "h=2, x=0 is 1/pi");
  o.require(std::abs(b - 1.0 / std::sinh(pi)) < 1e-10 && std::abs(b - 0.0865895) < 1e-7, "h=2, x=2 is 1/sinh(pi)");
  double worst = 0.0;
  for (double h : {0.25, 0.5, 1.0, 2.0, 3.5, 8.0})
    for (int k = 0; k <= 200; ++k) {
      const double x = 0.1 * k;
      worst = std::max(worst, std::abs(coshlog_delta_squared(h, x) - coshlog_delta_squared_exact(h, x)));
    }
  o.detail << "series vs log-gamma " << worst;
  o.require(worst < 1e-8, "series sweep < 1e-8");
}

// 11: Lewis adjoint-pair fixtures.
void lewis(Outcome& o) {
  for (const auto& f : lewis_fixtures()) {
    const double tol = f.self_adjoint ? 1e-6 : 1e-5;
    const auto rep = f.check(tol);
    for (const auto& i : rep.items) o.detail << f.name << "." << i.name << " " << i.value << "; ";
    o.require(rep.pass(), f.name + " within " + std::to_string(tol));
    if (f.name == "sinc2") o.require(item(rep, "support_leak") < 1e-6, "sinc2 transform vanishes for |xi| >= 2");
  }
}

// 12: Monte Carlo paths of the gaussian Y.
void simulation(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> times{0.0, 1.0};
  const std::size_t N = 100000;
  const auto paths = simulate_paths(gauss, times, N, 7, ProcessTag::Y);
  double cf = 0.0, m1 = 0.0, m2 = 0.0;
  for (const auto& p : paths) {
    const double x = p.positions[1][0];
    cf += std::cos(x);
    m1 += x;
    m2 += x * x;
  }
  cf /= N;
  m1 /= N;
  const double var = (m2 - N * m1 * m1) / (N - 1.0);
  const double e1 = std::exp(-1.0);
  const double cf_se = std::sqrt((1.0 + std::exp(-4.0)) / 2.0 - e1 * e1) / std::sqrt(static_cast<double>(N));
  const double var_se = std::sqrt(8.0 / N);  // N(0, 2): fourth central moment 12
  o.detail << "cf(1) " << cf << " (" << (cf - e1) / cf_se << " SE), var " << var << " (" << (var - 2.0) / var_se << " SE); ";
  o.require(std::abs(cf - e1) < 4.0 * cf_se, "cf within 4 SE of e^{-1}");
  o.require(std::abs(var - 2.0) < 4.0 * var_se, "variance within 4 SE of 2");

  // same seed, different worker count: identical bits
  const char* old = std::getenv("ADDKIT_THREADS");
  const std::string saved = old ? old : "";
  setenv("ADDKIT_THREADS", "1", 1);
  const auto again = simulate_paths(gauss, times, N, 7, ProcessTag::Y);
  if (old) setenv("ADDKIT_THREADS", saved.c_str(), 1); else unsetenv("ADDKIT_THREADS");
  bool same = again.size() == paths.size();
  for (std::size_t i = 0; same && i < N; ++i)
    same = std::memcmp(&paths[i].positions[1][0], &again[i].positions[1][0], sizeof(double)) == 0;
  o.require(same, "seed determinism byte-exact");
  const double secs = elapsed(start);
  o.detail << "deterministic " << (same ? "yes" : "no") << ", " << secs << " s";
  o.require(secs < 30.0, "runtime < 30 s");
}

// 13: metric axioms and doubling constants.
void geometry(Outcome& o) {
  for (const auto* fam : {&gauss, &poisson, &coshlog}) {
    const auto d = metric_axioms_check(metric_dQ(*fam, 0.0, 1.0), 100000, 42);
    const auto e = metric_axioms_check(metric_deltaQ(*fam, 1.0), 100000, 42);
    o.require(d.pass(), to_string(fam->kind()) + " d_Q axioms");
    o.require(e.pass(), to_string(fam->kind()) + " delta_Q axioms");
  }
  const double g = doubling_estimate(metric_dQ(gauss, 0.0, 1.0)).c0;
  const double p = doubling_estimate(metric_dQ(poisson, 0.0, 1.0)).c0;
  o.detail << "axioms on 1e5 triples; c0 gaussian " << g << ", poisson " << p;
  o.require(std::abs(g - 2.0) < 1e-6, "gaussian c0 = 2");
  o.require(std::abs(p - 4.0) < 1e-4, "poisson c0 = 4");
}

}  // namespace

int main() {
  set_warning_handler({});
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"gaussian closed forms", gaussian_master},
      {"dual formula for p_t", dual_p},
      {"dual formula for Phi_t", dual_phi},
      {"adjointness", adjointness},
      {"negative definiteness falsifier", falsifier},
      {"fundamental solution", fundamental},
      {"Chapman-Kolmogorov", chapman_kolmogorov},
      {"tail ratio limit", tail_limit},
      {"mollifier", mollifier},
      {"coshlog special functions", coshlog_values},
      {"adjoint-pair fixtures", lewis},
      {"simulation", simulation},
      {"metric geometry", geometry},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      criteria[k].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    if (!o.pass) ++failures;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
