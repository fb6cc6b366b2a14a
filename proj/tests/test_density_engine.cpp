#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "addkit/density_engine.hpp"
#include "addkit/diagnostics.hpp"
#include "addkit/error.hpp"
#include "addkit/quadrature.hpp"

using namespace addkit;
using doctest::Approx;

namespace {
constexpr double pi = std::numbers::pi;

double gauss_p(double t, double x) { return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * pi * t); }
double cauchy_p(double t, double x) { return t / (pi * (t * t + x * x)); }
}  // namespace

TEST_CASE("density_grid gaussian matches the heat kernel") {
  auto table = density_grid(SymbolFamily::gaussian(), 0.0, 1.0, GridSpec{1, 4096, 0.0});
  double err = 0.0;
  for (std::size_t j = 0; j < table.grid.points; ++j) {
    err = std::max(err, std::abs(table.values[j] - gauss_p(1.0, table.grid.coordinate(j))));
  }
  CHECK(err < 1e-8);
  CHECK(std::abs(table.total_mass - 1.0) < 1e-6);
}

TEST_CASE("density_grid peak values") {
  auto p = density_grid(SymbolFamily::poisson(), 0.0, 1.0);
  CHECK(p.origin_value() == Approx(1.0 / pi).epsilon(1e-4));  // periodization error ~ pi/(12 L^2)
  auto c = density_grid(SymbolFamily::coshlog(), 0.0, 2.0);
  CHECK(c.origin_value() == Approx(1.0 / pi).epsilon(1e-9));
}

TEST_CASE("density_grid invariants for built-ins") {
  for (const auto& f : {SymbolFamily::gaussian(), SymbolFamily::poisson(), SymbolFamily::coshlog()}) {
    for (double t : {0.3, 1.0, 2.5}) {
      auto table = density_grid(f, 0.0, t);
      CAPTURE(f.description());
      CHECK(std::abs(table.total_mass - 1.0) <= 1e-6);
      const double peak = table.origin_value();
      const std::size_t n = table.grid.points;
      double asym = 0.0;
      bool dominated = true;
      for (std::size_t j = 1; j < n; ++j) {
        CHECK(table.values[j] >= 0.0);
        asym = std::max(asym, std::abs(table.values[j] - table.values[n - j]));
        if (table.values[j] > peak) dominated = false;
      }
      CHECK(asym < 1e-10);
      CHECK(dominated);
    }
  }
}

TEST_CASE("density_grid errors") {
  auto g = SymbolFamily::gaussian();
  CHECK_THROWS_AS(density_grid(g, 1.0, 0.5), Error);
  CHECK_THROWS_AS(density_grid(g, 1.0, 1.0), Error);
  try {
    // cutoff pi*64/(2*200) ~ 0.5: e^{-Q} is nowhere near tail_eps there
    density_grid(g, 0.0, 1.0, GridSpec{1, 64, 200.0});
    FAIL("expected insufficient_decay");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::insufficient_decay);
  }
  CHECK_THROWS_AS(density_grid(g, 0.0, 1.0, GridSpec{2, 64, 0.0}), Error);
}

TEST_CASE("density_grid in 2D factorizes for direct sums") {
  auto f = direct_sum(SymbolFamily::gaussian(), SymbolFamily::gaussian(1, TimeProfile::power(2.0)));
  auto table = density_grid(f, 0.0, 1.5, GridSpec{2, 256, 0.0});
  double err = 0.0;
  const double h2 = 2.25;
  for (std::size_t a = 0; a < 256; a += 3) {
    for (std::size_t b = 0; b < 256; b += 5) {
      const double x = table.grid.coordinate(a), y = table.grid.coordinate(b);
      err = std::max(err, std::abs(table.values[a * 256 + b] - gauss_p(1.5, x) * gauss_p(h2, y)));
    }
  }
  CHECK(err < 1e-8);
  const double pt[2] = {0.7, -1.1};
  CHECK(density_point(f, 0.0, 1.5, pt) == Approx(gauss_p(1.5, 0.7) * gauss_p(h2, -1.1)).epsilon(1e-10));
  CHECK(table.value(pt) == Approx(gauss_p(1.5, 0.7) * gauss_p(h2, -1.1)).epsilon(1e-4));
}

TEST_CASE("density_point examples") {
  auto g = SymbolFamily::gaussian();
  CHECK(density_point(g, 0.0, 1.0, 1.0) == Approx(0.2196956).epsilon(1e-7));
  CHECK(density_point(g, 0.0, 1.0, 0.0) == Approx(0.2820948).epsilon(1e-7));
  CHECK(density_point(g, 0.0, 1.0, 1.0) == Approx(gauss_p(1.0, 1.0)).epsilon(1e-10));
  CHECK(density_point(g, 0.0, 1.0, 30.0) < 1e-14);
  auto p = SymbolFamily::poisson();
  for (double x : {0.0, 0.3, 1.0, 5.0, 50.0}) {
    CHECK(density_point(p, 0.0, 1.0, x) == Approx(cauchy_p(1.0, x)).epsilon(1e-8));
  }
  auto c = SymbolFamily::coshlog();
  CHECK(density_point(c, 0.0, 2.0, 2.0) == Approx(1.0 / std::sinh(pi)).epsilon(1e-9));
}

TEST_CASE("density_point 2D radial Hankel transform") {
  auto p2 = SymbolFamily::poisson(2);
  for (double r : {0.0, 0.5, 2.0, 7.0}) {
    const double x[2] = {r * 0.6, r * 0.8};
    const double ref = 1.0 / (2.0 * pi * std::pow(1.0 + r * r, 1.5));
    CHECK(density_point(p2, 0.0, 1.0, x) == Approx(ref).epsilon(1e-8));
  }
  auto g2 = SymbolFamily::gaussian(2);
  const double x[2] = {1.0, -0.5};
  CHECK(density_point(g2, 0.0, 2.0, x) == Approx(gauss_p(2.0, 1.0) * gauss_p(2.0, -0.5)).epsilon(1e-9));
}

TEST_CASE("sigma examples") {
  auto g = SymbolFamily::gaussian();
  CHECK(sigma(g, 1.0, 2.0) == Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(sigma(g, 1.0, 2.0, SigmaSource::quadrature) == Approx(std::exp(-1.0)).epsilon(1e-9));
  auto p = SymbolFamily::poisson();
  CHECK(sigma(p, 1.0, 1.0) == Approx(0.5).epsilon(1e-12));
  CHECK(sigma(p, 1.0, 1.0, SigmaSource::quadrature) == Approx(0.5).epsilon(1e-9));
  for (const auto& f : {g, p, SymbolFamily::coshlog()}) {
    CHECK(sigma(f, 0.7, 0.0) == 1.0);
    CHECK(sigma(f, 0.7, 0.0, SigmaSource::quadrature) == 1.0);
  }
  auto custom = SymbolFamily::custom_product(1, TimeProfile::linear(), "x^2");
  CHECK_FALSE(has_closed_form_sigma(custom));
  CHECK(sigma(custom, 1.0, 2.0) == Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK_THROWS_AS(sigma(custom, 1.0, 2.0, SigmaSource::closed_form), Error);
  CHECK_THROWS_AS(sigma(g, 0.0, 1.0), Error);
}

TEST_CASE("sigma closed forms agree with quadrature") {
  auto c = SymbolFamily::coshlog(TimeProfile::power(2.0));
  auto p2 = SymbolFamily::poisson(1, TimeProfile::polynomial({0.0, 1.0, 0.5}));
  for (double t : {0.5, 1.0, 3.0}) {
    for (double x : {0.2, 1.0, 3.0}) {
      CHECK(log_sigma(c, t, x) == Approx(log_sigma(c, t, x, SigmaSource::quadrature)).epsilon(1e-8));
      CHECK(log_sigma(p2, t, x) == Approx(log_sigma(p2, t, x, SigmaSource::quadrature)).epsilon(1e-8));
    }
  }
}

TEST_CASE("adjoint_exponent examples and consistency") {
  auto g = SymbolFamily::gaussian();
  CHECK(adjoint_exponent(g, 1.0, 2.0) == Approx(1.0).epsilon(1e-12));
  CHECK(adjoint_exponent(g, 3.0, 2.0, AdjointMode::finite_difference) == Approx(1.0).epsilon(1e-8));
  auto p = SymbolFamily::poisson();
  CHECK(adjoint_exponent(p, 1.0, 1.0) == Approx(1.0).epsilon(1e-12));
  for (const auto& f : {g, p, SymbolFamily::coshlog(), SymbolFamily::coshlog(TimeProfile::power(2.0))}) {
    for (double t : {0.3, 1.0, 2.0}) {
      CHECK(adjoint_exponent(f, t, 0.0) == 0.0);
      for (double x : {0.1, 0.8, 2.5}) {
        const double cf = adjoint_exponent(f, t, x, AdjointMode::closed_form);
        const double fd = adjoint_exponent(f, t, x, AdjointMode::finite_difference);
        CHECK(fd == Approx(cf).epsilon(1e-6));
        CHECK(adjoint_exponent(f, t, -x) == cf);
      }
    }
  }
  CHECK_THROWS_AS(adjoint_exponent(g, 5e-5, 1.0, AdjointMode::finite_difference), Error);
  try {
    adjoint_exponent(g, 1.0, 100.0, AdjointMode::finite_difference);
    FAIL("expected step_underflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::step_underflow);
  }
}

TEST_CASE("adjoint_density and rho_density examples") {
  auto g = SymbolFamily::gaussian();
  CHECK(adjoint_density(g, 1.0, 0.0) == Approx(0.5641896).epsilon(1e-7));
  CHECK(adjoint_density(g, 1.0, 1.0) == Approx(0.2075537).epsilon(1e-7));
  auto p = SymbolFamily::poisson();
  CHECK(adjoint_density(p, 1.0, 0.0) == Approx(0.5).epsilon(1e-10));
  for (const auto& f : {g, p, SymbolFamily::coshlog()}) {
    for (double t : {0.5, 2.0}) {
      for (double xi : {0.0, 0.4, 1.7}) {
        CHECK(std::abs(rho_density(f, 1.0 / t, xi) - adjoint_density(f, t, xi)) < 1e-12);
      }
      // probability normalization
      auto phi = adjoint_density_function(f, t);
      const double mass =
          2.0 * quad::integrate_to_infinity([&](double x) { return phi(std::span<const double>(&x, 1)); }, 0.0).value;
      CHECK(mass == Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("adjointness_check") {
  for (double t : {0.5, 1.0, 2.0}) {
    CHECK(adjointness_check(SymbolFamily::gaussian(), t, {}, 1e-8).pass());
    CHECK(adjointness_check(SymbolFamily::poisson(), t, {}, 1e-6).pass());
    CHECK(adjointness_check(SymbolFamily::coshlog(), t, {}, 1e-6).pass());
  }
}

TEST_CASE("tail_ratio") {
  auto g = SymbolFamily::gaussian();
  CHECK(std::abs(tail_ratio(g, 1.0, 1.0) - std::erfc(1.0)) < 1e-12);
  CHECK(std::abs(tail_ratio(g, 1.0, 4.0) - 0.0046777349810472658) < 1e-12);
  CHECK(std::abs(tail_ratio(g, 1.0, 9.0) - std::erfc(3.0)) < 1e-12);
  CHECK(tail_ratio(g, 1e-9, 1.0) > 1.0 - 1e-8);
  for (const auto& f : {g, SymbolFamily::poisson(), SymbolFamily::coshlog(), SymbolFamily::poisson(2),
                        direct_sum(SymbolFamily::gaussian(), SymbolFamily::poisson())}) {
    double prev = 1.0;
    for (double t = 0.5; t < 600.0; t *= 2.0) {
      const double r = tail_ratio(f, 1.0, t);
      CHECK(r < prev);
      prev = r;
    }
  }
  // poisson: int_delta^inf e^{-t xi} / int_0^inf = e^{-t delta}
  CHECK(tail_ratio(SymbolFamily::poisson(), 0.5, 3.0) == Approx(std::exp(-1.5)).epsilon(1e-12));
}

TEST_CASE("time-shift consistency for linear profiles") {
  auto g = SymbolFamily::gaussian();
  GridSpec grid{1, 2048, 40.0};
  auto a = density_grid(g, 0.5, 1.5, grid);
  auto b = density_grid(g, 0.0, 1.0, grid);
  double err = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) err = std::max(err, std::abs(a.values[j] - b.values[j]));
  CHECK(err < 1e-14);
}

TEST_CASE("self-adjoint gaussian fixed point") {
  // Q(t, xi) = t xi^2 / 2: Phi_1 equals p_1, the standard normal density
  auto f = SymbolFamily::gaussian(1, TimeProfile::linear(0.5));
  auto table = density_grid(f, 0.0, 1.0);
  auto phi = adjoint_density_function(f, 1.0);
  double err = 0.0;
  for (std::size_t j = 0; j < table.values.size(); j += 7) {
    const double x = table.grid.coordinate(j);
    err = std::max(err, std::abs(phi(std::span<const double>(&x, 1)) - table.values[j]));
  }
  CHECK(err < 1e-10);
}

TEST_CASE("table interpolation") {
  auto table = density_grid(SymbolFamily::gaussian(), 0.0, 1.0, GridSpec{1, 1024, 20.0});
  for (double x : {0.123, -1.7, 3.31}) CHECK(table.value(x) == Approx(gauss_p(1.0, x)).epsilon(1e-5));
  CHECK(table.value(1e6) == 0.0);
}
