#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "addkit/error.hpp"
#include "addkit/expression.hpp"
#include "addkit/parallel.hpp"
#include "addkit/quadrature.hpp"
#include "addkit/special_functions.hpp"
#include "addkit/spectral.hpp"

using namespace addkit;
using doctest::Approx;

TEST_CASE("gauss-kronrod integrates polynomials and smooth functions") {
  // GK15 is exact through degree 29 on a single panel.
  auto r = quad::integrate([](double x) { return std::pow(x, 20); }, 0.0, 1.0);
  CHECK(r.value == Approx(1.0 / 21.0).epsilon(1e-15));
  r = quad::integrate([](double x) { return std::exp(-x * x); }, -10.0, 10.0);
  CHECK(r.value == Approx(std::sqrt(std::numbers::pi)).epsilon(1e-14));
  // Endpoint singularity forces adaptive refinement.
  r = quad::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, {0.0, 1e-10});
  CHECK(r.value == Approx(2.0).epsilon(1e-8));
  CHECK(r.intervals > 1);
}

TEST_CASE("half-line and cosine quadrature") {
  auto r = quad::integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0);
  CHECK(r.value == Approx(1.0).epsilon(1e-13));
  // int_0^inf e^{-x} cos(3x) dx = 1/10
  auto c = quad::integrate_cosine([](double x) { return std::exp(-x); }, 3.0, 45.0, 1e-14);
  CHECK(std::abs(c.value - 0.1) < 1e-14);
  // large frequency: 1/(1 + w^2)
  c = quad::integrate_cosine([](double x) { return std::exp(-x); }, 500.0, 45.0, 1e-15);
  CHECK(std::abs(c.value - 1.0 / (1.0 + 250000.0)) < 1e-13);
}

TEST_CASE("quadrature errors") {
  CHECK_THROWS_AS(quad::integrate([](double) { return NAN; }, 0.0, 1.0), Error);
  const double bad[2] = {1.0, 0.0};
  CHECK_THROWS_AS(quad::integrate([](double x) { return x; }, std::span<const double>(bad, 2)), Error);
}

TEST_CASE("expression parser") {
  auto e = Expression::parse("abs(x)^3");
  CHECK(e(-2.0) == Approx(8.0));
  CHECK(Expression::parse("2^3^2")(0.0) == Approx(512.0));
  CHECK(Expression::parse("-x^2")(3.0) == Approx(-9.0));
  CHECK(Expression::parse("(1+t)*log(cosh(x))")(1.0, 1.0) == Approx(2.0 * std::log(std::cosh(1.0))));
  CHECK(Expression::parse("lncosh(x)")(800.0) == Approx(800.0 - std::log(2.0)));
  CHECK(Expression::parse("pi*e")(0.0) == Approx(std::numbers::pi * std::numbers::e));
  CHECK(Expression::parse("x*t").uses_t());
  CHECK_FALSE(Expression::parse("sqrt(x)").uses_t());
  CHECK_THROWS_AS(Expression::parse("x +"), Error);
  CHECK_THROWS_AS(Expression::parse("foo(x)"), Error);
  CHECK_THROWS_AS(Expression::parse("(x"), Error);
  CHECK(log_cosh(-3.0) == Approx(std::log(std::cosh(3.0))).epsilon(1e-15));
}

TEST_CASE("complex log-gamma and digamma against reference values") {
  struct Ref {
    std::complex<double> z;
    double lg;
    std::complex<double> psi;
  };
  const std::vector<Ref> refs = {
      {{0.5, 0.5}, 0.11238724280962311252, {-0.86810736264547731395, 1.4406595199775145927}},
      {{1.0, 1.0}, -0.65092319930185633889, {0.094650320622476977272, 1.0766740474685811741}},
      {{3.7, -2.2}, 0.72644675162442647431, {1.3576969420395713574, -0.5997294051758555323}},
      {{0.1, 20.0}, -31.695265907346562615, {2.995828146364098245, 1.5907978277491361767}},
      {{-2.3, 0.7}, -1.2664294851930893798, {1.1372174736084745027, 2.8742470533736552916}},
      {{1.0, 200.0}, -310.59116814250063277, {5.2983194498865784061, 1.5682963267948966192}},
  };
  for (const auto& r : refs) {
    CAPTURE(r.z);
    CHECK(std::abs(log_abs_gamma(r.z) - r.lg) < 1e-12 * std::max(1.0, std::abs(r.lg)));
    CHECK(std::abs(digamma(r.z) - r.psi) < 1e-12 * std::max(1.0, std::abs(r.psi)));
  }
  for (double x : {0.5, 1.0, 2.5, 7.0, 30.0}) {
    CHECK(log_abs_gamma({x, 0.0}) == Approx(std::lgamma(x)).epsilon(1e-13));
  }
}

TEST_CASE("grid geometry") {
  GridSpec g{1, 1024, 10.0};
  CHECK(g.spacing() * g.frequency_spacing() * 1024 == Approx(2.0 * std::numbers::pi));
  CHECK(g.coordinate(512) == 0.0);
  CHECK(g.frequency(512) == Approx(0.0));
  CHECK_THROWS_AS((GridSpec{1, 1000, 1.0}.validate()), Error);
  CHECK_THROWS_AS((GridSpec{3, 1024, 1.0}.validate()), Error);
  CHECK_THROWS_AS((GridSpec{1, 32, 1.0}.validate()), Error);
}

TEST_CASE("spectral transform matches the continuous Fourier pair") {
  // FT of e^{-x^2/2} is sqrt(2 pi) e^{-xi^2/2}
  GridSpec g{1, 1024, 20.0};
  SpectralTransform ft(g);
  auto u = ft.sample_space([](std::span<const double> x) { return std::exp(-0.5 * x[0] * x[0]); });
  auto spec = ft.forward(std::span<const double>(u));
  double err = 0.0;
  for (std::size_t k = 0; k < g.points; ++k) {
    const double xi = g.frequency(k);
    err = std::max(err, std::abs(spec[k] - std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * xi * xi)));
  }
  CHECK(err < 1e-12);
  auto back = ft.inverse_real(spec);
  for (std::size_t j = 0; j < g.points; ++j) CHECK(back[j] == Approx(u[j]).epsilon(1e-12));
}

TEST_CASE("2D transform factorizes") {
  GridSpec g{2, 128, 12.0};
  SpectralTransform ft(g);
  auto u = ft.sample_space([](std::span<const double> x) { return std::exp(-0.5 * (x[0] * x[0] + 2.0 * x[1] * x[1])); });
  auto spec = ft.forward(std::span<const double>(u));
  double err = 0.0;
  for (std::size_t a = 0; a < g.points; ++a) {
    for (std::size_t b = 0; b < g.points; ++b) {
      const double p = g.frequency(a), q = g.frequency(b);
      const double ref = 2.0 * std::numbers::pi / std::sqrt(2.0) * std::exp(-0.5 * p * p - 0.25 * q * q);
      err = std::max(err, std::abs(spec[a * g.points + b] - ref));
    }
  }
  CHECK(err < 1e-10);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS(parallel_for(10, [](std::size_t i) {
    if (i == 3) throw Error(ErrorCode::evaluation, "boom");
  }));
}

TEST_CASE("log-gamma far from the real axis left of 1/2") {
  CHECK(log_abs_gamma({0.25, 500.0}) == Approx(-786.03287685759915).epsilon(1e-13));
  CHECK(log_abs_gamma({-1.5, -80.0}) == Approx(-133.50901616096155).epsilon(1e-13));
  CHECK(log_abs_gamma({0.1, 30.0}) == Approx(-47.565423555699169).epsilon(1e-13));
}
