#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"

#include "addkit/error.hpp"
#include "addkit/nd_validator.hpp"

using namespace addkit;
using doctest::Approx;
using cvec = std::vector<std::complex<double>>;

namespace {
constexpr double pi = std::numbers::pi;

PointSet line(std::initializer_list<double> xs) {
  PointSet ps;
  for (double x : xs) ps.points.push_back({x});
  return ps;
}

double sq(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

FieldFunction cube = [](std::span<const double> x) { return std::pow(std::sqrt(sq(x)), 3); };
FieldFunction square = [](std::span<const double> x) { return sq(x); };
FieldFunction log_cauchy = [](std::span<const double> x) { return std::log1p(sq(x)); };
}  // namespace

TEST_CASE("pd_min_eigenvalue examples") {
  CHECK(pd_min_eigenvalue([](std::span<const double> x) { return std::exp(-sq(x)); }, line({0, 1, 2})) > 0.0);
  auto ones = [](std::span<const double>) { return 1.0; };
  CHECK(std::abs(pd_min_eigenvalue(ones, line({0, 1, 2, 3.5, -1}))) < 1e-14);
  CHECK(std::abs(pd_min_eigenvalue([](std::span<const double> x) { return std::cos(x[0]); }, line({0, pi}))) < 1e-14);
  CHECK_THROWS_AS(pd_min_eigenvalue([](std::span<const double> x) { return 1.0 / x[0]; }, line({0, 1})), Error);
  CHECK_THROWS_AS(pd_min_eigenvalue(ones, line({0, 1, 1})), Error);
}

TEST_CASE("pd_min_eigenvalue is translation invariant") {
  auto f = [](std::span<const double> x) { return std::exp(-std::sqrt(sq(x))); };
  auto ps = random_point_set(2, 20, 3.0, 9);
  auto shifted = ps;
  for (auto& p : shifted.points) {
    p[0] += 17.25;
    p[1] -= 4.5;
  }
  CHECK(pd_min_eigenvalue(f, ps) == Approx(pd_min_eigenvalue(f, shifted)).epsilon(1e-10));
}

TEST_CASE("constrained_nd_form examples") {
  const cvec c{1.0, -2.0, 1.0};
  CHECK(std::abs(constrained_nd_form(square, line({0, 1, 2}), c)) < 1e-15);
  CHECK(constrained_nd_form(cube, line({0, 1, 2}), c) == Approx(8.0));
  CHECK(constrained_nd_form([](std::span<const double>) { return 0.0; }, line({0, 3, 5}), cvec{{1, 1}, {-2, 0}, {1, -1}}) == 0.0);
  CHECK_THROWS_AS(constrained_nd_form(square, line({0, 1, 2}), cvec{1.0, -2.0, 1.5}), Error);
  try {
    constrained_nd_form(square, line({0, 1, 2}), cvec{1.0, 1.0, 1.0});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::weight_sum);
  }
}

TEST_CASE("is_negative_definite examples") {
  auto q = is_negative_definite(square, 1);
  CHECK(q.pass);
  CHECK(q.verdict() == "no violation found");
  CHECK(q.scales.size() == 8);
  CHECK(q.scales.front().scale == Approx(1e-3));
  CHECK(q.scales.back().scale == Approx(1e3));

  auto c = is_negative_definite(cube, 1);
  CHECK_FALSE(c.pass);
  CHECK(c.verdict() == "violation found");
  REQUIRE_FALSE(c.witnesses.empty());
  const auto& w = c.witnesses.front();
  CHECK(w.points == std::vector<Point>{{0.0}, {1.0}, {2.0}});
  CHECK(w.weights == cvec{1.0, -2.0, 1.0});
  CHECK(w.value == Approx(8.0));

  CHECK(is_negative_definite(log_cauchy, 1).pass);
  CHECK(is_negative_definite(square, 2).pass);
  CHECK(is_negative_definite(log_cauchy, 2).pass);
  CHECK_FALSE(is_negative_definite(cube, 2).pass);
}

TEST_CASE("constrained forms of log(1 + x^2) on random witnesses") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::normal_distribution<double> g;
  double worst = -1.0;
  for (int k = 0; k < 10000; ++k) {
    PointSet ps = line({0.0, u(rng), u(rng), u(rng)});
    cvec c(4);
    std::complex<double> mean = 0.0;
    for (auto& ci : c) mean += (ci = {g(rng), g(rng)});
    for (auto& ci : c) ci -= mean / 4.0;
    worst = std::max(worst, constrained_nd_form(log_cauchy, ps, c));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("cone and scaling closure") {
  auto abs1 = [](std::span<const double> x) { return std::sqrt(sq(x)); };
  auto combo = [&](std::span<const double> x) { return 0.3 * square(x) + 2.5 * log_cauchy(x) + abs1(x); };
  CHECK(is_negative_definite(abs1, 1).pass);
  CHECK(is_negative_definite(combo, 1).pass);
  for (double c : {0.5, 2.0}) {
    auto scaled = [&](std::span<const double> x) {
      std::vector<double> y(x.begin(), x.end());
      for (auto& v : y) v *= c;
      return log_cauchy(y);
    };
    CHECK(is_negative_definite(scaled, 1).pass);
  }
}

TEST_CASE("Basic Assumption I for built-ins") {
  const double ts[] = {0.25, 1.0, 4.0};
  for (const auto& fam : {SymbolFamily::gaussian(1, TimeProfile::linear()), SymbolFamily::poisson(1, TimeProfile::linear()),
                          SymbolFamily::coshlog(TimeProfile::linear()), SymbolFamily::gaussian(2, TimeProfile::power(2.0)),
                          SymbolFamily::poisson(2, TimeProfile::linear())}) {
    for (const auto& rep : validate_basic_assumption_I(fam, ts)) {
      CHECK_MESSAGE(rep.pass, fam.description(), " t=", rep.t);
      REQUIRE(rep.extra.size() == 2);
    }
  }
  // A(t, xi) = 2 t xi^2 / (1 + t^2 xi^2) for the Cauchy family with h = t
  auto p = SymbolFamily::poisson(1, TimeProfile::linear());
  for (double t : {0.5, 2.0}) {
    for (double xi : {0.3, 1.0, 4.0}) CHECK(adjoint_exponent(p, t, xi) == Approx(2 * t * xi * xi / (1 + t * t * xi * xi)).epsilon(1e-12));
  }
  auto j = validate_basic_assumption_I(p, std::vector<double>{1.0}).front().to_json();
  CHECK(j["verdict"] == "no violation found");
  CHECK(j["scales"].size() == 8);
}

TEST_CASE("density-engine errors propagate") {
  // e^{-|xi|^3} is not positive definite, so its density changes sign and sigma has no logarithm
  auto fam = SymbolFamily::custom_product(1, TimeProfile::linear(), "abs(x)^3");
  CHECK_THROWS_AS(validate_basic_assumption_I(fam, std::vector<double>{1.0}), Error);
}
