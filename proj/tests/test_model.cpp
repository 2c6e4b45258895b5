// Mesh, measure, and reduction oracles.
//
// The frozen numbers below are computed independently of the library:
// closed-form cell measures, the midpoint-rule error constant for quadratics,
// the discrete Neumann Laplacian eigenvalue 4/dx^2 * sin^2(pi/(2n)), and a
// compensated-summation case whose naive left-to-right sum is provably wrong.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "pmfront/model.hpp"

using namespace pmfront;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("interval grid: spacing, centers, weights, measure") {
  const Grid g = make_grid(1, false, 2.0, 8);
  CHECK(g.dx == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.centers.size() == 8);
  CHECK(g.weights.size() == 8);
  CHECK(g.face_areas.size() == 9);
  CHECK(g.centers.front() == doctest::Approx(-1.75).epsilon(1e-15));
  CHECK(g.centers.back() == doctest::Approx(1.75).epsilon(1e-15));
  for (double w : g.weights) CHECK(w == doctest::Approx(0.5).epsilon(1e-15));
  for (double a : g.face_areas) CHECK(a == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.measure() == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("radial grids: axis face, disk and ball measures") {
  const Grid g2 = make_grid(2, true, 1.0, 10);
  CHECK(g2.dx == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g2.centers.front() == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(g2.face_areas.front() == 0.0); // symmetry axis carries no flux
  CHECK(g2.measure() == doctest::Approx(kPi).epsilon(1e-13));

  const Grid g3 = make_grid(3, true, 1.0, 16);
  CHECK(g3.face_areas.front() == 0.0);
  CHECK(g3.measure() == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-13));
  // Cell weights sum the same integral the faces bound: every weight positive.
  for (double w : g3.weights) CHECK(w > 0.0);
}

TEST_CASE("grid preconditions") {
  CHECK_THROWS_AS(make_grid(3, false, 1.0, 64), ConfigError); // needs radial
  CHECK_THROWS_AS(make_grid(2, false, 1.0, 64), ConfigError);
  CHECK_THROWS_AS(make_grid(1, false, 1.0, 4), ConfigError);  // too few cells
  CHECK_THROWS_AS(make_grid(1, false, -1.0, 64), ConfigError);
  CHECK_THROWS_AS(make_grid(4, true, 1.0, 64), ConfigError);
}

TEST_CASE("model parameter validation") {
  ModelParams p;
  CHECK_NOTHROW(validate(p));
  CHECK(p.d() == doctest::Approx(1.0).epsilon(1e-15)); // m = 2
  p.m = 3.0;
  CHECK(p.d() == doctest::Approx(0.5).epsilon(1e-15));
  p.m = 1.0; // degenerate regime requires m > 1
  CHECK_THROWS_AS(validate(p), ConfigError);
  p.m = 2.0;
  p.chi = -0.5;
  CHECK_THROWS_AS(validate(p), ConfigError);
  p.chi = 0.0;
  p.dim = 2; // dim > 1 must be radial
  CHECK_THROWS_AS(validate(p), ConfigError);
  p.radial = true;
  CHECK_NOTHROW(validate(p));
}

TEST_CASE("integrate: midpoint rule is exact up to its quadratic correction") {
  const Grid g = make_grid(1, false, 1.0, 100);
  std::vector<double> f(100);
  for (int i = 0; i < 100; ++i) f[i] = 1.0 - g.centers[i] * g.centers[i];
  // For a quadratic integrand the midpoint rule error is exactly
  // -f'' dx^2/24 per unit length: integral 4/3, f'' = -2, length 2.
  const double expected = 4.0 / 3.0 + g.dx * g.dx / 6.0; // = 1.3334
  CHECK(integrate(f, g) == doctest::Approx(1.3334).epsilon(1e-13));
  CHECK(integrate(f, g) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("integrate: compensated summation survives catastrophic cancellation") {
  const Grid g = make_grid(1, false, 4.0, 8); // unit weights
  const std::vector<double> f = {1e16, 3.0, -1e16, 2.0, 1.0, 0.0, 0.0, 0.0};
  // Naive left-to-right double summation yields 7 here (1e16 + 3 rounds up by
  // one ulp = 4); the compensated sum must return the exact 6.
  CHECK(integrate(f, g) == 6.0);
}

TEST_CASE("integrate: linearity") {
  const Grid g = make_grid(1, false, 1.5, 64);
  std::vector<double> f(64), h(64);
  for (int i = 0; i < 64; ++i) {
    f[i] = std::sin(3.0 * g.centers[i]) + 1.5;
    h[i] = std::cos(2.0 * g.centers[i]);
  }
  std::vector<double> combo(64);
  for (int i = 0; i < 64; ++i) combo[i] = 2.0 * f[i] - 0.5 * h[i];
  const double lhs = integrate(combo, g);
  const double rhs = 2.0 * integrate(f, g) - 0.5 * integrate(h, g);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("grad_max: exact on linear fields") {
  const Grid g = make_grid(1, false, 1.0, 32);
  std::vector<double> f(32);
  for (int i = 0; i < 32; ++i) f[i] = 3.0 * g.centers[i] + 1.0;
  CHECK(grad_max(f, g) == doctest::Approx(3.0).epsilon(1e-13));
  std::vector<double> flat(32, 7.0);
  CHECK(grad_max(flat, g) == 0.0);
}

TEST_CASE("lap_max: discrete Neumann eigenvector has the closed-form eigenvalue") {
  // f_i = cos(pi (i + 1/2) / n) is an exact eigenvector of the zero-flux
  // flux-form Laplacian on a uniform interval grid, with eigenvalue
  // -4/dx^2 sin^2(pi / (2n)).  The sup of |lap f| over cells is the
  // eigenvalue times max |f_i| = cos(pi/(2n)) (centers exclude the ends):
  // for n = 16 on (-1, 1) that is 2.4594841... * cos(pi/32) = 2.4476410...
  const int n = 16;
  const Grid g = make_grid(1, false, 1.0, n);
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = std::cos(kPi * (i + 0.5) / n);
  CHECK(lap_max(f, g) == doctest::Approx(2.447641020159234).epsilon(1e-12));
}

TEST_CASE("state construction guards") {
  const Grid g = make_grid(1, false, 1.0, 8);
  std::vector<double> ok(8, 1.0);
  CHECK_NOTHROW(make_state(g, ok, ok));
  std::vector<double> short_u(7, 1.0);
  CHECK_THROWS_AS(make_state(g, short_u, ok), ConfigError);
  std::vector<double> neg(8, 1.0);
  neg[3] = -1e-9;
  CHECK_THROWS_AS(make_state(g, neg, ok), ConfigError);
  std::vector<double> bad(8, 1.0);
  bad[0] = std::numeric_limits<double>::quiet_NaN();
  // Non-finite data is a runtime-numerics failure, not a config mistake.
  CHECK_THROWS_AS(make_state(g, ok, bad), NumericsError);
  const State s = make_state(g, ok, ok, 2.5);
  CHECK(s.t == 2.5);
}

TEST_CASE("field reductions") {
  const std::vector<double> f = {0.25, 3.0, 0.5, 1.0};
  CHECK(linf(f) == 3.0);
  CHECK(min_value(f) == 0.25);
}
