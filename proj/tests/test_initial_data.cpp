// Initial-field constructors: sampled power bumps, the aggregating
// attractant well, the aggregation-strength inequality, and the source
// solution seed.
//
// Frozen oracles: exact bump values at cell centers that are representable
// in binary (so equality is exact), the closed-form bump mass
// K0 * 4/3 * R0^3 for the unit-exponent shape, the automatic center floor
// mu (R0 + 2 delta)^2 / 2, and the strength threshold
// (4m/(m-1)) K0^{m-1} max{1, R0^{2((m-1)d0 - 1)}}.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "pmfront/initial_data.hpp"
#include "pmfront/model.hpp"

using namespace pmfront;

TEST_CASE("bump samples the power profile exactly at cell centers") {
  // hl = 2, n = 8 puts centers at +-0.25, +-0.75, ...; (R0^2 - x^2) at
  // x = 0.25 is 0.9375, whose square times K0 = 2 is exactly 1.7578125.
  const Grid g = make_grid(1, false, 2.0, 8);
  ModelParams p;
  p.m = 1.5; // d = 2, so d0 = 2 is the unit-exponent shape
  BumpSpec spec;
  spec.K0 = 2.0;
  spec.R0 = 1.0;
  spec.d0 = 2.0;
  spec.delta = 0.25;
  const std::vector<double> u0 = bump_u0(g, spec, p);
  CHECK(u0[4] == 1.7578125);            // center +0.25
  CHECK(u0[3] == 1.7578125);            // center -0.25 (even profile)
  CHECK(u0[5] == 2.0 * 0.4375 * 0.4375); // center +0.75: (1 - 0.5625)^2
  CHECK(u0[6] == 0.0);                  // center +1.25: outside support
  CHECK(u0[7] == 0.0);
}

TEST_CASE("bump mass approaches the closed-form integral") {
  // For d0 = 1, m = 2: integral of K0 (R0^2 - x^2)_+ is K0 * 4/3 * R0^3.
  const Grid g = make_grid(1, false, 1.0, 400);
  ModelParams p;
  BumpSpec spec;
  spec.K0 = 1.0;
  spec.R0 = 0.5;
  spec.d0 = 1.0;
  spec.delta = 0.1;
  const std::vector<double> u0 = bump_u0(g, spec, p);
  const double mass = integrate(u0, g);
  CHECK(mass == doctest::Approx(1.0 / 6.0).epsilon(2e-4));
  for (double u : u0) CHECK(u >= 0.0);
}

TEST_CASE("bump validation: shape exponent and geometry") {
  const Grid g = make_grid(1, false, 1.0, 100);
  ModelParams p; // m = 2, d = 1
  BumpSpec spec;
  spec.R0 = 0.5;
  spec.delta = 0.1;
  CHECK_NOTHROW(validate(spec, p, g));
  spec.d0 = 0.5; // below 1/(m-1): profile too flat at the edge
  CHECK_THROWS_AS(validate(spec, p, g), ConfigError);
  spec.d0 = 1.0;
  spec.R0 = 0.9; // blend region R0 + 2 delta = 1.1 leaves the domain
  CHECK_THROWS_AS(validate(spec, p, g), ConfigError);
  spec.R0 = 0.5;
  spec.delta = 0.6; // blend width above R0
  CHECK_THROWS_AS(validate(spec, p, g), ConfigError);
}

TEST_CASE("aggregating well: quadratic core identity and automatic floor") {
  const Grid g = make_grid(1, false, 1.6, 800);
  BumpSpec spec;
  spec.R0 = 0.5;
  spec.d0 = 1.0;
  spec.mu = 6.0;
  spec.delta = 0.3;
  // Automatic floor: mu (R0 + 2 delta)^2 / 2 = 6 * 1.21 / 2 = 3.63.
  CHECK(spec.resolved_v_floor() == doctest::Approx(3.63).epsilon(1e-14));
  const std::vector<double> v0 = aggregating_v0(g, spec);

  // grad(v0) . x = -mu x^2 exactly on the quadratic zone: centered
  // differences of a sampled quadratic reproduce the slope to rounding.
  for (int i = 1; i + 1 < g.n_cells; ++i) {
    const double x = g.centers[i];
    if (std::fabs(x) + g.dx > spec.R0 + spec.delta) continue;
    const double slope = (v0[i + 1] - v0[i - 1]) / (2.0 * g.dx);
    CHECK(slope * x == doctest::Approx(-spec.mu * x * x).epsilon(1e-10));
  }
  // Non-negative everywhere, center value = resolved floor, flat plateau at
  // the boundary (zero-flux compatible).
  for (double v : v0) CHECK(v >= 0.0);
  CHECK(v0[g.n_cells - 1] == doctest::Approx(v0[g.n_cells - 2]).epsilon(1e-14));
  const double center_max = *std::max_element(v0.begin(), v0.end());
  CHECK(center_max == doctest::Approx(spec.resolved_v_floor()).epsilon(1e-6));
}

TEST_CASE("aggregating well rejects a floor that would push the plateau negative") {
  const Grid g = make_grid(1, false, 1.6, 800);
  BumpSpec spec;
  spec.R0 = 0.5;
  spec.mu = 6.0;
  spec.delta = 0.3;
  spec.v_floor = 0.3; // well depth ~ 2.7, so the far plateau would be < 0
  try {
    aggregating_v0(g, spec);
    CHECK(false);
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).find("plateau") != std::string::npos);
  }
}

TEST_CASE("aggregation strength inequality") {
  ModelParams p; // m = 2
  p.chi = 1.0;
  BumpSpec spec;
  spec.K0 = 1.0;
  spec.R0 = 0.5;
  spec.d0 = 1.0;

  // (m-1) d0 = 1: the radius factor drops out, threshold = 8 K0^{m-1} = 8.
  spec.mu = 9.0;
  HypothesisCheck h = hypothesis_shrinking(p, spec);
  CHECK(h.threshold == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(h.margin == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(h.satisfied);

  spec.mu = 8.0; // exactly at threshold: strict inequality fails
  h = hypothesis_shrinking(p, spec);
  CHECK(h.margin == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_FALSE(h.satisfied);

  // Radius factor active: m = 2, d0 = 2 gives exponent 2(( m-1) d0 - 1) = 2,
  // R0 = 2 gives max{1, 4} = 4; threshold = 8 * K0 * 4 = 16 at K0 = 0.5.
  ModelParams p2;
  p2.chi = 1.0;
  BumpSpec wide;
  wide.K0 = 0.5;
  wide.R0 = 2.0;
  wide.d0 = 2.0;
  wide.mu = 20.0;
  h = hypothesis_shrinking(p2, wide);
  CHECK(h.threshold == doctest::Approx(16.0).epsilon(1e-14));
  CHECK(h.satisfied);
}

TEST_CASE("source-solution seed: mass, support, and domain guard") {
  const Grid g = make_grid(1, false, 6.0, 800);
  ModelParams p; // m = 2
  const std::vector<double> u0 = barenblatt_u0(g, p, 0.0);
  // mass of (1 - x^2/12)_+ over the line = 4/3 * sqrt(12)
  CHECK(integrate(u0, g) == doctest::Approx(4.618802153517006).epsilon(1e-4));
  for (int i = 0; i < g.n_cells; ++i) {
    if (std::fabs(g.centers[i]) > 3.4641016151377544) CHECK(u0[i] == 0.0);
  }
  // support radius sqrt(12) does not fit in a half-length-3 domain
  const Grid small = make_grid(1, false, 3.0, 100);
  CHECK_THROWS_AS(barenblatt_u0(small, p, 0.0), ConfigError);
}
