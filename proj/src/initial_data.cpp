#include "pmfront/initial_data.hpp"

#include <cmath>
#include <numbers>

#include "pmfront/analysis.hpp"

namespace pmfront {

namespace {

constexpr double kPi = std::numbers::pi;

// Integral of s * omega((s-a)/w) from a to a + w*theta, where
// omega(s) = (1 + cos(pi s))/2 is the blend profile.  Closed form keeps the
// construction exact rather than quadrature-dependent.
double blend_moment(double a, double w, double theta) {
  const double sin_t = std::sin(kPi * theta);
  const double cos_t = std::cos(kPi * theta);
  return 0.5 * w *
         (a * (theta + sin_t / kPi) +
          w * (0.5 * theta * theta + theta * sin_t / kPi + (cos_t - 1.0) / (kPi * kPi)));
}

void check_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(std::string("BumpSpec: ") + name + " must be finite and > 0");
  }
}

} // namespace

double BumpSpec::resolved_v_floor() const {
  if (v_floor >= 0.0) return v_floor;
  const double b = R0 + 2.0 * delta;
  return 0.5 * mu * b * b;
}

void validate(const BumpSpec& spec, const ModelParams& params, const Grid& grid) {
  check_positive(spec.K0, "K0");
  check_positive(spec.R0, "R0");
  check_positive(spec.delta, "delta");
  if (!(spec.mu >= 0.0) || !std::isfinite(spec.mu)) {
    throw ConfigError("BumpSpec: mu must be finite and >= 0");
  }
  const double d = params.d();
  if (spec.d0 < d - 1e-12) {
    throw ConfigError("BumpSpec: d0 must be at least 1/(m-1) = " + std::to_string(d) +
                      ", got " + std::to_string(spec.d0));
  }
  if (!(spec.delta < spec.R0)) {
    throw ConfigError("BumpSpec: delta must lie in (0, R0)");
  }
  if (grid.radial && spec.x0 != 0.0) {
    throw ConfigError("BumpSpec: radial grids require x0 = 0");
  }
  if (!(spec.R0 + std::fabs(spec.x0) < grid.half_length)) {
    throw ConfigError("BumpSpec: bump support must sit strictly inside the domain");
  }
  // The blend must finish with at least two plateau cells before the
  // boundary so the discrete boundary fluxes see an exactly constant field.
  const double outer = spec.R0 + 2.0 * spec.delta + std::fabs(spec.x0);
  if (!(outer <= grid.half_length - 2.0 * grid.dx)) {
    throw ConfigError("BumpSpec: attractant blend region must end at least two "
                      "cells before the boundary");
  }
}

std::vector<double> bump_u0(const Grid& grid, const BumpSpec& spec,
                            const ModelParams& params) {
  validate(spec, params, grid);
  std::vector<double> u(grid.n_cells, 0.0);
  for (int i = 0; i < grid.n_cells; ++i) {
    const double r2 = (grid.centers[i] - spec.x0) * (grid.centers[i] - spec.x0);
    const double h = spec.R0 * spec.R0 - r2;
    u[i] = h > 0.0 ? spec.K0 * std::pow(h, spec.d0) : 0.0;
  }
  return u;
}

std::vector<double> aggregating_v0(const Grid& grid, const BumpSpec& spec) {
  check_positive(spec.R0, "R0");
  check_positive(spec.delta, "delta");
  if (!(spec.mu >= 0.0) || !std::isfinite(spec.mu)) {
    throw ConfigError("BumpSpec: mu must be finite and >= 0");
  }
  const double a = spec.R0 + spec.delta;       // quadratic region ends here
  const double w = spec.delta;                 // blend width
  const double center = spec.resolved_v_floor();

  // v decreases monotonically from the center value to the plateau; the
  // plateau is the minimum and must stay non-negative.
  const double plateau = center - 0.5 * spec.mu * a * a - spec.mu * blend_moment(a, w, 1.0);
  if (plateau < 0.0) {
    throw ConfigError("aggregating_v0: requested v_floor " + std::to_string(center) +
                      " drives the attractant negative (plateau " +
                      std::to_string(plateau) + ")");
  }

  std::vector<double> v(grid.n_cells, 0.0);
  for (int i = 0; i < grid.n_cells; ++i) {
    const double r = std::fabs(grid.centers[i] - spec.x0);
    if (r <= a) {
      v[i] = center - 0.5 * spec.mu * r * r;
    } else if (r < a + w) {
      const double theta = (r - a) / w;
      v[i] = center - 0.5 * spec.mu * a * a - spec.mu * blend_moment(a, w, theta);
    } else {
      v[i] = plateau;
    }
  }
  return v;
}

HypothesisCheck hypothesis_shrinking(const ModelParams& params, const BumpSpec& spec) {
  validate(params);
  check_positive(spec.K0, "K0");
  check_positive(spec.R0, "R0");
  const double m = params.m;
  const double shape = 2.0 * ((m - 1.0) * spec.d0 - 1.0);
  const double threshold = 4.0 * m / (m - 1.0) * std::pow(spec.K0, m - 1.0) *
                           std::max(1.0, std::pow(spec.R0, shape));
  HypothesisCheck hc;
  hc.threshold = threshold;
  hc.margin = params.chi * spec.mu - threshold;
  hc.satisfied = hc.margin > 0.0;
  return hc;
}

std::vector<double> barenblatt_u0(const Grid& grid, const ModelParams& params,
                                  double t_offset) {
  validate(params);
  if (!(t_offset >= 0.0) || !std::isfinite(t_offset)) {
    throw ConfigError("barenblatt_u0: t_offset must be finite and >= 0");
  }
  const BarenblattParams bp = make_barenblatt(params.m, params.dim);
  const double front = barenblatt_front_radius(t_offset, bp);
  if (!(front < grid.half_length)) {
    throw ConfigError("barenblatt_u0: support radius " + std::to_string(front) +
                      " does not fit strictly inside the domain (half_length " +
                      std::to_string(grid.half_length) + ")");
  }
  std::vector<double> u(grid.n_cells, 0.0);
  for (int i = 0; i < grid.n_cells; ++i) {
    u[i] = barenblatt_eval(grid.centers[i], t_offset, bp);
  }
  return u;
}

} // namespace pmfront
