#pragma once
//
// initial_data.hpp — constructors for the initial fields used across the
// laboratory's experiments.
//
// The canonical cell density is a compactly supported power bump
//
//     u0(x) = K0 * max(R0^2 - |x - x0|^2, 0)^{d0},
//
// and the canonical attractant is an "aggregating" well
//
//     v0(x) = v_floor - mu/2 * |x - x0|^2          on |x - x0| <= R0 + delta,
//
// blended smoothly to a constant plateau over [R0 + delta, R0 + 2 delta] so
// that v0 is C^1, constant near the boundary (zero-flux compatible to
// rounding), non-negative, and satisfies grad(v0) . (x - x0) = -mu |x - x0|^2
// exactly on the bump support.  The inward attractant slope -mu is what makes
// an initially spreading bump stall or retreat once chi * mu outweighs the
// pressure of the degenerate diffusion; hypothesis_shrinking quantifies that
// competition.
//

#include <vector>

#include "pmfront/model.hpp"

namespace pmfront {

struct BumpSpec {
  double K0 = 1.0;      // bump amplitude, > 0
  double R0 = 1.0;      // bump support radius, > 0
  double d0 = 1.0;      // bump shape exponent, >= 1/(m-1)
  double x0 = 0.0;      // bump center (0 for radial grids)
  double mu = 0.0;      // attractant well curvature, >= 0
  double delta = 0.1;   // blend width, in (0, R0)
  double v_floor = -1.0; // v0 value at the center; < 0 selects the automatic
                         // floor mu*(R0 + 2*delta)^2/2 (plateau exactly 0 is
                         // never produced: the blend keeps a positive plateau
                         // below that floor only when mu > 0 demands it)

  // The center value actually used (automatic floor resolved).
  double resolved_v_floor() const;
};

// Preconditions: positivity/range checks, d0 >= 1/(m-1), and the geometric
// requirements that the bump support and the whole blend region sit strictly
// inside the domain with at least two plateau cells before the boundary.
void validate(const BumpSpec& spec, const ModelParams& params, const Grid& grid);

// Sampled power bump (cell-center values).
std::vector<double> bump_u0(const Grid& grid, const BumpSpec& spec,
                            const ModelParams& params);

// Sampled aggregating attractant well (cell-center values).  Throws
// ConfigError if the requested floor would make the plateau negative.
std::vector<double> aggregating_v0(const Grid& grid, const BumpSpec& spec);

struct HypothesisCheck {
  bool satisfied = false; // strict inequality holds
  double margin = 0.0;    // chi*mu - threshold
  double threshold = 0.0; // (4m/(m-1)) K0^{m-1} max{1, R0^{2((m-1)d0 - 1)}}
};

// Strength test for the aggregation term: chi*mu must exceed the listed
// threshold for the retreating-front construction to apply.
HypothesisCheck hypothesis_shrinking(const ModelParams& params, const BumpSpec& spec);

// Sample the classical self-similar source solution of u_t = lap(u^m) at
// time t_offset (>= 0) as initial data.  Throws ConfigError if its support
// does not fit strictly inside the domain.
std::vector<double> barenblatt_u0(const Grid& grid, const ModelParams& params,
                                  double t_offset);

} // namespace pmfront
