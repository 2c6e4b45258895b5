#pragma once
//
// analysis.hpp — reference solutions, front tracking, and decay fits.
//
// The classical source solution of the porous-medium equation u_t = lap(u^m),
//
//     B(x, t) = (1+t)^{-k} * max(1 - k(m-1)/(2mN) * |x|^2 (1+t)^{-2k/N}, 0)^{1/(m-1)},
//     k = 1 / (m - 1 + 2/N),
//
// serves as the convergence benchmark: its sharp front sits at radius
// sqrt(2mN / (k(m-1))) * (1+t)^{k/N}.  Front positions of computed states are
// located by the outermost cell above a relative threshold and refined by a
// quadratic root extrapolation of w = u^{m-1} through three anchor cells: w
// closes quadratically in the radial coordinate for source-type profiles, and
// anchoring strictly above the threshold keeps the reading insensitive to the
// sub-threshold toe that an upwind scheme smears slightly past the support
// edge.  Early front speeds are extrapolated to t = 0 by fitting
// consecutive-difference slopes against window-midpoint times; the intercept
// standard error comes from the usual linear-regression formula, so callers
// can test measured-vs-predicted speeds at a chosen number of sigmas.
//

#include <optional>
#include <vector>

#include "pmfront/initial_data.hpp"
#include "pmfront/model.hpp"

namespace pmfront {

struct BarenblattParams {
  double m = 2.0;
  int N = 1;
  double k = 0.0; // similarity exponent, in (0, 1/(m-1))
};

// Fill the similarity exponent from m and N and validate ranges.
BarenblattParams make_barenblatt(double m, int N);

// Point evaluation of the source solution at |x| = x (may be negative), time t.
double barenblatt_eval(double x, double t, const BarenblattParams& bp);

// Support radius at time t.
double barenblatt_front_radius(double t, const BarenblattParams& bp);

struct FrontTrace {
  std::vector<double> times;
  std::vector<double> rho;   // support radius about the bump center; -1 = empty
  double threshold = 1e-4;   // relative threshold used
};

// Support radius of u about spec.x0: outermost cell with u > rel_threshold *
// max(u), refined by extrapolating w = u^{m-1} to its nearest outward root
// through three inward anchor cells (exact for profiles with w quadratic in
// the radial coordinate).  Empty support (max(u) = 0 or no cell above
// threshold) is reported as nullopt.
std::optional<double> front_position(const State& state, const Grid& grid,
                                     const ModelParams& params, const BumpSpec& spec,
                                     double rel_threshold = 1e-4);

// Signed initial front speed of a unit-exponent bump (d0 = 1/(m-1)):
//     R0 * ( (2m/(m-1)) K0^{m-1} - chi*mu ).
// Positive = spreading, negative = retreating.  Throws ConfigError when
// d0 != 1/(m-1), where no single-speed prediction applies.
double predicted_speed(const ModelParams& params, const BumpSpec& spec);

struct SpeedFit {
  double speed = 0.0;   // intercept of slope-vs-midpoint-time regression at t = 0
  double stderr_ = 0.0; // standard error of that intercept
  int n_slopes = 0;
};

// Extrapolate the front speed at t = 0 from the first samples of a front
// trace (all samples with time <= fit_horizon; at least 5 required, and the
// front must be nonempty throughout).
SpeedFit initial_speed(const FrontTrace& front, double fit_horizon);

struct DecayMetrics {
  double u_dev_linf = 0.0; // ||u - ubar||_inf
  double v_linf = 0.0;
  double gradmax_v = 0.0;
  double min_u = 0.0;
};

DecayMetrics decay_metrics(const State& state, const Grid& grid, double ubar);

struct DecayFit {
  double C = 0.0;         // fitted amplitude
  double c = 0.0;         // fitted decay rate: y ~ C * exp(-c t)
  double r_squared = 1.0; // coefficient of determination in log space
  double window_lo = 0.0;
  double window_hi = 0.0;
  double ubar = 0.0;      // context value for density fits; caller-filled
  int n_points = 0;
};

// Least-squares fit of log(y) against t over the window [window_lo, window_hi].
// Requires at least 3 points in the window and strictly positive y there.
// A constant sequence has zero total variation in log space; r_squared is 1
// by convention in that case (the fit is exact).
DecayFit fit_exponential(const std::vector<double>& times,
                         const std::vector<double>& ys,
                         double window_lo, double window_hi);

} // namespace pmfront
