#include "pmfront/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pmfront {

BarenblattParams make_barenblatt(double m, int N) {
  if (!(m > 1.0)) {
    throw ConfigError("make_barenblatt: m must exceed 1");
  }
  if (N < 1 || N > 3) {
    throw ConfigError("make_barenblatt: N must be 1, 2 or 3");
  }
  BarenblattParams bp;
  bp.m = m;
  bp.N = N;
  bp.k = 1.0 / (m - 1.0 + 2.0 / N);
  return bp;
}

double barenblatt_eval(double x, double t, const BarenblattParams& bp) {
  if (!(bp.k > 0.0) || !(bp.k < 1.0 / (bp.m - 1.0))) {
    throw ConfigError("barenblatt_eval: similarity exponent out of range");
  }
  if (!(1.0 + t > 0.0)) {
    throw ConfigError("barenblatt_eval: requires 1 + t > 0");
  }
  const double s = 1.0 + t;
  const double shape = bp.k * (bp.m - 1.0) / (2.0 * bp.m * bp.N);
  const double arg = 1.0 - shape * x * x * std::pow(s, -2.0 * bp.k / bp.N);
  if (arg <= 0.0) return 0.0;
  return std::pow(s, -bp.k) * std::pow(arg, 1.0 / (bp.m - 1.0));
}

double barenblatt_front_radius(double t, const BarenblattParams& bp) {
  if (!(1.0 + t > 0.0)) {
    throw ConfigError("barenblatt_front_radius: requires 1 + t > 0");
  }
  const double shape = bp.k * (bp.m - 1.0) / (2.0 * bp.m * bp.N);
  return std::sqrt(1.0 / shape) * std::pow(1.0 + t, bp.k / bp.N);
}

std::optional<double> front_position(const State& state, const Grid& grid,
                                     const ModelParams& params, const BumpSpec& spec,
                                     double rel_threshold) {
  if (!(rel_threshold > 0.0) || !(rel_threshold < 1.0)) {
    throw ConfigError("front_position: rel_threshold must lie in (0, 1)");
  }
  const int n = grid.n_cells;
  if (state.u.size() != static_cast<std::size_t>(n)) {
    throw ConfigError("front_position: state does not match grid");
  }
  const double umax = linf(state.u);
  if (!(umax > 0.0)) return std::nullopt;
  const double thr = rel_threshold * umax;

  int best = -1;
  double best_dist = -1.0;
  for (int i = 0; i < n; ++i) {
    if (state.u[i] > thr) {
      const double dist = std::fabs(grid.centers[i] - spec.x0);
      if (dist > best_dist) {
        best_dist = dist;
        best = i;
      }
    }
  }
  if (best < 0) return std::nullopt;

  // Refine to sub-cell accuracy.  At a degenerate front the pressure-like
  // variable w = u^{m-1} closes quadratically in the radial coordinate (it is
  // exactly quadratic for the source-type profiles this laboratory evolves),
  // so fit a quadratic through three anchor cells sitting well above the
  // advective toe the upwind scheme smears past the support edge, and take the
  // nearest root beyond the outermost anchor.  The anchor spacing scales with
  // the front distance, so the stencil's physical width -- and with it the
  // fitted root -- is resolution independent.
  const int dir = grid.centers[best] >= spec.x0 ? 1 : -1; // outward index step
  const int gap =
      std::max(1, static_cast<int>(std::lround(0.04 * best_dist / grid.dx)));
  const double pw = params.m - 1.0;
  const double cap = 0.5 * std::max(best_dist, grid.dx);
  const double cell_edge = best_dist + 0.5 * grid.dx;

  const int i1 = best - dir * gap;
  const int i2 = best - dir * 2 * gap;
  if (i2 < 0 || i2 >= n || i1 < 0 || i1 >= n) return cell_edge;
  const double d0 = best_dist;
  const double d1 = std::fabs(grid.centers[i1] - spec.x0);
  const double d2 = std::fabs(grid.centers[i2] - spec.x0);
  const double w0 = std::pow(state.u[best], pw);
  const double w1 = std::pow(state.u[i1], pw);
  const double w2 = std::pow(state.u[i2], pw);
  if (!(w2 > w1 && w1 > w0 && d0 > d1 && d1 > d2)) return cell_edge;

  // Newton form through (d0,w0), (d1,w1), (d2,w2); s = d - d0.
  const double f01 = (w1 - w0) / (d1 - d0);
  const double f12 = (w2 - w1) / (d2 - d1);
  const double f012 = (f12 - f01) / (d2 - d0);
  const double a = f012;
  const double b = f01 + f012 * (d0 - d1);
  const double c = w0;
  const double linear = b < 0.0 ? -c / b : std::numeric_limits<double>::infinity();
  double s = linear;
  const double disc = b * b - 4.0 * a * c;
  if (disc >= 0.0 && a != 0.0) {
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    double cand = std::numeric_limits<double>::infinity();
    for (const double r : {q / a, c / q}) {
      if (r > 0.0 && r < cand) cand = r;
    }
    if (std::isfinite(cand)) s = cand;
  }
  if (!std::isfinite(s) || s > cap) return cell_edge;
  return best_dist + s;
}

double predicted_speed(const ModelParams& params, const BumpSpec& spec) {
  validate(params);
  const double d = params.d();
  if (std::fabs(spec.d0 - d) > 1e-9 * std::max(1.0, d)) {
    throw ConfigError("predicted_speed: requires the unit-exponent shape d0 = 1/(m-1)"
                      " (got d0 = " + std::to_string(spec.d0) + ")");
  }
  const double m = params.m;
  return spec.R0 * (2.0 * m / (m - 1.0) * std::pow(spec.K0, m - 1.0) -
                    params.chi * spec.mu);
}

SpeedFit initial_speed(const FrontTrace& front, double fit_horizon) {
  if (!(fit_horizon > 0.0)) {
    throw ConfigError("initial_speed: fit_horizon must be > 0");
  }
  if (front.times.size() != front.rho.size()) {
    throw ConfigError("initial_speed: times and rho lengths differ");
  }
  std::vector<double> ts, rs;
  const double t0 = front.times.empty() ? 0.0 : front.times.front();
  for (std::size_t k = 0; k < front.times.size(); ++k) {
    if (front.times[k] - t0 <= fit_horizon * (1.0 + 1e-12)) {
      if (front.rho[k] < 0.0) {
        throw NumericsError("initial_speed: empty front inside the fit window at t = " +
                            std::to_string(front.times[k]));
      }
      ts.push_back(front.times[k]);
      rs.push_back(front.rho[k]);
    }
  }
  if (ts.size() < 5) {
    throw ConfigError("initial_speed: need at least 5 front samples inside the fit "
                      "window, got " + std::to_string(ts.size()));
  }

  // Consecutive-difference slopes against window-midpoint times, then a
  // linear fit extrapolated to t = 0; its intercept standard error reflects
  // both sampling noise and front curvature across the window.
  const std::size_t K = ts.size() - 1;
  std::vector<double> mid(K), slope(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double dt = ts[k + 1] - ts[k];
    if (!(dt > 0.0)) throw ConfigError("initial_speed: times must strictly increase");
    mid[k] = 0.5 * (ts[k + 1] + ts[k]);
    slope[k] = (rs[k + 1] - rs[k]) / dt;
  }
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    xbar += mid[k];
    ybar += slope[k];
  }
  xbar /= K;
  ybar /= K;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    sxx += (mid[k] - xbar) * (mid[k] - xbar);
    sxy += (mid[k] - xbar) * (slope[k] - ybar);
  }
  if (!(sxx > 0.0)) throw ConfigError("initial_speed: degenerate sample times");
  const double b = sxy / sxx;
  const double a = ybar - b * xbar;
  double ssr = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double r = slope[k] - (a + b * mid[k]);
    ssr += r * r;
  }
  const double s2 = ssr / static_cast<double>(K - 2);
  SpeedFit fit;
  fit.speed = a;
  fit.stderr_ = std::sqrt(s2 * (1.0 / K + xbar * xbar / sxx));
  fit.n_slopes = static_cast<int>(K);
  return fit;
}

DecayMetrics decay_metrics(const State& state, const Grid& grid, double ubar) {
  if (state.u.size() != static_cast<std::size_t>(grid.n_cells)) {
    throw ConfigError("decay_metrics: state does not match grid");
  }
  DecayMetrics dm;
  for (double u : state.u) dm.u_dev_linf = std::max(dm.u_dev_linf, std::fabs(u - ubar));
  dm.v_linf = linf(state.v);
  dm.gradmax_v = grad_max(state.v, grid);
  dm.min_u = min_value(state.u);
  return dm;
}

DecayFit fit_exponential(const std::vector<double>& times, const std::vector<double>& ys,
                         double window_lo, double window_hi) {
  if (times.size() != ys.size()) {
    throw ConfigError("fit_exponential: times and values lengths differ");
  }
  if (!(window_hi > window_lo)) {
    throw ConfigError("fit_exponential: empty fit window");
  }
  std::vector<double> ts, ls;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= window_lo && times[k] <= window_hi) {
      if (!(ys[k] > 0.0)) {
        throw NumericsError("fit_exponential: non-positive value at t = " +
                            std::to_string(times[k]) +
                            " cannot be fit on a log scale");
      }
      ts.push_back(times[k]);
      ls.push_back(std::log(ys[k]));
    }
  }
  if (ts.size() < 3) {
    throw ConfigError("fit_exponential: need at least 3 samples in the window, got " +
                      std::to_string(ts.size()));
  }
  const std::size_t K = ts.size();
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    xbar += ts[k];
    ybar += ls[k];
  }
  xbar /= K;
  ybar /= K;
  double sxx = 0.0, sxy = 0.0, sst = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    sxx += (ts[k] - xbar) * (ts[k] - xbar);
    sxy += (ts[k] - xbar) * (ls[k] - ybar);
    sst += (ls[k] - ybar) * (ls[k] - ybar);
  }
  if (!(sxx > 0.0)) throw ConfigError("fit_exponential: degenerate sample times");
  const double b = sxy / sxx;
  const double a = ybar - b * xbar;
  double ssr = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double r = ls[k] - (a + b * ts[k]);
    ssr += r * r;
  }
  DecayFit fit;
  fit.C = std::exp(a);
  fit.c = -b;
  fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  fit.n_points = static_cast<int>(K);
  return fit;
}

} // namespace pmfront
