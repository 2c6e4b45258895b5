#include "pmfront/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pmfront {

namespace {

constexpr double kVelocityFloor = 1e-300; // regularizer for the advective bound

struct Workspace {
  std::vector<double> um;    // u^m per cell
  std::vector<double> flux;  // u face fluxes (area included)
  std::vector<double> vflux; // v face fluxes (area included)
  void resize(int n) {
    um.resize(n);
    flux.resize(n + 1);
    vflux.resize(n + 1);
  }
};

void pressure_power(const std::vector<double>& u, double m, std::vector<double>& um) {
  const std::size_t n = u.size();
  if (m == 2.0) {
    for (std::size_t i = 0; i < n; ++i) um[i] = u[i] * u[i];
  } else if (m == 3.0) {
    for (std::size_t i = 0; i < n; ++i) um[i] = u[i] * u[i] * u[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) um[i] = std::pow(u[i], m);
  }
}

// One explicit flux-form update of u (and of v unless frozen).  All faces
// carry area-weighted fluxes, interior faces only; the update telescopes, so
// the u mass ledger is exact to rounding.
void step_impl(State& s, const ModelParams& p, const Grid& g, double dt,
               Workspace& ws, bool frozen_v) {
  const int n = g.n_cells;
  ws.resize(n);
  pressure_power(s.u, p.m, ws.um);

  ws.flux[0] = ws.flux[n] = 0.0;
  ws.vflux[0] = ws.vflux[n] = 0.0;
  const double inv_dx = 1.0 / g.dx;
  for (int f = 1; f < n; ++f) {
    const double area = g.face_areas[f];
    const double diff = (ws.um[f] - ws.um[f - 1]) * inv_dx;
    const double vel = p.chi * (s.v[f] - s.v[f - 1]) * inv_dx; // drift up the v slope
    const double donor = vel >= 0.0 ? s.u[f - 1] : s.u[f];
    ws.flux[f] = area * (diff - vel * donor);
    ws.vflux[f] = area * (s.v[f] - s.v[f - 1]) * inv_dx;
  }

  if (frozen_v) {
    for (int i = 0; i < n; ++i) {
      s.u[i] += dt / g.weights[i] * (ws.flux[i + 1] - ws.flux[i]);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const double inv_w = 1.0 / g.weights[i];
      const double u_old = s.u[i];
      s.u[i] += dt * inv_w * (ws.flux[i + 1] - ws.flux[i]);
      s.v[i] += dt * inv_w * (ws.vflux[i + 1] - ws.vflux[i]) -
                dt * p.alpha * u_old * s.v[i];
    }
  }
  s.t += dt;
}

// Hard explicit-stability envelope (Courant 1/2 diffusive, 1 advective);
// the controls' cfl fractions keep runs inside this with margin.
double hard_dt_bound(const State& s, const ModelParams& p, const Grid& g) {
  const double umax = linf(s.u);
  const double gv = grad_max(s.v, g);
  const double diff_scale = std::max(p.m * std::pow(umax, p.m - 1.0), 1.0);
  const double dx2 = g.dx * g.dx;
  return std::min({0.5 * dx2 / diff_scale,
                   g.dx / (p.chi * gv + kVelocityFloor),
                   0.5 * dx2});
}

void check_dt(const State& s, const ModelParams& p, const Grid& g, double dt,
              const char* who) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw NumericsError(std::string(who) + ": dt must be finite and > 0");
  }
  if (dt > hard_dt_bound(s, p, g) * (1.0 + 1e-9)) {
    throw NumericsError(std::string(who) + ": dt " + std::to_string(dt) +
                        " exceeds the explicit stability bound " +
                        std::to_string(hard_dt_bound(s, p, g)));
  }
}

void check_sizes(const State& s, const Grid& g, const char* who) {
  if (s.u.size() != static_cast<std::size_t>(g.n_cells) ||
      s.v.size() != static_cast<std::size_t>(g.n_cells)) {
    throw ConfigError(std::string(who) + ": state does not match grid size");
  }
}

struct SupportExtent {
  int lo = 0, hi = -1; // empty when lo > hi
};

SupportExtent scan_support(const std::vector<double>& u) {
  SupportExtent e;
  const int n = static_cast<int>(u.size());
  e.lo = n;
  e.hi = -1;
  for (int i = 0; i < n; ++i) {
    if (u[i] > 0.0) {
      if (e.lo == n) e.lo = i;
      e.hi = i;
    }
  }
  return e;
}

} // namespace

void validate(const StepControls& c) {
  auto in_range = [](double f) { return f > 0.0 && f <= 0.5; };
  if (!in_range(c.cfl_diffusion)) {
    throw ConfigError("StepControls: cfl_diffusion must lie in (0, 0.5]");
  }
  if (!in_range(c.cfl_advection)) {
    throw ConfigError("StepControls: cfl_advection must lie in (0, 0.5]");
  }
  if (!(c.dt_max > 0.0) || !std::isfinite(c.dt_max)) {
    throw ConfigError("StepControls: dt_max must be finite and > 0");
  }
  if (!std::isfinite(c.t_end)) {
    throw ConfigError("StepControls: t_end must be finite");
  }
}

double stable_dt(const State& s, const ModelParams& p, const Grid& g,
                 const StepControls& c) {
  validate(c);
  check_sizes(s, g, "stable_dt");
  const double umax = linf(s.u);
  const double gv = grad_max(s.v, g);
  const double diff_scale = std::max(p.m * std::pow(umax, p.m - 1.0), 1.0);
  const double dx2 = g.dx * g.dx;
  return std::min({c.cfl_diffusion * dx2 / diff_scale,
                   c.cfl_advection * g.dx / (p.chi * gv + kVelocityFloor),
                   c.cfl_diffusion * dx2,
                   c.dt_max});
}

void step(State& s, const ModelParams& p, const Grid& g, double dt) {
  validate(p);
  check_sizes(s, g, "step");
  check_dt(s, p, g, dt, "step");
  Workspace ws;
  step_impl(s, p, g, dt, ws, /*frozen_v=*/false);
}

void step_frozen_v(State& s, const ModelParams& p, const Grid& g, double dt) {
  validate(p);
  check_sizes(s, g, "step_frozen_v");
  check_dt(s, p, g, dt, "step_frozen_v");
  Workspace ws;
  step_impl(s, p, g, dt, ws, /*frozen_v=*/true);
}

Trace run(State& state, const ModelParams& params, const Grid& grid,
          const StepControls& controls, const SamplePlan& plan, bool frozen_v) {
  validate(params);
  validate(controls);
  check_sizes(state, grid, "run");
  if (controls.t_end < state.t) {
    throw ConfigError("run: t_end " + std::to_string(controls.t_end) +
                      " precedes the state time " + std::to_string(state.t));
  }
  for (std::size_t k = 1; k < plan.sample_times.size(); ++k) {
    if (!(plan.sample_times[k] > plan.sample_times[k - 1])) {
      throw ConfigError("run: sample_times must be strictly increasing");
    }
  }
  for (std::size_t k = 1; k < plan.snapshot_times.size(); ++k) {
    if (!(plan.snapshot_times[k] > plan.snapshot_times[k - 1])) {
      throw ConfigError("run: snapshot_times must be strictly increasing");
    }
  }

  Trace trace;
  Workspace ws;

  auto record_sample = [&]() {
    TraceSample smp;
    smp.t = state.t;
    smp.mass_u = integrate(state.u, grid);
    smp.mass_v = integrate(state.v, grid);
    smp.linf_u = linf(state.u);
    smp.linf_v = linf(state.v);
    smp.gradmax_v = grad_max(state.v, grid);
    smp.lapmax_v = lap_max(state.v, grid);
    smp.min_u = min_value(state.u);
    smp.front_rho = plan.front_fn ? plan.front_fn(state) : -1.0;
    smp.aux = plan.aux_fn ? plan.aux_fn(state) : 0.0;
    if (!std::isfinite(smp.mass_u) || !std::isfinite(smp.mass_v) ||
        !std::isfinite(smp.linf_u) || !std::isfinite(smp.linf_v)) {
      throw NumericsError("run: non-finite field values at t = " +
                          std::to_string(state.t) + " after " +
                          std::to_string(trace.steps) + " steps");
    }
    trace.samples.push_back(smp);
  };
  auto record_snapshot = [&]() {
    trace.snapshots.push_back(Snapshot{state.t, state.u, state.v});
  };

  std::size_t next_sample = 0;
  std::size_t next_snapshot = 0;
  auto skip_past = [](const std::vector<double>& times, std::size_t& idx, double t) {
    bool crossed = false;
    while (idx < times.size() && times[idx] <= t) {
      ++idx;
      crossed = true;
    }
    return crossed;
  };

  // The start state is always recorded (sample plan times at or before the
  // start are considered covered by it).
  record_sample();
  skip_past(plan.sample_times, next_sample, state.t);
  if (skip_past(plan.snapshot_times, next_snapshot, state.t)) record_snapshot();

  SupportExtent ext = scan_support(state.u);
  const int n = grid.n_cells;

  while (state.t < controls.t_end) {
    double dt = stable_dt(state, params, grid, controls);
    bool final_step = false;
    if (state.t + dt >= controls.t_end) {
      dt = controls.t_end - state.t;
      final_step = true;
    }
    if (!(dt > 0.0)) break; // start so close to t_end that no step fits

    step_impl(state, params, grid, dt, ws, frozen_v);
    if (final_step) state.t = controls.t_end;
    ++trace.steps;

    // The scheme's stencil admits at most one newly positive cell per side
    // per step; track the extent to certify that bound on real runs.
    SupportExtent now = ext;
    while (now.lo > 0 && state.u[now.lo - 1] > 0.0) --now.lo;
    while (now.hi + 1 < n && state.u[now.hi + 1] > 0.0) ++now.hi;
    if (now.lo > now.hi) {
      now = scan_support(state.u); // previous support may have emptied
    } else {
      while (now.lo <= now.hi && state.u[now.lo] <= 0.0) ++now.lo;
      while (now.hi >= now.lo && state.u[now.hi] <= 0.0) --now.hi;
    }
    if (ext.lo <= ext.hi && now.lo <= now.hi) {
      const int grow_l = std::max(0, ext.lo - now.lo);
      const int grow_r = std::max(0, now.hi - ext.hi);
      trace.max_support_growth =
          std::max(trace.max_support_growth, std::max(grow_l, grow_r));
    }
    ext = now;

    const bool want_sample = next_sample < plan.sample_times.size() &&
                             plan.sample_times[next_sample] <= state.t;
    const bool want_snapshot = next_snapshot < plan.snapshot_times.size() &&
                               plan.snapshot_times[next_snapshot] <= state.t;
    if (want_sample || want_snapshot || final_step) {
      record_sample();
      skip_past(plan.sample_times, next_sample, state.t);
      if (skip_past(plan.snapshot_times, next_snapshot, state.t)) {
        record_snapshot();
      }
    }
  }

  return trace;
}

} // namespace pmfront
