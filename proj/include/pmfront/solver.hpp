#pragma once
//
// solver.hpp — explicit conservative finite-volume integrator for the
// coupled degenerate system
//
//     u_t = div( grad(u^m) - chi * u * grad(v) ),   v_t = lap(v) - alpha*u*v.
//
// Fluxes live on faces: the diffusive face flux is the difference quotient of
// u^m, the advective face flux upwinds u against the face drift velocity
// chi * (v_R - v_L) / dx.  Multiplying by face areas and dividing by cell
// measures makes the u update telescopic, so total u mass is conserved to
// rounding error for any number of steps; v mass decreases by exactly the
// consumption sum per step.  Explicit time stepping is governed by stable_dt,
// which combines diffusive and advective Courant bounds; step() refuses time
// steps beyond the hard stability limits rather than integrate garbage.
//
// A frozen-attractant mode advances u only and leaves v untouched.  Because
// the upwind u-update has non-negative off-diagonal dependence under the
// Courant bounds, it is order-preserving: nested initial densities stay
// nested when driven by the same frozen v.  run() samples reduced observables
// on a caller-supplied time plan and stores full field snapshots at requested
// times, clipping the final step so the run lands on t_end exactly.
//

#include <functional>
#include <vector>

#include "pmfront/model.hpp"

namespace pmfront {

struct StepControls {
  double cfl_diffusion = 0.2; // fraction of the diffusive stability bound, (0, 0.5]
  double cfl_advection = 0.4; // fraction of the advective stability bound, (0, 0.5]
  double dt_max = 1.0;        // absolute cap on a single step
  double t_end = 1.0;         // integration end time
};

void validate(const StepControls& controls);

// Largest admissible explicit step from the current state:
//   min( cfl_diffusion * dx^2 / max(m * umax^{m-1}, 1),
//        cfl_advection * dx / (chi * |grad v|_max + 1e-300),
//        cfl_diffusion * dx^2,            // attractant diffusion
//        dt_max ).
double stable_dt(const State& state, const ModelParams& params, const Grid& grid,
                 const StepControls& controls);

// One explicit step of the full system.  Throws NumericsError if dt exceeds
// the hard stability bounds (Courant numbers 1/2 diffusive, 1 advective).
void step(State& state, const ModelParams& params, const Grid& grid, double dt);

// One explicit step of u only, against the current v held fixed.
void step_frozen_v(State& state, const ModelParams& params, const Grid& grid,
                   double dt);

struct TraceSample {
  double t = 0.0;
  double mass_u = 0.0;
  double mass_v = 0.0;
  double linf_u = 0.0;
  double linf_v = 0.0;
  double gradmax_v = 0.0;
  double lapmax_v = 0.0;  // kept in memory for curvature budgets; not a CSV column
  double min_u = 0.0;
  double front_rho = -1.0; // from the plan's front observer; -1 = none/empty
  double aux = 0.0;        // from the plan's aux observer; in-memory only
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> u, v;
};

struct Trace {
  std::vector<TraceSample> samples;   // strictly increasing times
  std::vector<Snapshot> snapshots;    // strictly increasing times
  long long steps = 0;
  int max_support_growth = 0;         // largest one-step extension of {u > 0},
                                      // in cells per side (scheme bound: 1)
};

struct SamplePlan {
  std::vector<double> sample_times;   // ascending; observables recorded at the
                                      // first step crossing each time
  std::vector<double> snapshot_times; // ascending; full fields stored likewise
  // Optional front observer evaluated at each sample; return -1 for "no front".
  std::function<double(const State&)> front_fn;
  // Optional scalar observer recorded into TraceSample::aux at each sample.
  std::function<double(const State&)> aux_fn;
};

// Integrate state to controls.t_end, recording per the plan.  The initial
// state is always recorded (t_end equal to the start time yields exactly that
// single record), the final state is recorded if a step was taken, and
// non-finite field values abort with a NumericsError naming the time and step
// count.  The state is advanced in place; frozen_v selects the u-only mode.
Trace run(State& state, const ModelParams& params, const Grid& grid,
          const StepControls& controls, const SamplePlan& plan,
          bool frozen_v = false);

} // namespace pmfront
