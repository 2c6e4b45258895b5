#pragma once
//
// harness.hpp — experiment orchestration: named scenarios driven by a JSON
// config, writing a deterministic artifact set per run:
//
//     <out>/trace.csv            t, mass_u, mass_v, linf_u, linf_v,
//                                gradmax_v, front_rho, min_u   (17 digits)
//     <out>/snapshots/t_*.csv    x, u, v per stored snapshot
//     <out>/report.json          verdict, config echo, metrics, fits,
//                                certificates with margins and domination
//     <out>/certificates/*.json  emitted certificates (when any)
//
// Artifacts carry no timestamps or wall-clock durations, so identical configs
// on the same build produce byte-identical files.  front_rho is the tracked
// support radius; -1.0 marks an empty or untracked front.  Scenarios:
//
//   pme-validate  chi = 0 benchmark against the classical source solution
//                 across a resolution ladder (sup error + L1 order).
//   shrinking     aggregation-dominated bump: measures attractant budgets,
//                 emits the shrinking certificate, checks domination.
//   finite-speed  constant attractant: emits the containment certificate and
//                 verifies the support never leaves the envelope ball.
//   exact-speed   measures the initial front speed, compares to the predicted
//                 value, emits the bracketing profile pair.
//   expanding     long horizon: waits for attractant decay, emits the
//                 expanding lower envelope, verifies uniform positivity and
//                 exponential relaxation fits.
//   decay         shorter relaxation study: decay fits only.
//   ordering      two nested bumps under one frozen attractant, advanced in
//                 lockstep; verifies order preservation.
//

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmfront/analysis.hpp"
#include "pmfront/certificates.hpp"
#include "pmfront/initial_data.hpp"
#include "pmfront/model.hpp"
#include "pmfront/solver.hpp"

namespace pmfront {

struct ScenarioConfig {
  std::string scenario;
  std::string output_dir = "out";

  ModelParams params;
  int n_cells = 200;
  double half_length = 1.0;
  BumpSpec bump;
  StepControls controls;

  // Sampling: observable rows every sample_interval (0 = auto per scenario),
  // snapshot_count full-field snapshots spread over the run.
  double sample_interval = 0.0;
  int snapshot_count = 9;

  // Front tracking and speed extrapolation.
  double rel_threshold = 1e-4;
  double fit_horizon = 0.02;

  // Benchmark ladder (pme-validate) and source-solution time offset.
  std::vector<int> resolutions = {200, 400, 800};
  double t_offset = 0.0;

  // Certificate inputs.  Negative C1/C2 means "measure from the run"
  // (certify mode requires them explicitly).
  double C1 = -1.0;
  double C2 = -1.0;
  double R_envelope = 0.0;     // finite-speed; 0 = auto (midway to boundary)
  double gap = 0.1;            // exact-speed bracket separation
  double structure_rate = -1.0; // exact-speed degradation budget (<0 = default)
  double R0_core = 0.0;        // expanding core radius; 0 = auto
  double eps1 = -1.0;          // expanding core level; <0 = auto (ubar/2)
  double delta_request = 0.0;  // expanding drift budget cap; 0 = recipe value
  double detect_horizon = 40.0; // expanding: give up if no decay by then
  double fit_length = 8.0;     // length of the decay-fit window
  double structure_time = 1.0; // certify mode: assumed well-shape persistence
  double decay_time = 0.0;     // certify mode: assumed attractant decay time
  bool allow_unsatisfied_hypothesis = false;

  // ordering scenario: inner bump = outer scaled by these factors.
  double nested_amplitude = 0.5;
  double nested_radius = 0.8;

  int threads = 0; // sweep parallelism; 0 = hardware concurrency
};

// Parse a JSON config file (strict: unknown keys are errors, so typos fail
// loudly).  Throws ConfigError with the offending key/path.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig config_from_json_text(const std::string& text);

struct ScenarioOutcome {
  bool pass = false;
  std::string verdict;     // "pass" or "fail: <reason>"
  std::string report_path; // written report.json
  std::string report_json; // same content, in memory
};

// Run one scenario end to end, writing the artifact set under
// config.output_dir.  Throws on configuration errors; numeric failures and
// infeasibilities are captured in the report with pass = false.
ScenarioOutcome run_scenario(const ScenarioConfig& config);

// Certificates only (no PDE run): requires explicit C1/C2 (and decay_time
// inputs where a system needs them) in the config.
ScenarioOutcome run_certify(const ScenarioConfig& config);

struct SweepPoint {
  std::size_t index = 0;
  std::string key;
  double value = 0.0;
  bool pass = false;
  std::string verdict;
  std::map<std::string, double> metrics; // pulled from the point's report
};

struct SweepOutcome {
  std::vector<SweepPoint> points;
  std::string summary_path;
  bool all_pass = false;
};

// Run the scenario once per value of the dotted config key (e.g. "bump.mu",
// "gap", "n_cells"), each point in its own subdirectory, in parallel across
// `threads` workers.  A failing point records its verdict in its summary row;
// the sweep itself still completes.
SweepOutcome run_sweep(const ScenarioConfig& base, const std::string& key,
                       const std::vector<double>& values, int threads);

// ---- formatting / io helpers (shared by tools and tests) -------------------

// Shortest-faithful decimal with 17 significant digits ("%.17g").
std::string format17(double x);

void write_trace_csv(const Trace& trace, const std::string& path);
void write_snapshot_csv(const Grid& grid, const Snapshot& snap, const std::string& path);

// Minimal structural validation of a report against the published schema
// (docs/report_schema.json): required keys, type tags, and the blanket rule
// that every number in the document is finite.  Returns an empty string on
// success, else a description of the first violation.
std::string validate_report(const std::string& report_json_text,
                            const std::string& schema_json_text);

} // namespace pmfront
