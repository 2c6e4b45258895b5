#include "pmfront/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pmfront {

namespace {

// ---- small utilities --------------------------------------------------------

double get_num(const json& j, const char* where) {
  if (!j.is_number()) {
    throw ConfigError(std::string("config: ") + where + " must be a number");
  }
  return j.get<double>();
}

int get_int(const json& j, const char* where) {
  const double v = get_num(j, where);
  const double r = std::llround(v);
  if (std::fabs(v - r) > 1e-9) {
    throw ConfigError(std::string("config: ") + where + " must be an integer");
  }
  return static_cast<int>(r);
}

// Read-and-consume one key from a JSON object; leftover keys are reported as
// unknown so config typos fail loudly.
template <typename F>
void take(json& obj, const char* key, F&& apply) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  apply(*it);
  obj.erase(it);
}

void expect_empty(const json& obj, const char* section) {
  if (!obj.empty()) {
    throw ConfigError(std::string("config: unknown key '") + obj.begin().key() +
                      "' in section '" + section + "'");
  }
}

std::vector<double> linspace(double a, double b, int k) {
  std::vector<double> out;
  if (k < 2 || !(b > a)) {
    out.push_back(b);
    return out;
  }
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(a + (b - a) * i / (k - 1));
  out.back() = b;
  return out;
}

std::vector<double> interval_times(double a, double b, double interval) {
  std::vector<double> out;
  if (!(interval > 0.0) || !(b > a)) return out;
  for (double t = a + interval; t < b - 1e-12 * std::max(1.0, std::fabs(b));
       t += interval) {
    out.push_back(t);
  }
  out.push_back(b);
  return out;
}

std::vector<double> merge_times(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end(),
                      [](double x, double y) { return std::fabs(x - y) < 1e-12; }),
          a.end());
  return a;
}

void write_text(const std::string& path, const std::string& text) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericsError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw NumericsError("failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- config <-> json --------------------------------------------------------

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["output_dir"] = c.output_dir;
  j["model"] = {{"m", c.params.m},     {"chi", c.params.chi}, {"alpha", c.params.alpha},
                {"dim", c.params.dim}, {"radial", c.params.radial}};
  j["grid"] = {{"n_cells", c.n_cells}, {"half_length", c.half_length}};
  j["bump"] = {{"K0", c.bump.K0}, {"R0", c.bump.R0},       {"d0", c.bump.d0},
               {"x0", c.bump.x0}, {"mu", c.bump.mu},       {"delta", c.bump.delta},
               {"v_floor", c.bump.v_floor}};
  j["controls"] = {{"cfl_diffusion", c.controls.cfl_diffusion},
                   {"cfl_advection", c.controls.cfl_advection},
                   {"dt_max", c.controls.dt_max},
                   {"t_end", c.controls.t_end}};
  j["sampling"] = {{"interval", c.sample_interval}, {"snapshots", c.snapshot_count}};
  j["front"] = {{"rel_threshold", c.rel_threshold}, {"fit_horizon", c.fit_horizon}};
  j["pme"] = {{"resolutions", c.resolutions}, {"t_offset", c.t_offset}};
  j["certificate"] = {{"C1", c.C1},
                      {"C2", c.C2},
                      {"R_envelope", c.R_envelope},
                      {"gap", c.gap},
                      {"structure_rate", c.structure_rate},
                      {"R0_core", c.R0_core},
                      {"eps1", c.eps1},
                      {"delta_request", c.delta_request},
                      {"detect_horizon", c.detect_horizon},
                      {"fit_length", c.fit_length},
                      {"structure_time", c.structure_time},
                      {"decay_time", c.decay_time},
                      {"allow_unsatisfied_hypothesis", c.allow_unsatisfied_hypothesis}};
  j["ordering"] = {{"amplitude", c.nested_amplitude}, {"radius", c.nested_radius}};
  j["threads"] = c.threads;
  return j;
}

ScenarioConfig config_from_json(json j) {
  ScenarioConfig c;
  take(j, "scenario", [&](json& v) { c.scenario = v.get<std::string>(); });
  take(j, "output_dir", [&](json& v) { c.output_dir = v.get<std::string>(); });
  take(j, "model", [&](json& s) {
    take(s, "m", [&](json& v) { c.params.m = get_num(v, "model.m"); });
    take(s, "chi", [&](json& v) { c.params.chi = get_num(v, "model.chi"); });
    take(s, "alpha", [&](json& v) { c.params.alpha = get_num(v, "model.alpha"); });
    take(s, "dim", [&](json& v) { c.params.dim = get_int(v, "model.dim"); });
    take(s, "radial", [&](json& v) { c.params.radial = v.get<bool>(); });
    expect_empty(s, "model");
  });
  take(j, "grid", [&](json& s) {
    take(s, "n_cells", [&](json& v) { c.n_cells = get_int(v, "grid.n_cells"); });
    take(s, "half_length",
         [&](json& v) { c.half_length = get_num(v, "grid.half_length"); });
    expect_empty(s, "grid");
  });
  take(j, "bump", [&](json& s) {
    take(s, "K0", [&](json& v) { c.bump.K0 = get_num(v, "bump.K0"); });
    take(s, "R0", [&](json& v) { c.bump.R0 = get_num(v, "bump.R0"); });
    take(s, "d0", [&](json& v) { c.bump.d0 = get_num(v, "bump.d0"); });
    take(s, "x0", [&](json& v) { c.bump.x0 = get_num(v, "bump.x0"); });
    take(s, "mu", [&](json& v) { c.bump.mu = get_num(v, "bump.mu"); });
    take(s, "delta", [&](json& v) { c.bump.delta = get_num(v, "bump.delta"); });
    take(s, "v_floor", [&](json& v) { c.bump.v_floor = get_num(v, "bump.v_floor"); });
    expect_empty(s, "bump");
  });
  take(j, "controls", [&](json& s) {
    take(s, "cfl_diffusion",
         [&](json& v) { c.controls.cfl_diffusion = get_num(v, "controls.cfl_diffusion"); });
    take(s, "cfl_advection",
         [&](json& v) { c.controls.cfl_advection = get_num(v, "controls.cfl_advection"); });
    take(s, "dt_max", [&](json& v) { c.controls.dt_max = get_num(v, "controls.dt_max"); });
    take(s, "t_end", [&](json& v) { c.controls.t_end = get_num(v, "controls.t_end"); });
    expect_empty(s, "controls");
  });
  take(j, "sampling", [&](json& s) {
    take(s, "interval",
         [&](json& v) { c.sample_interval = get_num(v, "sampling.interval"); });
    take(s, "snapshots",
         [&](json& v) { c.snapshot_count = get_int(v, "sampling.snapshots"); });
    expect_empty(s, "sampling");
  });
  take(j, "front", [&](json& s) {
    take(s, "rel_threshold",
         [&](json& v) { c.rel_threshold = get_num(v, "front.rel_threshold"); });
    take(s, "fit_horizon",
         [&](json& v) { c.fit_horizon = get_num(v, "front.fit_horizon"); });
    expect_empty(s, "front");
  });
  take(j, "pme", [&](json& s) {
    take(s, "resolutions", [&](json& v) {
      c.resolutions.clear();
      for (auto& e : v) c.resolutions.push_back(get_int(e, "pme.resolutions[]"));
    });
    take(s, "t_offset", [&](json& v) { c.t_offset = get_num(v, "pme.t_offset"); });
    expect_empty(s, "pme");
  });
  take(j, "certificate", [&](json& s) {
    take(s, "C1", [&](json& v) { c.C1 = get_num(v, "certificate.C1"); });
    take(s, "C2", [&](json& v) { c.C2 = get_num(v, "certificate.C2"); });
    take(s, "R_envelope",
         [&](json& v) { c.R_envelope = get_num(v, "certificate.R_envelope"); });
    take(s, "gap", [&](json& v) { c.gap = get_num(v, "certificate.gap"); });
    take(s, "structure_rate",
         [&](json& v) { c.structure_rate = get_num(v, "certificate.structure_rate"); });
    take(s, "R0_core", [&](json& v) { c.R0_core = get_num(v, "certificate.R0_core"); });
    take(s, "eps1", [&](json& v) { c.eps1 = get_num(v, "certificate.eps1"); });
    take(s, "delta_request",
         [&](json& v) { c.delta_request = get_num(v, "certificate.delta_request"); });
    take(s, "detect_horizon",
         [&](json& v) { c.detect_horizon = get_num(v, "certificate.detect_horizon"); });
    take(s, "fit_length",
         [&](json& v) { c.fit_length = get_num(v, "certificate.fit_length"); });
    take(s, "structure_time",
         [&](json& v) { c.structure_time = get_num(v, "certificate.structure_time"); });
    take(s, "decay_time",
         [&](json& v) { c.decay_time = get_num(v, "certificate.decay_time"); });
    take(s, "allow_unsatisfied_hypothesis",
         [&](json& v) { c.allow_unsatisfied_hypothesis = v.get<bool>(); });
    expect_empty(s, "certificate");
  });
  take(j, "ordering", [&](json& s) {
    take(s, "amplitude",
         [&](json& v) { c.nested_amplitude = get_num(v, "ordering.amplitude"); });
    take(s, "radius", [&](json& v) { c.nested_radius = get_num(v, "ordering.radius"); });
    expect_empty(s, "ordering");
  });
  take(j, "threads", [&](json& v) { c.threads = get_int(v, "threads"); });
  expect_empty(j, "<top level>");
  return c;
}

// ---- artifact writers -------------------------------------------------------

void write_report(const std::string& out_dir, const json& report) {
  write_text((fs::path(out_dir) / "report.json").string(), report.dump(2) + "\n");
}

void write_certificate_files(const std::string& out_dir,
                             const std::vector<Certificate>& certs) {
  for (const auto& cert : certs) {
    const std::string path =
        (fs::path(out_dir) / "certificates" / (cert.system + ".json")).string();
    write_text(path, certificate_to_json(cert) + "\n");
  }
}

json cert_summary_json(const Certificate& cert, const ModelParams& params,
                       const BumpSpec& spec) {
  json j = json::parse(certificate_to_json(cert));
  const MarginReport rep = check_inequalities(cert, params, spec);
  j["recheck"] = {{"all_nonnegative", rep.all_nonnegative},
                  {"worst", rep.worst},
                  {"worst_name", rep.worst_name}};
  double drift = 0.0;
  if (rep.margins.size() == cert.margins.size()) {
    for (std::size_t i = 0; i < rep.margins.size(); ++i) {
      drift = std::max(drift, std::fabs(rep.margins[i].value - cert.margins[i].value));
    }
  } else {
    drift = std::numeric_limits<double>::infinity();
  }
  j["recheck"]["max_drift"] = drift;
  return j;
}

// ---- scenario plumbing ------------------------------------------------------

struct Experiment {
  ScenarioConfig cfg;
  Grid grid;
  SamplePlan plan;

  Experiment(const ScenarioConfig& c) : cfg(c) {
    validate(c.params);
    grid = make_grid(c.params.dim, c.params.radial, c.half_length, c.n_cells);
  }

  std::function<double(const State&)> front_observer() const {
    const Grid g = grid;
    const ModelParams p = cfg.params;
    const BumpSpec spec = cfg.bump;
    const double thr = cfg.rel_threshold;
    return [g, p, spec, thr](const State& s) {
      const auto rho = front_position(s, g, p, spec, thr);
      return rho ? *rho : -1.0;
    };
  }
};

FrontTrace front_trace_from(const Trace& trace, double threshold) {
  FrontTrace ft;
  ft.threshold = threshold;
  for (const auto& s : trace.samples) {
    ft.times.push_back(s.t);
    ft.rho.push_back(s.front_rho);
  }
  return ft;
}

// Attractant budgets measured over trace samples up to and including t_max.
void measured_budgets(const Trace& trace, double t_max, double& C1, double& C2) {
  C1 = 0.0;
  C2 = 0.0;
  for (const auto& s : trace.samples) {
    if (s.t <= t_max + 1e-12) {
      C1 = std::max(C1, s.gradmax_v);
      C2 = std::max(C2, s.lapmax_v);
    }
  }
}

// Centered difference of v at cell i (one-sided never needed: callers stay
// away from the boundary cells).
double slope_at(const std::vector<double>& v, const Grid& g, int i) {
  return (v[i + 1] - v[i - 1]) / (2.0 * g.dx);
}

// Strictness of a front series at `probes` equally spaced sample indices.
bool strictly_monotone(const std::vector<double>& ts, const std::vector<double>& rho,
                       int probes, int direction) {
  if (ts.size() < 2) return false;
  std::vector<double> picks;
  const int n = static_cast<int>(ts.size());
  const int k = std::min(probes, n);
  for (int i = 0; i < k; ++i) {
    const int idx = (n - 1) * i / (k - 1);
    picks.push_back(rho[idx]);
  }
  for (std::size_t i = 0; i + 1 < picks.size(); ++i) {
    if (picks[i] < 0.0 || picks[i + 1] < 0.0) return false;
    if (direction > 0 && !(picks[i + 1] > picks[i])) return false;
    if (direction < 0 && !(picks[i + 1] < picks[i])) return false;
  }
  return true;
}

struct VerdictAccumulator {
  bool pass = true;
  std::vector<std::string> reasons;
  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      reasons.push_back(why);
    }
  }
  std::string verdict() const {
    if (pass) return "pass";
    std::string v = "fail:";
    for (const auto& r : reasons) v += " " + r + ";";
    return v;
  }
};

ScenarioOutcome finish(const ScenarioConfig& cfg, json& report,
                       const VerdictAccumulator& acc) {
  report["pass"] = acc.pass;
  report["verdict"] = acc.verdict();
  write_report(cfg.output_dir, report);
  ScenarioOutcome out;
  out.pass = acc.pass;
  out.verdict = acc.verdict();
  out.report_path = (fs::path(cfg.output_dir) / "report.json").string();
  out.report_json = report.dump(2) + "\n";
  return out;
}

json report_skeleton(const ScenarioConfig& cfg) {
  json report;
  report["schema_version"] = 1;
  report["scenario"] = cfg.scenario;
  report["config"] = config_to_json(cfg);
  return report;
}

void write_run_artifacts(const ScenarioConfig& cfg, const Grid& grid,
                         const Trace& trace) {
  write_trace_csv(trace, (fs::path(cfg.output_dir) / "trace.csv").string());
  for (const auto& snap : trace.snapshots) {
    char label[64];
    std::snprintf(label, sizeof label, "t_%.10g.csv", snap.t);
    write_snapshot_csv(grid, snap,
                       (fs::path(cfg.output_dir) / "snapshots" / label).string());
  }
}

json trace_summary(const Trace& trace) {
  json j;
  if (!trace.samples.empty()) {
    double mass0 = trace.samples.front().mass_u;
    double worst = 0.0;
    double vmax_prev = trace.samples.front().linf_v;
    bool v_monotone = true;
    double min_u = std::numeric_limits<double>::infinity();
    for (const auto& s : trace.samples) {
      worst = std::max(worst, std::fabs(s.mass_u - mass0));
      if (s.linf_v > vmax_prev * (1.0 + 1e-12)) v_monotone = false;
      vmax_prev = s.linf_v;
      min_u = std::min(min_u, s.min_u);
    }
    j["mass_u_initial"] = mass0;
    j["mass_u_drift_abs"] = worst;
    j["mass_u_drift_rel"] = mass0 != 0.0 ? worst / std::fabs(mass0) : worst;
    j["vmax_nonincreasing"] = v_monotone;
    j["min_u_over_run"] = min_u;
  }
  j["steps"] = trace.steps;
  j["max_support_growth_cells"] = trace.max_support_growth;
  return j;
}

json fit_to_json(const DecayFit& f) {
  return json{{"C", f.C},
              {"rate", f.c},
              {"r_squared", f.r_squared},
              {"window", {f.window_lo, f.window_hi}},
              {"ubar", f.ubar},
              {"n_points", f.n_points}};
}

// ---- scenarios --------------------------------------------------------------

ScenarioOutcome scenario_pme(const ScenarioConfig& cfg) {
  if (cfg.params.chi != 0.0) {
    throw ConfigError("pme-validate: requires chi = 0 (pure degenerate diffusion)");
  }
  if (cfg.resolutions.size() < 2) {
    throw ConfigError("pme-validate: need at least two resolutions for an order");
  }
  json report = report_skeleton(cfg);
  VerdictAccumulator acc;
  const BarenblattParams bp = make_barenblatt(cfg.params.m, cfg.params.dim);

  std::vector<double> dxs, linf_errors, l1_errors, front_errors;
  for (std::size_t ri = 0; ri < cfg.resolutions.size(); ++ri) {
    ScenarioConfig sub = cfg;
    sub.n_cells = cfg.resolutions[ri];
    sub.output_dir =
        (fs::path(cfg.output_dir) / ("res_" + std::to_string(sub.n_cells))).string();
    Experiment ex(sub);
    State state = make_state(ex.grid, barenblatt_u0(ex.grid, sub.params, sub.t_offset),
                             std::vector<double>(ex.grid.n_cells, 0.0));
    const double interval = sub.sample_interval > 0.0
                                ? sub.sample_interval
                                : sub.controls.t_end / 10.0;
    SamplePlan plan;
    plan.sample_times = interval_times(0.0, sub.controls.t_end, interval);
    plan.snapshot_times = {0.0, sub.controls.t_end};
    plan.front_fn = ex.front_observer();
    Trace trace = run(state, sub.params, ex.grid, sub.controls, plan);
    write_run_artifacts(sub, ex.grid, trace);

    const double t_final = sub.t_offset + sub.controls.t_end;
    double e_inf = 0.0, e_l1 = 0.0;
    for (int i = 0; i < ex.grid.n_cells; ++i) {
      const double ref = barenblatt_eval(ex.grid.centers[i], t_final, bp);
      e_inf = std::max(e_inf, std::fabs(state.u[i] - ref));
      e_l1 += std::fabs(state.u[i] - ref) * ex.grid.weights[i];
    }
    const double rho_ref = barenblatt_front_radius(t_final, bp);
    const auto rho = front_position(state, ex.grid, sub.params, sub.bump,
                                    sub.rel_threshold);
    dxs.push_back(ex.grid.dx);
    linf_errors.push_back(e_inf);
    l1_errors.push_back(e_l1);
    front_errors.push_back(rho ? std::fabs(*rho - rho_ref) : rho_ref);
    acc.require(trace.max_support_growth <= 1, "support grew faster than one cell per step");
    const auto& ts = trace_summary(trace);
    acc.require(ts["mass_u_drift_rel"].get<double>() <= 1e-12,
                "mass drift above 1e-12 at " + std::to_string(sub.n_cells) + " cells");
  }

  // Order of L1 convergence from a least-squares slope of log E vs log dx.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int K = static_cast<int>(dxs.size());
  for (int i = 0; i < K; ++i) {
    const double x = std::log(dxs[i]);
    const double y = std::log(std::max(l1_errors[i], 1e-300));
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double order = (K * sxy - sx * sy) / (K * sxx - sx * sx);

  report["pme"] = {{"resolutions", cfg.resolutions},
                   {"dx", dxs},
                   {"linf_errors", linf_errors},
                   {"l1_errors", l1_errors},
                   {"front_errors", front_errors},
                   {"order_l1", order},
                   {"linf_error_finest", linf_errors.back()},
                   {"front_error_within_2dx", front_errors.back() <= 2.0 * dxs.back()}};
  acc.require(linf_errors.back() <= 2e-2,
              "sup error at the finest resolution exceeds 2e-2");
  acc.require(order >= 0.8, "L1 convergence order below 0.8");
  return finish(cfg, report, acc);
}

ScenarioOutcome scenario_exact_speed(const ScenarioConfig& cfg) {
  Experiment ex(cfg);
  validate(cfg.bump, cfg.params, ex.grid);
  if (cfg.controls.t_end < cfg.fit_horizon) {
    throw ConfigError("exact-speed: t_end must cover the fit horizon");
  }
  json report = report_skeleton(cfg);
  VerdictAccumulator acc;

  const double predicted = predicted_speed(cfg.params, cfg.bump); // checks d0
  State state = make_state(ex.grid, bump_u0(ex.grid, cfg.bump, cfg.params),
                           aggregating_v0(ex.grid, cfg.bump));
  const double interval =
      cfg.sample_interval > 0.0 ? cfg.sample_interval : cfg.fit_horizon / 40.0;
  SamplePlan plan;
  plan.sample_times = interval_times(0.0, cfg.controls.t_end, interval);
  plan.snapshot_times = linspace(0.0, cfg.controls.t_end,
                                 std::max(2, cfg.snapshot_count));
  plan.front_fn = ex.front_observer();
  Trace trace = run(state, cfg.params, ex.grid, cfg.controls, plan);
  write_run_artifacts(cfg, ex.grid, trace);
  report["observables"] = trace_summary(trace);

  const FrontTrace front = front_trace_from(trace, cfg.rel_threshold);
  const SpeedFit fit = initial_speed(front, cfg.fit_horizon);
  const double tol = std::max(0.15 * std::fabs(predicted), 0.08);
  report["speed"] = {{"predicted", predicted},
                     {"measured", fit.speed},
                     {"stderr", fit.stderr_},
                     {"n_slopes", fit.n_slopes},
                     {"tolerance", tol},
                     {"abs_error", std::fabs(fit.speed - predicted)}};
  acc.require(std::fabs(fit.speed - predicted) <= tol,
              "measured speed misses the predicted value");

  // Monotonicity probes over the fit window (9 equispaced samples).
  std::vector<double> wt, wr;
  for (std::size_t i = 0; i < front.times.size(); ++i) {
    if (front.times[i] <= cfg.fit_horizon * (1.0 + 1e-12)) {
      wt.push_back(front.times[i]);
      wr.push_back(front.rho[i]);
    }
  }
  report["speed"]["strictly_increasing"] = strictly_monotone(wt, wr, 9, +1);
  report["speed"]["strictly_decreasing"] = strictly_monotone(wt, wr, 9, -1);

  // Envelope pair; budgets measured from the run unless supplied.
  double C1 = cfg.C1, C2 = cfg.C2;
  if (C1 < 0.0 || C2 < 0.0) {
    double c1m = 0.0, c2m = 0.0;
    measured_budgets(trace, cfg.fit_horizon, c1m, c2m);
    if (C1 < 0.0) C1 = 1.25 * c1m + 1e-9;
    if (C2 < 0.0) C2 = 1.25 * c2m + 1e-9;
  }
  ExactSpeedProfiles profiles;
  try {
    profiles =
        exact_speed_profiles(cfg.params, cfg.bump, cfg.gap, cfg.structure_rate, C1, C2);
  } catch (const InfeasibleError& err) {
    report["infeasible"] = {{"message", err.what()},
                            {"binding", err.binding_inequality},
                            {"margin", err.best_margin}};
    acc.require(false, "bracket profile search infeasible");
    return finish(cfg, report, acc);
  }
  report["speed"]["bracket_beta"] = profiles.beta;
  report["speed"]["implied_speed"] = cfg.bump.R0 * profiles.beta / 2.0;
  acc.require(std::fabs(cfg.bump.R0 * profiles.beta / 2.0 - predicted) <=
                  1e-12 * std::max(1.0, std::fabs(predicted)),
              "bracket exponent does not reproduce the predicted speed");

  // Dedicated short run across both windows for domination evidence and the
  // structure-budget cross-check.
  const double t_end2 = std::max(profiles.upper.t_end, profiles.lower.t_end);
  State s2 = make_state(ex.grid, bump_u0(ex.grid, cfg.bump, cfg.params),
                        aggregating_v0(ex.grid, cfg.bump));
  StepControls ctl2 = cfg.controls;
  ctl2.t_end = t_end2;
  SamplePlan plan2;
  plan2.sample_times = linspace(0.0, t_end2, 33);
  plan2.snapshot_times = merge_times(linspace(0.0, profiles.upper.t_end, 13),
                                     linspace(0.0, profiles.lower.t_end, 13));
  plan2.front_fn = ex.front_observer();
  Trace trace2 = run(s2, cfg.params, ex.grid, ctl2, plan2);

  json certs = json::array();
  for (const Certificate* cert : {&profiles.upper, &profiles.lower}) {
    json cj = cert_summary_json(*cert, cfg.params, cfg.bump);
    const DominationResult dom = numeric_domination(trace2, *cert, ex.grid);
    cj["domination"] = {{"holds", dom.holds},
                        {"worst_violation", dom.worst_violation},
                        {"tol", dom.tol},
                        {"snapshots", dom.snapshots_checked}};
    acc.require(dom.holds, cert->system + ": domination fails on the window");
    acc.require(cj["recheck"]["all_nonnegative"].get<bool>(),
                cert->system + ": margin recheck failed");
    certs.push_back(cj);
  }

  // Measured well-shape envelope against the linear degradation budget.
  {
    const double mu = cfg.bump.mu;
    const double rate = profiles.upper.structure_rate;
    const double r_lo = cfg.bump.R0 / 4.0;
    // Stay inside the exactly-quadratic zone of the initial well (the ramp
    // band beyond R0 + delta has shallower slope by construction).
    const double r_hi = std::min(cfg.bump.R0 + 0.5 * cfg.bump.delta,
                                 cfg.bump.R0 + cfg.bump.delta - 1.5 * ex.grid.dx);
    double worst_low = std::numeric_limits<double>::infinity();
    double worst_high = worst_low;
    for (const auto& snap : trace2.snapshots) {
      double mu_min = std::numeric_limits<double>::infinity();
      double mu_max = -mu_min;
      for (int i = 1; i + 1 < ex.grid.n_cells; ++i) {
        const double x = ex.grid.centers[i] - cfg.bump.x0;
        const double r = std::fabs(x);
        if (r < r_lo || r > r_hi) continue;
        const double ratio = -(x * slope_at(snap.v, ex.grid, i)) / (r * r);
        mu_min = std::min(mu_min, ratio);
        mu_max = std::max(mu_max, ratio);
      }
      if (!std::isfinite(mu_min)) continue;
      if (snap.t <= profiles.upper.t_end + 1e-15) {
        worst_low = std::min(worst_low, mu_min - mu * (1.0 - rate * snap.t));
      }
      if (snap.t <= profiles.lower.t_end + 1e-15) {
        worst_high = std::min(worst_high, mu * (1.0 + rate * snap.t) - mu_max);
      }
    }
    report["structure"] = {{"rate_budget", rate},
                           {"envelope_margin_lower", worst_low},
                           {"envelope_margin_upper", worst_high},
                           {"C1", C1},
                           {"C2", C2}};
    // At t = 0 the sampled well is exactly quadratic, so the margin starts at
    // zero and only rounding separates it from the envelope; allow that much.
    const double slack = -1e-9 * std::max(1.0, mu);
    acc.require(worst_low >= slack && worst_high >= slack,
                "attractant well degraded faster than the certificate budget");
  }

  report["certificates"] = certs;
  write_certificate_files(cfg.output_dir, {profiles.upper, profiles.lower});
  return finish(cfg, report, acc);
}

ScenarioOutcome scenario_shrinking(const ScenarioConfig& cfg) {
  Experiment ex(cfg);
  validate(cfg.bump, cfg.params, ex.grid);
  const HypothesisCheck hyp = hypothesis_shrinking(cfg.params, cfg.bump);
  if (!hyp.satisfied && !cfg.allow_unsatisfied_hypothesis) {
    throw ConfigError("shrinking: aggregation hypothesis not satisfied (margin " +
                      std::to_string(hyp.margin) +
                      "); set certificate.allow_unsatisfied_hypothesis to probe anyway");
  }
  json report = report_skeleton(cfg);
  VerdictAccumulator acc;
  report["hypothesis"] = {{"satisfied", hyp.satisfied},
                          {"margin", hyp.margin},
                          {"threshold", hyp.threshold}};

  // Phase 1: probe run over the unit observation window to measure the
  // attractant budgets and how long the well shape persists at half strength.
  State probe = make_state(ex.grid, bump_u0(ex.grid, cfg.bump, cfg.params),
                           aggregating_v0(ex.grid, cfg.bump));
  StepControls ctl1 = cfg.controls;
  ctl1.t_end = 1.0;
  SamplePlan plan1;
  plan1.sample_times = interval_times(0.0, 1.0, 0.01);
  plan1.snapshot_times = linspace(0.0, 1.0, 101);
  Trace probe_trace = run(probe, cfg.params, ex.grid, ctl1, plan1);

  double C1 = cfg.C1, C2 = cfg.C2;
  if (C1 < 0.0 || C2 < 0.0) {
    double c1m = 0.0, c2m = 0.0;
    measured_budgets(probe_trace, 1.0, c1m, c2m);
    if (C1 < 0.0) C1 = c1m;
    if (C2 < 0.0) C2 = c2m;
  }

  // Half-strength well shape: inward slope at least mu/2 * r on the outer
  // half of the bump ball, and bounded outward slope in the core.
  const double mu = cfg.bump.mu;
  double structure_time = 0.0;
  for (const auto& snap : probe_trace.snapshots) {
    bool ok = true;
    for (int i = 1; i + 1 < ex.grid.n_cells && ok; ++i) {
      const double x = ex.grid.centers[i] - cfg.bump.x0;
      const double r = std::fabs(x);
      if (r > cfg.bump.R0) continue;
      const double inward = x * slope_at(snap.v, ex.grid, i);
      if (r > 0.5 * cfg.bump.R0) {
        ok = inward <= -0.5 * mu * r * r + 1e-12;
      } else {
        ok = inward <= 0.5 * mu * cfg.bump.R0 * cfg.bump.R0 + 1e-12;
      }
    }
    if (!ok) break;
    structure_time = snap.t;
  }
  report["structure"] = {{"C1", C1}, {"C2", C2}, {"structure_time", structure_time}};
  acc.require(structure_time > 0.0, "attractant well shape failed at t = 0");

  std::vector<Certificate> certs;
  try {
    Certificate cert =
        shrinking_certificate(cfg.params, cfg.bump, C1, C2, structure_time);
    certs.push_back(cert);
  } catch (const InfeasibleError& err) {
    report["infeasible"] = {{"message", err.what()},
                            {"binding", err.binding_inequality},
                            {"margin", err.best_margin}};
    acc.require(false, "certificate search infeasible");
  }

  if (!certs.empty()) {
    const Certificate& cert = certs.front();
    // Phase 2: fresh run over the certificate window for domination evidence.
    State state = make_state(ex.grid, bump_u0(ex.grid, cfg.bump, cfg.params),
                             aggregating_v0(ex.grid, cfg.bump));
    StepControls ctl2 = cfg.controls;
    ctl2.t_end = cert.t0;
    SamplePlan plan2;
    plan2.sample_times = linspace(0.0, cert.t0, 41);
    plan2.snapshot_times = linspace(0.0, cert.t0, 21);
    plan2.front_fn = ex.front_observer();
    Trace trace = run(state, cfg.params, ex.grid, ctl2, plan2);
    write_run_artifacts(cfg, ex.grid, trace);
    report["observables"] = trace_summary(trace);

    json cj = cert_summary_json(cert, cfg.params, cfg.bump);
    const DominationResult dom = numeric_domination(trace, cert, ex.grid);
    cj["domination"] = {{"holds", dom.holds},
                        {"worst_violation", dom.worst_violation},
                        {"tol", dom.tol},
                        {"snapshots", dom.snapshots_checked}};
    acc.require(dom.holds, "domination fails on the certificate window");
    acc.require(cj["recheck"]["all_nonnegative"].get<bool>(), "margin recheck failed");
    acc.require(cert.worst_margin() >= 0.0, "emitted margins not all nonnegative");
    report["certificates"] = json::array({cj});
    write_certificate_files(cfg.output_dir, certs);
  } else {
    write_run_artifacts(cfg, ex.grid, probe_trace);
    report["observables"] = trace_summary(probe_trace);
  }
  return finish(cfg, report, acc);
}

ScenarioOutcome scenario_finite_speed(const ScenarioConfig& cfg) {
  Experiment ex(cfg);
  validate(cfg.bump, cfg.params, ex.grid);
  json report = report_skeleton(cfg);
  VerdictAccumulator acc;
  const double R_env = cfg.R_envelope > 0.0
                           ? cfg.R_envelope
                           : 0.5 * (cfg.bump.R0 + cfg.half_length);
  if (!(R_env > cfg.bump.R0) || !(R_env < cfg.half_length)) {
    throw ConfigError("finite-speed: envelope radius must lie between R0 and the "
                      "domain boundary");
  }

  // Phase 1: unit-window probe for the attractant budgets.
  State probe = make_state(ex.grid, bump_u0(ex.grid, cfg.bump, cfg.params),
                           aggregating_v0(ex.grid, cfg.bump));
  StepControls ctl1 = cfg.controls;
  ctl1.t_end = 1.0;
  SamplePlan plan1;
  plan1.sample_times = interval_times(0.0, 1.0, 0.01);
  Trace probe_trace = run(probe, cfg.params, ex.grid, ctl1, plan1);
  double C1 = cfg.C1, C2 = cfg.C2;
  if (C1 < 0.0 || C2 < 0.0) {
    double c1m = 0.0, c2m = 0.0;
    measured_budgets(probe_trace, 1.0, c1m, c2m);
    if (C1 < 0.0) C1 = c1m;
    if (C2 < 0.0) C2 = c2m;
  }
  report["structure"] = {{"C1", C1}, {"C2", C2}};

  Certificate cert;
  try {
    cert = finite_speed_certificate(cfg.params, cfg.bump, C1, C2, R_env);
  } catch (const InfeasibleError& err) {
    report["infeasible"] = {{"message", err.what()},
                            {"binding", err.binding_inequality},
                            {"margin", err.best_margin}};
    acc.require(false, "certificate search infeasible");
    write_run_artifacts(cfg, ex.grid, probe_trace);
    report["observables"] = trace_summary(probe_trace);
    return finish(cfg, report, acc);
  }

  // Phase 2: run over the certificate window; support must stay inside the
  // envelope ball the whole way.
  State state = make_state(ex.grid, bump_u0(ex.grid, cfg.bump, cfg.params),
                           aggregating_v0(ex.grid, cfg.bump));
  StepControls ctl2 = cfg.controls;
  ctl2.t_end = cert.t0;
  SamplePlan plan2;
  plan2.sample_times = linspace(0.0, cert.t0, 41);
  plan2.snapshot_times = linspace(0.0, cert.t0, 17);
  plan2.front_fn = ex.front_observer();
  Trace trace = run(state, cfg.params, ex.grid, ctl2, plan2);
  write_run_artifacts(cfg, ex.grid, trace);
  report["observables"] = trace_summary(trace);

  double front_max = 0.0;
  for (const auto& s : trace.samples) front_max = std::max(front_max, s.front_rho);
  report["containment"] = {{"R_envelope", R_env},
                           {"front_max", front_max},
                           {"margin", R_env - front_max}};
  acc.require(front_max <= R_env, "support left the envelope ball");
  acc.require(trace.max_support_growth <= 1, "support grew faster than one cell per step");

  json cj = cert_summary_json(cert, cfg.params, cfg.bump);
  const DominationResult dom = numeric_domination(trace, cert, ex.grid);
  cj["domination"] = {{"holds", dom.holds},
                      {"worst_violation", dom.worst_violation},
                      {"tol", dom.tol},
                      {"snapshots", dom.snapshots_checked}};
  acc.require(dom.holds, "domination fails on the certificate window");
  acc.require(cj["recheck"]["all_nonnegative"].get<bool>(), "margin recheck failed");
  report["certificates"] = json::array({cj});
  write_certificate_files(cfg.output_dir, {cert});
  return finish(cfg, report, acc);
}

ScenarioOutcome scenario_expanding(const ScenarioConfig& cfg, bool fits_only) {
  Experiment ex(cfg);
  validate(cfg.bump, cfg.params, ex.grid);
  json report = report_skeleton(cfg);
  VerdictAccumulator acc;

  State state = make_state(ex.grid, bump_u0(ex.grid, cfg.bump, cfg.params),
                           aggregating_v0(ex.grid, cfg.bump));
  const double ubar = integrate(state.u, ex.grid) / ex.grid.measure();
  const double grad_v0 = grad_max(state.v, ex.grid);
  report["ubar"] = ubar;

  if (fits_only) {
    // Relaxation study only: run to t_end, fit the tails.
    SamplePlan plan;
    const double interval =
        cfg.sample_interval > 0.0 ? cfg.sample_interval : cfg.controls.t_end / 200.0;
    plan.sample_times = interval_times(0.0, cfg.controls.t_end, interval);
    plan.snapshot_times = linspace(0.0, cfg.controls.t_end,
                                   std::max(2, cfg.snapshot_count));
    plan.front_fn = ex.front_observer();
    plan.aux_fn = [ubar](const State& s) {
      double dev = 0.0;
      for (double u : s.u) dev = std::max(dev, std::fabs(u - ubar));
      return dev;
    };
    Trace trace = run(state, cfg.params, ex.grid, cfg.controls, plan);
    write_run_artifacts(cfg, ex.grid, trace);
    report["observables"] = trace_summary(trace);
    std::vector<double> ts, udev, vtot;
    for (const auto& s : trace.samples) {
      ts.push_back(s.t);
      udev.push_back(s.aux);
      vtot.push_back(s.linf_v + s.gradmax_v);
    }
    const double lo = std::max(0.0, cfg.controls.t_end - cfg.fit_length);
    DecayFit fu = fit_exponential(ts, udev, lo, cfg.controls.t_end);
    fu.ubar = ubar;
    DecayFit fv = fit_exponential(ts, vtot, lo, cfg.controls.t_end);
    report["fits"] = {{"u_dev", fit_to_json(fu)}, {"v_total", fit_to_json(fv)}};
    acc.require(fu.c > 0.0, "density deviation is not decaying");
    acc.require(fv.c > 0.0, "attractant is not decaying");
    return finish(cfg, report, acc);
  }

  const double eps1 = cfg.eps1 > 0.0 ? cfg.eps1 : 0.5 * ubar;
  const double R0_core = cfg.R0_core > 0.0 ? cfg.R0_core : 0.97 * cfg.half_length;
  const double R_domain = cfg.half_length;

  // The drift budget delta is decay-time independent; pull it from a probe
  // certificate anchored at zero.
  const double delta =
      expanding_certificate(cfg.params, eps1, R0_core, R_domain, cfg.delta_request, 0.0)
          .delta;
  report["delta"] = delta;

  // Phase A: run to the detection horizon; find the first snapshot where the
  // attractant is below the drift budget and the core is filled to eps1.
  StepControls ctlA = cfg.controls;
  ctlA.t_end = cfg.detect_horizon;
  SamplePlan planA;
  planA.sample_times = interval_times(0.0, cfg.detect_horizon, 0.05);
  planA.snapshot_times = linspace(0.0, cfg.detect_horizon,
                                  static_cast<int>(cfg.detect_horizon / 0.25) + 1);
  planA.front_fn = ex.front_observer();
  planA.aux_fn = [ubar](const State& s) {
    double dev = 0.0;
    for (double u : s.u) dev = std::max(dev, std::fabs(u - ubar));
    return dev;
  };
  Trace traceA = run(state, cfg.params, ex.grid, ctlA, planA);

  double decay_time = -1.0;
  double core_margin = 0.0;
  for (const auto& snap : traceA.snapshots) {
    if (grad_max(snap.v, ex.grid) > delta || lap_max(snap.v, ex.grid) > delta) continue;
    double core_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ex.grid.n_cells; ++i) {
      if (std::fabs(ex.grid.centers[i]) <= R0_core) {
        core_min = std::min(core_min, snap.u[i]);
      }
    }
    if (core_min >= eps1) {
      decay_time = snap.t;
      core_margin = core_min - eps1;
      break;
    }
  }
  report["structure"] = {{"decay_time", decay_time}, {"core_margin", core_margin}};
  if (decay_time < 0.0) {
    acc.require(false, "attractant never decayed below the drift budget within the "
                       "detection horizon");
    write_run_artifacts(cfg, ex.grid, traceA);
    report["observables"] = trace_summary(traceA);
    return finish(cfg, report, acc);
  }

  Certificate cert;
  try {
    cert = expanding_certificate(cfg.params, eps1, R0_core, R_domain,
                                 cfg.delta_request, decay_time);
  } catch (const InfeasibleError& err) {
    report["infeasible"] = {{"message", err.what()},
                            {"binding", err.binding_inequality},
                            {"margin", err.best_margin}};
    acc.require(false, "certificate search infeasible");
    write_run_artifacts(cfg, ex.grid, traceA);
    report["observables"] = trace_summary(traceA);
    return finish(cfg, report, acc);
  }

  // Phase B: continue to the window end with dense sampling through the fit
  // region and geometric sampling beyond.
  StepControls ctlB = cfg.controls;
  ctlB.t_end = cert.t_end;
  const double dense_hi = std::min(cert.t_end, cert.t0 + 2.0 * cfg.fit_length);
  SamplePlan planB;
  planB.sample_times = interval_times(state.t, dense_hi, 0.1);
  {
    std::vector<double> geo;
    const double lo = std::max(dense_hi, state.t + 1.0);
    const int kgeo = 60;
    for (int i = 1; i <= kgeo; ++i) {
      geo.push_back(lo + (cert.t_end - lo) *
                             (std::expm1(3.0 * i / kgeo) / std::expm1(3.0)));
    }
    planB.sample_times = merge_times(planB.sample_times, geo);
  }
  {
    std::vector<double> snaps;
    const int ksnap = 31;
    for (int i = 1; i <= ksnap; ++i) {
      snaps.push_back(state.t + (cert.t_end - state.t) *
                                    (std::expm1(4.0 * i / ksnap) / std::expm1(4.0)));
    }
    planB.snapshot_times = snaps;
  }
  planB.front_fn = planA.front_fn;
  planB.aux_fn = planA.aux_fn;
  Trace traceB = run(state, cfg.params, ex.grid, ctlB, planB);

  // Merge the two phases into one artifact set (phase A already covered
  // [0, horizon], including the certificate seed time).
  Trace trace = traceA;
  trace.samples.insert(trace.samples.end(), traceB.samples.begin() + 1,
                       traceB.samples.end());
  trace.snapshots.insert(trace.snapshots.end(), traceB.snapshots.begin(),
                         traceB.snapshots.end());
  trace.steps += traceB.steps;
  trace.max_support_growth =
      std::max(trace.max_support_growth, traceB.max_support_growth);
  write_run_artifacts(cfg, ex.grid, trace);
  report["observables"] = trace_summary(trace);

  json cj = cert_summary_json(cert, cfg.params, cfg.bump);
  const DominationResult dom = numeric_domination(trace, cert, ex.grid);
  cj["domination"] = {{"holds", dom.holds},
                      {"worst_violation", dom.worst_violation},
                      {"tol", dom.tol},
                      {"snapshots", dom.snapshots_checked}};
  acc.require(dom.holds, "lower envelope is not dominated by the density");
  acc.require(cj["recheck"]["all_nonnegative"].get<bool>(), "margin recheck failed");

  // Uniform positivity: from t0 onward every sample's minimum stays above the
  // certified floor, and the attractant budget keeps holding after seeding.
  double min_after_t0 = std::numeric_limits<double>::infinity();
  double budget_after = 0.0;
  for (const auto& s : trace.samples) {
    if (s.t >= cert.t0) min_after_t0 = std::min(min_after_t0, s.min_u);
    if (s.t >= cert.decay_time) {
      budget_after = std::max(budget_after, std::max(s.gradmax_v, s.lapmax_v));
    }
  }
  report["positivity"] = {{"eps0", cert.eps0},
                          {"min_u_after_t0", min_after_t0},
                          {"t0", cert.t0},
                          {"decay_persistence_margin", delta - budget_after}};
  acc.require(min_after_t0 >= cert.eps0, "uniform positivity floor violated after t0");
  acc.require(budget_after <= delta, "attractant rose above the drift budget after "
                                     "the seed time");

  // Relaxation fits past the uniform-positivity onset: the earliest sampled
  // time at which the density clears eps1 on every cell.  From that moment the
  // equation is uniformly parabolic and the exponential relaxation regime
  // starts.  (The envelope's own t0 lies far later -- by then the deviation
  // has already collapsed to the rounding floor and carries no fittable
  // signal; it certifies positivity, not the relaxation clock.)
  double t_pos = -1.0;
  for (const auto& s : trace.samples) {
    if (s.min_u >= eps1) {
      t_pos = s.t;
      break;
    }
  }
  report["positivity"]["uniform_onset"] = t_pos;
  acc.require(t_pos >= 0.0,
              "density never cleared eps1 across the whole domain");
  std::vector<double> ts, udev, vtot;
  for (const auto& s : trace.samples) {
    ts.push_back(s.t);
    udev.push_back(s.aux);
    vtot.push_back(s.linf_v + s.gradmax_v);
  }
  const double fit_lo = t_pos >= 0.0 ? t_pos : cert.t0;
  const double fit_hi = std::min(cert.t_end, fit_lo + cfg.fit_length);
  DecayFit fu = fit_exponential(ts, udev, fit_lo, fit_hi);
  fu.ubar = ubar;
  DecayFit fv = fit_exponential(ts, vtot, fit_lo, fit_hi);
  report["fits"] = {{"u_dev", fit_to_json(fu)}, {"v_total", fit_to_json(fv)}};
  acc.require(fu.c > 0.0 && fu.r_squared >= 0.95,
              "density relaxation fit is not a clean exponential");
  acc.require(fv.c > 0.0 && fv.r_squared >= 0.95,
              "attractant relaxation fit is not a clean exponential");

  const double grad_v_final = trace.samples.back().gradmax_v;
  report["gradient_collapse"] = {{"initial", grad_v0},
                                 {"final", grad_v_final},
                                 {"ratio", grad_v0 > 0.0 ? grad_v_final / grad_v0 : 0.0}};
  acc.require(grad_v_final <= 1e-3 * grad_v0,
              "attractant gradient did not collapse by three orders of magnitude");

  report["certificates"] = json::array({cj});
  write_certificate_files(cfg.output_dir, {cert});
  return finish(cfg, report, acc);
}

ScenarioOutcome scenario_ordering(const ScenarioConfig& cfg) {
  Experiment ex(cfg);
  validate(cfg.bump, cfg.params, ex.grid);
  json report = report_skeleton(cfg);
  VerdictAccumulator acc;

  BumpSpec inner = cfg.bump;
  inner.K0 = cfg.bump.K0 * cfg.nested_amplitude;
  inner.R0 = cfg.bump.R0 * cfg.nested_radius;
  inner.delta = std::min(cfg.bump.delta, 0.5 * inner.R0);
  if (!(cfg.nested_amplitude > 0.0) || !(cfg.nested_amplitude <= 1.0) ||
      !(cfg.nested_radius > 0.0) || !(cfg.nested_radius <= 1.0)) {
    throw ConfigError("ordering: nested factors must lie in (0, 1]");
  }

  const std::vector<double> v_frozen = aggregating_v0(ex.grid, cfg.bump);
  State lo = make_state(ex.grid, bump_u0(ex.grid, inner, cfg.params), v_frozen);
  State hi = make_state(ex.grid, bump_u0(ex.grid, cfg.bump, cfg.params), v_frozen);

  // Lockstep frozen-attractant advance; both states always take the same dt,
  // so the order-preservation property of the update applies step by step.
  const double t_end = cfg.controls.t_end;
  const double interval =
      cfg.sample_interval > 0.0 ? cfg.sample_interval : t_end / 20.0;
  double next_sample = interval;
  double worst = -std::numeric_limits<double>::infinity();
  Trace trace; // trace of the outer (dominating) state for the artifact set
  auto record = [&]() {
    TraceSample smp;
    smp.t = hi.t;
    smp.mass_u = integrate(hi.u, ex.grid);
    smp.mass_v = integrate(hi.v, ex.grid);
    smp.linf_u = linf(hi.u);
    smp.linf_v = linf(hi.v);
    smp.gradmax_v = grad_max(hi.v, ex.grid);
    smp.lapmax_v = lap_max(hi.v, ex.grid);
    smp.min_u = min_value(hi.u);
    smp.front_rho = -1.0;
    smp.aux = 0.0;
    trace.samples.push_back(smp);
    double v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < ex.grid.n_cells; ++i) v = std::max(v, lo.u[i] - hi.u[i]);
    worst = std::max(worst, v);
  };
  record();
  while (hi.t < t_end) {
    double dt = std::min(stable_dt(lo, cfg.params, ex.grid, cfg.controls),
                         stable_dt(hi, cfg.params, ex.grid, cfg.controls));
    dt = std::min(dt, t_end - hi.t);
    if (!(dt > 0.0)) break;
    step_frozen_v(lo, cfg.params, ex.grid, dt);
    step_frozen_v(hi, cfg.params, ex.grid, dt);
    ++trace.steps;
    if (hi.t >= next_sample || hi.t >= t_end) {
      record();
      while (next_sample <= hi.t) next_sample += interval;
    }
  }
  trace.snapshots.push_back(Snapshot{hi.t, hi.u, hi.v});
  write_run_artifacts(cfg, ex.grid, trace);
  report["observables"] = trace_summary(trace);
  report["ordering"] = {{"max_violation", worst},
                        {"tol", 1e-10},
                        {"steps", trace.steps}};
  acc.require(worst <= 1e-10, "nested states crossed under the frozen attractant");
  return finish(cfg, report, acc);
}

} // namespace

// ---- public entry points ----------------------------------------------------

std::string format17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::string text = "t,mass_u,mass_v,linf_u,linf_v,gradmax_v,front_rho,min_u\n";
  for (const auto& s : trace.samples) {
    text += format17(s.t) + "," + format17(s.mass_u) + "," + format17(s.mass_v) + "," +
            format17(s.linf_u) + "," + format17(s.linf_v) + "," +
            format17(s.gradmax_v) + "," + format17(s.front_rho) + "," +
            format17(s.min_u) + "\n";
  }
  write_text(path, text);
}

void write_snapshot_csv(const Grid& grid, const Snapshot& snap, const std::string& path) {
  std::string text = "x,u,v\n";
  for (int i = 0; i < grid.n_cells; ++i) {
    text += format17(grid.centers[i]) + "," + format17(snap.u[i]) + "," +
            format17(snap.v[i]) + "\n";
  }
  write_text(path, text);
}

ScenarioConfig load_config(const std::string& path) {
  return config_from_json_text(read_text(path));
}

ScenarioConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config: invalid JSON: ") + err.what());
  }
  return config_from_json(std::move(j));
}

ScenarioOutcome run_scenario(const ScenarioConfig& cfg) {
  if (cfg.scenario == "pme-validate") return scenario_pme(cfg);
  if (cfg.scenario == "exact-speed") return scenario_exact_speed(cfg);
  if (cfg.scenario == "shrinking") return scenario_shrinking(cfg);
  if (cfg.scenario == "finite-speed") return scenario_finite_speed(cfg);
  if (cfg.scenario == "expanding") return scenario_expanding(cfg, false);
  if (cfg.scenario == "decay") return scenario_expanding(cfg, true);
  if (cfg.scenario == "ordering") return scenario_ordering(cfg);
  throw ConfigError("unknown scenario '" + cfg.scenario + "' (expected one of "
                    "pme-validate, exact-speed, shrinking, finite-speed, expanding, "
                    "decay, ordering)");
}

ScenarioOutcome run_certify(const ScenarioConfig& cfg) {
  json report = report_skeleton(cfg);
  report["mode"] = "certify";
  VerdictAccumulator acc;
  std::vector<Certificate> certs;
  try {
    if (cfg.scenario == "shrinking") {
      if (cfg.C1 < 0.0 || cfg.C2 < 0.0) {
        throw ConfigError("certify: shrinking needs explicit certificate.C1/C2");
      }
      certs.push_back(shrinking_certificate(cfg.params, cfg.bump, cfg.C1, cfg.C2,
                                            cfg.structure_time));
    } else if (cfg.scenario == "finite-speed") {
      if (cfg.C1 < 0.0 || cfg.C2 < 0.0) {
        throw ConfigError("certify: finite-speed needs explicit certificate.C1/C2");
      }
      const double renv = cfg.R_envelope > 0.0
                              ? cfg.R_envelope
                              : 0.5 * (cfg.bump.R0 + cfg.half_length);
      certs.push_back(
          finite_speed_certificate(cfg.params, cfg.bump, cfg.C1, cfg.C2, renv));
    } else if (cfg.scenario == "exact-speed") {
      ExactSpeedProfiles pair = exact_speed_profiles(
          cfg.params, cfg.bump, cfg.gap, cfg.structure_rate, cfg.C1, cfg.C2);
      certs.push_back(pair.upper);
      certs.push_back(pair.lower);
      report["speed"] = {{"bracket_beta", pair.beta},
                         {"implied_speed", cfg.bump.R0 * pair.beta / 2.0}};
    } else if (cfg.scenario == "expanding") {
      if (!(cfg.eps1 > 0.0)) {
        throw ConfigError("certify: expanding needs explicit certificate.eps1");
      }
      const double core = cfg.R0_core > 0.0 ? cfg.R0_core : 0.97 * cfg.half_length;
      certs.push_back(expanding_certificate(cfg.params, cfg.eps1, core,
                                            cfg.half_length, cfg.delta_request,
                                            cfg.decay_time));
    } else {
      throw ConfigError("certify: scenario '" + cfg.scenario +
                        "' has no certificate system");
    }
  } catch (const InfeasibleError& err) {
    report["infeasible"] = {{"message", err.what()},
                            {"binding", err.binding_inequality},
                            {"margin", err.best_margin}};
    acc.require(false, "certificate search infeasible");
  }
  json arr = json::array();
  for (const auto& cert : certs) {
    json cj = cert_summary_json(cert, cfg.params, cfg.bump);
    acc.require(cj["recheck"]["all_nonnegative"].get<bool>(),
                cert.system + ": margin recheck failed");
    arr.push_back(cj);
  }
  report["certificates"] = arr;
  write_certificate_files(cfg.output_dir, certs);
  return finish(cfg, report, acc);
}

SweepOutcome run_sweep(const ScenarioConfig& base, const std::string& key,
                       const std::vector<double>& values, int threads) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  const json base_json = config_to_json(base);

  // Resolve the dotted key path once so typos fail before any run starts.
  std::vector<std::string> path;
  {
    std::string part;
    for (char ch : key) {
      if (ch == '.') {
        if (part.empty()) throw ConfigError("sweep: malformed key '" + key + "'");
        path.push_back(part);
        part.clear();
      } else {
        part += ch;
      }
    }
    if (part.empty()) throw ConfigError("sweep: malformed key '" + key + "'");
    path.push_back(part);
    const json* node = &base_json;
    for (const auto& p : path) {
      if (!node->is_object() || !node->contains(p)) {
        throw ConfigError("sweep: unknown config key '" + key + "'");
      }
      node = &(*node)[p];
    }
    if (!node->is_number()) {
      throw ConfigError("sweep: key '" + key + "' is not numeric");
    }
  }

  SweepOutcome out;
  out.points.resize(values.size());
  std::atomic<std::size_t> cursor{0};
  int workers = threads > 0 ? threads
                            : (base.threads > 0
                                   ? base.threads
                                   : static_cast<int>(std::thread::hardware_concurrency()));
  if (workers < 1) workers = 1;
  workers = std::min<int>(workers, static_cast<int>(values.size()));

  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = cursor.fetch_add(1);
      if (idx >= values.size()) return;
      SweepPoint& pt = out.points[idx];
      pt.index = idx;
      pt.key = key;
      pt.value = values[idx];
      try {
        json cfg_json = base_json;
        json* node = &cfg_json;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &(*node)[path[i]];
        const bool integral = (*node)[path.back()].is_number_integer();
        if (integral) {
          (*node)[path.back()] = static_cast<long long>(std::llround(values[idx]));
        } else {
          (*node)[path.back()] = values[idx];
        }
        ScenarioConfig cfg = config_from_json(cfg_json);
        char tag[128];
        std::string flat = key;
        std::replace(flat.begin(), flat.end(), '.', '_');
        std::snprintf(tag, sizeof tag, "p%02zu_%s_%.6g", idx, flat.c_str(), values[idx]);
        cfg.output_dir = (fs::path(base.output_dir) / tag).string();
        const ScenarioOutcome res = run_scenario(cfg);
        pt.pass = res.pass;
        pt.verdict = res.verdict;
        const json rep = json::parse(res.report_json);
        if (rep.contains("speed")) {
          if (rep["speed"].contains("measured")) {
            pt.metrics["measured_speed"] = rep["speed"]["measured"].get<double>();
          }
          if (rep["speed"].contains("predicted")) {
            pt.metrics["predicted_speed"] = rep["speed"]["predicted"].get<double>();
          }
        }
        if (rep.contains("certificates") && !rep["certificates"].empty()) {
          double worst = std::numeric_limits<double>::infinity();
          for (const auto& cj : rep["certificates"]) {
            for (const auto& [name, val] : cj["margins"].items()) {
              (void)name;
              worst = std::min(worst, val.get<double>());
            }
          }
          pt.metrics["worst_margin"] = worst;
        }
      } catch (const std::exception& err) {
        pt.pass = false;
        std::string what = err.what();
        std::replace(what.begin(), what.end(), ',', ';');
        std::replace(what.begin(), what.end(), '\n', ' ');
        pt.verdict = "error: " + what;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::string csv = "index,key,value,pass,measured_speed,predicted_speed,worst_margin,verdict\n";
  for (const auto& pt : out.points) {
    auto metric = [&](const char* name) {
      auto it = pt.metrics.find(name);
      return it == pt.metrics.end() ? std::string() : format17(it->second);
    };
    std::string verdict = pt.verdict;
    std::replace(verdict.begin(), verdict.end(), ',', ';');
    std::replace(verdict.begin(), verdict.end(), '\n', ' ');
    csv += std::to_string(pt.index) + "," + pt.key + "," + format17(pt.value) + "," +
           (pt.pass ? "true" : "false") + "," + metric("measured_speed") + "," +
           metric("predicted_speed") + "," + metric("worst_margin") + "," + verdict +
           "\n";
  }
  out.summary_path = (fs::path(base.output_dir) / "summary.csv").string();
  write_text(out.summary_path, csv);
  out.all_pass = std::all_of(out.points.begin(), out.points.end(),
                             [](const SweepPoint& p) { return p.pass; });
  return out;
}

// ---- report schema validation ------------------------------------------------

namespace {

bool type_matches(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "integer") return value.is_number_integer();
  if (type == "number") return value.is_number();
  return false;
}

std::string check_finite(const json& node, const std::string& where) {
  if (node.is_number_float()) {
    const double v = node.get<double>();
    if (!std::isfinite(v)) return "non-finite number at " + where;
  } else if (node.is_object()) {
    for (const auto& [k, v] : node.items()) {
      const std::string err = check_finite(v, where + "." + k);
      if (!err.empty()) return err;
    }
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      const std::string err = check_finite(node[i], where + "[" + std::to_string(i) + "]");
      if (!err.empty()) return err;
    }
  }
  return {};
}

std::string check_schema(const json& value, const json& schema, const std::string& where) {
  if (schema.contains("type")) {
    const std::string type = schema["type"].get<std::string>();
    if (!type_matches(value, type)) {
      return where + ": expected " + type;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) {
      if (e == value) { found = true; break; }
    }
    if (!found) return where + ": value not in enum";
  }
  if (schema.contains("required")) {
    for (const auto& r : schema["required"]) {
      if (!value.contains(r.get<std::string>())) {
        return where + ": missing required key '" + r.get<std::string>() + "'";
      }
    }
  }
  if (schema.contains("properties") && value.is_object()) {
    for (const auto& [k, sub] : schema["properties"].items()) {
      if (value.contains(k)) {
        const std::string err = check_schema(value[k], sub, where + "." + k);
        if (!err.empty()) return err;
      }
    }
  }
  if (schema.contains("items") && value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      const std::string err =
          check_schema(value[i], schema["items"], where + "[" + std::to_string(i) + "]");
      if (!err.empty()) return err;
    }
  }
  return {};
}

} // namespace

std::string validate_report(const std::string& report_json_text,
                            const std::string& schema_json_text) {
  json report, schema;
  try {
    report = json::parse(report_json_text);
  } catch (const json::parse_error& err) {
    return std::string("report is not valid JSON: ") + err.what();
  }
  try {
    schema = json::parse(schema_json_text);
  } catch (const json::parse_error& err) {
    return std::string("schema is not valid JSON: ") + err.what();
  }
  const std::string finite = check_finite(report, "report");
  if (!finite.empty()) return finite;
  return check_schema(report, schema, "report");
}

} // namespace pmfront
