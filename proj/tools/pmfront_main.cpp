//
// pmfront — command-line driver for the front-propagation laboratory.
//
//   pmfront simulate --config cfg.json [--out DIR] [--cells N] [--t-end T]
//   pmfront sweep    --config cfg.json --param key=v1,v2,... [--threads K]
//   pmfront certify  --config cfg.json [--out DIR]
//   pmfront validate-pme --config cfg.json [--out DIR]
//   pmfront check-report --report report.json --schema schema.json
//
// Exit codes: 0 = scenario passed, 2 = ran but verdict failed, 1 = usage or
// runtime error.  All artifacts are deterministic; see the library headers
// for the file formats.
//

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pmfront/harness.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  int cells = 0;
  double t_end = 0.0;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required = true) {
  auto* opt = cmd->add_option("--config", flags.config_path, "scenario config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--out", flags.out_dir, "override the output directory");
  cmd->add_option("--cells", flags.cells, "override grid.n_cells");
  cmd->add_option("--t-end", flags.t_end, "override controls.t_end");
}

pmfront::ScenarioConfig load_with_overrides(const CommonFlags& flags) {
  pmfront::ScenarioConfig cfg = pmfront::load_config(flags.config_path);
  if (!flags.out_dir.empty()) cfg.output_dir = flags.out_dir;
  if (flags.cells > 0) cfg.n_cells = flags.cells;
  if (flags.t_end > 0.0) cfg.controls.t_end = flags.t_end;
  return cfg;
}

int report_outcome(const pmfront::ScenarioOutcome& outcome) {
  std::printf("%s\n", outcome.verdict.c_str());
  std::printf("report: %s\n", outcome.report_path.c_str());
  return outcome.pass ? 0 : 2;
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> values;
  std::string item;
  for (std::size_t i = 0; i <= list.size(); ++i) {
    if (i == list.size() || list[i] == ',') {
      if (!item.empty()) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) {
          throw pmfront::ConfigError("sweep: cannot parse value '" + item + "'");
        }
        values.push_back(v);
        item.clear();
      }
    } else {
      item += list[i];
    }
  }
  return values;
}

std::string read_file(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw pmfront::ConfigError("cannot open '" + path + "'");
  std::string text;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, got);
  std::fclose(f);
  return text;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for degenerate aggregation-diffusion fronts"};
  app.require_subcommand(1);

  CommonFlags sim_flags, sweep_flags, cert_flags, pme_flags;
  std::string sweep_param;
  int sweep_threads = 0;
  std::string report_path, schema_path;

  CLI::App* sim = app.add_subcommand("simulate", "run one scenario end to end");
  add_common(sim, sim_flags);

  CLI::App* sweep = app.add_subcommand("sweep", "run a scenario across parameter values");
  add_common(sweep, sweep_flags);
  sweep->add_option("--param", sweep_param, "dotted key and values, e.g. bump.mu=1,4,6")
      ->required();
  sweep->add_option("--threads", sweep_threads, "parallel workers (0 = hardware)");

  CLI::App* certify = app.add_subcommand("certify", "emit certificates without a run");
  add_common(certify, cert_flags);

  CLI::App* pme = app.add_subcommand("validate-pme",
                                     "resolution ladder against the source solution");
  add_common(pme, pme_flags);

  CLI::App* check = app.add_subcommand("check-report", "validate a report against a schema");
  check->add_option("--report", report_path, "report.json to check")->required();
  check->add_option("--schema", schema_path, "schema to check against")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return report_outcome(pmfront::run_scenario(load_with_overrides(sim_flags)));
    }
    if (sweep->parsed()) {
      const std::size_t eq = sweep_param.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 >= sweep_param.size()) {
        throw pmfront::ConfigError("sweep: --param must look like key=v1,v2,...");
      }
      const std::string key = sweep_param.substr(0, eq);
      const std::vector<double> values = parse_values(sweep_param.substr(eq + 1));
      pmfront::ScenarioConfig base = load_with_overrides(sweep_flags);
      const pmfront::SweepOutcome out = pmfront::run_sweep(base, key, values, sweep_threads);
      for (const auto& pt : out.points) {
        std::printf("[%zu] %s = %.6g : %s\n", pt.index, pt.key.c_str(), pt.value,
                    pt.verdict.c_str());
      }
      std::printf("summary: %s\n", out.summary_path.c_str());
      return out.all_pass ? 0 : 2;
    }
    if (certify->parsed()) {
      return report_outcome(pmfront::run_certify(load_with_overrides(cert_flags)));
    }
    if (pme->parsed()) {
      pmfront::ScenarioConfig cfg = load_with_overrides(pme_flags);
      cfg.scenario = "pme-validate";
      return report_outcome(pmfront::run_scenario(cfg));
    }
    if (check->parsed()) {
      const std::string err =
          pmfront::validate_report(read_file(report_path), read_file(schema_path));
      if (err.empty()) {
        std::printf("report ok\n");
        return 0;
      }
      std::printf("invalid report: %s\n", err.c_str());
      return 2;
    }
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 1;
}
