// zzb-mimo-doa: bound sweeps, Monte Carlo validation and the self-check suite.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "suite.hpp"
#include "zzb/experiment.hpp"
#include "zzb/parallel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

struct RunOptions {
  std::string config;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool quiet = false;
};

zzb::ExperimentConfig load(const RunOptions& o) {
  std::optional<std::string> preset;
  if (!o.preset.empty()) preset = o.preset;
  if (o.config.empty()) {
    if (!preset) throw zzb::ValidationError({"--config: required unless --preset is given"});
    return zzb::parse_config_text("{}", preset);
  }
  return zzb::parse_config(o.config, preset);
}

int run_bounds(const RunOptions& o, bool force_simulation) {
  zzb::ExperimentConfig cfg = load(o);
  if (o.seed) zzb::override_seed(cfg, *o.seed);
  if (force_simulation) cfg.simulation.enabled = true;
  if (!o.out.empty()) cfg.output = o.out;
  zzb::set_threads(o.threads);

  zzb::ProgressFn progress;
  if (!o.quiet) progress = [](std::string_view msg) { std::cerr << "[zzb] " << msg << '\n'; };
  const zzb::ResultTable table = zzb::run_experiment(cfg, progress);
  zzb::write_csv(table, cfg.output);
  if (!o.quiet) std::cerr << "[zzb] wrote " << table.rows.size() << " rows to " << cfg.output << '\n';
  return kExitOk;
}

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config, "JSON experiment file");
  cmd->add_option("--preset", o.preset, "Baked-in experiment applied before the config")
      ->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
  cmd->add_option("--out", o.out, "CSV output path (overrides the config)");
  cmd->add_option("--seed", o.seed, "Master seed for the CRB prior draws and the simulation");
  cmd->add_option("--threads", o.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  cmd->add_flag("-q,--quiet", o.quiet, "Suppress progress output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ziv-Zakai, expected-CRB and a-priori bounds for MIMO radar DoA estimation"};
  app.require_subcommand(1);

  RunOptions bounds_opts, sim_opts;
  auto* bounds = app.add_subcommand("bounds", "Evaluate the bounds over the configured sweep and write CSV");
  add_run_options(bounds, bounds_opts);
  auto* simulate = app.add_subcommand("simulate", "As bounds, with the Monte Carlo estimator columns enabled");
  add_run_options(simulate, sim_opts);

  bool full = false;
  int validate_threads = 0;
  auto* validate = app.add_subcommand("validate", "Run the oracle and property checks and print a report");
  validate->add_flag("--full", full, "Also run the long acceptance checks (threshold sweep, simulation, determinism)");
  validate->add_option("--threads", validate_threads, "OpenMP threads (0 = runtime default)")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (bounds->parsed()) return run_bounds(bounds_opts, false);
    if (simulate->parsed()) return run_bounds(sim_opts, true);
    if (validate->parsed()) {
      zzb::set_threads(validate_threads);
      bool all = true;
      auto report = [&all](const zzb::validation::CheckResult& r) {
        all = all && r.passed;
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " : " << r.detail << std::endl;
      };
      for (const auto& r : zzb::validation::acceptance_suite(full)) report(r);
      return all ? kExitOk : kExitValidation;
    }
  } catch (const zzb::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const zzb::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
