// isi-bench: build a system–bath Hamiltonian from a config file, compute its
// equilibrium reduced states, evaluate the ISI bounds and write data files.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "isi/experiment.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  long long seed = -1;
  int jobs = 1;
};

isi::ExperimentConfig load(const Options& o) {
  auto cfg = isi::load_config(o.config);
  isi::apply_overrides(cfg, o.overrides);
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.out.empty()) cfg.out = o.out;
  return cfg;
}

void run_stage(const std::string& command, const Options& o) {
  const auto cfg = load(o);
  if (command == "sweep") {
    const auto rows = isi::run_sweep(cfg, o.jobs);
    std::printf("sweep over %s: %zu points written to %s/sweep.csv\n", cfg.sweep.parameter.c_str(), rows.size(),
                cfg.out.c_str());
    return;
  }
  const bool need_reductions = command == "run" || command == "equilibrium" || command == "bounds" ||
                               command == "dynamics";
  auto ctx = isi::prepare(cfg, o.jobs, need_reductions);
  const bool degenerate = ctx.red && !ctx.red->nondegenerate;
  if (command == "run" || command == "model-info") isi::stage_model_info(ctx);
  if (command == "run" || command == "spectrum") isi::stage_spectrum(ctx);
  if (degenerate) {
    ctx.summary.push_back("degenerate spectrum: equilibrium, bounds and dynamics stages skipped");
  } else {
    if (command == "run" || command == "equilibrium") isi::stage_equilibrium(ctx);
    if (command == "run" || command == "bounds") isi::stage_bounds(ctx);
    if ((command == "run" && cfg.dynamics.enabled) || command == "dynamics") isi::stage_dynamics(ctx);
  }
  isi::write_summary(ctx, command);
  for (const auto& line : ctx.summary) std::printf("%s\n", line.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium states and initial-state independence bounds for system-bath models"};
  app.require_subcommand(1);
  Options opts;
  app.add_option("--config", opts.config, "experiment config file")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", opts.seed, "override run.seed");
  app.add_option("--jobs", opts.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", opts.out, "output directory (overrides run.out)");
  app.add_option("--override", opts.overrides, "section.key=value, repeatable")->allow_extra_args(false);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"run", "all stages"},
      {"model-info", "model dimensions and structure checks"},
      {"spectrum", "eigenvalues and degeneracy checks"},
      {"equilibrium", "eigenstate reductions and equilibrium states"},
      {"bounds", "theorem reports"},
      {"dynamics", "trajectory and equilibration metric"},
      {"sweep", "aggregate table over a parameter grid"}};
  std::string chosen;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->callback([&chosen, name = name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    run_stage(chosen, opts);
  } catch (const isi::ConfigError& e) {
    if (e.line() > 0)
      std::fprintf(stderr, "config error: %s:%d:%d: %s\n", opts.config.c_str(), e.line(), e.column(), e.what());
    else
      std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const isi::CapExceededError& e) {
    std::fprintf(stderr, "size cap exceeded: %s\n", e.what());
    return 3;
  } catch (const isi::DegenerateSpectrumError& e) {
    std::fprintf(stderr, "degenerate spectrum: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
