// silab: train, sweep and inspect self-imitation runs.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "silab/harness.h"

namespace h = silab::harness;

int main(int argc, char** argv) {
  CLI::App app{"Self-imitation learning on procedurally generated grid worlds"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string run_out;
  bool force = false;
  auto* run = app.add_subcommand("run", "train one configuration");
  run->add_option("config", config_path, "config JSON")->required();
  run->add_option("--set", overrides, "override a config key, e.g. --set ppo.lr=3e-4");
  run->add_option("--out", run_out, "output directory (default $SILAB_OUTPUT_ROOT/<name>)");
  run->add_flag("--force", force, "overwrite an existing output directory");

  std::string matrix_path;
  int jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "run an experiment matrix over seeds");
  sweep->add_option("matrix", matrix_path, "matrix JSON")->required();
  sweep->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);
  sweep->add_flag("--force", force, "overwrite existing outputs");

  std::vector<std::string> run_dirs;
  int window = 100;
  std::string curves_out;
  auto* curves = app.add_subcommand("curves", "aggregate learning curves across seeds");
  curves->add_option("run_dirs", run_dirs, "run directories")->required();
  curves->add_option("--window", window, "return window in episodes")->check(CLI::PositiveNumber);
  curves->add_option("--out", curves_out, "output directory");

  std::string task;
  std::int64_t level_id = 0;
  bool json_out = false;
  auto* render = app.add_subcommand("render-level", "print a generated level");
  render->add_option("--task", task, "multiroom:N:S or obstructedmaze")->required();
  render->add_option("--id", level_id, "level id")->required();
  render->add_flag("--json", json_out, "JSON instead of ASCII");

  std::string buffer_dir;
  auto* dump = app.add_subcommand("dump-buffer", "summarize a run's replay buffer");
  dump->add_option("run_dir", buffer_dir, "run directory")->required();
  dump->add_flag("--json", json_out, "raw buffer snapshot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? h::kExitOk : h::kExitUsage;
  }

  auto opt = [](const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<std::string>(s);
  };
  try {
    if (*run) return h::CmdRun(config_path, overrides, opt(run_out), force, std::cout, std::cerr);
    if (*sweep) {
      return h::CmdSweep(matrix_path, jobs > 0 ? std::optional<int>(jobs) : std::nullopt, force,
                         std::cout, std::cerr);
    }
    if (*curves) return h::CmdCurves(run_dirs, window, opt(curves_out), std::cout, std::cerr);
    if (*render) return h::CmdRenderLevel(task, level_id, json_out, std::cout, std::cerr);
    if (*dump) return h::CmdDumpBuffer(buffer_dir, json_out, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return h::kExitRuntime;
  }
  return h::kExitUsage;
}
