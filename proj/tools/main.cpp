// Command-line front end: runs experiments from config files or built-in
// presets, writes trajectory/oracle/certificate artifacts, and replays
// recorded trajectories against an instance.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>

#include "dualcast/errors.hpp"
#include "dualcast/experiment.hpp"

namespace {

int execute(const dualcast::ExperimentConfig& config,
            const dualcast::RunOptions& options,
            const std::string& replay_path) {
  using namespace dualcast;

  if (!replay_path.empty()) {
    const ProblemInstance instance = build_instance(config);
    std::ifstream csv(replay_path);
    if (!csv) {
      std::cerr << "cannot open trajectory csv: " << replay_path << "\n";
      return 2;
    }
    const ReplayCheck check = verify_replay(instance, csv);
    if (check.ok) {
      std::cout << "replay: " << check.rows_checked
                << " rows reproduced bit-exactly\n";
      return 0;
    }
    std::cerr << "replay: aggregate mismatch at t=" << *check.first_mismatch
              << "\n";
    return 1;
  }

  const ExperimentResult result = run_experiment(config, options);
  std::cout << "wrote " << result.files_written.size() << " files to "
            << result.out_dir << "\n";
  const auto& last = result.trajectory.records.back();
  std::cout << "iterations: " << result.trajectory.records.size()
            << ", final price: " << last.p
            << ", final aggregate: " << last.aggregate_demand << "\n";
  if (!result.feasibility.feasible)
    std::cout << "feasibility violated first at t="
              << *result.feasibility.first_violation << "\n";
  for (const auto& cert : result.certificates)
    std::cout << "certificate " << rate_kind_name(cert.kind) << ": "
              << (cert.holds ? "holds" : "VIOLATED") << "\n";
  return result.exit_status;
}

}  // namespace

int main(int argc, char** argv) try {
  CLI::App app{"one-way price-broadcast resource allocation simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // allow the shared flags after the subcommand name

  std::string out_dir;
  std::string replay_path;
  bool strict = false;
  long long seed = -1;
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_flag("--strict", strict,
               "exit nonzero on infeasible runs or failed certificates");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--replay", replay_path,
                 "re-check the aggregates of a recorded trajectory csv");

  auto* run_cmd =
      app.add_subcommand("run", "run an experiment from a config file");
  std::string config_path;
  run_cmd->add_option("config", config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);

  auto* preset_cmd =
      app.add_subcommand("preset", "run a built-in reproduction preset");
  std::string preset_name;
  preset_cmd->add_option("name", preset_name, "two-user or multi-user")
      ->required()
      ->check(CLI::IsMember({"two-user", "multi-user"}));
  int preset_n = 5;
  preset_cmd->add_option("--n", preset_n, "user count for multi-user");

  CLI11_PARSE(app, argc, argv);

  dualcast::ExperimentConfig config;
  dualcast::RunOptions options;
  options.out_dir = out_dir;
  options.strict = strict;

  if (run_cmd->parsed()) {
    config = dualcast::load_config_file(config_path);
    const auto slash = config_path.find_last_of('/');
    std::string name = slash == std::string::npos
                           ? config_path
                           : config_path.substr(slash + 1);
    const auto dot = name.find_last_of('.');
    if (dot != std::string::npos) name.erase(dot);
    options.experiment_name = name;
  } else {
    if (preset_name == "two-user") {
      config = dualcast::preset_two_user();
      options.experiment_name = "two-user";
    } else {
      config = dualcast::preset_multi_user(preset_n);
      options.experiment_name = "multi-user-" + std::to_string(preset_n);
    }
  }
  if (seed >= 0) config.seed = seed;
  return execute(config, options, replay_path);
} catch (const dualcast::ConfigError& e) {
  std::cerr << "config error: " << e.what() << "\n";
  return 2;
} catch (const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return 2;
}
