// Command-line front end of the cooperative beam-training simulator.
//
// Subcommands:
//   run      -- execute the configured Monte Carlo experiment, emit CSV/JSON
//   sweep    -- same as run with the transmit-power list overridden
//   validate -- run the built-in invariant suite against a config
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rapid/evaluation.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::int64_t trials = -1;
  std::int64_t seed = -1;
  std::int64_t workers = -1;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs* args, bool config_required) {
  auto* opt = cmd->add_option("-c,--config", args->config_path,
                              "JSON experiment config file");
  if (config_required) opt->required();
  cmd->add_option("-o,--out", args->out_dir,
                  "output directory for results.csv / results.json");
  cmd->add_option("--trials", args->trials, "override the trial count");
  cmd->add_option("--seed", args->seed, "override the master seed");
  cmd->add_option("--workers", args->workers,
                  "override the worker-thread count (0 = one per core)");
  cmd->add_flag("-v,--verbose", args->verbose,
                "include per-trial arrays in results.json");
}

rapid::ExperimentConfig load_config(const CommonArgs& args) {
  rapid::ExperimentConfig cfg =
      args.config_path.empty()
          ? rapid::ExperimentConfig{}
          : rapid::ExperimentConfig::from_json_file(args.config_path);
  if (args.trials >= 0) cfg.trials = static_cast<int>(args.trials);
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (args.workers >= 0) cfg.workers = static_cast<int>(args.workers);
  return cfg;
}

int execute(const rapid::ExperimentConfig& cfg, const CommonArgs& args) {
  const rapid::ExperimentResults results = rapid::run_experiment(cfg);

  std::filesystem::create_directories(args.out_dir);
  const std::string csv_path =
      (std::filesystem::path(args.out_dir) / "results.csv").string();
  const std::string json_path =
      (std::filesystem::path(args.out_dir) / "results.json").string();
  {
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw rapid::ConfigError("cannot write " + csv_path);
    csv << rapid::to_csv(results);
  }
  {
    std::ofstream js(json_path, std::ios::binary);
    if (!js) throw rapid::ConfigError("cannot write " + json_path);
    js << rapid::to_json(results, args.verbose).dump(2) << '\n';
  }

  std::cout << rapid::to_csv(results);
  std::cout << "# wrote " << csv_path << " and " << json_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative multi-BS mmWave beam-training simulator"};
  app.require_subcommand(1);

  CommonArgs run_args;
  CLI::App* run = app.add_subcommand(
      "run", "Run the Monte Carlo experiment from a config file");
  add_common(run, &run_args, /*config_required=*/true);

  CommonArgs sweep_args;
  std::vector<double> sweep_powers;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Run the experiment over an explicit transmit-power list");
  add_common(sweep, &sweep_args, /*config_required=*/true);
  sweep
      ->add_option("--p-dbm", sweep_powers,
                   "transmit powers in dBm (overrides the config list)")
      ->expected(-1);

  CommonArgs validate_args;
  CLI::App* validate = app.add_subcommand(
      "validate", "Check library invariants (defaults used without --config)");
  add_common(validate, &validate_args, /*config_required=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      return execute(load_config(run_args), run_args);
    }
    if (sweep->parsed()) {
      rapid::ExperimentConfig cfg = load_config(sweep_args);
      if (!sweep_powers.empty()) cfg.p_dbm = sweep_powers;
      return execute(cfg, sweep_args);
    }
    if (validate->parsed()) {
      const rapid::ExperimentConfig cfg = load_config(validate_args);
      rapid::validate_invariants(cfg);
      std::cout << "all invariants satisfied\n";
      return 0;
    }
    std::cerr << "no subcommand given\n";
    return 2;
  } catch (const rapid::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const rapid::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
