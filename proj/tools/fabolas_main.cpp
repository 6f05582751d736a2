#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fabolas/benchmarks.hpp"
#include "fabolas/experiment.hpp"

namespace {

using namespace fabolas;

struct ObjectiveFlags {
  std::string kind;
  std::string surrogate;
  std::string command;
  std::optional<double> timeout;
  std::optional<bool> noisy;

  void add_to(CLI::App* app) {
    app->add_option("--objective", kind, "synthetic | surrogate | subprocess")
        ->check(CLI::IsMember({"synthetic", "surrogate", "subprocess"}));
    app->add_option("--surrogate", surrogate, "surrogate table CSV (implies --objective surrogate)");
    app->add_option("--command", command, "training command (implies --objective subprocess)");
    app->add_option("--timeout", timeout, "subprocess timeout in seconds");
  }

  void apply(ObjectiveSpec& spec) const {
    if (!surrogate.empty()) {
      spec.kind = ObjectiveKind::surrogate;
      spec.surrogate_path = surrogate;
    }
    if (!command.empty()) {
      spec.kind = ObjectiveKind::subprocess;
      spec.command = command;
    }
    if (kind == "synthetic") spec.kind = ObjectiveKind::synthetic;
    if (kind == "surrogate") spec.kind = ObjectiveKind::surrogate;
    if (kind == "subprocess") spec.kind = ObjectiveKind::subprocess;
    if (timeout) spec.timeout_seconds = *timeout;
    if (noisy) spec.noisy = *noisy;
  }
};

SearchSpace space_for(const ObjectiveSpec& spec) {
  if (spec.kind == ObjectiveKind::synthetic) return synthetic_space();
  if (spec.kind == ObjectiveKind::surrogate) return surrogate_space(load_surrogate_csv(spec.surrogate_path));
  throw ConfigError("space", "subprocess objectives need a config file with a search space");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-aware Bayesian optimization over hyperparameters and training-set size"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a strategy for one or more seeds");
  std::string config_path;
  std::string strategy;
  std::vector<std::uint64_t> seeds;
  std::optional<double> budget_seconds;
  std::string budget_mode;
  std::optional<double> fixed_overhead;
  std::string output_dir;
  ObjectiveFlags run_objective;
  run->add_option("--config", config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
  run->add_option("--strategy", strategy, "fabolas | ei | es | mtbo | hyperband | random")
      ->check(CLI::IsMember(strategy_names()));
  run->add_option("--seeds", seeds, "seeds, one record file each")->delimiter(',');
  run->add_option("--budget", budget_seconds, "budget in seconds");
  run->add_option("--budget-mode", budget_mode, "simulated | wall_clock")
      ->check(CLI::IsMember({"simulated", "wall_clock"}));
  run->add_option("--fixed-overhead", fixed_overhead, "charge this many seconds of overhead per iteration");
  run->add_option("--output-dir", output_dir, "directory for record files");
  run_objective.add_to(run);
  run->add_flag("--noisy,!--noise-free", run_objective.noisy, "synthetic objective noise");

  // report
  auto* rep = app.add_subcommand("report", "median and quartiles of incumbent quality over seeds");
  std::vector<std::string> report_files;
  int grid_points = 30;
  std::vector<double> times;
  std::string report_out;
  rep->add_option("records", report_files, "record files")->required()->check(CLI::ExistingFile);
  rep->add_option("--grid-points", grid_points, "number of log-spaced time points")->check(CLI::PositiveNumber);
  rep->add_option("--times", times, "explicit time grid")->delimiter(',');
  rep->add_option("--out", report_out, "CSV output file (default: stdout)");

  // validate
  auto* val = app.add_subcommand("validate", "re-evaluate logged incumbents on the full dataset");
  std::vector<std::string> validate_files;
  std::string validate_config;
  std::uint64_t validation_seed = 1000003;
  std::string validate_out_dir;
  ObjectiveFlags val_objective;
  val->add_option("records", validate_files, "record files")->required()->check(CLI::ExistingFile);
  val->add_option("--config", validate_config, "experiment configuration defining the objective")->check(CLI::ExistingFile);
  val->add_option("--seed", validation_seed, "held-out validation seed");
  val->add_option("--out-dir", validate_out_dir, "output directory (default: next to each input)");
  val_objective.add_to(val);
  val->add_flag("--noisy,!--noise-free", val_objective.noisy, "synthetic objective noise (default: noise-free)");

  // make-surrogate
  auto* mk = app.add_subcommand("make-surrogate", "generate the SVM-like surrogate table");
  std::uint64_t surrogate_seed = 0;
  std::string surrogate_out;
  mk->add_option("--seed", surrogate_seed, "generator seed");
  mk->add_option("--out", surrogate_out, "output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      ExperimentConfig config;
      if (!config_path.empty()) {
        config = load_config(config_path);
      } else if (!budget_seconds) {
        throw ConfigError("budget.total_seconds", "pass --budget or --config");
      }
      const ObjectiveSpec before = config.objective;
      run_objective.apply(config.objective);
      if (config_path.empty() || !(before == config.objective)) config.space = space_for(config.objective);
      if (!strategy.empty()) config.strategy = strategy;
      if (!seeds.empty()) config.seeds = seeds;
      if (budget_seconds) config.budget.total_seconds = *budget_seconds;
      if (budget_mode == "simulated") config.budget.mode = BudgetMode::simulated;
      if (budget_mode == "wall_clock") config.budget.mode = BudgetMode::wall_clock;
      if (fixed_overhead) config.budget.fixed_overhead = *fixed_overhead;
      if (!output_dir.empty()) config.output_dir = output_dir;
      // re-validate the merged configuration
      config = parse_config(serialize_config(config));
      for (const auto& path : run_experiment(config)) std::cout << path << "\n";
    } else if (rep->parsed()) {
      std::vector<ExperimentRecord> records;
      for (const auto& f : report_files) records.push_back(read_record(f));
      const std::vector<double> grid = times.empty() ? default_grid(records, grid_points) : times;
      const std::string csv = report_csv(report(records, grid));
      if (report_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(report_out);
        if (!(out << csv)) throw std::runtime_error("cannot write " + report_out);
      }
    } else if (val->parsed()) {
      ObjectiveSpec spec;
      SearchSpace space = synthetic_space();
      if (!validate_config.empty()) {
        const ExperimentConfig config = load_config(validate_config);
        spec = config.objective;
        space = config.space;
      }
      spec.noisy = false;
      val_objective.apply(spec);
      if (validate_config.empty()) space = space_for(spec);
      auto objective = make_objective(spec, space);
      for (const auto& f : validate_files) {
        const ExperimentRecord validated = offline_validate(read_record(f), *objective, validation_seed);
        std::filesystem::path in(f);
        std::filesystem::path dir = validate_out_dir.empty() ? in.parent_path() : std::filesystem::path(validate_out_dir);
        if (!dir.empty()) std::filesystem::create_directories(dir);
        const std::filesystem::path out = dir / (in.stem().string() + ".validated.jsonl");
        write_record(validated, out.string());
        std::cout << out.string() << "\n";
      }
    } else if (mk->parsed()) {
      save_surrogate_csv(make_svm_like_surrogate(surrogate_seed), surrogate_out);
      std::cout << surrogate_out << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
