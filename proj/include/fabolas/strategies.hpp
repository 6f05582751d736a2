#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fabolas/acquisition.hpp"
#include "fabolas/benchmarks.hpp"
#include "fabolas/gp.hpp"
#include "fabolas/maximizer.hpp"
#include "fabolas/search_space.hpp"

namespace fabolas {

enum class BudgetMode { simulated, wall_clock };

struct Budget {
  double total_seconds = 3600.0;
  BudgetMode mode = BudgetMode::simulated;
  /// When set, replaces the measured optimizer overhead per row (and the
  /// c_overhead term of the FABOLAS acquisition). Makes simulated runs
  /// reproducible byte for byte.
  std::optional<double> fixed_overhead;

  void validate() const;
};

struct RecordRow {
  int iteration = 0;
  Eigen::VectorXd x;  // actual units
  double s = 1.0;
  double y = 0.0;
  double z = 0.0;
  double overhead = 0.0;
  double elapsed = 0.0;
  bool failed = false;
  std::optional<Eigen::VectorXd> incumbent;  // actual units
  std::optional<double> predicted_incumbent_loss;
  // filled by offline validation
  std::optional<double> true_loss;
  bool invalid = false;
};

struct IncumbentPoint {
  double elapsed = 0.0;
  Eigen::VectorXd config;
  double predicted_loss = 0.0;
};

using IncumbentTrace = std::vector<IncumbentPoint>;

struct ExperimentRecord {
  std::string strategy;
  std::uint64_t seed = 0;
  std::vector<RecordRow> rows;

  /// Rows carrying an incumbent, in order.
  IncumbentTrace trace() const;
  /// Sum of z over all rows.
  double total_cost() const;
};

struct McmcParams {
  int n_walkers = 20;
  int burn_in = 100;
  int n_samples = 20;
};

struct StrategyParams {
  /// Initial design size; strategy default when unset (FABOLAS 10, EI/ES 3,
  /// MTBO 4, random and Hyperband ignore it).
  std::optional<int> n_init;
  std::vector<double> init_sizes = {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8};
  std::vector<double> aux_sizes = {0.25};
  McmcParams mcmc;
  EntropySearchOptions es;
  int n_representers = 50;
  MaximizerBudget maximizer;
  /// Hyperband maximum resource ratio; defaults to 1 / s_min.
  std::optional<double> hyperband_R;
  double hyperband_eta = 3.0;

  void validate() const;
};

/// Called once per completed row (used for incremental logging).
using RowSink = std::function<void(const ExperimentRecord&, const RecordRow&)>;
/// Optional early exit, checked after every completed row.
using StopPredicate = std::function<bool(const ExperimentRecord&)>;

struct RunHooks {
  RowSink on_row;
  StopPredicate should_stop;
};

/// k random configurations (unit cube), paired with subset sizes cycling
/// through `subset_sizes`.
std::vector<std::pair<Eigen::VectorXd, double>> initial_design(const SearchSpace& space, int k,
                                                               const std::vector<double>& subset_sizes,
                                                               std::uint64_t seed);

struct Incumbent {
  std::size_t index = 0;  // into observed_xs
  Eigen::VectorXd x;
  double predicted_loss = 0.0;  // original units
};

/// Argmin over observed configurations of the ensemble-averaged posterior
/// mean at `fidelity`. Ties go to the lexicographically smallest point so the
/// result does not depend on the history order.
Incumbent select_incumbent(const GpEnsemble& loss_ensemble, const std::vector<Eigen::VectorXd>& observed_xs,
                           const Fidelity& fidelity = {});

/// Conditions every member (same hyperparameters and standardization) on the
/// full history; cheap compared to resampling hyperparameters.
GpEnsemble condition_ensemble(const GpEnsemble& ensemble, const ObservationSet& obs);

/// Loss assigned to failed evaluations: worst observed + one standard
/// deviation of the observed losses (1.0 with no history).
double failure_loss(const std::vector<double>& observed_losses);

ExperimentRecord run_fabolas(Objective& objective, const SearchSpace& space, const Budget& budget,
                             const StrategyParams& params, std::uint64_t seed, const RunHooks& hooks = {});

enum class VanillaAcquisition { ei, es };

ExperimentRecord run_vanilla_bo(VanillaAcquisition acq, Objective& objective, const SearchSpace& space,
                                const Budget& budget, const StrategyParams& params, std::uint64_t seed,
                                const RunHooks& hooks = {});

/// Tasks are params.aux_sizes plus the full dataset.
ExperimentRecord run_mtbo(Objective& objective, const SearchSpace& space, const Budget& budget,
                          const StrategyParams& params, std::uint64_t seed, const RunHooks& hooks = {});

struct Rung {
  int n_configs = 0;
  double resource = 0.0;
};

struct Bracket {
  int s = 0;
  int n_configs = 0;
  double initial_resource = 0.0;
  std::vector<Rung> rungs;
};

/// Brackets s_max..0 with s_max = floor(log_eta R).
std::vector<Bracket> hyperband_brackets(double R, double eta);

ExperimentRecord run_hyperband(Objective& objective, const SearchSpace& space, const Budget& budget,
                               const StrategyParams& params, std::uint64_t seed, const RunHooks& hooks = {});

ExperimentRecord run_random_search(Objective& objective, const SearchSpace& space, const Budget& budget,
                                   std::uint64_t seed, const RunHooks& hooks = {});

inline const std::vector<std::string>& strategy_names() {
  static const std::vector<std::string> names = {"fabolas", "ei", "es", "mtbo", "hyperband", "random"};
  return names;
}

/// Dispatches on a name from strategy_names().
ExperimentRecord run_strategy(const std::string& name, Objective& objective, const SearchSpace& space,
                              const Budget& budget, const StrategyParams& params, std::uint64_t seed,
                              const RunHooks& hooks = {});

}  // namespace fabolas
