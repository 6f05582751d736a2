#pragma once

#include <chrono>
#include <optional>

#include "fabolas/mcmc.hpp"
#include "fabolas/strategies.hpp"

namespace fabolas::detail {

inline constexpr double kMinFailureCost = 1e-6;

/// Budget accounting, failure handling and row emission shared by all loops.
class Runner {
 public:
  using Clock = std::chrono::steady_clock;

  Runner(std::string name, Objective& objective, const SearchSpace& space, const Budget& budget, std::uint64_t seed,
         const RunHooks& hooks);

  bool exhausted() const;
  /// Measured seconds since t0, or the budget's fixed overhead.
  double overhead_since(Clock::time_point t0) const;
  /// Evaluates at a unit-cube configuration and advances the clock.
  RecordRow evaluate(const Eigen::VectorXd& unit_x, double s, double overhead);
  /// Appends a finished row and notifies the hooks.
  void commit(RecordRow row);
  ExperimentRecord take() { return std::move(record_); }

 private:
  Objective& objective_;
  const SearchSpace& space_;
  Budget budget_;
  std::uint64_t seed_;
  const RunHooks& hooks_;
  Clock::time_point start_;
  ExperimentRecord record_;
  std::vector<double> observed_losses_;
  double elapsed_ = 0.0;
  int next_iteration_ = 1;
  bool stopped_ = false;
};

int walkers_for(const McmcParams& p, const HyperLayout& layout);

HyperposteriorFit fit_model(const ObservationSet& obs, const HyperLayout& layout, Target target,
                            const McmcParams& p, std::uint64_t seed, std::optional<Eigen::MatrixXd>& walkers);

MaximizerBudget maximizer_for(const StrategyParams& params, std::uint64_t seed);

}  // namespace fabolas::detail
