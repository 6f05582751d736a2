#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace fabolas {

/// Function on the unit box [0, 1]^dim to be maximized.
using BoxObjective = std::function<double(const Eigen::VectorXd&)>;

struct MaximizerBudget {
  int max_evaluations = 400;  // total for combined_maximize; DIRECT-only otherwise
  int restarts = 2;
  std::uint64_t seed = 0;
  int cmaes_popsize = 10;
  int cmaes_generations = 20;
};

struct MaximizeResult {
  Eigen::VectorXd argmax;
  double value = 0.0;
  int evaluations = 0;
  std::vector<double> best_trace;  // best value after each evaluation
};

/// DIviding RECTangles (Jones et al.) on the unit box. Potentially optimal
/// rectangles are chosen by the lower-right convex hull over
/// (half-diagonal, best center value) with the epsilon test; their longest
/// sides are trisected in order of the best sampled value. Never exceeds
/// max_evaluations objective calls.
MaximizeResult direct_maximize(const BoxObjective& objective, int dim, const MaximizerBudget& budget,
                               double epsilon = 1e-4);

struct CmaesOptions {
  int popsize = 10;
  int generations = 20;
  std::uint64_t seed = 0;
  int restarts = 2;
  std::optional<Eigen::VectorXd> start;  // defaults to the box center
  double sigma0 = 0.3;
};

/// (mu/mu_w, lambda)-CMA-ES. Candidates are clipped to the box for evaluation;
/// ranking adds a quadratic penalty on the clipping distance.
MaximizeResult cmaes_maximize(const BoxObjective& objective, int dim, const CmaesOptions& options);

struct CombinedResult {
  MaximizeResult best;
  MaximizeResult direct;
  MaximizeResult cmaes;
};

/// DIRECT with (max_evaluations - popsize * generations) calls, then CMA-ES
/// started at DIRECT's best point; returns the better of the two.
CombinedResult combined_maximize(const BoxObjective& objective, int dim, const MaximizerBudget& budget);

}  // namespace fabolas
