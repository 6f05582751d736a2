#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>

#include <Eigen/Core>

#include "fabolas/gp.hpp"

namespace fabolas {

using LogDensity = std::function<double(const Eigen::VectorXd&)>;

class McmcInitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChainResult {
  Eigen::MatrixXd samples;    // one sample per row
  Eigen::MatrixXd walkers;    // final walker positions, one per row
  Eigen::VectorXd log_probs;  // log density of the final walkers
  double acceptance_rate = 0.0;
};

/// Affine-invariant ensemble sampler with the stretch move (Goodman & Weare).
/// Walkers are updated in place one after another, so a run is a pure
/// function of (density, initial walkers, seed).
///
/// After `burn_in` steps, samples are collected from the walker positions:
/// if n_samples <= n_walkers the first n_samples walkers are returned,
/// otherwise every `thin` steps all walkers are appended until enough
/// samples exist.
ChainResult run_stretch_sampler(const LogDensity& log_density, const Eigen::MatrixXd& initial_walkers,
                                int burn_in, int n_samples, int thin, std::uint64_t seed,
                                double stretch_scale = 2.0);

struct McmcOptions {
  int n_walkers = 20;
  int n_samples = 20;
  int burn_in = 100;
  int thin = 1;
  std::uint64_t seed = 0;
  bool standardize = true;
  /// Warm start; rows must match n_walkers and the layout size.
  std::optional<Eigen::MatrixXd> initial_walkers;
};

struct HyperposteriorFit {
  GpEnsemble ensemble;
  Eigen::MatrixXd walkers;
};

/// Draws walkers from a broad initial distribution inside the prior support.
Eigen::MatrixXd initial_hyper_walkers(const HyperLayout& layout, int n_walkers, std::uint64_t seed);

/// MCMC over GP hyperparameters (log prior + log evidence) followed by one
/// GP fit per retained sample.
HyperposteriorFit sample_hyperposterior(const ObservationSet& obs, const HyperLayout& layout, Target target,
                                        const McmcOptions& options = {});

}  // namespace fabolas
