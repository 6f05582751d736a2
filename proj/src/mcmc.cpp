#include "fabolas/mcmc.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "fabolas/random.hpp"

namespace fabolas {

ChainResult run_stretch_sampler(const LogDensity& log_density, const Eigen::MatrixXd& initial_walkers,
                                int burn_in, int n_samples, int thin, std::uint64_t seed,
                                double stretch_scale) {
  const auto n_walkers = static_cast<int>(initial_walkers.rows());
  const auto dim = static_cast<int>(initial_walkers.cols());
  if (n_walkers < 2 * dim || n_walkers < 2)
    throw std::invalid_argument("stretch sampler needs at least 2 * dim walkers");
  if (n_samples < 1) throw std::invalid_argument("stretch sampler needs n_samples >= 1");
  if (burn_in < 0 || thin < 1) throw std::invalid_argument("stretch sampler: invalid burn_in/thin");

  Eigen::MatrixXd walkers = initial_walkers;
  Eigen::VectorXd lp(n_walkers);
  bool any_finite = false;
  for (int k = 0; k < n_walkers; ++k) {
    lp[k] = log_density(walkers.row(k).transpose());
    if (std::isnan(lp[k])) lp[k] = -std::numeric_limits<double>::infinity();
    any_finite = any_finite || std::isfinite(lp[k]);
  }
  if (!any_finite) throw McmcInitError("all walkers start at zero posterior density");

  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, n_walkers - 2);
  long proposals = 0, accepted = 0;

  auto step = [&] {
    for (int k = 0; k < n_walkers; ++k) {
      int j = pick(rng);
      if (j >= k) ++j;
      const double u = unif(rng);
      const double z = std::pow((stretch_scale - 1.0) * u + 1.0, 2) / stretch_scale;
      const Eigen::VectorXd proposal =
          walkers.row(j).transpose() + z * (walkers.row(k) - walkers.row(j)).transpose();
      double lp_new = log_density(proposal);
      if (std::isnan(lp_new)) lp_new = -std::numeric_limits<double>::infinity();
      const double log_u = std::log(unif(rng));
      ++proposals;
      bool accept = false;
      if (std::isfinite(lp_new)) {
        if (!std::isfinite(lp[k])) accept = true;
        else accept = log_u < (dim - 1) * std::log(z) + lp_new - lp[k];
      }
      if (accept) {
        walkers.row(k) = proposal.transpose();
        lp[k] = lp_new;
        ++accepted;
      }
    }
  };

  for (int it = 0; it < burn_in; ++it) step();

  ChainResult out;
  out.samples.resize(n_samples, dim);
  if (n_samples <= n_walkers) {
    out.samples = walkers.topRows(n_samples);
  } else {
    int filled = 0;
    while (filled < n_samples) {
      for (int t = 0; t < thin; ++t) step();
      for (int k = 0; k < n_walkers && filled < n_samples; ++k) out.samples.row(filled++) = walkers.row(k);
    }
  }
  out.walkers = walkers;
  out.log_probs = lp;
  out.acceptance_rate = proposals > 0 ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
  return out;
}

Eigen::MatrixXd initial_hyper_walkers(const HyperLayout& layout, int n_walkers, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> log_lambda(kLogLambdaLower, kLogLambdaUpper);
  std::uniform_real_distribution<double> log_noise(-12.0, -2.0);
  Eigen::MatrixXd w(n_walkers, layout.size());
  for (int k = 0; k < n_walkers; ++k) {
    int i = 0;
    w(k, i++) = normal(rng);
    for (int d = 0; d < layout.dim; ++d) w(k, i++) = log_lambda(rng);
    w(k, i++) = log_noise(rng);
    for (; i < layout.size(); ++i) w(k, i) = normal(rng);
  }
  return w;
}

HyperposteriorFit sample_hyperposterior(const ObservationSet& obs, const HyperLayout& layout, Target target,
                                        const McmcOptions& options) {
  if (obs.empty()) throw std::invalid_argument("sample_hyperposterior: empty observation set");
  if (options.n_walkers < 2 * layout.size())
    throw std::invalid_argument("sample_hyperposterior: n_walkers must be >= 2 * number of hyperparameters");

  auto inputs = std::make_shared<std::vector<AugmentedInput>>();
  for (const auto& r : obs.rows()) inputs->push_back(r.input);
  Eigen::VectorXd y = obs.targets(target);

  GpEnsemble ensemble;
  if (options.standardize && y.size() >= 2) {
    ensemble.shift = y.mean();
    const double sd = std::sqrt((y.array() - ensemble.shift).square().sum() / static_cast<double>(y.size()));
    ensemble.scale = sd > 1e-12 ? sd : 1.0;
  } else if (options.standardize) {
    ensemble.shift = y.mean();
  }
  const Eigen::VectorXd ys = (y.array() - ensemble.shift) / ensemble.scale;

  LogDensity log_post = [&](const Eigen::VectorXd& v) {
    const double lp = log_hyper_prior_packed(layout, v);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    return lp + log_marginal_likelihood(*inputs, ys, unpack(layout, v), target);
  };

  Eigen::MatrixXd init;
  if (options.initial_walkers && options.initial_walkers->rows() == options.n_walkers &&
      options.initial_walkers->cols() == layout.size()) {
    init = *options.initial_walkers;
  } else {
    init = initial_hyper_walkers(layout, options.n_walkers, derive_seed(options.seed, {1}));
  }

  const ChainResult chain = run_stretch_sampler(log_post, init, options.burn_in, options.n_samples, options.thin,
                                                derive_seed(options.seed, {2}));

  std::shared_ptr<const std::vector<AugmentedInput>> shared = inputs;
  for (Eigen::Index r = 0; r < chain.samples.rows(); ++r) {
    const Eigen::VectorXd v = chain.samples.row(r).transpose();
    if (!std::isfinite(log_hyper_prior_packed(layout, v))) continue;
    try {
      ensemble.members.push_back(fit_gp(shared, ys, unpack(layout, v), target));
    } catch (const ModelFitError&) {
    }
  }
  if (ensemble.members.empty()) throw McmcInitError("no hyperparameter sample produced a valid GP fit");
  return {std::move(ensemble), chain.walkers};
}

}  // namespace fabolas
