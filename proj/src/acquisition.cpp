#include "fabolas/acquisition.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fabolas/random.hpp"

namespace fabolas {

double expected_improvement(double mean, double variance, double f_min) {
  if (!(variance >= 0.0)) throw std::invalid_argument("expected_improvement: variance must be >= 0");
  const double sd = std::sqrt(variance);
  const double diff = f_min - mean;
  if (sd < 1e-12) return std::max(diff, 0.0);
  const double z = diff / sd;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, diff * cdf + sd * pdf);
}

double standardized_incumbent_mean(const GpEnsemble& ensemble, const Fidelity& fidelity) {
  if (ensemble.empty()) throw std::invalid_argument("standardized_incumbent_mean: empty ensemble");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& in : ensemble.members.front().inputs()) {
    const AugmentedInput q = fidelity.at(in.x);
    double m = 0.0;
    for (const auto& p : ensemble.members) m += p.cross_covariance(q).dot(p.alpha());
    best = std::min(best, m / static_cast<double>(ensemble.size()));
  }
  return best;
}

double ensemble_expected_improvement(const GpEnsemble& ensemble, const AugmentedInput& q, double f_min_std) {
  double ei = 0.0;
  for (const auto& p : ensemble.members) {
    const Prediction pr = p.predict(q);
    ei += expected_improvement(pr.mean, pr.variance, f_min_std);
  }
  return ei / static_cast<double>(ensemble.size());
}

RepresenterSet sample_representers(const GpEnsemble& ensemble, int dim, int n_rep, std::uint64_t seed,
                                   const Fidelity& fidelity) {
  if (n_rep < 1) throw std::invalid_argument("sample_representers: n_rep must be >= 1");
  if (ensemble.empty()) throw std::invalid_argument("sample_representers: empty ensemble");
  const int pool_size = std::max(10 * n_rep, 100);
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<Eigen::VectorXd> pool(pool_size, Eigen::VectorXd(dim));
  for (auto& p : pool)
    for (int d = 0; d < dim; ++d) p[d] = unif(rng);

  const double f_min = standardized_incumbent_mean(ensemble, fidelity);
  Eigen::VectorXd w(pool_size);
  for (int i = 0; i < pool_size; ++i) w[i] = ensemble_expected_improvement(ensemble, fidelity.at(pool[i]), f_min);
  const double w_total = w.sum();
  const bool flat = !(w_total > 0.0) || !std::isfinite(w_total);

  RepresenterSet reps;
  reps.log_weights.resize(n_rep);
  std::vector<bool> taken(pool_size, false);
  for (int k = 0; k < n_rep; ++k) {
    double remaining = 0.0;
    if (!flat)
      for (int i = 0; i < pool_size; ++i)
        if (!taken[i]) remaining += w[i];
    int chosen = -1;
    if (flat || !(remaining > 0.0)) {
      // first untaken proposal; the pool itself is uniform
      for (int i = 0; i < pool_size && chosen < 0; ++i)
        if (!taken[i]) chosen = i;
    } else {
      double u = unif(rng) * remaining;
      for (int i = 0; i < pool_size; ++i) {
        if (taken[i]) continue;
        chosen = i;
        u -= w[i];
        if (u <= 0.0) break;
      }
    }
    taken[chosen] = true;
    reps.points.push_back(pool[chosen]);
    reps.log_weights[k] = flat ? 0.0 : -std::log(std::max(w[chosen], 1e-300) / w_total * pool_size);
  }
  return reps;
}

double information_gain(const GpEnsemble& ensemble, const AugmentedInput& candidate, const RepresenterSet& reps,
                        int n_fantasies, std::uint64_t seed, const Fidelity& fidelity, int n_draws) {
  const InformationGain ig(ensemble, reps, fidelity, {n_draws, n_fantasies}, seed);
  return ig(candidate);
}

double predicted_cost(const GpEnsemble& cost_ensemble, const AugmentedInput& q) {
  if (cost_ensemble.empty()) throw std::invalid_argument("predicted_cost: empty ensemble");
  double c = 0.0;
  for (const auto& p : cost_ensemble.members)
    c += std::exp(cost_ensemble.from_standard(p.cross_covariance(q).dot(p.alpha())));
  return c / static_cast<double>(cost_ensemble.size());
}

double fabolas_acquisition(double gain, double cost, double c_overhead) {
  const double denom = cost + c_overhead;
  if (!(denom > 0.0)) throw std::invalid_argument("fabolas_acquisition: non-positive cost");
  return gain / denom;
}

double fabolas_acquisition(const Eigen::VectorXd& x, double s_t, const InformationGain& gain, const CostModel& cost,
                           double c_overhead) {
  const AugmentedInput q{x, s_t, 0};
  const double g = gain(q);
  if (g == 0.0) return 0.0;
  return fabolas_acquisition(g, cost(q), c_overhead);
}

double mtbo_acquisition(const Eigen::VectorXd& x, int task, const InformationGain& gain, const CostModel& cost) {
  const AugmentedInput q{x, 1.0, task};
  const double g = gain(q);
  if (g == 0.0) return 0.0;
  return fabolas_acquisition(g, cost(q), 0.0);
}

}  // namespace fabolas
