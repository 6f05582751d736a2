#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "fabolas/maximizer.hpp"
#include "fabolas/random.hpp"

namespace fabolas {

namespace {

struct Strategy {
  int n, lambda, mu;
  Eigen::VectorXd weights;
  double mu_eff, c_sigma, d_sigma, c_c, c_1, c_mu, chi_n;

  Strategy(int dim, int popsize) : n(dim), lambda(popsize), mu(popsize / 2) {
    weights.resize(mu);
    for (int i = 0; i < mu; ++i) weights[i] = std::log(mu + 0.5) - std::log(i + 1.0);
    weights /= weights.sum();
    mu_eff = 1.0 / weights.squaredNorm();
    const double nd = n;
    c_sigma = (mu_eff + 2.0) / (nd + mu_eff + 5.0);
    d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (nd + 1.0)) - 1.0) + c_sigma;
    c_c = (4.0 + mu_eff / nd) / (nd + 4.0 + 2.0 * mu_eff / nd);
    c_1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + mu_eff);
    c_mu = std::min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nd + 2.0) * (nd + 2.0) + mu_eff));
    chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));
  }
};

Eigen::VectorXd clip_unit(const Eigen::VectorXd& x) { return x.cwiseMax(0.0).cwiseMin(1.0); }

}  // namespace

MaximizeResult cmaes_maximize(const BoxObjective& objective, int dim, const CmaesOptions& options) {
  if (dim < 1) throw std::invalid_argument("cmaes_maximize: dim must be >= 1");
  if (options.popsize < 4) throw std::invalid_argument("cmaes_maximize: popsize must be >= 4");
  const Strategy st(dim, options.popsize);

  MaximizeResult result;
  auto evaluate = [&](const Eigen::VectorXd& x) {
    const double v = objective(x);
    ++result.evaluations;
    if (result.evaluations == 1 || v > result.value) {
      result.value = v;
      result.argmax = x;
    }
    result.best_trace.push_back(result.value);
    return v;
  };

  Eigen::VectorXd mean = options.start ? clip_unit(*options.start) : Eigen::VectorXd::Constant(dim, 0.5);
  double sigma = options.sigma0;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd p_sigma = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd p_c = Eigen::VectorXd::Zero(dim);
  int restarts_used = 0;
  int gen_since_restart = 0;
  Rng rng(derive_seed(options.seed, {0}));
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::MatrixXd ys(dim, st.lambda);
  Eigen::MatrixXd xs(dim, st.lambda);
  std::vector<double> fitness(st.lambda);
  std::vector<int> order(st.lambda);

  for (int gen = 0; gen < options.generations; ++gen) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd evals = eig.eigenvalues();
    const bool degenerate = eig.info() != Eigen::Success || !cov.allFinite() || evals.minCoeff() <= 0.0 ||
                            !std::isfinite(sigma) || sigma * std::sqrt(evals.maxCoeff()) < 1e-15 ||
                            evals.maxCoeff() > 1e14 * evals.minCoeff();
    if (degenerate) {
      if (restarts_used >= options.restarts) break;
      ++restarts_used;
      rng.seed(derive_seed(options.seed, {static_cast<std::uint64_t>(restarts_used)}));
      mean = result.evaluations > 0 ? result.argmax : mean;
      sigma = options.sigma0;
      cov.setIdentity();
      p_sigma.setZero();
      p_c.setZero();
      gen_since_restart = 0;
      --gen;  // the generation was not spent
      continue;
    }
    const Eigen::MatrixXd b = eig.eigenvectors();
    const Eigen::VectorXd d = evals.cwiseSqrt();

    for (int k = 0; k < st.lambda; ++k) {
      Eigen::VectorXd z(dim);
      for (int i = 0; i < dim; ++i) z[i] = normal(rng);
      ys.col(k) = b * d.asDiagonal() * z;
      xs.col(k) = mean + sigma * ys.col(k);
      const Eigen::VectorXd clipped = clip_unit(xs.col(k));
      const double value = evaluate(clipped);
      fitness[k] = -value + (xs.col(k) - clipped).squaredNorm();
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int c) { return fitness[a] < fitness[c]; });

    Eigen::VectorXd y_w = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < st.mu; ++i) y_w += st.weights[i] * ys.col(order[i]);
    mean += sigma * y_w;

    const Eigen::MatrixXd inv_sqrt = b * d.cwiseInverse().asDiagonal() * b.transpose();
    p_sigma = (1.0 - st.c_sigma) * p_sigma + std::sqrt(st.c_sigma * (2.0 - st.c_sigma) * st.mu_eff) * inv_sqrt * y_w;
    ++gen_since_restart;
    const double ps_norm = p_sigma.norm();
    const double h_sigma_bound =
        (1.4 + 2.0 / (dim + 1.0)) * st.chi_n * std::sqrt(1.0 - std::pow(1.0 - st.c_sigma, 2.0 * gen_since_restart));
    const double h_sigma = ps_norm < h_sigma_bound ? 1.0 : 0.0;
    p_c = (1.0 - st.c_c) * p_c + h_sigma * std::sqrt(st.c_c * (2.0 - st.c_c) * st.mu_eff) * y_w;

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < st.mu; ++i) rank_mu += st.weights[i] * ys.col(order[i]) * ys.col(order[i]).transpose();
    cov = (1.0 - st.c_1 - st.c_mu) * cov +
          st.c_1 * (p_c * p_c.transpose() + (1.0 - h_sigma) * st.c_c * (2.0 - st.c_c) * cov) + st.c_mu * rank_mu;
    cov = 0.5 * (cov + cov.transpose());
    sigma *= std::exp((st.c_sigma / st.d_sigma) * (ps_norm / st.chi_n - 1.0));
  }
  if (result.evaluations == 0) {
    const Eigen::VectorXd x = clip_unit(mean);
    evaluate(x);
  }
  return result;
}

CombinedResult combined_maximize(const BoxObjective& objective, int dim, const MaximizerBudget& budget) {
  CombinedResult out;
  MaximizerBudget direct_budget = budget;
  direct_budget.max_evaluations = std::max(1, budget.max_evaluations - budget.cmaes_popsize * budget.cmaes_generations);
  out.direct = direct_maximize(objective, dim, direct_budget);

  CmaesOptions cma;
  cma.popsize = budget.cmaes_popsize;
  cma.generations = budget.cmaes_generations;
  cma.seed = derive_seed(budget.seed, {7});
  cma.restarts = budget.restarts;
  cma.start = out.direct.argmax;
  cma.sigma0 = 0.1;
  out.cmaes = cmaes_maximize(objective, dim, cma);

  out.best = out.cmaes.value > out.direct.value ? out.cmaes : out.direct;
  return out;
}

}  // namespace fabolas
