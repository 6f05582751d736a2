#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <Eigen/LU>

#include "fabolas/mcmc.hpp"

using namespace fabolas;

namespace {

Eigen::MatrixXd spread_walkers(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Eigen::MatrixXd w(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) w(i, j) = u(rng);
  return w;
}

ObservationSet toy_observations(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ObservationSet obs;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = u(rng);
    const double s = u(rng);
    obs.add({{x, s, 0}, std::sin(3.0 * x.sum()) + 0.3 * (1.0 - s) * (1.0 - s), std::exp(1.0 + 2.0 * s), 0.0});
  }
  return obs;
}

}  // namespace

TEST(StretchSampler, StandardNormalMoments) {
  const LogDensity density = [](const Eigen::VectorXd& v) { return -0.5 * v.squaredNorm(); };
  const ChainResult res = run_stretch_sampler(density, spread_walkers(20, 1, 1), 200, 10000, 1, 42);
  ASSERT_EQ(res.samples.rows(), 10000);
  const Eigen::VectorXd s = res.samples.col(0);
  const double mean = s.mean();
  const double var = (s.array() - mean).square().mean();
  EXPECT_NEAR(mean, 0.0, 0.1);
  EXPECT_NEAR(var, 1.0, 0.15);
  EXPECT_GT(res.acceptance_rate, 0.2);
}

TEST(StretchSampler, TwoDimensionalCorrelatedGaussian) {
  // precision of [[1, 0.8], [0.8, 1]]
  Eigen::Matrix2d cov;
  cov << 1.0, 0.8, 0.8, 1.0;
  const Eigen::Matrix2d prec = cov.inverse();
  const LogDensity density = [&](const Eigen::VectorXd& v) { return -0.5 * v.dot(prec * v); };
  const ChainResult res = run_stretch_sampler(density, spread_walkers(20, 2, 2), 300, 20000, 1, 7);
  const Eigen::RowVector2d mean = res.samples.colwise().mean();
  const Eigen::MatrixXd centered = res.samples.rowwise() - mean;
  const Eigen::Matrix2d emp = centered.transpose() * centered / static_cast<double>(res.samples.rows());
  EXPECT_NEAR(emp(0, 1), 0.8, 0.15);
  EXPECT_NEAR(mean.norm(), 0.0, 0.15);
}

TEST(StretchSampler, SameSeedSameSamples) {
  const LogDensity density = [](const Eigen::VectorXd& v) { return -0.5 * v.squaredNorm(); };
  const Eigen::MatrixXd w = spread_walkers(10, 3, 3);
  const ChainResult a = run_stretch_sampler(density, w, 20, 50, 1, 9);
  const ChainResult b = run_stretch_sampler(density, w, 20, 50, 1, 9);
  EXPECT_EQ(a.samples, b.samples);
  const ChainResult c = run_stretch_sampler(density, w, 20, 50, 1, 10);
  EXPECT_NE(a.samples, c.samples);
}

TEST(StretchSampler, AllWalkersOutsideSupportIsAnError) {
  const LogDensity density = [](const Eigen::VectorXd&) { return -std::numeric_limits<double>::infinity(); };
  EXPECT_THROW(run_stretch_sampler(density, spread_walkers(6, 1, 4), 5, 5, 1, 1), McmcInitError);
}

TEST(StretchSampler, NeverLeavesSupport) {
  const LogDensity density = [](const Eigen::VectorXd& v) {
    return (v.array().abs() <= 1.0).all() ? 0.0 : -std::numeric_limits<double>::infinity();
  };
  Eigen::MatrixXd w = spread_walkers(8, 2, 5) * 0.4;
  const ChainResult res = run_stretch_sampler(density, w, 10, 400, 1, 3);
  EXPECT_LE(res.samples.array().abs().maxCoeff(), 1.0);
}

TEST(Hyperposterior, LengthScalesStayInPriorSupport) {
  for (KernelKind kind : {KernelKind::matern, KernelKind::environmental}) {
    const ObservationSet obs = toy_observations(12, 2, 11);
    HyperLayout layout{kind, 2, 1};
    McmcOptions opt;
    opt.n_walkers = 2 * layout.size() + 2;
    opt.burn_in = 50;
    opt.n_samples = 20;
    opt.seed = 5;
    for (Target target : {Target::loss, Target::log_cost}) {
      const HyperposteriorFit fit = sample_hyperposterior(obs, layout, target, opt);
      ASSERT_EQ(fit.ensemble.size(), 20u);
      for (const auto& m : fit.ensemble.members) {
        const Eigen::VectorXd v = pack(m.hyperparams());
        for (int i = 1; i <= layout.dim; ++i) {
          EXPECT_GE(v[i], kLogLambdaLower);
          EXPECT_LE(v[i], kLogLambdaUpper);
        }
        EXPECT_GE(v[layout.dim + 1], kLogNoiseLower);
        EXPECT_LE(v[layout.dim + 1], kLogNoiseUpper);
        EXPECT_TRUE(std::isfinite(log_hyper_prior(m.hyperparams())));
      }
    }
  }
}

TEST(Hyperposterior, Deterministic) {
  const ObservationSet obs = toy_observations(8, 1, 12);
  HyperLayout layout{KernelKind::environmental, 1, 1};
  McmcOptions opt;
  opt.n_walkers = 2 * layout.size();
  opt.burn_in = 30;
  opt.seed = 77;
  const HyperposteriorFit a = sample_hyperposterior(obs, layout, Target::loss, opt);
  const HyperposteriorFit b = sample_hyperposterior(obs, layout, Target::loss, opt);
  ASSERT_EQ(a.ensemble.size(), b.ensemble.size());
  for (std::size_t i = 0; i < a.ensemble.size(); ++i)
    EXPECT_EQ(pack(a.ensemble.members[i].hyperparams()), pack(b.ensemble.members[i].hyperparams()));
  EXPECT_EQ(a.walkers, b.walkers);
}

TEST(Hyperposterior, StandardizationMapsBack) {
  const ObservationSet obs = toy_observations(10, 1, 13);
  HyperLayout layout{KernelKind::matern, 1, 1};
  McmcOptions opt;
  opt.n_walkers = 8;
  opt.burn_in = 30;
  opt.seed = 1;
  const HyperposteriorFit fit = sample_hyperposterior(obs, layout, Target::loss, opt);
  const Eigen::VectorXd y = obs.targets(Target::loss);
  EXPECT_NEAR(fit.ensemble.shift, y.mean(), 1e-12);
  EXPECT_NEAR(fit.ensemble.scale, std::sqrt((y.array() - y.mean()).square().mean()), 1e-12);
  EXPECT_EQ(fit.ensemble.from_standard(fit.ensemble.to_standard(0.37)), 0.37);
}

TEST(Hyperposterior, RejectsTooFewWalkers) {
  const ObservationSet obs = toy_observations(5, 2, 14);
  McmcOptions opt;
  opt.n_walkers = 3;
  EXPECT_THROW(sample_hyperposterior(obs, HyperLayout{KernelKind::environmental, 2, 1}, Target::loss, opt),
               std::invalid_argument);
}
