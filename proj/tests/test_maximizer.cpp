#include <cmath>

#include <gtest/gtest.h>

#include "fabolas/maximizer.hpp"
#include "oracles.hpp"

using namespace fabolas;

namespace {

double neg_sphere(const Eigen::VectorXd& x) { return -(x.array() - 0.5).square().sum(); }

// negative Branin over the unit box
double neg_branin_unit(const Eigen::VectorXd& u) { return -oracle::branin(-5.0 + 15.0 * u[0], 15.0 * u[1]); }

constexpr double kBraninMin = 0.397887357729738;

}  // namespace

TEST(Direct, NegativeSphere) {
  MaximizerBudget b;
  b.max_evaluations = 500;
  const MaximizeResult r = direct_maximize(neg_sphere, 2, b);
  EXPECT_LE((r.argmax.array() - 0.5).abs().maxCoeff(), 1e-2);
  EXPECT_LE(r.evaluations, 500);
}

TEST(Direct, NeverExceedsBudget) {
  int calls = 0;
  const BoxObjective f = [&](const Eigen::VectorXd& x) {
    ++calls;
    return neg_sphere(x);
  };
  for (int budget : {1, 2, 7, 33, 100}) {
    calls = 0;
    MaximizerBudget b;
    b.max_evaluations = budget;
    const MaximizeResult r = direct_maximize(f, 3, b);
    EXPECT_LE(calls, budget);
    EXPECT_EQ(r.evaluations, calls);
  }
}

TEST(Direct, ConstantObjective) {
  MaximizerBudget b;
  b.max_evaluations = 50;
  const MaximizeResult r = direct_maximize([](const Eigen::VectorXd&) { return 3.5; }, 2, b);
  EXPECT_EQ(r.value, 3.5);
  EXPECT_GE(r.argmax.minCoeff(), 0.0);
  EXPECT_LE(r.argmax.maxCoeff(), 1.0);
}

TEST(Direct, BestTraceMonotone) {
  MaximizerBudget b;
  b.max_evaluations = 300;
  const MaximizeResult r = direct_maximize(neg_branin_unit, 2, b);
  ASSERT_EQ(static_cast<int>(r.best_trace.size()), r.evaluations);
  for (std::size_t i = 1; i < r.best_trace.size(); ++i) EXPECT_GE(r.best_trace[i], r.best_trace[i - 1]);
  EXPECT_EQ(r.best_trace.back(), r.value);
}

TEST(Direct, HigherDimensionalSphere) {
  MaximizerBudget b;
  b.max_evaluations = 3000;
  const MaximizeResult r = direct_maximize(neg_sphere, 10, b);
  EXPECT_TRUE(std::isfinite(r.value));
  EXPECT_GT(r.value, -0.05);
}

TEST(Cmaes, NegativeSphere) {
  CmaesOptions o;
  o.popsize = 8;
  o.generations = 50;
  o.seed = 3;
  const MaximizeResult r = cmaes_maximize(neg_sphere, 2, o);
  EXPECT_LE((r.argmax.array() - 0.5).abs().maxCoeff(), 1e-3);
}

TEST(Cmaes, AbsoluteValueOneDimensional) {
  CmaesOptions o;
  o.popsize = 8;
  o.generations = 50;
  o.seed = 4;
  const MaximizeResult r = cmaes_maximize([](const Eigen::VectorXd& x) { return -std::abs(x[0] - 0.3); }, 1, o);
  EXPECT_NEAR(r.argmax[0], 0.3, 1e-2);
}

TEST(Cmaes, SameSeedSameTrajectory) {
  CmaesOptions o;
  o.seed = 11;
  const MaximizeResult a = cmaes_maximize(neg_branin_unit, 2, o);
  const MaximizeResult b = cmaes_maximize(neg_branin_unit, 2, o);
  EXPECT_EQ(a.argmax, b.argmax);
  EXPECT_EQ(a.best_trace, b.best_trace);
}

TEST(Cmaes, StaysInBoxForBoundaryOptimum) {
  CmaesOptions o;
  o.seed = 5;
  const MaximizeResult r = cmaes_maximize([](const Eigen::VectorXd& x) { return x.sum(); }, 3, o);
  EXPECT_GE(r.argmax.minCoeff(), 0.0);
  EXPECT_LE(r.argmax.maxCoeff(), 1.0);
  EXPECT_GT(r.value, 2.9);
}

TEST(Combined, BraninWithinTolerance) {
  MaximizerBudget b;
  b.max_evaluations = 1000;
  b.seed = 2;
  const CombinedResult r = combined_maximize(neg_branin_unit, 2, b);
  EXPECT_NEAR(r.best.value, -kBraninMin, 1e-2);
  EXPECT_GE(r.best.value, r.direct.value);
  EXPECT_GE(r.best.value, r.cmaes.value);
  EXPECT_LE(r.direct.evaluations + r.cmaes.evaluations, 1000 + b.cmaes_popsize);
}

TEST(Combined, NeverWorseThanEitherPart) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    MaximizerBudget b;
    b.max_evaluations = 300;
    b.seed = seed;
    const BoxObjective f = [](const Eigen::VectorXd& x) {
      return std::sin(13.0 * x[0]) * std::cos(7.0 * x[1]) - 0.2 * x.squaredNorm();
    };
    const CombinedResult r = combined_maximize(f, 2, b);
    EXPECT_EQ(r.best.value, std::max(r.direct.value, r.cmaes.value));
  }
}
