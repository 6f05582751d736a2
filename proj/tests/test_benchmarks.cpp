#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include <unistd.h>

#include <gtest/gtest.h>

#include "fabolas/benchmarks.hpp"
#include "oracles.hpp"

using namespace fabolas;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// Cells sorted by mean full-data loss, worst first.
std::vector<std::size_t> cells_by_full_loss(const TabularSurrogate& t) {
  const std::size_t full = t.sizes.size() - 1;
  std::vector<std::size_t> idx(t.n_cells());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return t.mean_loss(a, full) > t.mean_loss(b, full); });
  return idx;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("fabolas_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Branin, KnownMinimizers) {
  const double pi = std::numbers::pi;
  for (auto [a, b] : {std::pair{-pi, 12.275}, std::pair{pi, 2.275}, std::pair{9.42478, 2.475}})
    EXPECT_NEAR(branin(a, b), kBraninMinimum, 1e-5);
  EXPECT_NEAR(branin(0.0, 0.0), oracle::branin(0.0, 0.0), 1e-12);
}

TEST(Synthetic, OptimumValue) {
  const ObjectiveResult r = synthetic_mf_eval(vec2(-std::numbers::pi, 12.275), 1.0, std::nullopt);
  EXPECT_NEAR(r.loss, kBraninMinimum / 300.0, 1e-8);
  EXPECT_NEAR(r.loss, 0.0013263, 1e-7);
}

TEST(Synthetic, FullDataRemovesSizeTerm) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u1(-5.0, 10.0), u2(0.0, 15.0);
  for (int i = 0; i < 100; ++i) {
    const double a = u1(rng), b = u2(rng);
    EXPECT_NEAR(synthetic_mf_eval(vec2(a, b), 1.0, std::nullopt).loss, oracle::branin(a, b) / 300.0, 1e-12);
  }
}

TEST(Synthetic, LossDecreasesAndCostIncreasesWithSize) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u1(-5.0, 10.0), u2(0.0, 15.0);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd x = vec2(u1(rng), u2(rng));
    double prev_loss = std::numeric_limits<double>::infinity(), prev_cost = 0.0;
    for (double s = 1.0 / 512.0; s <= 1.0; s *= 2.0) {
      const ObjectiveResult r = synthetic_mf_eval(x, s, std::nullopt);
      EXPECT_LT(r.loss, prev_loss);
      EXPECT_GT(r.cost, prev_cost);
      prev_loss = r.loss;
      prev_cost = r.cost;
    }
  }
}

TEST(Synthetic, NoiseIsSeededAndSmall) {
  const Eigen::VectorXd x = vec2(1.0, 4.0);
  const double clean = synthetic_mf_eval(x, 0.5, std::nullopt).loss;
  EXPECT_EQ(synthetic_mf_eval(x, 0.5, 7).loss, synthetic_mf_eval(x, 0.5, 7).loss);
  double sum = 0.0, sq = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const double e = synthetic_mf_eval(x, 0.5, static_cast<std::uint64_t>(i)).loss - clean;
    sum += e;
    sq += e * e;
  }
  EXPECT_NEAR(sum / n, 0.0, 5e-4);
  EXPECT_NEAR(std::sqrt(sq / n), kSyntheticNoiseSd, 1e-3);
}

TEST(Synthetic, RejectsOutOfDomain) {
  EXPECT_THROW(synthetic_mf_eval(vec2(11.0, 1.0), 1.0, std::nullopt), std::invalid_argument);
  EXPECT_THROW(synthetic_mf_eval(vec2(0.0, 1.0), 0.0, std::nullopt), std::invalid_argument);
  EXPECT_THROW(synthetic_mf_eval(vec2(0.0, 1.0), 1.5, std::nullopt), std::invalid_argument);
}

class SurrogateTable : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { table = new TabularSurrogate(make_svm_like_surrogate(0)); }
  static void TearDownTestSuite() { delete table; }
  static TabularSurrogate* table;
};
TabularSurrogate* SurrogateTable::table = nullptr;

TEST_F(SurrogateTable, Shape) {
  const TabularSurrogate& t = *table;
  ASSERT_EQ(t.axes.size(), 2u);
  EXPECT_EQ(t.axes[0].size(), 20u);
  EXPECT_EQ(t.axes[0].front(), -10.0);
  EXPECT_EQ(t.axes[0].back(), 10.0);
  ASSERT_EQ(t.sizes.size(), 10u);
  EXPECT_EQ(t.sizes.front(), 1.0 / 512.0);
  EXPECT_EQ(t.sizes.back(), 1.0);
  EXPECT_EQ(t.n_cells(), 400u);
  for (const auto& c : t.cells) EXPECT_EQ(c.size(), 10u);
  EXPECT_NO_THROW(t.validate());
}

TEST_F(SurrogateTable, BestFullDataCell) {
  const auto order = cells_by_full_loss(*table);
  EXPECT_NEAR(table->mean_loss(order.back(), table->sizes.size() - 1), 0.014, 0.002);
}

TEST_F(SurrogateTable, WorstDecilePlateau) {
  const auto order = cells_by_full_loss(*table);
  for (std::size_t k = 0; k < table->sizes.size(); ++k) {
    double m = 0.0;
    for (std::size_t i = 0; i < 40; ++i) m += table->mean_loss(order[i], k);
    EXPECT_NEAR(m / 40.0, 0.9, 0.05) << "size " << table->sizes[k];
  }
}

TEST_F(SurrogateTable, SmallSubsetsPreserveRanking) {
  std::vector<double> small, full;
  const std::size_t k128 = snap_size(table->sizes, 1.0 / 128.0);
  ASSERT_EQ(table->sizes[k128], 1.0 / 128.0);
  for (std::size_t c = 0; c < table->n_cells(); ++c) {
    small.push_back(table->mean_loss(c, k128));
    full.push_back(table->mean_loss(c, table->sizes.size() - 1));
  }
  EXPECT_GE(oracle::spearman(small, full), 0.8);
}

TEST_F(SurrogateTable, CostGrowsWithSize) {
  for (std::size_t c = 0; c < table->n_cells(); c += 37) {
    double first = 0.0, last = 0.0;
    for (const auto& m : table->at(c, 0)) first += m.cost;
    for (const auto& m : table->at(c, table->sizes.size() - 1)) last += m.cost;
    EXPECT_GT(last, 10.0 * first);
  }
}

TEST_F(SurrogateTable, SnappingRules) {
  const std::vector<double>& axis = table->axes[0];
  EXPECT_EQ(snap_axis(axis, axis[3]), 3u);
  EXPECT_EQ(snap_axis(axis, 0.5 * (axis[3] + axis[4])), 3u);
  EXPECT_EQ(snap_axis(axis, -100.0), 0u);
  EXPECT_EQ(snap_axis(axis, 100.0), axis.size() - 1);
  const double mid = std::sqrt(1.0 / 128.0 * 1.0 / 256.0);
  EXPECT_EQ(table->sizes[snap_size(table->sizes, mid)], 1.0 / 256.0);
  EXPECT_EQ(table->sizes[snap_size(table->sizes, 0.9)], 1.0);
}

TEST_F(SurrogateTable, GridQueryReturnsStoredRepeat) {
  const std::size_t cell = table->cell_index({5, 12});
  const Eigen::VectorXd x = vec2(table->axes[0][5], table->axes[1][12]);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ObjectiveResult r = surrogate_eval(*table, x, 1.0, seed);
    bool found = false;
    for (const auto& m : table->at(cell, table->sizes.size() - 1)) found |= m.loss == r.loss && m.cost == r.cost;
    EXPECT_TRUE(found);
  }
  EXPECT_EQ(surrogate_eval(*table, x, 0.3, 4).loss, surrogate_eval(*table, x, 0.3, 4).loss);
}

TEST_F(SurrogateTable, RepeatSelectionUniform) {
  const std::size_t cell = table->cell_index({2, 9});
  const auto& reps = table->at(cell, 4);
  const Eigen::VectorXd x = vec2(table->axes[0][2], table->axes[1][9]);
  std::vector<int> counts(reps.size(), 0);
  const int n = 10000;
  for (int seed = 0; seed < n; ++seed) {
    const ObjectiveResult r = surrogate_eval(*table, x, table->sizes[4], static_cast<std::uint64_t>(seed));
    for (std::size_t i = 0; i < reps.size(); ++i)
      if (reps[i].loss == r.loss && reps[i].cost == r.cost) {
        ++counts[i];
        break;
      }
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(n) / reps.size();
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, oracle::chi2_critical_001(static_cast<int>(reps.size()) - 1));
}

TEST_F(SurrogateTable, CsvRoundTrip) {
  const auto path = temp_path("surrogate.csv");
  save_surrogate_csv(*table, path.string());
  const TabularSurrogate back = load_surrogate_csv(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(back.axes, table->axes);
  EXPECT_EQ(back.sizes, table->sizes);
  ASSERT_EQ(back.cells.size(), table->cells.size());
  for (std::size_t i = 0; i < back.cells.size(); ++i)
    for (std::size_t r = 0; r < back.cells[i].size(); ++r) {
      EXPECT_EQ(back.cells[i][r].loss, table->cells[i][r].loss);
      EXPECT_EQ(back.cells[i][r].cost, table->cells[i][r].cost);
    }
}

TEST(Surrogate, SeedDeterminesTable) {
  const TabularSurrogate a = make_svm_like_surrogate(5), b = make_svm_like_surrogate(5);
  for (std::size_t i = 0; i < a.cells.size(); i += 97) EXPECT_EQ(a.cells[i][0].loss, b.cells[i][0].loss);
}

TEST(Surrogate, MalformedCsvRejected) {
  const auto path = temp_path("bad.csv");
  {
    std::ofstream out(path);
    out << "x1,x2,s,repeat,loss,cost\n0,0,1,0,notanumber,1\n";
  }
  EXPECT_THROW(load_surrogate_csv(path.string()), std::runtime_error);
  std::filesystem::remove(path);
}

TEST(Subprocess, EchoStub) {
  const ObjectiveResult r =
      subprocess_eval("cat > /dev/null; echo '{\"loss\": 0.5, \"cost_seconds\": 2.0}'", {"a"}, Eigen::VectorXd::Zero(1), 0.5, 1, 10.0);
  EXPECT_EQ(r.loss, 0.5);
  EXPECT_EQ(r.cost, 2.0);
}

TEST(Subprocess, ReceivesConfigAndPlaceholders) {
  const std::string cmd =
      "read line; case \"$line\" in *'\"lr\":0.25'*'\"subset_fraction\":0.125'*) "
      "echo '{\"loss\": {seed}, \"cost_seconds\": {subset_fraction}}';; *) exit 3;; esac";
  Eigen::VectorXd x(1);
  x << 0.25;
  const ObjectiveResult r = subprocess_eval(cmd, {"lr"}, x, 0.125, 9, 10.0);
  EXPECT_EQ(r.loss, 9.0);
  EXPECT_EQ(r.cost, 0.125);
}

TEST(Subprocess, NonZeroExitFails) {
  EXPECT_THROW(subprocess_eval("exit 1", {"a"}, Eigen::VectorXd::Zero(1), 1.0, 0, 10.0), EvaluationFailure);
  EXPECT_THROW(subprocess_eval("echo not json", {"a"}, Eigen::VectorXd::Zero(1), 1.0, 0, 10.0), EvaluationFailure);
  EXPECT_THROW(subprocess_eval("echo '{\"loss\": 1, \"cost_seconds\": -1}'", {"a"}, Eigen::VectorXd::Zero(1), 1.0, 0, 10.0),
               EvaluationFailure);
}

TEST(Subprocess, MissingCostUsesWallTime) {
  const ObjectiveResult r =
      subprocess_eval("sleep 0.2; echo '{\"loss\": 0.1}'", {"a"}, Eigen::VectorXd::Zero(1), 1.0, 0, 10.0);
  EXPECT_GE(r.cost, 0.2);
  EXPECT_LE(r.cost, 0.5);
}

TEST(Subprocess, TimeoutFails) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    subprocess_eval("sleep 5", {"a"}, Eigen::VectorXd::Zero(1), 1.0, 0, 0.3);
    FAIL() << "expected EvaluationFailure";
  } catch (const EvaluationFailure& e) {
    EXPECT_GE(e.cost_seconds(), 0.3);
  }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 3.0);
}
