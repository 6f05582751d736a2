#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fabolas/random.hpp"
#include "fabolas/strategies.hpp"
#include "strategy_runner.hpp"

namespace fabolas {

namespace {
constexpr double kRoundingSlack = 1e-9;
}

std::vector<Bracket> hyperband_brackets(double R, double eta) {
  if (!(eta > 1.0)) throw std::invalid_argument("hyperband_brackets: eta must be > 1");
  if (!(R >= eta)) throw std::invalid_argument("hyperband_brackets: R must be >= eta");
  const int s_max = static_cast<int>(std::floor(std::log(R) / std::log(eta) + kRoundingSlack));
  std::vector<Bracket> out;
  for (int s = s_max; s >= 0; --s) {
    Bracket b;
    b.s = s;
    b.n_configs = static_cast<int>(std::ceil((s_max + 1.0) / (s + 1.0) * std::pow(eta, s) - kRoundingSlack));
    b.initial_resource = R * std::pow(eta, -s);
    for (int i = 0; i <= s; ++i) {
      Rung r;
      r.n_configs = static_cast<int>(std::floor(b.n_configs * std::pow(eta, -i) + kRoundingSlack));
      r.resource = i == s ? R : b.initial_resource * std::pow(eta, i);
      b.rungs.push_back(r);
    }
    out.push_back(std::move(b));
  }
  return out;
}

ExperimentRecord run_hyperband(Objective& objective, const SearchSpace& space, const Budget& budget,
                               const StrategyParams& params, std::uint64_t seed, const RunHooks& hooks) {
  params.validate();
  detail::Runner runner("hyperband", objective, space, budget, seed, hooks);
  const double R = params.hyperband_R.value_or(1.0 / space.s_min());
  const std::vector<Bracket> brackets = hyperband_brackets(R, params.hyperband_eta);
  const double overhead = budget.fixed_overhead.value_or(0.0);

  Rng rng(derive_seed(seed, {1}));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::optional<RecordRow> best;  // best full-size evaluation

  for (std::size_t round = 0; !runner.exhausted(); ++round) {
    const Bracket& b = brackets[round % brackets.size()];
    std::vector<Eigen::VectorXd> configs(b.n_configs, Eigen::VectorXd(space.dim()));
    for (auto& c : configs)
      for (int i = 0; i < space.dim(); ++i) c[i] = unif(rng);

    for (std::size_t rung = 0; rung < b.rungs.size() && !runner.exhausted(); ++rung) {
      const bool full = rung + 1 == b.rungs.size();
      const double s = full ? 1.0 : std::clamp(b.rungs[rung].resource / R, space.s_min(), 1.0);
      std::vector<double> losses;
      for (const auto& c : configs) {
        if (runner.exhausted()) break;
        RecordRow row = runner.evaluate(c, s, overhead);
        losses.push_back(row.y);
        if (full && !row.failed && (!best || row.y < best->y)) best = row;
        if (best) {
          row.incumbent = best->x;
          row.predicted_incumbent_loss = best->y;
        }
        runner.commit(std::move(row));
      }
      if (full || losses.size() < configs.size()) break;
      const std::size_t keep =
          std::min<std::size_t>(configs.size(), static_cast<std::size_t>(std::max(b.rungs[rung + 1].n_configs, 0)));
      std::vector<std::size_t> order(configs.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return losses[a] < losses[c]; });
      std::vector<Eigen::VectorXd> survivors;
      for (std::size_t i = 0; i < keep; ++i) survivors.push_back(configs[order[i]]);
      configs = std::move(survivors);
      if (configs.empty()) break;
    }
  }
  return runner.take();
}

}  // namespace fabolas
