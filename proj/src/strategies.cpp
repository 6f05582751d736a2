#include "fabolas/strategies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "fabolas/mcmc.hpp"
#include "fabolas/random.hpp"
#include "strategy_runner.hpp"

namespace fabolas {

void Budget::validate() const {
  if (!(total_seconds > 0.0) || !std::isfinite(total_seconds))
    throw std::invalid_argument("budget: total_seconds must be positive");
  if (fixed_overhead && !(*fixed_overhead >= 0.0 && std::isfinite(*fixed_overhead)))
    throw std::invalid_argument("budget: fixed overhead must be non-negative");
}

void StrategyParams::validate() const {
  if (n_init && *n_init < 1) throw std::invalid_argument("strategy params: n_init must be >= 1");
  if (init_sizes.empty()) throw std::invalid_argument("strategy params: init_sizes must not be empty");
  if (aux_sizes.empty()) throw std::invalid_argument("strategy params: aux_sizes must not be empty");
  for (double s : aux_sizes)
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("strategy params: aux sizes must lie in (0, 1)");
  if (mcmc.n_walkers < 2 || mcmc.burn_in < 0 || mcmc.n_samples < 1)
    throw std::invalid_argument("strategy params: invalid MCMC settings");
  if (es.n_draws < 1 || es.n_fantasies < 1 || n_representers < 1)
    throw std::invalid_argument("strategy params: invalid entropy-search settings");
  if (maximizer.max_evaluations < 1 || maximizer.cmaes_popsize < 4 || maximizer.cmaes_generations < 0)
    throw std::invalid_argument("strategy params: invalid maximizer budget");
  if (hyperband_R && !(*hyperband_R >= hyperband_eta))
    throw std::invalid_argument("strategy params: hyperband R must be >= eta");
  if (!(hyperband_eta > 1.0)) throw std::invalid_argument("strategy params: hyperband eta must be > 1");
}

IncumbentTrace ExperimentRecord::trace() const {
  IncumbentTrace out;
  for (const auto& r : rows)
    if (r.incumbent) out.push_back({r.elapsed, *r.incumbent, r.predicted_incumbent_loss.value_or(std::nan(""))});
  return out;
}

double ExperimentRecord::total_cost() const {
  double c = 0.0;
  for (const auto& r : rows) c += r.z;
  return c;
}

std::vector<std::pair<Eigen::VectorXd, double>> initial_design(const SearchSpace& space, int k,
                                                               const std::vector<double>& subset_sizes,
                                                               std::uint64_t seed) {
  if (subset_sizes.empty()) throw std::invalid_argument("initial_design: subset_sizes must not be empty");
  if (k < 1) throw std::invalid_argument("initial_design: k must be >= 1");
  for (double s : subset_sizes)
    if (!(s >= space.s_min() && s <= 1.0))
      throw std::invalid_argument("initial_design: subset sizes must lie in [s_min, 1]");
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::pair<Eigen::VectorXd, double>> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd x(space.dim());
    for (int d = 0; d < space.dim(); ++d) x[d] = unif(rng);
    out.emplace_back(std::move(x), subset_sizes[static_cast<std::size_t>(i) % subset_sizes.size()]);
  }
  return out;
}

Incumbent select_incumbent(const GpEnsemble& loss_ensemble, const std::vector<Eigen::VectorXd>& observed_xs,
                           const Fidelity& fidelity) {
  if (observed_xs.empty()) throw std::invalid_argument("select_incumbent: empty history");
  if (loss_ensemble.empty()) throw std::invalid_argument("select_incumbent: empty ensemble");
  auto lex_less = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  };
  Incumbent best;
  double best_mean = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < observed_xs.size(); ++i) {
    const double m = loss_ensemble.mean(fidelity.at(observed_xs[i]));
    const bool better = m < best_mean || (m == best_mean && lex_less(observed_xs[i], best.x));
    if (i == 0 || better) {
      best_mean = m;
      best.index = i;
      best.x = observed_xs[i];
    }
  }
  best.predicted_loss = best_mean;
  return best;
}

GpEnsemble condition_ensemble(const GpEnsemble& ensemble, const ObservationSet& obs) {
  if (ensemble.empty()) throw std::invalid_argument("condition_ensemble: empty ensemble");
  auto inputs = std::make_shared<std::vector<AugmentedInput>>();
  for (const auto& r : obs.rows()) inputs->push_back(r.input);
  const Target target = ensemble.target();
  const Eigen::VectorXd y = (obs.targets(target).array() - ensemble.shift) / ensemble.scale;
  GpEnsemble out;
  out.shift = ensemble.shift;
  out.scale = ensemble.scale;
  std::shared_ptr<const std::vector<AugmentedInput>> shared = inputs;
  for (const auto& m : ensemble.members) {
    try {
      out.members.push_back(fit_gp(shared, y, m.hyperparams(), target));
    } catch (const ModelFitError&) {
    }
  }
  if (out.empty()) throw ModelFitError("condition_ensemble: no member could be refitted", ensemble.members.front().hyperparams());
  return out;
}

double failure_loss(const std::vector<double>& observed_losses) {
  if (observed_losses.empty()) return 1.0;
  const double n = static_cast<double>(observed_losses.size());
  double mean = 0.0;
  for (double v : observed_losses) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : observed_losses) var += (v - mean) * (v - mean);
  const double sd = observed_losses.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  return *std::max_element(observed_losses.begin(), observed_losses.end()) + sd;
}

// ---- shared loop plumbing ---------------------------------------------------

namespace detail {

Runner::Runner(std::string name, Objective& objective, const SearchSpace& space, const Budget& budget,
               std::uint64_t seed, const RunHooks& hooks)
    : objective_(objective), space_(space), budget_(budget), seed_(seed), hooks_(hooks), start_(Clock::now()) {
  budget_.validate();
  record_.strategy = std::move(name);
  record_.seed = seed;
}

bool Runner::exhausted() const { return stopped_ || elapsed_ >= budget_.total_seconds; }

double Runner::overhead_since(Clock::time_point t0) const {
  if (budget_.fixed_overhead) return *budget_.fixed_overhead;
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

RecordRow Runner::evaluate(const Eigen::VectorXd& unit_x, double s, double overhead) {
  RecordRow row;
  row.iteration = next_iteration_++;
  row.x = space_.to_actual(unit_x);
  row.s = s;
  row.overhead = overhead;
  try {
    const ObjectiveResult res = objective_.evaluate(row.x, s, derive_seed(seed_, {2, static_cast<std::uint64_t>(row.iteration)}));
    if (!std::isfinite(res.loss) || !(res.cost > 0.0) || !std::isfinite(res.cost))
      throw EvaluationFailure("objective returned an invalid result", std::max(res.cost, 0.0));
    row.y = res.loss;
    row.z = res.cost;
    observed_losses_.push_back(res.loss);
  } catch (const EvaluationFailure& e) {
    row.failed = true;
    row.y = failure_loss(observed_losses_);
    row.z = std::max(e.cost_seconds(), kMinFailureCost);
  }
  if (budget_.mode == BudgetMode::simulated) {
    elapsed_ += row.z + row.overhead;
  } else {
    elapsed_ = std::max(std::chrono::duration<double>(Clock::now() - start_).count(),
                        std::nextafter(elapsed_, std::numeric_limits<double>::infinity()));
  }
  row.elapsed = elapsed_;
  return row;
}

void Runner::commit(RecordRow row) {
  record_.rows.push_back(std::move(row));
  if (hooks_.on_row) hooks_.on_row(record_, record_.rows.back());
  if (hooks_.should_stop && hooks_.should_stop(record_)) stopped_ = true;
}

int walkers_for(const McmcParams& p, const HyperLayout& layout) {
  int n = std::max(p.n_walkers, 2 * layout.size());
  return n + (n % 2);
}

HyperposteriorFit fit_model(const ObservationSet& obs, const HyperLayout& layout, Target target,
                            const McmcParams& p, std::uint64_t seed, std::optional<Eigen::MatrixXd>& walkers) {
  McmcOptions opt;
  opt.n_walkers = walkers_for(p, layout);
  opt.burn_in = p.burn_in;
  opt.n_samples = p.n_samples;
  opt.seed = seed;
  opt.initial_walkers = walkers;
  try {
    HyperposteriorFit fit = sample_hyperposterior(obs, layout, target, opt);
    walkers = fit.walkers;
    return fit;
  } catch (const McmcInitError&) {
    // warm start went bad; restart from the prior
    opt.initial_walkers.reset();
    opt.seed = derive_seed(seed, {99});
    HyperposteriorFit fit = sample_hyperposterior(obs, layout, target, opt);
    walkers = fit.walkers;
    return fit;
  }
}

MaximizerBudget maximizer_for(const StrategyParams& params, std::uint64_t seed) {
  MaximizerBudget b = params.maximizer;
  b.seed = seed;
  return b;
}

}  // namespace detail

using detail::Runner;

ExperimentRecord run_fabolas(Objective& objective, const SearchSpace& space, const Budget& budget,
                             const StrategyParams& params, std::uint64_t seed, const RunHooks& hooks) {
  params.validate();
  Runner runner("fabolas", objective, space, budget, seed, hooks);
  const int d = space.dim();
  const HyperLayout layout{KernelKind::environmental, d, 1};
  const Fidelity full{1.0, 0};

  ObservationSet obs;
  std::vector<Eigen::VectorXd> xs;
  auto observe = [&](const Eigen::VectorXd& x, const RecordRow& row) {
    obs.add({AugmentedInput{x, space.size_to_unit(row.s), 0}, row.y, row.z, row.overhead});
    xs.push_back(x);
  };
  auto attach_incumbent = [&](RecordRow& row, const GpEnsemble& loss) {
    const Incumbent inc = select_incumbent(loss, xs, full);
    row.incumbent = space.to_actual(inc.x);
    row.predicted_incumbent_loss = inc.predicted_loss;
  };

  std::optional<RecordRow> pending;
  const auto design = initial_design(space, params.n_init.value_or(10), params.init_sizes, derive_seed(seed, {1}));
  for (const auto& [x, s] : design) {
    if (runner.exhausted()) break;
    if (pending) runner.commit(std::move(*pending));
    pending = runner.evaluate(x, s, 0.0);
    observe(x, *pending);
  }

  std::optional<Eigen::MatrixXd> loss_walkers, cost_walkers;
  double c_overhead = budget.fixed_overhead.value_or(0.0);
  for (std::uint64_t it = 0; !obs.empty(); ++it) {
    const auto t0 = Runner::Clock::now();
    const HyperposteriorFit loss_fit =
        detail::fit_model(obs, layout, Target::loss, params.mcmc, derive_seed(seed, {3, it, 0}), loss_walkers);
    if (pending) {
      attach_incumbent(*pending, loss_fit.ensemble);
      runner.commit(std::move(*pending));
      pending.reset();
    }
    if (runner.exhausted()) break;
    const HyperposteriorFit cost_fit =
        detail::fit_model(obs, layout, Target::log_cost, params.mcmc, derive_seed(seed, {3, it, 1}), cost_walkers);

    const RepresenterSet reps =
        sample_representers(loss_fit.ensemble, d, params.n_representers, derive_seed(seed, {4, it}), full);
    const InformationGain gain(loss_fit.ensemble, reps, full, params.es, derive_seed(seed, {5, it}));
    const GpEnsemble& cost_ensemble = cost_fit.ensemble;
    const CostModel cost = [&](const AugmentedInput& q) { return predicted_cost(cost_ensemble, q); };
    const BoxObjective acquisition = [&](const Eigen::VectorXd& v) {
      return fabolas_acquisition(v.head(d), v[d], gain, cost, c_overhead);
    };
    const CombinedResult best = combined_maximize(acquisition, d + 1, detail::maximizer_for(params, derive_seed(seed, {6, it})));

    const Eigen::VectorXd x = best.best.argmax.head(d);
    const double s = std::clamp(space.unit_to_size(best.best.argmax[d]), space.s_min(), 1.0);
    const double overhead = runner.overhead_since(t0);
    c_overhead = overhead;
    RecordRow row = runner.evaluate(x, s, overhead);
    observe(x, row);
    attach_incumbent(row, condition_ensemble(loss_fit.ensemble, obs));
    runner.commit(std::move(row));
    if (runner.exhausted()) break;
  }
  return runner.take();
}

ExperimentRecord run_vanilla_bo(VanillaAcquisition acq, Objective& objective, const SearchSpace& space,
                                const Budget& budget, const StrategyParams& params, std::uint64_t seed,
                                const RunHooks& hooks) {
  params.validate();
  Runner runner(acq == VanillaAcquisition::ei ? "ei" : "es", objective, space, budget, seed, hooks);
  const int d = space.dim();
  const HyperLayout layout{KernelKind::matern, d, 1};
  const Fidelity full{1.0, 0};

  ObservationSet obs;
  std::vector<Eigen::VectorXd> xs;
  std::optional<std::size_t> best_seen;
  auto observe = [&](const Eigen::VectorXd& x, const RecordRow& row) {
    obs.add({AugmentedInput{x, 1.0, 0}, row.y, row.z, row.overhead});
    xs.push_back(x);
    if (!row.failed && (!best_seen || row.y < obs[*best_seen].y)) best_seen = obs.size() - 1;
  };

  const auto design = initial_design(space, params.n_init.value_or(3), {1.0}, derive_seed(seed, {1}));
  for (const auto& [x, s] : design) {
    if (runner.exhausted()) break;
    RecordRow row = runner.evaluate(x, 1.0, 0.0);
    observe(x, row);
    if (best_seen) {
      row.incumbent = space.to_actual(xs[*best_seen]);
      row.predicted_incumbent_loss = obs[*best_seen].y;
    }
    runner.commit(std::move(row));
  }

  std::optional<Eigen::MatrixXd> walkers;
  for (std::uint64_t it = 0; !runner.exhausted(); ++it) {
    const auto t0 = Runner::Clock::now();
    const HyperposteriorFit fit =
        detail::fit_model(obs, layout, Target::loss, params.mcmc, derive_seed(seed, {3, it, 0}), walkers);
    const GpEnsemble& ens = fit.ensemble;
    const MaximizerBudget mb = detail::maximizer_for(params, derive_seed(seed, {6, it}));
    CombinedResult best;
    if (acq == VanillaAcquisition::ei) {
      const Eigen::VectorXd y = obs.targets(Target::loss);
      const double f_min = ens.to_standard(best_seen ? obs[*best_seen].y : y.minCoeff());
      best = combined_maximize([&](const Eigen::VectorXd& v) { return ensemble_expected_improvement(ens, full.at(v), f_min); },
                               d, mb);
    } else {
      const RepresenterSet reps = sample_representers(ens, d, params.n_representers, derive_seed(seed, {4, it}), full);
      const InformationGain gain(ens, reps, full, params.es, derive_seed(seed, {5, it}));
      best = combined_maximize([&](const Eigen::VectorXd& v) { return gain(full.at(v)); }, d, mb);
    }
    const Eigen::VectorXd x = best.best.argmax;
    RecordRow row = runner.evaluate(x, 1.0, runner.overhead_since(t0));
    observe(x, row);
    const Incumbent inc = select_incumbent(condition_ensemble(ens, obs), xs, full);
    row.incumbent = space.to_actual(inc.x);
    row.predicted_incumbent_loss = inc.predicted_loss;
    runner.commit(std::move(row));
  }
  return runner.take();
}

ExperimentRecord run_mtbo(Objective& objective, const SearchSpace& space, const Budget& budget,
                          const StrategyParams& params, std::uint64_t seed, const RunHooks& hooks) {
  params.validate();
  Runner runner("mtbo", objective, space, budget, seed, hooks);
  const int d = space.dim();

  std::set<double> task_set(params.aux_sizes.begin(), params.aux_sizes.end());
  task_set.insert(1.0);
  const std::vector<double> tasks(task_set.begin(), task_set.end());
  for (double s : tasks)
    if (s < space.s_min()) throw std::invalid_argument("run_mtbo: auxiliary size below s_min");
  const int n_tasks = static_cast<int>(tasks.size());
  const int target = n_tasks - 1;
  const HyperLayout layout{KernelKind::multi_task, d, n_tasks};
  const Fidelity full{1.0, target};

  ObservationSet obs;
  std::vector<Eigen::VectorXd> xs;
  auto observe = [&](const Eigen::VectorXd& x, int task, const RecordRow& row) {
    obs.add({AugmentedInput{x, 1.0, task}, row.y, row.z, row.overhead});
    xs.push_back(x);
  };
  auto task_of = [&](double s) {
    return static_cast<int>(std::lower_bound(tasks.begin(), tasks.end(), s) - tasks.begin());
  };
  auto attach_incumbent = [&](RecordRow& row, const GpEnsemble& loss) {
    const Incumbent inc = select_incumbent(loss, xs, full);
    row.incumbent = space.to_actual(inc.x);
    row.predicted_incumbent_loss = inc.predicted_loss;
  };

  std::optional<RecordRow> pending;
  const auto design = initial_design(space, params.n_init.value_or(4), tasks, derive_seed(seed, {1}));
  for (const auto& [x, s] : design) {
    if (runner.exhausted()) break;
    if (pending) runner.commit(std::move(*pending));
    pending = runner.evaluate(x, s, 0.0);
    observe(x, task_of(s), *pending);
  }

  std::optional<Eigen::MatrixXd> loss_walkers, cost_walkers;
  for (std::uint64_t it = 0; !obs.empty(); ++it) {
    const auto t0 = Runner::Clock::now();
    const HyperposteriorFit loss_fit =
        detail::fit_model(obs, layout, Target::loss, params.mcmc, derive_seed(seed, {3, it, 0}), loss_walkers);
    if (pending) {
      attach_incumbent(*pending, loss_fit.ensemble);
      runner.commit(std::move(*pending));
      pending.reset();
    }
    if (runner.exhausted()) break;
    const HyperposteriorFit cost_fit =
        detail::fit_model(obs, layout, Target::log_cost, params.mcmc, derive_seed(seed, {3, it, 1}), cost_walkers);

    const RepresenterSet reps =
        sample_representers(loss_fit.ensemble, d, params.n_representers, derive_seed(seed, {4, it}), full);
    const InformationGain gain(loss_fit.ensemble, reps, full, params.es, derive_seed(seed, {5, it}));
    const GpEnsemble& cost_ensemble = cost_fit.ensemble;
    const CostModel cost = [&](const AugmentedInput& q) { return predicted_cost(cost_ensemble, q); };

    Eigen::VectorXd best_x;
    int best_task = target;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < n_tasks; ++t) {
      const CombinedResult r = combined_maximize(
          [&](const Eigen::VectorXd& v) { return mtbo_acquisition(v, t, gain, cost); }, d,
          detail::maximizer_for(params, derive_seed(seed, {6, it, static_cast<std::uint64_t>(t)})));
      if (r.best.value > best_value) {
        best_value = r.best.value;
        best_x = r.best.argmax;
        best_task = t;
      }
    }
    RecordRow row = runner.evaluate(best_x, tasks[best_task], runner.overhead_since(t0));
    observe(best_x, best_task, row);
    attach_incumbent(row, condition_ensemble(loss_fit.ensemble, obs));
    runner.commit(std::move(row));
    if (runner.exhausted()) break;
  }
  return runner.take();
}

ExperimentRecord run_random_search(Objective& objective, const SearchSpace& space, const Budget& budget,
                                   std::uint64_t seed, const RunHooks& hooks) {
  Runner runner("random", objective, space, budget, seed, hooks);
  Rng rng(derive_seed(seed, {1}));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::optional<RecordRow> best;
  while (!runner.exhausted()) {
    Eigen::VectorXd x(space.dim());
    for (int i = 0; i < space.dim(); ++i) x[i] = unif(rng);
    RecordRow row = runner.evaluate(x, 1.0, budget.fixed_overhead.value_or(0.0));
    if (!row.failed && (!best || row.y < best->y)) best = row;
    if (best) {
      row.incumbent = best->x;
      row.predicted_incumbent_loss = best->y;
    }
    runner.commit(std::move(row));
  }
  return runner.take();
}

ExperimentRecord run_strategy(const std::string& name, Objective& objective, const SearchSpace& space,
                              const Budget& budget, const StrategyParams& params, std::uint64_t seed,
                              const RunHooks& hooks) {
  if (name == "fabolas") return run_fabolas(objective, space, budget, params, seed, hooks);
  if (name == "ei") return run_vanilla_bo(VanillaAcquisition::ei, objective, space, budget, params, seed, hooks);
  if (name == "es") return run_vanilla_bo(VanillaAcquisition::es, objective, space, budget, params, seed, hooks);
  if (name == "mtbo") return run_mtbo(objective, space, budget, params, seed, hooks);
  if (name == "hyperband") return run_hyperband(objective, space, budget, params, seed, hooks);
  if (name == "random") return run_random_search(objective, space, budget, seed, hooks);
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

}  // namespace fabolas
