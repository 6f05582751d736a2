#include "fabolas/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fabolas {

using json = nlohmann::ordered_json;

// ---- equality ----------------------------------------------------------------

bool operator==(const StrategyParams& a, const StrategyParams& b) {
  return a.n_init == b.n_init && a.init_sizes == b.init_sizes && a.aux_sizes == b.aux_sizes &&
         a.mcmc.n_walkers == b.mcmc.n_walkers && a.mcmc.burn_in == b.mcmc.burn_in &&
         a.mcmc.n_samples == b.mcmc.n_samples && a.es.n_draws == b.es.n_draws &&
         a.es.n_fantasies == b.es.n_fantasies && a.n_representers == b.n_representers &&
         a.maximizer.max_evaluations == b.maximizer.max_evaluations && a.maximizer.restarts == b.maximizer.restarts &&
         a.maximizer.cmaes_popsize == b.maximizer.cmaes_popsize &&
         a.maximizer.cmaes_generations == b.maximizer.cmaes_generations && a.hyperband_R == b.hyperband_R &&
         a.hyperband_eta == b.hyperband_eta;
}

bool operator==(const Budget& a, const Budget& b) {
  return a.total_seconds == b.total_seconds && a.mode == b.mode && a.fixed_overhead == b.fixed_overhead;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.space == b.space && a.strategy == b.strategy && a.params == b.params && a.objective == b.objective &&
         a.budget == b.budget && a.seeds == b.seeds && a.output_dir == b.output_dir;
}

// ---- parsing -----------------------------------------------------------------

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void expect_object(const json& v, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!v.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, _] : v.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(join(path, key), "unknown field");
  }
}

const json* member(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<int>();
}

std::uint64_t as_seed(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError(path, "expected a non-negative integer");
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], index(path, i)));
  return out;
}

template <class T, class F>
void read_opt(const json& obj, const char* key, const std::string& path, T& target, F convert) {
  if (const json* v = member(obj, key)) target = convert(*v, join(path, key));
}

SearchSpace parse_space(const json& v, const std::string& path) {
  expect_object(v, path, {"dimensions", "s_min"});
  const json* dims = member(v, "dimensions");
  if (!dims) throw ConfigError(join(path, "dimensions"), "missing required field");
  if (!dims->is_array() || dims->empty()) throw ConfigError(join(path, "dimensions"), "expected a non-empty array");
  std::vector<Dimension> out;
  for (std::size_t i = 0; i < dims->size(); ++i) {
    const std::string p = index(join(path, "dimensions"), i);
    const json& d = (*dims)[i];
    expect_object(d, p, {"name", "lower", "upper", "log_scale"});
    Dimension dim;
    dim.name = "x" + std::to_string(i + 1);
    read_opt(d, "name", p, dim.name, as_string);
    if (!member(d, "lower")) throw ConfigError(join(p, "lower"), "missing required field");
    if (!member(d, "upper")) throw ConfigError(join(p, "upper"), "missing required field");
    dim.lower = as_number(d["lower"], join(p, "lower"));
    dim.upper = as_number(d["upper"], join(p, "upper"));
    read_opt(d, "log_scale", p, dim.log_scale, as_bool);
    if (!(dim.lower < dim.upper)) throw ConfigError(join(p, "upper"), "must exceed lower");
    if (dim.log_scale && !(dim.lower > 0.0)) throw ConfigError(join(p, "lower"), "log-scaled bounds must be positive");
    out.push_back(dim);
  }
  double s_min = 1.0 / 512.0;
  read_opt(v, "s_min", path, s_min, as_number);
  if (!(s_min > 0.0 && s_min <= 1.0)) throw ConfigError(join(path, "s_min"), "must lie in (0, 1]");
  return SearchSpace(std::move(out), s_min);
}

StrategyParams parse_params(const json& v, const std::string& path) {
  expect_object(v, path,
                {"n_init", "init_sizes", "aux_sizes", "mcmc", "entropy_search", "maximizer", "hyperband"});
  StrategyParams p;
  if (const json* n = member(v, "n_init"); n && !n->is_null()) p.n_init = as_int(*n, join(path, "n_init"));
  read_opt(v, "init_sizes", path, p.init_sizes, as_numbers);
  read_opt(v, "aux_sizes", path, p.aux_sizes, as_numbers);
  if (const json* m = member(v, "mcmc")) {
    const std::string mp = join(path, "mcmc");
    expect_object(*m, mp, {"n_walkers", "burn_in", "n_samples"});
    read_opt(*m, "n_walkers", mp, p.mcmc.n_walkers, as_int);
    read_opt(*m, "burn_in", mp, p.mcmc.burn_in, as_int);
    read_opt(*m, "n_samples", mp, p.mcmc.n_samples, as_int);
  }
  if (const json* e = member(v, "entropy_search")) {
    const std::string ep = join(path, "entropy_search");
    expect_object(*e, ep, {"n_representers", "n_draws", "n_fantasies"});
    read_opt(*e, "n_representers", ep, p.n_representers, as_int);
    read_opt(*e, "n_draws", ep, p.es.n_draws, as_int);
    read_opt(*e, "n_fantasies", ep, p.es.n_fantasies, as_int);
  }
  if (const json* m = member(v, "maximizer")) {
    const std::string mp = join(path, "maximizer");
    expect_object(*m, mp, {"max_evaluations", "restarts", "cmaes_popsize", "cmaes_generations"});
    read_opt(*m, "max_evaluations", mp, p.maximizer.max_evaluations, as_int);
    read_opt(*m, "restarts", mp, p.maximizer.restarts, as_int);
    read_opt(*m, "cmaes_popsize", mp, p.maximizer.cmaes_popsize, as_int);
    read_opt(*m, "cmaes_generations", mp, p.maximizer.cmaes_generations, as_int);
  }
  if (const json* h = member(v, "hyperband")) {
    const std::string hp = join(path, "hyperband");
    expect_object(*h, hp, {"R", "eta"});
    if (const json* r = member(*h, "R"); r && !r->is_null()) p.hyperband_R = as_number(*r, join(hp, "R"));
    read_opt(*h, "eta", hp, p.hyperband_eta, as_number);
  }
  // field-level checks first so errors name the offending key
  auto at_least = [&](double value, double lo, const std::string& field) {
    if (!(value >= lo)) throw ConfigError(join(path, field), "must be >= " + std::to_string(static_cast<int>(lo)));
  };
  if (p.n_init) at_least(*p.n_init, 1, "n_init");
  at_least(p.mcmc.n_walkers, 2, "mcmc.n_walkers");
  at_least(p.mcmc.burn_in, 0, "mcmc.burn_in");
  at_least(p.mcmc.n_samples, 1, "mcmc.n_samples");
  at_least(p.n_representers, 1, "entropy_search.n_representers");
  at_least(p.es.n_draws, 1, "entropy_search.n_draws");
  at_least(p.es.n_fantasies, 1, "entropy_search.n_fantasies");
  at_least(p.maximizer.max_evaluations, 1, "maximizer.max_evaluations");
  at_least(p.maximizer.cmaes_popsize, 4, "maximizer.cmaes_popsize");
  at_least(p.maximizer.cmaes_generations, 0, "maximizer.cmaes_generations");
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return p;
}

ObjectiveSpec parse_objective(const json& v, const std::string& path) {
  expect_object(v, path, {"kind", "noisy", "path", "command", "timeout_seconds"});
  ObjectiveSpec o;
  const json* kind = member(v, "kind");
  if (!kind) throw ConfigError(join(path, "kind"), "missing required field");
  const std::string k = as_string(*kind, join(path, "kind"));
  if (k == "synthetic") o.kind = ObjectiveKind::synthetic;
  else if (k == "surrogate") o.kind = ObjectiveKind::surrogate;
  else if (k == "subprocess") o.kind = ObjectiveKind::subprocess;
  else throw ConfigError(join(path, "kind"), "must be one of synthetic, surrogate, subprocess");
  read_opt(v, "noisy", path, o.noisy, as_bool);
  read_opt(v, "path", path, o.surrogate_path, as_string);
  read_opt(v, "command", path, o.command, as_string);
  read_opt(v, "timeout_seconds", path, o.timeout_seconds, as_number);
  if (o.kind == ObjectiveKind::surrogate && o.surrogate_path.empty())
    throw ConfigError(join(path, "path"), "required for surrogate objectives");
  if (o.kind == ObjectiveKind::subprocess && o.command.empty())
    throw ConfigError(join(path, "command"), "required for subprocess objectives");
  if (!(o.timeout_seconds > 0.0)) throw ConfigError(join(path, "timeout_seconds"), "must be positive");
  return o;
}

Budget parse_budget(const json& v, const std::string& path) {
  expect_object(v, path, {"total_seconds", "mode", "fixed_overhead_seconds"});
  Budget b;
  if (!member(v, "total_seconds")) throw ConfigError(join(path, "total_seconds"), "missing required field");
  b.total_seconds = as_number(v["total_seconds"], join(path, "total_seconds"));
  if (!(b.total_seconds > 0.0)) throw ConfigError(join(path, "total_seconds"), "must be positive");
  if (const json* m = member(v, "mode")) {
    const std::string mode = as_string(*m, join(path, "mode"));
    if (mode == "simulated") b.mode = BudgetMode::simulated;
    else if (mode == "wall_clock") b.mode = BudgetMode::wall_clock;
    else throw ConfigError(join(path, "mode"), "must be simulated or wall_clock");
  }
  if (const json* f = member(v, "fixed_overhead_seconds"); f && !f->is_null()) {
    b.fixed_overhead = as_number(*f, join(path, "fixed_overhead_seconds"));
    if (!(*b.fixed_overhead >= 0.0)) throw ConfigError(join(path, "fixed_overhead_seconds"), "must be non-negative");
  }
  return b;
}

SearchSpace natural_space(const ObjectiveSpec& o) {
  switch (o.kind) {
    case ObjectiveKind::synthetic:
      return synthetic_space();
    case ObjectiveKind::surrogate:
      return surrogate_space(load_surrogate_csv(o.surrogate_path));
    case ObjectiveKind::subprocess:
      break;
  }
  throw ConfigError("space", "required for subprocess objectives");
}

json space_to_json(const SearchSpace& s) {
  json dims = json::array();
  for (const auto& d : s.dims())
    dims.push_back({{"name", d.name}, {"lower", d.lower}, {"upper", d.upper}, {"log_scale", d.log_scale}});
  return {{"dimensions", dims}, {"s_min", s.s_min()}};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  expect_object(root, "", {"space", "strategy", "params", "objective", "budget", "seeds", "output_dir"});
  ExperimentConfig c;
  if (const json* o = member(root, "objective")) c.objective = parse_objective(*o, "objective");
  if (const json* s = member(root, "strategy")) {
    c.strategy = as_string(*s, "strategy");
    const auto& names = strategy_names();
    if (std::find(names.begin(), names.end(), c.strategy) == names.end())
      throw ConfigError("strategy", "must be one of fabolas, ei, es, mtbo, hyperband, random");
  }
  if (const json* p = member(root, "params")) c.params = parse_params(*p, "params");
  if (!member(root, "budget")) throw ConfigError("budget", "missing required field");
  c.budget = parse_budget(root["budget"], "budget");
  if (const json* s = member(root, "seeds")) {
    if (!s->is_array() || s->empty()) throw ConfigError("seeds", "expected a non-empty array of seeds");
    c.seeds.clear();
    for (std::size_t i = 0; i < s->size(); ++i) c.seeds.push_back(as_seed((*s)[i], index("seeds", i)));
  }
  read_opt(root, "output_dir", "", c.output_dir, as_string);
  if (const json* s = member(root, "space")) {
    try {
      c.space = parse_space(*s, "space");
    } catch (const std::invalid_argument& e) {
      throw ConfigError("space", e.what());
    }
  } else {
    c.space = natural_space(c.objective);
  }
  for (double s : c.params.init_sizes)
    if (!(s >= c.space.s_min() && s <= 1.0)) throw ConfigError("params.init_sizes", "sizes must lie in [s_min, 1]");
  for (double s : c.params.aux_sizes)
    if (!(s >= c.space.s_min())) throw ConfigError("params.aux_sizes", "sizes must lie in [s_min, 1)");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  json root;
  root["space"] = space_to_json(c.space);
  root["strategy"] = c.strategy;
  const StrategyParams& p = c.params;
  json params;
  params["n_init"] = p.n_init ? json(*p.n_init) : json(nullptr);
  params["init_sizes"] = p.init_sizes;
  params["aux_sizes"] = p.aux_sizes;
  params["mcmc"] = {{"n_walkers", p.mcmc.n_walkers}, {"burn_in", p.mcmc.burn_in}, {"n_samples", p.mcmc.n_samples}};
  params["entropy_search"] = {
      {"n_representers", p.n_representers}, {"n_draws", p.es.n_draws}, {"n_fantasies", p.es.n_fantasies}};
  params["maximizer"] = {{"max_evaluations", p.maximizer.max_evaluations},
                         {"restarts", p.maximizer.restarts},
                         {"cmaes_popsize", p.maximizer.cmaes_popsize},
                         {"cmaes_generations", p.maximizer.cmaes_generations}};
  params["hyperband"] = {{"R", p.hyperband_R ? json(*p.hyperband_R) : json(nullptr)}, {"eta", p.hyperband_eta}};
  root["params"] = params;

  json obj;
  switch (c.objective.kind) {
    case ObjectiveKind::synthetic:
      obj["kind"] = "synthetic";
      break;
    case ObjectiveKind::surrogate:
      obj["kind"] = "surrogate";
      break;
    case ObjectiveKind::subprocess:
      obj["kind"] = "subprocess";
      break;
  }
  obj["noisy"] = c.objective.noisy;
  obj["path"] = c.objective.surrogate_path;
  obj["command"] = c.objective.command;
  obj["timeout_seconds"] = c.objective.timeout_seconds;
  root["objective"] = obj;

  root["budget"] = {{"total_seconds", c.budget.total_seconds},
                    {"mode", c.budget.mode == BudgetMode::simulated ? "simulated" : "wall_clock"},
                    {"fixed_overhead_seconds", c.budget.fixed_overhead ? json(*c.budget.fixed_overhead) : json(nullptr)}};
  root["seeds"] = c.seeds;
  root["output_dir"] = c.output_dir;
  return root.dump(2) + "\n";
}

std::unique_ptr<Objective> make_objective(const ObjectiveSpec& spec, const SearchSpace& space) {
  switch (spec.kind) {
    case ObjectiveKind::synthetic:
      return std::make_unique<SyntheticObjective>(spec.noisy);
    case ObjectiveKind::surrogate:
      return std::make_unique<SurrogateObjective>(load_surrogate_csv(spec.surrogate_path));
    case ObjectiveKind::subprocess: {
      std::vector<std::string> names;
      for (const auto& d : space.dims()) names.push_back(d.name);
      return std::make_unique<SubprocessObjective>(spec.command, std::move(names), spec.timeout_seconds);
    }
  }
  throw std::invalid_argument("make_objective: unknown objective kind");
}

// ---- records -----------------------------------------------------------------

namespace {

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vector(const json& v) {
  const auto values = v.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::string record_file_name(const std::string& strategy, std::uint64_t seed) {
  return strategy + "_seed" + std::to_string(seed) + ".jsonl";
}

std::string row_to_json_line(const ExperimentRecord& record, const RecordRow& row) {
  json j;
  j["strategy"] = record.strategy;
  j["seed"] = record.seed;
  j["iteration"] = row.iteration;
  j["x"] = vector_json(row.x);
  j["s"] = row.s;
  j["y"] = row.y;
  j["z"] = row.z;
  j["overhead_seconds"] = row.overhead;
  j["elapsed_seconds"] = row.elapsed;
  j["failed"] = row.failed;
  j["incumbent"] = row.incumbent ? vector_json(*row.incumbent) : json(nullptr);
  j["predicted_incumbent_loss"] = row.predicted_incumbent_loss ? json(*row.predicted_incumbent_loss) : json(nullptr);
  if (row.true_loss || row.invalid) {
    j["true_loss"] = row.true_loss ? json(*row.true_loss) : json(nullptr);
    j["valid"] = !row.invalid;
  }
  return j.dump();
}

ExperimentRecord read_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_record: cannot open " + path);
  ExperimentRecord rec;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      RecordRow r;
      if (first) {
        rec.strategy = j.at("strategy").get<std::string>();
        rec.seed = j.at("seed").get<std::uint64_t>();
        first = false;
      }
      r.iteration = j.at("iteration").get<int>();
      r.x = json_vector(j.at("x"));
      r.s = j.at("s").get<double>();
      r.y = j.at("y").get<double>();
      r.z = j.at("z").get<double>();
      r.overhead = j.at("overhead_seconds").get<double>();
      r.elapsed = j.at("elapsed_seconds").get<double>();
      r.failed = j.value("failed", false);
      if (!j.at("incumbent").is_null()) r.incumbent = json_vector(j["incumbent"]);
      if (!j.at("predicted_incumbent_loss").is_null()) r.predicted_incumbent_loss = j["predicted_incumbent_loss"].get<double>();
      if (j.contains("true_loss") && !j["true_loss"].is_null()) r.true_loss = j["true_loss"].get<double>();
      r.invalid = j.contains("valid") && !j["valid"].get<bool>();
      rec.rows.push_back(std::move(r));
    } catch (const json::exception& e) {
      // a truncated final line comes from an interrupted run; anything else is corrupt
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw std::runtime_error("read_record: " + path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rec;
}

void write_record(const ExperimentRecord& record, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_record: cannot open " + path);
  for (const auto& r : record.rows) out << row_to_json_line(record, r) << '\n';
  if (!out) throw std::runtime_error("write_record: write failed for " + path);
}

std::vector<std::string> run_experiment(const ExperimentConfig& config, const StopPredicate& stop) {
  const auto& names = strategy_names();
  if (std::find(names.begin(), names.end(), config.strategy) == names.end())
    throw ConfigError("strategy", "unknown strategy '" + config.strategy + "'");
  if (config.seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  std::filesystem::create_directories(config.output_dir);

  std::vector<std::string> paths;
  for (std::uint64_t seed : config.seeds) {
    const std::string path = (std::filesystem::path(config.output_dir) / record_file_name(config.strategy, seed)).string();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("run_experiment: cannot open " + path);
    RunHooks hooks;
    hooks.on_row = [&](const ExperimentRecord& rec, const RecordRow& row) {
      if (row.failed) std::cerr << "warning: " << rec.strategy << " seed " << seed << " iteration " << row.iteration << ": evaluation failed\n";
      out << row_to_json_line(rec, row) << '\n';
      out.flush();
      if (!out) throw std::runtime_error("run_experiment: write failed for " + path);
    };
    hooks.should_stop = stop;
    auto objective = make_objective(config.objective, config.space);
    run_strategy(config.strategy, *objective, config.space, config.budget, config.params, seed, hooks);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace fabolas
