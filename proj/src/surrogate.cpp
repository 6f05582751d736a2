#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "fabolas/benchmarks.hpp"
#include "fabolas/random.hpp"

namespace fabolas {

std::size_t TabularSurrogate::n_cells() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.size();
  return n;
}

std::size_t TabularSurrogate::cell_index(const std::vector<std::size_t>& grid_index) const {
  if (grid_index.size() != axes.size()) throw std::invalid_argument("TabularSurrogate: wrong index arity");
  std::size_t idx = 0;
  for (std::size_t d = 0; d < axes.size(); ++d) {
    if (grid_index[d] >= axes[d].size()) throw std::out_of_range("TabularSurrogate: grid index out of range");
    idx = idx * axes[d].size() + grid_index[d];
  }
  return idx;
}

double TabularSurrogate::mean_loss(std::size_t cell, std::size_t size_index) const {
  const auto& ms = at(cell, size_index);
  double sum = 0.0;
  for (const auto& m : ms) sum += m.loss;
  return sum / static_cast<double>(ms.size());
}

void TabularSurrogate::validate() const {
  if (axes.empty()) throw std::invalid_argument("TabularSurrogate: no axes");
  for (const auto& a : axes) {
    if (a.empty()) throw std::invalid_argument("TabularSurrogate: empty axis");
    if (!std::is_sorted(a.begin(), a.end()) || std::adjacent_find(a.begin(), a.end()) != a.end())
      throw std::invalid_argument("TabularSurrogate: axis values must be strictly increasing");
  }
  if (sizes.empty() || !std::is_sorted(sizes.begin(), sizes.end()) || sizes.front() <= 0.0 || sizes.back() != 1.0)
    throw std::invalid_argument("TabularSurrogate: sizes must be increasing in (0, 1] and end at 1");
  if (cells.size() != n_cells() * sizes.size()) throw std::invalid_argument("TabularSurrogate: wrong number of cells");
  for (const auto& c : cells) {
    if (c.empty()) throw std::invalid_argument("TabularSurrogate: cell without measurements");
    for (const auto& m : c)
      if (!std::isfinite(m.loss) || !(m.cost > 0.0))
        throw std::invalid_argument("TabularSurrogate: invalid measurement");
  }
}

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

TabularSurrogate make_svm_like_surrogate(std::uint64_t seed) {
  constexpr int n_grid = 20;
  constexpr int n_sizes = 10;
  constexpr int n_repeats = 10;
  constexpr double best_loss = 0.014;
  constexpr double chance_loss = 0.9;

  TabularSurrogate t;
  std::vector<double> axis(n_grid);
  for (int i = 0; i < n_grid; ++i) axis[i] = -10.0 + 20.0 * i / (n_grid - 1);
  t.axes = {axis, axis};
  for (int k = 0; k < n_sizes; ++k) t.sizes.push_back(std::ldexp(1.0, k - (n_sizes - 1)));
  const double log_s_min = std::log(t.sizes.front());

  // valley of good (log2 C, log2 gamma) pairs running toward large C / small
  // gamma; the optimum sits exactly on a grid node at full size
  const double c_opt = axis[14];
  const double g_opt = axis[6];

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  t.cells.resize(static_cast<std::size_t>(n_grid * n_grid * n_sizes));
  for (int i = 0; i < n_grid; ++i) {
    for (int j = 0; j < n_grid; ++j) {
      const double c = axis[i];
      const double g = axis[j];
      const std::size_t cell = t.cell_index({static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
      for (int k = 0; k < n_sizes; ++k) {
        const double s = t.sizes[k];
        const double s_t = (std::log(s) - log_s_min) / -log_s_min;
        // small subsets prefer stronger regularization
        const double u = c - (c_opt - 3.0 * (1.0 - s_t));
        const double v = g - g_opt;
        const double a = (u + v) / std::sqrt(2.0);
        const double b = (u - v) / std::sqrt(2.0);
        const double bowl = std::exp(-(a / 3.0) * (a / 3.0) - (b / 8.0) * (b / 8.0));
        const double gate = sigmoid((4.0 - g) / 0.7) * sigmoid((c + 6.0) / 0.7);
        const double quality = bowl * gate;
        const double reach = 1.0 - 0.25 * std::pow(1.0 - s_t, 1.5);
        const double mean_loss = best_loss + (chance_loss - best_loss) * (1.0 - quality * reach);
        const double sd = 0.001 + 0.02 * quality * (1.0 - quality) + 0.004 * (1.0 - quality);

        const double work = 3000.0 * std::pow(s, 1.6) * (0.4 + 0.6 * sigmoid(c / 4.0)) * (1.5 - 0.5 * (1.0 - quality));
        auto& reps = t.cells[cell * n_sizes + k];
        reps.resize(n_repeats);
        for (auto& m : reps) {
          m.loss = std::clamp(mean_loss + sd * normal(rng), 0.001, 1.0);
          m.cost = (0.5 + work) * std::exp(0.05 * normal(rng));
        }
      }
    }
  }
  return t;
}

std::size_t snap_axis(const std::vector<double>& axis, double v) {
  if (axis.empty()) throw std::invalid_argument("snap_axis: empty axis");
  std::size_t best = 0;
  for (std::size_t i = 1; i < axis.size(); ++i)
    if (std::abs(axis[i] - v) < std::abs(axis[best] - v)) best = i;
  return best;
}

std::size_t snap_size(const std::vector<double>& sizes, double s) {
  if (sizes.empty()) throw std::invalid_argument("snap_size: no sizes");
  if (!(s > 0.0)) throw std::invalid_argument("snap_size: s must be positive");
  const double ls = std::log(s);
  std::size_t best = 0;
  double best_d = std::abs(std::log(sizes[0]) - ls);
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    const double d = std::abs(std::log(sizes[i]) - ls);
    // sizes ascend, so near-ties keep the smaller one
    if (d < best_d - 1e-12 * std::max(1.0, best_d)) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

ObjectiveResult surrogate_eval(const TabularSurrogate& t, const Eigen::VectorXd& x, double s, std::uint64_t seed) {
  if (static_cast<std::size_t>(x.size()) != t.axes.size())
    throw std::invalid_argument("surrogate_eval: configuration has the wrong dimension");
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("surrogate_eval: s must lie in (0, 1]");
  std::vector<std::size_t> idx(t.axes.size());
  for (std::size_t d = 0; d < t.axes.size(); ++d) idx[d] = snap_axis(t.axes[d], x[static_cast<Eigen::Index>(d)]);
  const auto& reps = t.at(t.cell_index(idx), snap_size(t.sizes, s));
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, reps.size() - 1);
  const Measurement& m = reps[pick(rng)];
  return {m.loss, m.cost};
}

SearchSpace surrogate_space(const TabularSurrogate& t) {
  std::vector<Dimension> dims;
  for (std::size_t d = 0; d < t.axes.size(); ++d)
    dims.push_back({"x" + std::to_string(d + 1), t.axes[d].front(), t.axes[d].back(), false});
  return SearchSpace(std::move(dims), t.sizes.front());
}

void save_surrogate_csv(const TabularSurrogate& t, const std::string& path) {
  if (t.axes.size() != 2) throw std::invalid_argument("save_surrogate_csv: only two-dimensional tables are supported");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_surrogate_csv: cannot open " + path);
  out << "x1,x2,s,repeat,loss,cost\n";
  char buf[256];
  for (std::size_t i = 0; i < t.axes[0].size(); ++i) {
    for (std::size_t j = 0; j < t.axes[1].size(); ++j) {
      const std::size_t cell = t.cell_index({i, j});
      for (std::size_t k = 0; k < t.sizes.size(); ++k) {
        const auto& reps = t.at(cell, k);
        for (std::size_t r = 0; r < reps.size(); ++r) {
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%zu,%.17g,%.17g\n", t.axes[0][i], t.axes[1][j],
                        t.sizes[k], r, reps[r].loss, reps[r].cost);
          out << buf;
        }
      }
    }
  }
  if (!out) throw std::runtime_error("save_surrogate_csv: write failed for " + path);
}

TabularSurrogate load_surrogate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_surrogate_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "x1,x2,s,repeat,loss,cost")
    throw std::runtime_error("load_surrogate_csv: unexpected header in " + path);

  struct Row {
    double x1, x2, s;
    std::size_t repeat;
    Measurement m;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 6) throw std::runtime_error("load_surrogate_csv: line " + std::to_string(line_no) + " needs 6 fields");
    try {
      rows.push_back({std::stod(f[0]), std::stod(f[1]), std::stod(f[2]), std::stoul(f[3]), {std::stod(f[4]), std::stod(f[5])}});
    } catch (const std::exception&) {
      throw std::runtime_error("load_surrogate_csv: bad number on line " + std::to_string(line_no));
    }
  }

  auto unique_sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  std::vector<double> a1, a2, ss;
  for (const auto& r : rows) {
    a1.push_back(r.x1);
    a2.push_back(r.x2);
    ss.push_back(r.s);
  }
  TabularSurrogate t;
  t.axes = {unique_sorted(a1), unique_sorted(a2)};
  t.sizes = unique_sorted(ss);
  t.cells.resize(t.n_cells() * t.sizes.size());
  auto index_of = [](const std::vector<double>& v, double x) {
    return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
  };
  for (const auto& r : rows) {
    const std::size_t cell = t.cell_index({index_of(t.axes[0], r.x1), index_of(t.axes[1], r.x2)});
    auto& reps = t.cells[cell * t.sizes.size() + index_of(t.sizes, r.s)];
    if (reps.size() <= r.repeat) reps.resize(r.repeat + 1, Measurement{std::nan(""), 0.0});
    reps[r.repeat] = r.m;
  }
  t.validate();
  return t;
}

}  // namespace fabolas
