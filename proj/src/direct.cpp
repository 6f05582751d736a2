#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "fabolas/maximizer.hpp"

namespace fabolas {

namespace {

struct Rect {
  Eigen::VectorXd center;
  std::vector<int> levels;  // side length of dim i is 3^-levels[i]
  double f = 0.0;  // value to minimize (negated objective)
};

double half_diagonal(const std::vector<int>& levels) {
  double s = 0.0;
  for (int l : levels) s += std::pow(9.0, -l);
  return 0.5 * std::sqrt(s);
}

class DirectSearch {
 public:
  DirectSearch(const BoxObjective& objective, int dim, int max_evals)
      : objective_(objective), dim_(dim), max_evals_(max_evals) {}

  bool exhausted() const { return result_.evaluations >= max_evals_; }

  double eval(const Eigen::VectorXd& x) {
    const double v = objective_(x);
    ++result_.evaluations;
    if (result_.evaluations == 1 || v > result_.value) {
      result_.value = v;
      result_.argmax = x;
    }
    result_.best_trace.push_back(result_.value);
    return -v;
  }

  MaximizeResult run(double epsilon) {
    Rect root{Eigen::VectorXd::Constant(dim_, 0.5), std::vector<int>(dim_, 0), 0.0};
    root.f = eval(root.center);
    rects_.push_back(root);
    while (!exhausted()) {
      const std::vector<std::size_t> selected = potentially_optimal(epsilon);
      if (selected.empty()) break;
      for (std::size_t idx : selected) {
        if (exhausted()) break;
        divide(idx);
      }
    }
    return result_;
  }

 private:
  std::vector<std::size_t> potentially_optimal(double epsilon) const {
    // best rectangle per size class; a class is the sorted level multiset
    std::map<std::vector<int>, std::size_t> best_per_class;
    for (std::size_t i = 0; i < rects_.size(); ++i) {
      std::vector<int> key = rects_[i].levels;
      std::sort(key.begin(), key.end());
      auto it = best_per_class.find(key);
      if (it == best_per_class.end() || rects_[i].f < rects_[it->second].f) best_per_class[key] = i;
    }
    std::vector<std::pair<double, std::size_t>> groups;
    for (const auto& [key, i] : best_per_class) groups.emplace_back(half_diagonal(key), i);
    std::sort(groups.begin(), groups.end());
    // distinct level multisets can share a diameter (from 10 dims on); keep
    // one entry per diameter so the slopes below never divide by zero
    std::vector<std::pair<double, std::size_t>> merged;
    for (const auto& g : groups) {
      if (!merged.empty() && g.first - merged.back().first <= 1e-12 * g.first) {
        if (rects_[g.second].f < rects_[merged.back().second].f) merged.back().second = g.second;
      } else {
        merged.push_back(g);
      }
    }
    groups = std::move(merged);
    double f_min = std::numeric_limits<double>::infinity();
    for (const auto& r : rects_) f_min = std::min(f_min, r.f);

    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < groups.size(); ++j) {
      const double dj = groups[j].first;
      const double fj = rects_[groups[j].second].f;
      double k_low = 0.0;
      double k_high = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < groups.size(); ++i) {
        if (i == j) continue;
        const double di = groups[i].first;
        const double fi = rects_[groups[i].second].f;
        if (di < dj) k_low = std::max(k_low, (fj - fi) / (dj - di));
        else k_high = std::min(k_high, (fi - fj) / (di - dj));
      }
      if (k_low > k_high) continue;
      if (std::isfinite(k_high) && fj - k_high * dj > f_min - epsilon * std::abs(f_min)) continue;
      out.push_back(groups[j].second);
    }
    // largest rectangles first, matching the usual sweep order
    std::reverse(out.begin(), out.end());
    return out;
  }

  void divide(std::size_t idx) {
    const Rect parent = rects_[idx];
    const int min_level = *std::min_element(parent.levels.begin(), parent.levels.end());
    std::vector<int> long_dims;
    for (int i = 0; i < dim_; ++i)
      if (parent.levels[i] == min_level) long_dims.push_back(i);
    const double delta = std::pow(3.0, -(min_level + 1));

    struct Probe {
      int dim;
      double best;
      Rect plus, minus;
    };
    std::vector<Probe> probes;
    for (int d : long_dims) {
      if (exhausted()) break;
      Probe p{d, 0.0, parent, parent};
      p.plus.center[d] += delta;
      p.plus.f = eval(p.plus.center);
      if (exhausted()) {
        rects_.push_back(p.plus);
        return;
      }
      p.minus.center[d] -= delta;
      p.minus.f = eval(p.minus.center);
      p.best = std::min(p.plus.f, p.minus.f);
      probes.push_back(std::move(p));
    }
    std::stable_sort(probes.begin(), probes.end(), [](const Probe& a, const Probe& b) { return a.best < b.best; });
    std::vector<int> levels = parent.levels;
    for (auto& p : probes) {
      ++levels[p.dim];
      p.plus.levels = levels;
      p.minus.levels = levels;
      rects_.push_back(p.plus);
      rects_.push_back(p.minus);
    }
    rects_[idx].levels = levels;
  }

  const BoxObjective& objective_;
  int dim_;
  int max_evals_;
  std::vector<Rect> rects_;
  MaximizeResult result_;
};

}  // namespace

MaximizeResult direct_maximize(const BoxObjective& objective, int dim, const MaximizerBudget& budget,
                               double epsilon) {
  if (dim < 1) throw std::invalid_argument("direct_maximize: dim must be >= 1");
  if (budget.max_evaluations < 1) throw std::invalid_argument("direct_maximize: max_evaluations must be >= 1");
  DirectSearch search(objective, dim, budget.max_evaluations);
  return search.run(epsilon);
}

}  // namespace fabolas
