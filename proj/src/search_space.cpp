#include "fabolas/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fabolas {

SearchSpace::SearchSpace(std::vector<Dimension> dims, double s_min)
    : dims_(std::move(dims)), s_min_(s_min) {
  if (!(s_min_ > 0.0 && s_min_ <= 1.0)) throw std::invalid_argument("s_min must lie in (0, 1]");
  for (const auto& d : dims_) {
    if (!(d.lower < d.upper))
      throw std::invalid_argument("dimension '" + d.name + "': lower must be < upper");
    if (d.log_scale && d.lower <= 0.0)
      throw std::invalid_argument("dimension '" + d.name + "': log-scale bounds must be > 0");
  }
}

Eigen::VectorXd SearchSpace::to_actual(const Eigen::VectorXd& unit) const {
  if (unit.size() != dim()) throw std::invalid_argument("to_actual: dimension mismatch");
  Eigen::VectorXd out(dim());
  for (int i = 0; i < dim(); ++i) {
    const auto& d = dims_[i];
    const double u = std::clamp(unit[i], 0.0, 1.0);
    if (d.log_scale) {
      const double lo = std::log(d.lower), hi = std::log(d.upper);
      out[i] = std::exp(lo + u * (hi - lo));
    } else {
      out[i] = d.lower + u * (d.upper - d.lower);
    }
  }
  return out;
}

Eigen::VectorXd SearchSpace::to_unit(const Eigen::VectorXd& actual) const {
  if (actual.size() != dim()) throw std::invalid_argument("to_unit: dimension mismatch");
  Eigen::VectorXd out(dim());
  for (int i = 0; i < dim(); ++i) {
    const auto& d = dims_[i];
    double u;
    if (d.log_scale) {
      const double lo = std::log(d.lower), hi = std::log(d.upper);
      u = (std::log(actual[i]) - lo) / (hi - lo);
    } else {
      u = (actual[i] - d.lower) / (d.upper - d.lower);
    }
    out[i] = std::clamp(u, 0.0, 1.0);
  }
  return out;
}

double SearchSpace::size_to_unit(double s) const {
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("subset size must lie in (0, 1]");
  if (s_min_ >= 1.0) return 1.0;
  const double t = (std::log(s) - std::log(s_min_)) / (-std::log(s_min_));
  return std::clamp(t, 0.0, 1.0);
}

double SearchSpace::unit_to_size(double s_t) const {
  if (s_min_ >= 1.0) return 1.0;
  const double t = std::clamp(s_t, 0.0, 1.0);
  if (t == 1.0) return 1.0;
  return std::exp(std::log(s_min_) * (1.0 - t));
}

}  // namespace fabolas
