#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace fabolas {

struct Dimension {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  bool log_scale = false;

  bool operator==(const Dimension&) const = default;
};

/// Box of hyperparameters plus the admissible range [s_min, 1] of the
/// relative subset size. Optimizers work in the unit cube; `to_actual`
/// maps back to the user's units.
class SearchSpace {
 public:
  SearchSpace() = default;
  SearchSpace(std::vector<Dimension> dims, double s_min);

  int dim() const { return static_cast<int>(dims_.size()); }
  const std::vector<Dimension>& dims() const { return dims_; }
  double s_min() const { return s_min_; }

  Eigen::VectorXd to_actual(const Eigen::VectorXd& unit) const;
  Eigen::VectorXd to_unit(const Eigen::VectorXd& actual) const;

  // Logarithmic subset-size coordinate: s_min -> 0, 1 -> 1.
  double size_to_unit(double s) const;
  double unit_to_size(double s_t) const;

  bool operator==(const SearchSpace&) const = default;

 private:
  std::vector<Dimension> dims_;
  double s_min_ = 1.0;
};

}  // namespace fabolas
