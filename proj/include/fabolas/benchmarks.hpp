#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fabolas/search_space.hpp"

namespace fabolas {

struct ObjectiveResult {
  double loss = 0.0;
  double cost = 1.0;  // seconds, > 0
};

/// Raised by objectives when an evaluation cannot produce a loss.
class EvaluationFailure : public std::runtime_error {
 public:
  EvaluationFailure(const std::string& what, double cost_seconds)
      : std::runtime_error(what), cost_seconds_(cost_seconds) {}
  double cost_seconds() const { return cost_seconds_; }

 private:
  double cost_seconds_;
};

/// Black box taking a configuration in actual units and a subset fraction.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual ObjectiveResult evaluate(const Eigen::VectorXd& config, double s, std::uint64_t seed) = 0;
};

// ---- synthetic multi-fidelity Branin ------------------------------------------

inline constexpr double kBraninMinimum = 0.397887357729738;
inline constexpr double kSyntheticOptimum = kBraninMinimum / 300.0;
inline constexpr double kSyntheticNoiseSd = 0.01;

double branin(double x1, double x2);

/// y = branin(x)/300 + 0.3 (1-s)^2 (1 + x2/15) + eps,  eps ~ N(0, 0.01^2) when a
/// noise seed is given;  z = 0.01 + s (1 + 4 (x1 + 5)/15).
ObjectiveResult synthetic_mf_eval(const Eigen::VectorXd& x, double s, std::optional<std::uint64_t> noise_seed);

/// x1 in [-5, 10], x2 in [0, 15], s_min = 1/512.
SearchSpace synthetic_space();

class SyntheticObjective : public Objective {
 public:
  explicit SyntheticObjective(bool noisy = true) : noisy_(noisy) {}
  ObjectiveResult evaluate(const Eigen::VectorXd& config, double s, std::uint64_t seed) override;

 private:
  bool noisy_;
};

// ---- tabular surrogate -------------------------------------------------------

struct Measurement {
  double loss = 0.0;
  double cost = 1.0;
};

/// Precomputed grid of repeated (loss, cost) measurements per (cell, size).
struct TabularSurrogate {
  std::vector<std::vector<double>> axes;  // per dimension, ascending
  std::vector<double> sizes;              // ascending, last == 1
  std::vector<std::vector<Measurement>> cells;  // index: cell_index * sizes.size() + size_index

  std::size_t n_cells() const;
  std::size_t cell_index(const std::vector<std::size_t>& grid_index) const;
  const std::vector<Measurement>& at(std::size_t cell, std::size_t size_index) const {
    return cells.at(cell * sizes.size() + size_index);
  }
  /// Mean loss over repeats.
  double mean_loss(std::size_t cell, std::size_t size_index) const;
  void validate() const;
};

/// 20 x 20 grid over log2 C and log2 gamma in [-10, 10], sizes 1/512..1,
/// 10 repeats. Smooth synthetic SVM-like landscape: a chance-level plateau
/// near 0.9 and a best full-data cell at 0.014.
TabularSurrogate make_svm_like_surrogate(std::uint64_t seed);

/// Index of the nearest grid value (ties toward the lower value).
std::size_t snap_axis(const std::vector<double>& axis, double v);
/// Index of the nearest size in log space (ties toward the smaller size).
std::size_t snap_size(const std::vector<double>& sizes, double s);

ObjectiveResult surrogate_eval(const TabularSurrogate& t, const Eigen::VectorXd& x, double s, std::uint64_t seed);

SearchSpace surrogate_space(const TabularSurrogate& t);

void save_surrogate_csv(const TabularSurrogate& t, const std::string& path);
TabularSurrogate load_surrogate_csv(const std::string& path);

class SurrogateObjective : public Objective {
 public:
  explicit SurrogateObjective(TabularSurrogate table) : table_(std::move(table)) {}
  ObjectiveResult evaluate(const Eigen::VectorXd& config, double s, std::uint64_t seed) override {
    return surrogate_eval(table_, config, s, seed);
  }
  const TabularSurrogate& table() const { return table_; }

 private:
  TabularSurrogate table_;
};

// ---- external training processes --------------------------------------------

/// Runs `command` through /bin/sh, writes one JSON line
///   {"config": {name: value, ...}, "subset_fraction": s, "seed": n}
/// to its stdin and reads one JSON line {"loss": y, "cost_seconds": z} back.
/// Placeholders {subset_fraction}, {seed} and {<name>} in the command are
/// substituted. Missing cost_seconds falls back to measured wall time.
/// Non-zero exit, a malformed reply or a timeout raise EvaluationFailure.
ObjectiveResult subprocess_eval(const std::string& command, const std::vector<std::string>& names,
                                const Eigen::VectorXd& x, double s, std::uint64_t seed, double timeout_seconds);

class SubprocessObjective : public Objective {
 public:
  SubprocessObjective(std::string command, std::vector<std::string> names, double timeout_seconds)
      : command_(std::move(command)), names_(std::move(names)), timeout_(timeout_seconds) {}
  ObjectiveResult evaluate(const Eigen::VectorXd& config, double s, std::uint64_t seed) override {
    return subprocess_eval(command_, names_, config, s, seed, timeout_);
  }

 private:
  std::string command_;
  std::vector<std::string> names_;
  double timeout_;
};

}  // namespace fabolas
