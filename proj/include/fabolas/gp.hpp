#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fabolas/kernels.hpp"

namespace fabolas {

struct Observation {
  AugmentedInput input;
  double y = 0.0;         // loss
  double z = 1.0;         // cost in seconds
  double overhead = 0.0;  // optimizer seconds spent choosing this row
};

class ObservationSet {
 public:
  /// Rejects non-finite y and non-positive z.
  void add(Observation row);

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const std::vector<Observation>& rows() const { return rows_; }
  const Observation& operator[](std::size_t i) const { return rows_[i]; }

  /// y for Target::loss, log z for Target::log_cost.
  Eigen::VectorXd targets(Target target) const;

 private:
  std::vector<Observation> rows_;
};

class ModelFitError : public std::runtime_error {
 public:
  ModelFitError(const std::string& what, GpHyperparams h)
      : std::runtime_error(what), hyperparams_(std::move(h)) {}
  const GpHyperparams& hyperparams() const { return hyperparams_; }

 private:
  GpHyperparams hyperparams_;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Zero-mean GP posterior for a fixed hyperparameter setting.
class GpPosterior {
 public:
  GpPosterior(GpHyperparams h, Target target, std::shared_ptr<const std::vector<AugmentedInput>> inputs,
              Eigen::MatrixXd chol, Eigen::VectorXd alpha, double jitter);

  const GpHyperparams& hyperparams() const { return h_; }
  Target target() const { return target_; }
  const std::vector<AugmentedInput>& inputs() const { return *inputs_; }
  /// Lower-triangular factor of K + (sigma2 + jitter) I.
  const Eigen::MatrixXd& chol() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double jitter() const { return jitter_; }
  std::size_t size() const { return inputs_->size(); }

  double kernel(const AugmentedInput& a, const AugmentedInput& b) const {
    return covariance(a, b, h_, target_);
  }
  /// k(X, q) for all training inputs X.
  Eigen::VectorXd cross_covariance(const AugmentedInput& q) const;

  Prediction predict(const AugmentedInput& q) const;

 private:
  GpHyperparams h_;
  Target target_;
  std::shared_ptr<const std::vector<AugmentedInput>> inputs_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

/// Cholesky with the escalating jitter ladder: no jitter first, then
/// 1e-10 * mean(diag), x10 per retry, at most 5 retries. Returns false when
/// every attempt fails. `used_jitter` receives the added diagonal.
bool robust_cholesky(const Eigen::MatrixXd& a, Eigen::MatrixXd& lower, double& used_jitter);

Eigen::MatrixXd gram_matrix(const std::vector<AugmentedInput>& inputs, const GpHyperparams& h,
                            Target target);

GpPosterior fit_gp(const ObservationSet& obs, const GpHyperparams& h, Target target);
/// Same as above with explicit target values (used for standardized fits).
GpPosterior fit_gp(std::shared_ptr<const std::vector<AugmentedInput>> inputs, const Eigen::VectorXd& y,
                   const GpHyperparams& h, Target target);

Prediction predict(const GpPosterior& p, const AugmentedInput& q);

double log_marginal_likelihood(const ObservationSet& obs, const GpHyperparams& h, Target target);
double log_marginal_likelihood(const std::vector<AugmentedInput>& inputs, const Eigen::VectorXd& y,
                               const GpHyperparams& h, Target target);

/// Posterior samples over hyperparameters. Members work on standardized
/// targets (y - shift) / scale; `predict` maps back to original units.
struct GpEnsemble {
  std::vector<GpPosterior> members;
  double shift = 0.0;
  double scale = 1.0;

  bool empty() const { return members.empty(); }
  std::size_t size() const { return members.size(); }
  Target target() const { return members.front().target(); }

  /// Mixture moments in original units.
  Prediction predict(const AugmentedInput& q) const;
  /// Average of member posterior means, original units.
  double mean(const AugmentedInput& q) const;
  double to_standard(double y) const { return (y - shift) / scale; }
  double from_standard(double v) const { return v * scale + shift; }
};

// ---- hyperparameter vector layout and hyper-priors -------------------------

/// Describes the packed log-space vector:
///   [log theta, log lambda_1..d, log sigma2, extras...]
/// extras: environmental -> [log L00, L10, log L11] of Sigma_phi = L L^T;
///         multi_task    -> lower triangle of the task factor, row-major,
///                          diagonal entries in log space.
struct HyperLayout {
  KernelKind kind = KernelKind::matern;
  int dim = 1;
  int n_tasks = 1;

  int size() const;
};

Eigen::VectorXd pack(const GpHyperparams& h);
GpHyperparams unpack(const HyperLayout& layout, const Eigen::VectorXd& v);
HyperLayout layout_of(const GpHyperparams& h);

/// Support bounds for packed coordinates that have a bounded prior.
inline constexpr double kLogLambdaLower = -10.0;
inline constexpr double kLogLambdaUpper = 2.0;
inline constexpr double kLogNoiseLower = -20.0;
inline constexpr double kLogNoiseUpper = 2.0;
inline constexpr double kHorseshoeScale = 0.1;

double log_hyper_prior(const GpHyperparams& h);
double log_hyper_prior_packed(const HyperLayout& layout, const Eigen::VectorXd& v);

}  // namespace fabolas
