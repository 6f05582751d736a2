#pragma once

#include <Eigen/Core>

namespace fabolas {

/// Covariance family used by a GP.
///  - matern: theta * Matern52(x, x')
///  - environmental: Matern52(x, x') * phi(s)^T Sigma_phi phi(s'), phi chosen by the target
///  - multi_task: Matern52(x, x') * (L L^T)[t, t']
enum class KernelKind { matern, environmental, multi_task };

/// What a GP is fitted on; also selects the subset-size basis.
enum class Target { loss, log_cost };

/// A point in the GP's input domain. `x` lives in the unit cube, `s_t` is the
/// log-scaled subset size in [0, 1], `task` is only read by multi-task kernels.
struct AugmentedInput {
  Eigen::VectorXd x;
  double s_t = 1.0;
  int task = 0;
};

/// Lower-triangular Cholesky factor of a task covariance.
struct TaskKernelParams {
  Eigen::MatrixXd chol;

  int n_tasks() const { return static_cast<int>(chol.rows()); }
};

struct GpHyperparams {
  KernelKind kind = KernelKind::matern;
  double theta = 1.0;
  Eigen::VectorXd lambdas;  // inverse squared length scales
  double sigma2 = 1e-3;
  Eigen::Matrix2d basis_weight_cov = Eigen::Matrix2d::Identity();
  TaskKernelParams task;

  int dim() const { return static_cast<int>(lambdas.size()); }
};

double matern52_ard(const Eigen::VectorXd& x, const Eigen::VectorXd& x2, double theta,
                    const Eigen::VectorXd& lambdas);

/// Matern52 from an already computed scaled distance r.
double matern52_from_distance(double r, double theta);

Eigen::Vector2d env_basis_loss(double s_t);
Eigen::Vector2d env_basis_cost(double s_t);

/// phi(s_t) for the basis belonging to `target`.
Eigen::Vector2d env_basis(double s_t, Target target);

double env_kernel(const AugmentedInput& a, const AugmentedInput& b, const GpHyperparams& h,
                  Target basis);

double mtbo_task_kernel(int t, int t2, const TaskKernelParams& p);

/// Dispatches on h.kind.
double covariance(const AugmentedInput& a, const AugmentedInput& b, const GpHyperparams& h,
                  Target target);

/// Throws std::invalid_argument when any positivity or PSD requirement fails.
void validate(const GpHyperparams& h);

}  // namespace fabolas
