#include "fabolas/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace fabolas {

namespace {

const double kSqrt5 = std::sqrt(5.0);

double scaled_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                       const Eigen::VectorXd& lambdas) {
  double q = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = x[i] - x2[i];
    q += lambdas[i] * d * d;
  }
  return std::sqrt(q);
}

void check_unit(double s_t) {
  if (!(s_t >= 0.0 && s_t <= 1.0)) throw std::invalid_argument("subset coordinate outside [0, 1]");
}

double basis_product(double s_a, double s_b, const Eigen::Matrix2d& cov, Target target) {
  double a1, b1;
  if (target == Target::loss) {
    a1 = (1.0 - s_a) * (1.0 - s_a);
    b1 = (1.0 - s_b) * (1.0 - s_b);
  } else {
    a1 = s_a;
    b1 = s_b;
  }
  return cov(0, 0) + cov(0, 1) * b1 + cov(1, 0) * a1 + cov(1, 1) * a1 * b1;
}

}  // namespace

double matern52_from_distance(double r, double theta) {
  return theta * (1.0 + kSqrt5 * r + (5.0 / 3.0) * r * r) * std::exp(-kSqrt5 * r);
}

double matern52_ard(const Eigen::VectorXd& x, const Eigen::VectorXd& x2, double theta,
                    const Eigen::VectorXd& lambdas) {
  if (x.size() != x2.size() || x.size() != lambdas.size())
    throw std::invalid_argument("matern52_ard: length mismatch");
  if (!(theta > 0.0)) throw std::invalid_argument("matern52_ard: theta must be positive");
  if ((lambdas.array() <= 0.0).any())
    throw std::invalid_argument("matern52_ard: length-scale parameters must be positive");
  return matern52_from_distance(scaled_distance(x, x2, lambdas), theta);
}

Eigen::Vector2d env_basis_loss(double s_t) {
  check_unit(s_t);
  return {1.0, (1.0 - s_t) * (1.0 - s_t)};
}

Eigen::Vector2d env_basis_cost(double s_t) {
  check_unit(s_t);
  return {1.0, s_t};
}

Eigen::Vector2d env_basis(double s_t, Target target) {
  return target == Target::loss ? env_basis_loss(s_t) : env_basis_cost(s_t);
}

double env_kernel(const AugmentedInput& a, const AugmentedInput& b, const GpHyperparams& h,
                  Target basis) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(h.basis_weight_cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 ||
      std::abs(h.basis_weight_cov(0, 1) - h.basis_weight_cov(1, 0)) > 1e-12)
    throw std::invalid_argument("env_kernel: basis weight covariance is not PSD");
  const Eigen::Vector2d pa = env_basis(a.s_t, basis);
  const Eigen::Vector2d pb = env_basis(b.s_t, basis);
  return matern52_ard(a.x, b.x, h.theta, h.lambdas) * pa.dot(h.basis_weight_cov * pb);
}

double mtbo_task_kernel(int t, int t2, const TaskKernelParams& p) {
  const int n = p.n_tasks();
  if (t < 0 || t2 < 0 || t >= n || t2 >= n) throw std::out_of_range("mtbo_task_kernel: task index");
  // (L L^T)_{t,t2} = sum_k L(t,k) L(t2,k), L lower triangular
  double v = 0.0;
  for (int k = 0; k <= std::min(t, t2); ++k) v += p.chol(t, k) * p.chol(t2, k);
  return v;
}

double covariance(const AugmentedInput& a, const AugmentedInput& b, const GpHyperparams& h,
                  Target target) {
  const double r = scaled_distance(a.x, b.x, h.lambdas);
  switch (h.kind) {
    case KernelKind::matern:
      return matern52_from_distance(r, h.theta);
    case KernelKind::environmental:
      return matern52_from_distance(r, h.theta) *
             basis_product(a.s_t, b.s_t, h.basis_weight_cov, target);
    case KernelKind::multi_task: {
      double v = 0.0;
      for (int k = 0; k <= std::min(a.task, b.task); ++k) v += h.task.chol(a.task, k) * h.task.chol(b.task, k);
      return matern52_from_distance(r, h.theta) * v;
    }
  }
  return 0.0;
}

void validate(const GpHyperparams& h) {
  if (!(h.theta > 0.0) || !std::isfinite(h.theta)) throw std::invalid_argument("theta must be positive");
  if (h.lambdas.size() == 0) throw std::invalid_argument("lambdas must be non-empty");
  if ((h.lambdas.array() <= 0.0).any() || !h.lambdas.allFinite())
    throw std::invalid_argument("lambdas must be positive");
  if (!(h.sigma2 > 0.0) || !std::isfinite(h.sigma2)) throw std::invalid_argument("sigma2 must be positive");
  if (h.kind == KernelKind::environmental) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(h.basis_weight_cov, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 ||
        std::abs(h.basis_weight_cov(0, 1) - h.basis_weight_cov(1, 0)) > 1e-12)
      throw std::invalid_argument("basis weight covariance is not PSD");
  }
  if (h.kind == KernelKind::multi_task) {
    if (h.task.n_tasks() < 1 || h.task.chol.cols() != h.task.chol.rows())
      throw std::invalid_argument("task Cholesky factor must be square and non-empty");
    if ((h.task.chol.diagonal().array() <= 0.0).any())
      throw std::invalid_argument("task Cholesky diagonal must be positive");
  }
}

}  // namespace fabolas
