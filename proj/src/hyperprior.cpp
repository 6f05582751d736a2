#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "fabolas/gp.hpp"

namespace fabolas {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_std_normal(double v) { return -0.5 * v * v - 0.5 * std::log(2.0 * std::numbers::pi); }

int extras_size(const HyperLayout& layout) {
  switch (layout.kind) {
    case KernelKind::matern:
      return 0;
    case KernelKind::environmental:
      return 3;
    case KernelKind::multi_task:
      return layout.n_tasks * (layout.n_tasks + 1) / 2;
  }
  return 0;
}

}  // namespace

int HyperLayout::size() const { return 2 + dim + extras_size(*this); }

HyperLayout layout_of(const GpHyperparams& h) {
  return {h.kind, h.dim(), h.kind == KernelKind::multi_task ? h.task.n_tasks() : 1};
}

Eigen::VectorXd pack(const GpHyperparams& h) {
  const HyperLayout layout = layout_of(h);
  Eigen::VectorXd v(layout.size());
  int i = 0;
  v[i++] = std::log(h.theta);
  for (int k = 0; k < layout.dim; ++k) v[i++] = std::log(h.lambdas[k]);
  v[i++] = std::log(h.sigma2);
  if (h.kind == KernelKind::environmental) {
    Eigen::LLT<Eigen::Matrix2d> llt(h.basis_weight_cov);
    const Eigen::Matrix2d l = llt.matrixL();
    v[i++] = std::log(l(0, 0));
    v[i++] = l(1, 0);
    v[i++] = std::log(l(1, 1));
  } else if (h.kind == KernelKind::multi_task) {
    for (int r = 0; r < layout.n_tasks; ++r)
      for (int c = 0; c <= r; ++c) v[i++] = r == c ? std::log(h.task.chol(r, c)) : h.task.chol(r, c);
  }
  return v;
}

GpHyperparams unpack(const HyperLayout& layout, const Eigen::VectorXd& v) {
  if (v.size() != layout.size()) throw std::invalid_argument("unpack: vector size does not match layout");
  GpHyperparams h;
  h.kind = layout.kind;
  int i = 0;
  h.theta = std::exp(v[i++]);
  h.lambdas.resize(layout.dim);
  for (int k = 0; k < layout.dim; ++k) h.lambdas[k] = std::exp(v[i++]);
  h.sigma2 = std::exp(v[i++]);
  if (layout.kind == KernelKind::environmental) {
    Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
    l(0, 0) = std::exp(v[i++]);
    l(1, 0) = v[i++];
    l(1, 1) = std::exp(v[i++]);
    h.basis_weight_cov = l * l.transpose();
  } else if (layout.kind == KernelKind::multi_task) {
    h.task.chol = Eigen::MatrixXd::Zero(layout.n_tasks, layout.n_tasks);
    for (int r = 0; r < layout.n_tasks; ++r)
      for (int c = 0; c <= r; ++c) h.task.chol(r, c) = r == c ? std::exp(v[i++]) : v[i++];
  }
  return h;
}

double log_hyper_prior_packed(const HyperLayout& layout, const Eigen::VectorXd& v) {
  if (v.size() != layout.size() || !v.allFinite()) return kNegInf;
  int i = 0;
  // amplitude: lognormal(0, 1), i.e. standard normal in log space
  double lp = log_std_normal(v[i++]);
  for (int k = 0; k < layout.dim; ++k) {
    const double ll = v[i++];
    if (ll < kLogLambdaLower || ll > kLogLambdaUpper) return kNegInf;
    lp -= std::log(kLogLambdaUpper - kLogLambdaLower);
  }
  const double log_noise = v[i++];
  if (log_noise < kLogNoiseLower || log_noise > kLogNoiseUpper) return kNegInf;
  // horseshoe on the noise variance via its analytic bound
  const double ratio = kHorseshoeScale / std::exp(log_noise);
  lp += std::log(std::log1p(2.0 * ratio * ratio));
  // remaining Cholesky entries: lognormal(0, 1) diagonal, normal(0, 1) off-diagonal
  for (; i < v.size(); ++i) lp += log_std_normal(v[i]);
  return lp;
}

double log_hyper_prior(const GpHyperparams& h) {
  if (!(h.theta > 0.0) || !(h.sigma2 > 0.0) || (h.lambdas.array() <= 0.0).any()) return kNegInf;
  if (h.kind == KernelKind::environmental) {
    Eigen::LLT<Eigen::Matrix2d> llt(h.basis_weight_cov);
    if (llt.info() != Eigen::Success) return kNegInf;
  }
  if (h.kind == KernelKind::multi_task && (h.task.chol.diagonal().array() <= 0.0).any()) return kNegInf;
  return log_hyper_prior_packed(layout_of(h), pack(h));
}

}  // namespace fabolas
