#include "fabolas/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

namespace fabolas {

void ObservationSet::add(Observation row) {
  if (!std::isfinite(row.y)) throw std::invalid_argument("observation loss must be finite");
  if (!(row.z > 0.0) || !std::isfinite(row.z)) throw std::invalid_argument("observation cost must be > 0");
  rows_.push_back(std::move(row));
}

Eigen::VectorXd ObservationSet::targets(Target target) const {
  Eigen::VectorXd y(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i)
    y[i] = target == Target::loss ? rows_[i].y : std::log(rows_[i].z);
  return y;
}

GpPosterior::GpPosterior(GpHyperparams h, Target target,
                         std::shared_ptr<const std::vector<AugmentedInput>> inputs, Eigen::MatrixXd chol,
                         Eigen::VectorXd alpha, double jitter)
    : h_(std::move(h)),
      target_(target),
      inputs_(std::move(inputs)),
      chol_(std::move(chol)),
      alpha_(std::move(alpha)),
      jitter_(jitter) {}

Eigen::VectorXd GpPosterior::cross_covariance(const AugmentedInput& q) const {
  const auto& xs = *inputs_;
  Eigen::VectorXd k(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) k[i] = kernel(xs[i], q);
  return k;
}

Prediction GpPosterior::predict(const AugmentedInput& q) const {
  const Eigen::VectorXd k = cross_covariance(q);
  Prediction p;
  p.mean = k.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  p.variance = std::max(0.0, kernel(q, q) - v.squaredNorm());
  return p;
}

Prediction predict(const GpPosterior& p, const AugmentedInput& q) { return p.predict(q); }

bool robust_cholesky(const Eigen::MatrixXd& a, Eigen::MatrixXd& lower, double& used_jitter) {
  const Eigen::Index n = a.rows();
  const double base = a.diagonal().mean();
  double jitter = 0.0;
  for (int attempt = 0; attempt <= 5; ++attempt) {
    if (attempt == 1) jitter = 1e-10 * (base > 0.0 ? base : 1.0);
    else if (attempt > 1) jitter *= 10.0;
    Eigen::MatrixXd m = a;
    if (jitter > 0.0) m.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd l = llt.matrixL();
    bool ok = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    lower = std::move(l);
    used_jitter = jitter;
    return true;
  }
  return false;
}

Eigen::MatrixXd gram_matrix(const std::vector<AugmentedInput>& inputs, const GpHyperparams& h,
                            Target target) {
  const auto n = static_cast<Eigen::Index>(inputs.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = covariance(inputs[i], inputs[j], h, target);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

namespace {

std::shared_ptr<const std::vector<AugmentedInput>> collect_inputs(const ObservationSet& obs) {
  auto xs = std::make_shared<std::vector<AugmentedInput>>();
  xs->reserve(obs.size());
  for (const auto& r : obs.rows()) xs->push_back(r.input);
  return xs;
}

}  // namespace

GpPosterior fit_gp(std::shared_ptr<const std::vector<AugmentedInput>> inputs, const Eigen::VectorXd& y,
                   const GpHyperparams& h, Target target) {
  if (!inputs || inputs->empty()) throw std::invalid_argument("fit_gp: empty observation set");
  if (static_cast<Eigen::Index>(inputs->size()) != y.size())
    throw std::invalid_argument("fit_gp: targets do not match inputs");
  validate(h);
  Eigen::MatrixXd k = gram_matrix(*inputs, h, target);
  k.diagonal().array() += h.sigma2;
  Eigen::MatrixXd l;
  double jitter = 0.0;
  if (!robust_cholesky(k, l, jitter)) {
    throw ModelFitError("fit_gp: Cholesky failed after maximum jitter (theta=" + std::to_string(h.theta) +
                            ", sigma2=" + std::to_string(h.sigma2) + ")",
                        h);
  }
  Eigen::VectorXd alpha = l.triangularView<Eigen::Lower>().solve(y);
  l.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha);
  return GpPosterior(h, target, std::move(inputs), std::move(l), std::move(alpha), jitter);
}

GpPosterior fit_gp(const ObservationSet& obs, const GpHyperparams& h, Target target) {
  if (obs.empty()) throw std::invalid_argument("fit_gp: empty observation set");
  return fit_gp(collect_inputs(obs), obs.targets(target), h, target);
}

double log_marginal_likelihood(const std::vector<AugmentedInput>& inputs, const Eigen::VectorXd& y,
                               const GpHyperparams& h, Target target) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (inputs.empty()) return kNegInf;
  try {
    validate(h);
  } catch (const std::invalid_argument&) {
    return kNegInf;
  }
  Eigen::MatrixXd k = gram_matrix(inputs, h, target);
  k.diagonal().array() += h.sigma2;
  Eigen::MatrixXd l;
  double jitter = 0.0;
  if (!robust_cholesky(k, l, jitter)) return kNegInf;
  const Eigen::VectorXd v = l.triangularView<Eigen::Lower>().solve(y);
  const double n = static_cast<double>(y.size());
  const double value = -0.5 * v.squaredNorm() - l.diagonal().array().log().sum() -
                       0.5 * n * std::log(2.0 * std::numbers::pi);
  return std::isfinite(value) ? value : kNegInf;
}

double log_marginal_likelihood(const ObservationSet& obs, const GpHyperparams& h, Target target) {
  std::vector<AugmentedInput> xs;
  xs.reserve(obs.size());
  for (const auto& r : obs.rows()) xs.push_back(r.input);
  return log_marginal_likelihood(xs, obs.targets(target), h, target);
}

Prediction GpEnsemble::predict(const AugmentedInput& q) const {
  if (members.empty()) throw std::logic_error("GpEnsemble::predict on empty ensemble");
  double m1 = 0.0, m2 = 0.0;
  for (const auto& m : members) {
    const Prediction p = m.predict(q);
    m1 += p.mean;
    m2 += p.variance + p.mean * p.mean;
  }
  const double n = static_cast<double>(members.size());
  m1 /= n;
  m2 /= n;
  return {from_standard(m1), std::max(0.0, m2 - m1 * m1) * scale * scale};
}

double GpEnsemble::mean(const AugmentedInput& q) const {
  if (members.empty()) throw std::logic_error("GpEnsemble::mean on empty ensemble");
  double m = 0.0;
  for (const auto& p : members) m += p.cross_covariance(q).dot(p.alpha());
  return from_standard(m / static_cast<double>(members.size()));
}

}  // namespace fabolas
