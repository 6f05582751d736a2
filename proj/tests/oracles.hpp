// Independent reference implementations used only by tests. Nothing here
// calls into the library's numerical code.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double matern52(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double theta, const Eigen::VectorXd& lambdas) {
  double q = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) q += lambdas[i] * (a[i] - b[i]) * (a[i] - b[i]);
  const double r = std::sqrt(q);
  return theta * (1.0 + std::sqrt(5.0) * r + 5.0 * q / 3.0) * std::exp(-std::sqrt(5.0) * r);
}

struct Point {
  Eigen::VectorXd x;
  double s = 1.0;  // transformed size
  int task = 0;
};

enum class Kind { matern, env_loss, env_cost, multi_task };

struct Params {
  Kind kind = Kind::matern;
  double theta = 1.0;
  Eigen::VectorXd lambdas;
  double sigma2 = 1e-3;
  Eigen::Matrix2d sigma_phi = Eigen::Matrix2d::Identity();
  Eigen::MatrixXd task_cov;  // full T x T covariance
};

inline double kernel(const Point& a, const Point& b, const Params& p) {
  const double base = matern52(a.x, b.x, p.theta, p.lambdas);
  switch (p.kind) {
    case Kind::matern:
      return base;
    case Kind::env_loss: {
      const Eigen::Vector2d fa(1.0, (1.0 - a.s) * (1.0 - a.s));
      const Eigen::Vector2d fb(1.0, (1.0 - b.s) * (1.0 - b.s));
      return base * fa.dot(p.sigma_phi * fb);
    }
    case Kind::env_cost: {
      const Eigen::Vector2d fa(1.0, a.s);
      const Eigen::Vector2d fb(1.0, b.s);
      return base * fa.dot(p.sigma_phi * fb);
    }
    case Kind::multi_task:
      return base * p.task_cov(a.task, b.task);
  }
  return 0.0;
}

/// Textbook GP equations with an explicit matrix inverse.
struct DenseGp {
  std::vector<Point> pts;
  Params p;
  Eigen::MatrixXd k_inv;
  Eigen::VectorXd y;
  double log_det = 0.0;

  DenseGp(std::vector<Point> points, Eigen::VectorXd targets, Params params)
      : pts(std::move(points)), p(std::move(params)), y(std::move(targets)) {
    const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) k(i, j) = kernel(pts[i], pts[j], p);
    k.diagonal().array() += p.sigma2;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
    k_inv = lu.inverse();
    log_det = 0.0;
    const Eigen::MatrixXd u = lu.matrixLU();
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(std::abs(u(i, i)));
  }

  std::pair<double, double> predict(const Point& q) const {
    const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
    Eigen::VectorXd kq(n);
    for (Eigen::Index i = 0; i < n; ++i) kq[i] = kernel(pts[i], q, p);
    const double mean = kq.dot(k_inv * y);
    const double var = kernel(q, q, p) - kq.dot(k_inv * kq);
    return {mean, var};
  }

  double log_evidence() const {
    const double n = static_cast<double>(pts.size());
    return -0.5 * y.dot(k_inv * y) - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
  }
};

inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// Kolmogorov-Smirnov statistic of samples against U(0, 1).
inline double ks_uniform(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - v[i]);
    d = std::max(d, v[i] - static_cast<double>(i) / n);
  }
  return d;
}

/// Asymptotic KS critical value at level 0.01.
inline double ks_critical_001(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

/// Upper 1% point of chi-square with k degrees of freedom (Wilson-Hilferty).
inline double chi2_critical_001(int k) {
  const double z = 2.3263478740408408;
  const double a = 2.0 / (9.0 * k);
  return k * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

/// Branin on its native domain.
inline double branin(double x1, double x2) {
  const double pi = std::numbers::pi;
  const double t = x2 - 5.1 / (4 * pi * pi) * x1 * x1 + 5 / pi * x1 - 6;
  return t * t + 10 * (1 - 1 / (8 * pi)) * std::cos(x1) + 10;
}

}  // namespace oracle
