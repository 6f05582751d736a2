#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "fabolas/acquisition.hpp"
#include "fabolas/random.hpp"

namespace fabolas {

void gauss_hermite(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  nodes = eig.eigenvalues();
  weights = eig.eigenvectors().row(0).transpose().array().square();
  weights /= weights.sum();
}

double entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}

double kl_to_uniform(const Eigen::VectorXd& p) {
  return std::log(static_cast<double>(p.size())) - entropy(p);
}

namespace {

// Adds argmin mass for one draw column, splitting ties evenly.
template <typename Column>
void count_argmin(const Column& col, Eigen::VectorXd& counts) {
  const Eigen::Index r = col.size();
  double best = col[0];
  for (Eigen::Index i = 1; i < r; ++i) best = std::min(best, col[i]);
  int ties = 0;
  for (Eigen::Index i = 0; i < r; ++i) ties += col[i] == best;
  const double share = 1.0 / ties;
  for (Eigen::Index i = 0; i < r; ++i)
    if (col[i] == best) counts[i] += share;
}

}  // namespace

InformationGain::InformationGain(const GpEnsemble& ensemble, const RepresenterSet& reps, const Fidelity& fidelity,
                                 const EntropySearchOptions& options, std::uint64_t seed)
    : ensemble_(&ensemble) {
  if (ensemble.empty()) throw std::invalid_argument("InformationGain: empty ensemble");
  if (reps.size() == 0) throw std::invalid_argument("InformationGain: empty representer set");
  if (options.n_draws < 1 || options.n_fantasies < 1)
    throw std::invalid_argument("InformationGain: n_draws and n_fantasies must be >= 1");
  gauss_hermite(options.n_fantasies, nodes_, weights_);
  for (const auto& x : reps.points) rep_inputs_.push_back(fidelity.at(x));

  const auto n_rep = static_cast<Eigen::Index>(rep_inputs_.size());
  const int m_draws = options.n_draws;
  members_.reserve(ensemble.size());
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    const GpPosterior& gp = ensemble.members[k];
    MemberState st;
    st.gp = &gp;
    Eigen::MatrixXd kxr(gp.size(), n_rep);
    for (Eigen::Index r = 0; r < n_rep; ++r) kxr.col(r) = gp.cross_covariance(rep_inputs_[r]);
    st.v = gp.chol().triangularView<Eigen::Lower>().solve(kxr);
    st.mean = kxr.transpose() * gp.alpha();
    Eigen::MatrixXd krr(n_rep, n_rep);
    for (Eigen::Index i = 0; i < n_rep; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) krr(i, j) = krr(j, i) = gp.kernel(rep_inputs_[i], rep_inputs_[j]);
    st.cov = krr - st.v.transpose() * st.v;
    st.cov = 0.5 * (st.cov + st.cov.transpose());
    double jitter = 0.0;
    if (!robust_cholesky(st.cov, st.chol, jitter))
      throw ModelFitError("InformationGain: representer covariance is degenerate", gp.hyperparams());

    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    std::normal_distribution<double> normal(0.0, 1.0);
    st.eps.resize(n_rep, m_draws);
    for (Eigen::Index c = 0; c < m_draws; ++c)
      for (Eigen::Index r = 0; r < n_rep; ++r) st.eps(r, c) = normal(rng);
    st.eta.resize(m_draws);
    st.noise.resize(m_draws);
    for (int c = 0; c < m_draws; ++c) st.eta[c] = normal(rng);
    for (int c = 0; c < m_draws; ++c) st.noise[c] = normal(rng);
    st.draws = st.chol.triangularView<Eigen::Lower>() * st.eps;
    st.draws.colwise() += st.mean;
    members_.push_back(std::move(st));
  }
}

InformationGain::CandidateTerms InformationGain::candidate_terms(const MemberState& m, const AugmentedInput& c) const {
  const GpPosterior& gp = *m.gp;
  const Eigen::VectorXd kc = gp.cross_covariance(c);
  const Eigen::VectorXd w = gp.chol().triangularView<Eigen::Lower>().solve(kc);
  CandidateTerms t;
  t.pred_var = std::max(0.0, gp.kernel(c, c) - w.squaredNorm());
  Eigen::VectorXd krc(rep_inputs_.size());
  for (std::size_t r = 0; r < rep_inputs_.size(); ++r) krc[r] = gp.kernel(rep_inputs_[r], c);
  t.cross = krc - m.v.transpose() * w;

  const double noise = gp.hyperparams().sigma2 + gp.jitter();
  const double total = t.pred_var + noise;
  t.pred_sd = std::sqrt(total);
  if (total < 1e-14) {
    t.gain_dir = Eigen::VectorXd::Zero(rep_inputs_.size());
    t.delta = Eigen::VectorXd::Zero(m.eps.cols());
    return t;
  }
  const Eigen::VectorXd a = m.chol.triangularView<Eigen::Lower>().solve(t.cross);
  const double resid_sd = std::sqrt(std::max(0.0, t.pred_var - a.squaredNorm()));
  t.delta = m.eps.transpose() * a + resid_sd * m.eta + std::sqrt(noise) * m.noise;
  t.gain_dir = t.cross / total;
  return t;
}

std::vector<Eigen::VectorXd> InformationGain::fantasy_pmins(std::size_t member, const AugmentedInput& candidate) const {
  const MemberState& m = members_.at(member);
  const CandidateTerms t = candidate_terms(m, candidate);
  const Eigen::Index n_rep = m.draws.rows();
  const Eigen::Index n_draws = m.draws.cols();
  const Eigen::Index n_nodes = nodes_.size();
  std::vector<Eigen::VectorXd> counts(static_cast<std::size_t>(n_nodes), Eigen::VectorXd::Zero(n_rep));

  // For one draw the fantasy-updated values are lines base[r] + shift * g[r]
  // in the scalar shift, so the argmin at every fantasy node is read off the
  // lower envelope of those lines. Equal slopes make exact ties possible;
  // that case uses the direct scan with tie splitting.
  const double* g = t.gain_dir.data();
  std::vector<Eigen::Index> by_slope(static_cast<std::size_t>(n_rep));
  std::iota(by_slope.begin(), by_slope.end(), 0);
  std::sort(by_slope.begin(), by_slope.end(), [&](Eigen::Index a, Eigen::Index b) { return g[a] > g[b]; });
  bool distinct_slopes = true;
  for (std::size_t i = 1; i < by_slope.size(); ++i) distinct_slopes &= g[by_slope[i - 1]] != g[by_slope[i]];
  std::vector<Eigen::Index> node_order(static_cast<std::size_t>(n_nodes));
  std::iota(node_order.begin(), node_order.end(), 0);
  std::sort(node_order.begin(), node_order.end(), [&](Eigen::Index a, Eigen::Index b) { return nodes_[a] < nodes_[b]; });

  std::vector<Eigen::Index> hull;
  hull.reserve(static_cast<std::size_t>(n_rep));
  Eigen::VectorXd col(n_rep);
  for (Eigen::Index d = 0; d < n_draws; ++d) {
    const double* base = m.draws.col(d).data();
    if (!distinct_slopes) {
      for (Eigen::Index i = 0; i < n_nodes; ++i) {
        const double shift = t.pred_sd * nodes_[i] - t.delta[d];
        col = m.draws.col(d) + shift * t.gain_dir;
        count_argmin(col, counts[static_cast<std::size_t>(i)]);
      }
      continue;
    }
    // x-coordinate where line b (smaller slope) drops below line a
    auto cross_at = [&](Eigen::Index a, Eigen::Index b) { return (base[b] - base[a]) / (g[a] - g[b]); };
    hull.clear();
    for (Eigen::Index r : by_slope) {
      while (hull.size() >= 2 &&
             cross_at(hull[hull.size() - 2], r) <= cross_at(hull[hull.size() - 2], hull.back()))
        hull.pop_back();
      hull.push_back(r);
    }
    std::size_t p = 0;
    for (Eigen::Index i : node_order) {
      const double shift = t.pred_sd * nodes_[i] - t.delta[d];
      while (p + 1 < hull.size() && shift > cross_at(hull[p], hull[p + 1])) ++p;
      counts[static_cast<std::size_t>(i)][hull[p]] += 1.0;
    }
  }
  for (auto& c : counts) c /= static_cast<double>(n_draws);
  return counts;
}

Eigen::VectorXd InformationGain::member_pmin(std::size_t member) const {
  const MemberState& m = members_.at(member);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(m.draws.rows());
  for (Eigen::Index d = 0; d < m.draws.cols(); ++d) count_argmin(m.draws.col(d), counts);
  return counts / static_cast<double>(m.draws.cols());
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> InformationGain::representer_covariances(
    std::size_t member, const AugmentedInput& candidate) const {
  const MemberState& m = members_.at(member);
  const CandidateTerms t = candidate_terms(m, candidate);
  Eigen::MatrixXd after = m.cov - t.gain_dir * t.cross.transpose();
  return {m.cov, 0.5 * (after + after.transpose())};
}

double InformationGain::member_gain(std::size_t member, const AugmentedInput& candidate) const {
  const std::vector<Eigen::VectorXd> pmins = fantasy_pmins(member, candidate);
  Eigen::VectorXd mixture = Eigen::VectorXd::Zero(pmins.front().size());
  double expected_entropy = 0.0;
  for (std::size_t i = 0; i < pmins.size(); ++i) {
    mixture += weights_[static_cast<Eigen::Index>(i)] * pmins[i];
    expected_entropy += weights_[static_cast<Eigen::Index>(i)] * entropy(pmins[i]);
  }
  return entropy(mixture) - expected_entropy;
}

double InformationGain::operator()(const AugmentedInput& candidate) const {
  double g = 0.0;
  for (std::size_t k = 0; k < members_.size(); ++k) g += member_gain(k, candidate);
  return g / static_cast<double>(members_.size());
}

PminEstimate estimate_pmin(const GpEnsemble& ensemble, const RepresenterSet& reps, int n_draws, std::uint64_t seed,
                           const Fidelity& fidelity) {
  if (n_draws < 1) throw std::invalid_argument("estimate_pmin: n_draws must be >= 1");
  const InformationGain state(ensemble, reps, fidelity, {n_draws, 1}, seed);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(reps.size()));
  for (std::size_t k = 0; k < state.n_members(); ++k) p += state.member_pmin(k);
  p /= static_cast<double>(state.n_members());
  p /= p.sum();
  return {p};
}

}  // namespace fabolas
