#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "fabolas/gp.hpp"
#include "fabolas/search_space.hpp"

namespace fabolas {

/// Closed-form expected improvement for minimization.
double expected_improvement(double mean, double variance, double f_min);

/// Where the minimizer distribution is taken: the full dataset (s_t = 1) for
/// the subset-size model, or the target task for multi-task models.
struct Fidelity {
  double s_t = 1.0;
  int task = 0;

  AugmentedInput at(const Eigen::VectorXd& x) const { return {x, s_t, task}; }
};

struct RepresenterSet {
  std::vector<Eigen::VectorXd> points;  // unit-cube configurations
  Eigen::VectorXd log_weights;          // -log of the normalized proposal density

  std::size_t size() const { return points.size(); }
};

struct PminEstimate {
  Eigen::VectorXd probabilities;
};

/// Smallest ensemble-averaged posterior mean over the training configurations
/// projected to `fidelity`, in the members' standardized units.
double standardized_incumbent_mean(const GpEnsemble& ensemble, const Fidelity& fidelity);

/// Ensemble-averaged EI at `fidelity`, standardized units.
double ensemble_expected_improvement(const GpEnsemble& ensemble, const AugmentedInput& q, double f_min_std);

/// Importance-resamples n_rep points (without replacement) from a pool of
/// uniform proposals with probability proportional to ensemble EI at
/// `fidelity`. A flat EI landscape degrades to uniform sampling.
RepresenterSet sample_representers(const GpEnsemble& ensemble, int dim, int n_rep, std::uint64_t seed,
                                   const Fidelity& fidelity = {});

/// Monte-Carlo p_min: argmin frequencies of joint posterior draws at the
/// representers, ties split evenly, averaged over ensemble members.
PminEstimate estimate_pmin(const GpEnsemble& ensemble, const RepresenterSet& reps, int n_draws, std::uint64_t seed,
                           const Fidelity& fidelity = {});

/// Nodes and weights (summing to 1) of Gauss-Hermite quadrature against the
/// standard normal density.
void gauss_hermite(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Entropy of a discrete distribution (natural log); 0 log 0 = 0.
double entropy(const Eigen::VectorXd& p);
/// KL(p || uniform) over p.size() atoms.
double kl_to_uniform(const Eigen::VectorXd& p);

struct EntropySearchOptions {
  int n_draws = 500;
  int n_fantasies = 10;
};

/// Expected information gain about the minimizer at `fidelity` from one
/// evaluation at a candidate input.
///
/// Per ensemble member, joint draws at the representers are fixed once
/// (common random numbers across candidates) and conditioned on each
/// Gauss-Hermite fantasy outcome by pathwise (Matheron) updates. The gain is
///   sum_i w_i KL(p'_i || u) - KL(p_bar || u),  p_bar = sum_i w_i p'_i,
/// i.e. the expected entropy reduction of p_min; p_bar is the fantasy-averaged
/// minimizer belief, which equals the current belief in expectation. The
/// result is non-negative by concavity of the entropy.
///
/// The ensemble and representers must outlive this object.
class InformationGain {
 public:
  InformationGain(const GpEnsemble& ensemble, const RepresenterSet& reps, const Fidelity& fidelity,
                  const EntropySearchOptions& options, std::uint64_t seed);

  double operator()(const AugmentedInput& candidate) const;
  double member_gain(std::size_t member, const AugmentedInput& candidate) const;

  /// Fantasy-conditioned p_min per quadrature node for one member.
  std::vector<Eigen::VectorXd> fantasy_pmins(std::size_t member, const AugmentedInput& candidate) const;
  /// Current p_min of one member from the stored draws.
  Eigen::VectorXd member_pmin(std::size_t member) const;
  /// Representer covariance before and after conditioning on a fantasy at the candidate.
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> representer_covariances(std::size_t member,
                                                                      const AugmentedInput& candidate) const;

  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  std::size_t n_members() const { return members_.size(); }

 private:
  struct MemberState {
    const GpPosterior* gp = nullptr;
    Eigen::MatrixXd v;        // L_K^{-1} k(X, R)
    Eigen::VectorXd mean;     // posterior mean at representers
    Eigen::MatrixXd cov;      // posterior covariance at representers
    Eigen::MatrixXd chol;     // factor of cov
    Eigen::MatrixXd eps;      // R x M standard normals
    Eigen::MatrixXd draws;    // mean + chol * eps
    Eigen::VectorXd eta;      // residual normals for the candidate's latent value
    Eigen::VectorXd noise;    // observation-noise normals
  };

  struct CandidateTerms {
    Eigen::VectorXd gain_dir;  // Sigma_rc / (v_c + sigma2)
    Eigen::VectorXd delta;     // joint-draw deviation of the noisy fantasy, per draw
    double pred_sd = 0.0;      // sqrt(v_c + sigma2)
    Eigen::VectorXd cross;     // Sigma_rc
    double pred_var = 0.0;
  };

  CandidateTerms candidate_terms(const MemberState& m, const AugmentedInput& c) const;

  const GpEnsemble* ensemble_;
  std::vector<AugmentedInput> rep_inputs_;
  std::vector<MemberState> members_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
};

/// Convenience wrapper constructing an InformationGain for one query.
double information_gain(const GpEnsemble& ensemble, const AugmentedInput& candidate, const RepresenterSet& reps,
                        int n_fantasies, std::uint64_t seed, const Fidelity& fidelity = {}, int n_draws = 500);

/// Predicted evaluation cost: mean over members of exp(posterior mean of log-cost).
double predicted_cost(const GpEnsemble& cost_ensemble, const AugmentedInput& q);

using CostModel = std::function<double(const AugmentedInput&)>;

/// Information gain per second, including optimizer overhead.
double fabolas_acquisition(double gain, double cost, double c_overhead);

/// Information gain about the s = 1 minimizer at (x, s_t), divided by
/// (predicted cost + c_overhead).
double fabolas_acquisition(const Eigen::VectorXd& x, double s_t, const InformationGain& gain, const CostModel& cost,
                           double c_overhead);

/// Information gain about the target-task minimizer per unit predicted cost of
/// evaluating x on `task`.
double mtbo_acquisition(const Eigen::VectorXd& x, int task, const InformationGain& gain, const CostModel& cost);

}  // namespace fabolas
