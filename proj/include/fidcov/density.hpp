#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "fidcov/covariate.hpp"
#include "fidcov/matrix.hpp"
#include "fidcov/models.hpp"
#include "fidcov/rng.hpp"

namespace fidcov {

enum class Norm { L2, LInf };

/// Norm used when inverting the data generating equation. For the
/// l-infinity norm the per-row subset average is exact while the number of
/// terms stays within `enumeration_cap`; beyond that it is replaced by an
/// unbiased Monte Carlo mean over `mc_samples` uniformly drawn subsets.
struct NormChoice {
  Norm kind = Norm::L2;
  int enumeration_cap = 10000;
  int mc_samples = 2000;

  static NormChoice l2() { return NormChoice{Norm::L2, 10000, 2000}; }
  static NormChoice linf(int cap = 10000, int mc = 2000) {
    return NormChoice{Norm::LInf, cap, mc};
  }
  void validate() const;
};

/// Natural-log density value. Error paths carry a flagged -inf, never NaN.
struct LogDensity {
  double value = 0.0;
  bool normalized = false;

  bool is_ninf() const { return std::isinf(value) && value < 0.0; }
  static LogDensity ninf(bool normalized = false) {
    return LogDensity{-std::numeric_limits<double>::infinity(), normalized};
  }
};

/// Row-subset draws for the capped l-infinity estimator. A sampler draws one
/// plan per sweep and evaluates both sides of an acceptance ratio with the
/// same draws, keeping the ratio coherent. Draws come lazily from the given
/// stream, cached per subset size; the stream must outlive the plan.
class SubsetPlan {
 public:
  SubsetPlan(long n, int mc_samples, RngStream& rng);
  const std::vector<std::vector<int>>& subsets(int k);

 private:
  long n_;
  int mc_samples_;
  RngStream* rng_;
  std::map<int, std::vector<std::vector<int>>> cache_;
};

namespace detail {

/// Likelihood and Jacobian evaluated together (they share A^{-1} solves).
/// `ok == false` marks a singular A or rank-deficient U_i; both logs are
/// then -inf.
struct RawGfd {
  double log_lik = -std::numeric_limits<double>::infinity();
  double log_jac = -std::numeric_limits<double>::infinity();
  bool ok = false;
};

RawGfd evaluate_raw_gfd(const Eigen::MatrixXd& v, const Eigen::MatrixXd& a,
                        const SparsityPattern& pattern, const NormChoice& norm,
                        SubsetPlan* plan = nullptr);

/// ln of the average |det| over all (or sampled) k-row submatrices of an
/// n x k matrix; -inf when every determinant vanishes.
double log_mean_abs_subdet(const Eigen::MatrixXd& cols, const NormChoice& norm,
                           SubsetPlan* plan = nullptr);

}  // namespace detail

/// Gaussian log likelihood -(np/2)ln(2pi) - n ln|det A| - tr(n S_n (AA^T)^{-1})/2,
/// computed through factorized solves. Singular A gives flagged -inf.
LogDensity log_likelihood(const ObservationSet& obs, const CovariateMatrix& a);

/// Jacobian of the data generating equation at A for the matrix's pattern.
/// Rejects n < max p_i; rank-deficient U_i gives flagged -inf.
LogDensity log_jacobian(const ObservationSet& obs, const CovariateMatrix& a,
                        const NormChoice& norm, SubsetPlan* plan = nullptr);

/// Closed form for the full pattern: ln C(y) - p ln|det A|.
LogDensity log_jacobian_full(const ObservationSet& obs, const CovariateMatrix& a,
                             const NormChoice& norm, SubsetPlan* plan = nullptr);

/// Unnormalized fiducial log density: log_likelihood + log_jacobian.
LogDensity log_gfd(const ObservationSet& obs, const CovariateMatrix& a,
                   const NormChoice& norm, SubsetPlan* plan = nullptr);

/// ln Gamma_p(a) = (p(p-1)/4) ln pi + sum_j ln Gamma(a + (1-j)/2); requires
/// a > (p-1)/2.
double log_multivariate_gamma(int p, double a);

double log_binomial(long n, long k);

/// ln of the full-model normalizing constant
/// pi^{(p^2-np)/2} C(y) Gamma_p(n/2) / (|det nS_n|^{n/2} Gamma_p(p/2)).
double log_normalizing_constant_full(const ObservationSet& obs, const NormChoice& norm,
                                     SubsetPlan* plan = nullptr);

/// Unnormalized clique-model log GFD
///   (sum g_i^2 / 2) ln pi - (n/2) ln det S_n^M
///   + sum_i [ ln C_{M,i}(y) + ln Gamma_{g_i}(n/2) - ln Gamma_{g_i}(g_i/2) ],
/// comparable across models for fixed data. Singular clique blocks (and
/// cliques larger than n) give flagged -inf.
LogDensity log_clique_model_gfd(const ObservationSet& obs, const CliqueModel& m,
                                const NormChoice& norm, SubsetPlan* plan = nullptr);

/// ln q_M(n) = -sum_i [ (g_i^2/4) ln n - (g_i^2/2) ln g_i ].
double log_clique_penalty(const CliqueModel& m, long n);

/// MDL penalty ln q_M(n) = -sum_i [ (p_i/2) ln(np) + ln C(p, p_i) ].
double log_mdl_penalty(const SparsityPattern& pattern, long n);

/// Log density of the composite inverse Wishart GFD of Sigma given a clique
/// model: product over cliques of IW(n, n S_n^i) factors.
double log_composite_iw_density(const ObservationSet& obs, const CliqueModel& m,
                                const SpdMatrix& sigma);

/// Per-clique pieces of the clique-model GFD; the model value is the sum of
/// clique_term over cliques. Built once per chain so the Gibbs sweep can
/// update only the cliques a move touches.
class CliqueGfdEvaluator {
 public:
  CliqueGfdEvaluator(const ObservationSet& obs, NormChoice norm);

  /// -inf when the clique block of S_n is singular or larger than n.
  double clique_term(const std::vector<int>& members, SubsetPlan* plan = nullptr) const;
  double model_term(const CliqueModel& m, SubsetPlan* plan = nullptr) const;
  /// Penalty contribution of one clique of size g.
  double penalty_term(int g) const;
  long n() const { return n_; }
  int p() const { return static_cast<int>(sn_.rows()); }

 private:
  Eigen::MatrixXd sn_;
  Eigen::MatrixXd v_;
  long n_;
  NormChoice norm_;
  std::vector<double> lgamma_n_half_;  // ln Gamma_g(n/2), index g
  std::vector<double> lgamma_g_half_;  // ln Gamma_g(g/2), index g
  std::vector<double> log_penalty_;    // clique-penalty term, index g
};

}  // namespace fidcov
