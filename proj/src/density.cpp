#include "fidcov/density.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace fidcov {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& logs) {
  double m = kNegInf;
  for (double v : logs) m = std::max(m, v);
  if (std::isinf(m) && m < 0) return kNegInf;
  double s = 0.0;
  for (double v : logs) s += std::exp(v - m);
  return m + std::log(s);
}

/// ln C(n,k) capped comparison helper; exact enough to compare with caps.
double log_choose(long n, long k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double log_abs_det_lu(const Eigen::MatrixXd& m, bool* ok) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  double s = 0.0;
  *ok = true;
  for (int i = 0; i < m.rows(); ++i) {
    const double u = std::abs(lu.matrixLU()(i, i));
    if (!(u > 0.0) || !std::isfinite(u)) {
      *ok = false;
      return kNegInf;
    }
    s += std::log(u);
  }
  return s;
}

/// ln det of a symmetric positive definite matrix; false when the
/// factorization fails or a pivot is below tolerance.
bool spd_log_det(const Eigen::MatrixXd& m, double* out) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return false;
  double max_diag = 0.0;
  for (int i = 0; i < m.rows(); ++i) max_diag = std::max(max_diag, m(i, i));
  double s = 0.0;
  const Eigen::MatrixXd l = llt.matrixL();
  for (int i = 0; i < m.rows(); ++i) {
    if (!(l(i, i) * l(i, i) > 1e-12 * max_diag)) return false;
    s += std::log(l(i, i));
  }
  *out = 2.0 * s;
  return true;
}

}  // namespace

void NormChoice::validate() const {
  if (enumeration_cap < 1) throw std::invalid_argument("NormChoice: enumeration_cap must be >= 1");
  if (mc_samples < 100) throw std::invalid_argument("NormChoice: mc_samples must be >= 100");
}

SubsetPlan::SubsetPlan(long n, int mc_samples, RngStream& rng)
    : n_(n), mc_samples_(mc_samples), rng_(&rng) {
  if (n_ < 1) throw std::invalid_argument("SubsetPlan: n must be positive");
  if (mc_samples_ < 1) throw std::invalid_argument("SubsetPlan: mc_samples must be positive");
}

const std::vector<std::vector<int>>& SubsetPlan::subsets(int k) {
  auto it = cache_.find(k);
  if (it != cache_.end()) return it->second;
  if (k < 1 || k > n_) throw std::invalid_argument("SubsetPlan: invalid subset size");
  std::vector<std::vector<int>> draws(mc_samples_);
  std::vector<int> pool(n_);
  for (auto& subset : draws) {
    // Partial Fisher-Yates: first k entries of a freshly reset pool.
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
      const std::size_t j = i + rng_->uniform_index(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    subset.assign(pool.begin(), pool.begin() + k);
    std::sort(subset.begin(), subset.end());
  }
  return cache_.emplace(k, std::move(draws)).first->second;
}

namespace detail {

double log_mean_abs_subdet(const Eigen::MatrixXd& cols, const NormChoice& norm,
                           SubsetPlan* plan) {
  const long n = cols.rows();
  const int k = static_cast<int>(cols.cols());
  if (k < 1 || n < k) throw std::invalid_argument("log_mean_abs_subdet: need n >= k >= 1");
  std::vector<double> logs;
  Eigen::MatrixXd sub(k, k);
  const double log_count = log_choose(n, k);
  const bool exact = log_count <= std::log(static_cast<double>(norm.enumeration_cap)) + 1e-12;
  if (exact) {
    logs.reserve(norm.enumeration_cap);
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
      for (int r = 0; r < k; ++r) sub.row(r) = cols.row(idx[r]);
      bool ok = false;
      const double lad = log_abs_det_lu(sub, &ok);
      logs.push_back(ok ? lad : kNegInf);
      // next combination in lexicographic order
      int pos = k - 1;
      while (pos >= 0 && idx[pos] == n - k + pos) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int r = pos + 1; r < k; ++r) idx[r] = idx[r - 1] + 1;
    }
    return log_sum_exp(logs) - std::log(static_cast<double>(logs.size()));
  }
  if (plan == nullptr) {
    throw std::invalid_argument(
        "log_mean_abs_subdet: subset count exceeds enumeration_cap and no SubsetPlan given");
  }
  const auto& draws = plan->subsets(k);
  logs.reserve(draws.size());
  for (const auto& subset : draws) {
    for (int r = 0; r < k; ++r) sub.row(r) = cols.row(subset[r]);
    bool ok = false;
    const double lad = log_abs_det_lu(sub, &ok);
    logs.push_back(ok ? lad : kNegInf);
  }
  return log_sum_exp(logs) - std::log(static_cast<double>(logs.size()));
}

RawGfd evaluate_raw_gfd(const Eigen::MatrixXd& v, const Eigen::MatrixXd& a,
                        const SparsityPattern& pattern, const NormChoice& norm,
                        SubsetPlan* plan) {
  RawGfd out;
  const long n = v.rows();
  const int p = static_cast<int>(v.cols());
  if (a.rows() != p || a.cols() != p || pattern.dim() != p) {
    throw std::invalid_argument("evaluate_raw_gfd: dimension mismatch");
  }
  if (!a.allFinite()) return out;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  double log_abs_det = 0.0;
  for (int i = 0; i < p; ++i) {
    const double u = std::abs(lu.matrixLU()(i, i));
    if (!(u > 0.0) || !std::isfinite(u)) return out;
    log_abs_det += std::log(u);
  }
  // Rows of U are (A^{-1} y_i)^T.
  const Eigen::MatrixXd u = lu.solve(v.transpose()).transpose();
  const double np = static_cast<double>(n) * p;
  out.log_lik = -0.5 * np * std::log(2.0 * M_PI) - static_cast<double>(n) * log_abs_det -
                0.5 * u.squaredNorm();

  // Rows sharing a zero set share U_i; evaluate each distinct set once.
  std::map<std::vector<int>, double> per_set;
  double log_jac = 0.0;
  for (int i = 0; i < p; ++i) {
    const auto& zs = pattern.zero_set(i);
    auto it = per_set.find(zs);
    if (it == per_set.end()) {
      const std::vector<int> free_cols = pattern.free_cols(i);
      const int pi = static_cast<int>(free_cols.size());
      if (n < pi) {
        // U_i has more columns than rows: the Jacobian vanishes.
        out.log_jac = kNegInf;
        out.ok = true;
        return out;
      }
      Eigen::MatrixXd ui(n, pi);
      for (int c = 0; c < pi; ++c) ui.col(c) = u.col(free_cols[c]);
      double term = kNegInf;
      if (norm.kind == Norm::L2) {
        const Eigen::MatrixXd gram = (ui.transpose() * ui) / static_cast<double>(n);
        double ld = 0.0;
        if (spd_log_det(gram, &ld)) term = 0.5 * ld;
      } else {
        term = log_mean_abs_subdet(ui, norm, plan);
      }
      it = per_set.emplace(zs, term).first;
    }
    if (std::isinf(it->second) && it->second < 0) {
      out.log_jac = kNegInf;
      out.ok = true;  // A itself fine; Jacobian vanishes
      return out;
    }
    log_jac += it->second;
  }
  out.log_jac = log_jac;
  out.ok = true;
  return out;
}

}  // namespace detail

LogDensity log_likelihood(const ObservationSet& obs, const CovariateMatrix& a) {
  if (obs.p() != a.dim()) throw std::invalid_argument("log_likelihood: dimension mismatch");
  const long n = obs.n();
  const int p = obs.p();
  const Eigen::MatrixXd u = a.solve(obs.rows().transpose()).transpose();
  if (!u.allFinite()) return LogDensity::ninf(true);
  const double value = -0.5 * static_cast<double>(n) * p * std::log(2.0 * M_PI) -
                       static_cast<double>(n) * a.log_abs_det() - 0.5 * u.squaredNorm();
  return LogDensity{value, true};
}

LogDensity log_jacobian(const ObservationSet& obs, const CovariateMatrix& a,
                        const NormChoice& norm, SubsetPlan* plan) {
  norm.validate();
  if (obs.p() != a.dim()) throw std::invalid_argument("log_jacobian: dimension mismatch");
  if (obs.n() < a.pattern().max_free_count()) {
    throw std::invalid_argument("log_jacobian: need n >= max row free count");
  }
  const auto raw = detail::evaluate_raw_gfd(obs.rows(), a.entries(), a.pattern(), norm, plan);
  return LogDensity{raw.log_jac, false};
}

LogDensity log_jacobian_full(const ObservationSet& obs, const CovariateMatrix& a,
                             const NormChoice& norm, SubsetPlan* plan) {
  norm.validate();
  const int p = obs.p();
  if (p != a.dim()) throw std::invalid_argument("log_jacobian_full: dimension mismatch");
  if (obs.n() < p) throw std::invalid_argument("log_jacobian_full: need n >= p");
  double log_c;
  if (norm.kind == Norm::L2) {
    const auto sn = sample_covariance(obs);
    double ld = 0.0;
    if (!spd_log_det(sn.entries, &ld)) return LogDensity::ninf();
    log_c = 0.5 * p * ld;
  } else {
    log_c = p * detail::log_mean_abs_subdet(obs.rows(), norm, plan);
  }
  return LogDensity{log_c - p * a.log_abs_det(), false};
}

LogDensity log_gfd(const ObservationSet& obs, const CovariateMatrix& a,
                   const NormChoice& norm, SubsetPlan* plan) {
  norm.validate();
  if (obs.p() != a.dim()) throw std::invalid_argument("log_gfd: dimension mismatch");
  if (obs.n() < a.pattern().max_free_count()) {
    throw std::invalid_argument("log_gfd: need n >= max row free count");
  }
  const auto raw = detail::evaluate_raw_gfd(obs.rows(), a.entries(), a.pattern(), norm, plan);
  if (!raw.ok || std::isinf(raw.log_jac)) return LogDensity::ninf();
  return LogDensity{raw.log_lik + raw.log_jac, false};
}

double log_multivariate_gamma(int p, double a) {
  if (p < 1) throw std::invalid_argument("log_multivariate_gamma: p must be positive");
  if (!(a > 0.5 * (p - 1))) {
    throw std::invalid_argument("log_multivariate_gamma: requires a > (p-1)/2");
  }
  double s = 0.25 * p * (p - 1) * std::log(M_PI);
  for (int j = 1; j <= p; ++j) s += std::lgamma(a + 0.5 * (1 - j));
  return s;
}

double log_binomial(long n, long k) {
  if (k < 0 || n < 0 || k > n) throw std::invalid_argument("log_binomial: need 0 <= k <= n");
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double log_normalizing_constant_full(const ObservationSet& obs, const NormChoice& norm,
                                     SubsetPlan* plan) {
  norm.validate();
  const long n = obs.n();
  const int p = obs.p();
  if (n <= p) throw std::invalid_argument("log_normalizing_constant_full: requires n > p");
  const auto sn = sample_covariance(obs);
  double ld_sn = 0.0;
  if (sn.singular || !spd_log_det(sn.entries, &ld_sn)) {
    throw std::invalid_argument("log_normalizing_constant_full: singular sample covariance");
  }
  double log_c;
  if (norm.kind == Norm::L2) {
    log_c = 0.5 * p * ld_sn;
  } else {
    log_c = p * detail::log_mean_abs_subdet(obs.rows(), norm, plan);
  }
  const double ld_n_sn = p * std::log(static_cast<double>(n)) + ld_sn;
  return 0.5 * (p * p - static_cast<double>(n) * p) * std::log(M_PI) + log_c +
         log_multivariate_gamma(p, 0.5 * n) - 0.5 * n * ld_n_sn -
         log_multivariate_gamma(p, 0.5 * p);
}

CliqueGfdEvaluator::CliqueGfdEvaluator(const ObservationSet& obs, NormChoice norm)
    : v_(obs.rows()), n_(obs.n()), norm_(norm) {
  norm_.validate();
  const auto sn = sample_covariance(obs);
  sn_ = sn.entries;
  const int p = obs.p();
  lgamma_n_half_.assign(p + 1, kNegInf);
  lgamma_g_half_.assign(p + 1, kNegInf);
  log_penalty_.assign(p + 1, 0.0);
  for (int g = 1; g <= p; ++g) {
    if (g <= n_) lgamma_n_half_[g] = log_multivariate_gamma(g, 0.5 * n_);
    lgamma_g_half_[g] = log_multivariate_gamma(g, 0.5 * g);
    log_penalty_[g] = -(0.25 * g * g * std::log(static_cast<double>(n_)) -
                        0.5 * g * g * std::log(static_cast<double>(g)));
  }
}

double CliqueGfdEvaluator::clique_term(const std::vector<int>& members, SubsetPlan* plan) const {
  const int g = static_cast<int>(members.size());
  if (g < 1) throw std::invalid_argument("clique_term: empty clique");
  if (g > n_) return kNegInf;
  Eigen::MatrixXd block(g, g);
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) block(r, c) = sn_(members[r], members[c]);
  }
  double ld = 0.0;
  if (!spd_log_det(block, &ld)) return kNegInf;
  double log_c;
  if (norm_.kind == Norm::L2) {
    log_c = 0.5 * g * ld;
  } else {
    Eigen::MatrixXd cols(n_, g);
    for (int c = 0; c < g; ++c) cols.col(c) = v_.col(members[c]);
    const double mean_log = detail::log_mean_abs_subdet(cols, norm_, plan);
    if (std::isinf(mean_log) && mean_log < 0) return kNegInf;
    log_c = g * mean_log;
  }
  return 0.5 * g * g * std::log(M_PI) - 0.5 * n_ * ld + log_c + lgamma_n_half_[g] -
         lgamma_g_half_[g];
}

double CliqueGfdEvaluator::model_term(const CliqueModel& m, SubsetPlan* plan) const {
  if (m.dim() != p()) throw std::invalid_argument("model_term: dimension mismatch");
  double s = 0.0;
  for (const auto& clique : m.cliques()) {
    const double t = clique_term(clique, plan);
    if (std::isinf(t) && t < 0) return kNegInf;
    s += t;
  }
  return s;
}

double CliqueGfdEvaluator::penalty_term(int g) const {
  if (g < 1 || g > p()) throw std::invalid_argument("penalty_term: invalid clique size");
  return log_penalty_[g];
}

LogDensity log_clique_model_gfd(const ObservationSet& obs, const CliqueModel& m,
                                const NormChoice& norm, SubsetPlan* plan) {
  if (obs.p() != m.dim()) throw std::invalid_argument("log_clique_model_gfd: dimension mismatch");
  CliqueGfdEvaluator eval(obs, norm);
  return LogDensity{eval.model_term(m, plan), false};
}

double log_clique_penalty(const CliqueModel& m, long n) {
  if (n < 1) throw std::invalid_argument("log_clique_penalty: n must be positive");
  double s = 0.0;
  for (int g : m.sizes()) {
    s -= 0.25 * g * g * std::log(static_cast<double>(n)) -
         0.5 * g * g * std::log(static_cast<double>(g));
  }
  return s;
}

double log_mdl_penalty(const SparsityPattern& pattern, long n) {
  if (n < 1) throw std::invalid_argument("log_mdl_penalty: n must be positive");
  const int p = pattern.dim();
  double s = 0.0;
  for (int i = 0; i < p; ++i) {
    const int pi = pattern.row_free_count(i);
    s -= 0.5 * pi * std::log(static_cast<double>(n) * p) + log_binomial(p, pi);
  }
  return s;
}

double log_composite_iw_density(const ObservationSet& obs, const CliqueModel& m,
                                const SpdMatrix& sigma) {
  if (obs.p() != m.dim() || sigma.dim() != m.dim()) {
    throw std::invalid_argument("log_composite_iw_density: dimension mismatch");
  }
  const long n = obs.n();
  const auto sn = sample_covariance(obs);
  double total = 0.0;
  for (const auto& clique : m.cliques()) {
    const int g = static_cast<int>(clique.size());
    if (g > n) return kNegInf;
    Eigen::MatrixXd s_block(g, g);
    Eigen::MatrixXd sig_block(g, g);
    for (int r = 0; r < g; ++r) {
      for (int c = 0; c < g; ++c) {
        s_block(r, c) = n * sn.entries(clique[r], clique[c]);
        sig_block(r, c) = sigma(clique[r], clique[c]);
      }
    }
    double ld_scale = 0.0;
    if (!spd_log_det(s_block, &ld_scale)) return kNegInf;
    Eigen::LLT<Eigen::MatrixXd> llt(sig_block);
    if (llt.info() != Eigen::Success) return kNegInf;
    double ld_sig = 0.0;
    const Eigen::MatrixXd l = llt.matrixL();
    for (int i = 0; i < g; ++i) ld_sig += 2.0 * std::log(l(i, i));
    const double trace = llt.solve(s_block).trace();
    total += 0.5 * n * ld_scale - 0.5 * n * g * std::log(2.0) -
             log_multivariate_gamma(g, 0.5 * n) - 0.5 * (n + g + 1) * ld_sig - 0.5 * trace;
  }
  return total;
}

}  // namespace fidcov
