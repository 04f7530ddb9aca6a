#include "fidcov/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fidcov {

namespace {

StatRow baseline_row(const SampleCovariance& sn, const SpdMatrix* sigma0) {
  StatRow row;
  const SpdMatrix s = sn.spd();
  row.logd = s.log_det();
  if (sigma0 != nullptr) {
    row.d2sig = fm_distance(s, *sigma0);
    row.eigvec_angle = eigvec_angle(s, *sigma0);
  }
  return row;
}

}  // namespace

StatTable compute_statistics(const std::vector<std::pair<CliqueModel, SpdMatrix>>& draws,
                             const ObservationSet& obs, const SpdMatrix* sigma0) {
  StatTable table;
  table.rows.reserve(draws.size());
  for (const auto& [model, sigma] : draws) {
    StatRow row;
    row.slog_gfd = log_composite_iw_density(obs, model, sigma);
    row.logd = sigma.log_det();
    if (sigma0 != nullptr) {
      row.d2sig = fm_distance(sigma, *sigma0);
      row.eigvec_angle = eigvec_angle(sigma, *sigma0);
    }
    table.rows.push_back(row);
  }
  const auto sn = sample_covariance(obs);
  if (!sn.singular) table.sn_baseline = baseline_row(sn, sigma0);
  return table;
}

StatTable compute_statistics(const std::vector<ChainState>& kept, const ObservationSet& obs,
                             const SpdMatrix* sigma0) {
  StatTable table;
  table.rows.reserve(kept.size());
  for (const auto& state : kept) {
    if (!state.A) throw std::invalid_argument("compute_statistics: state without covariate matrix");
    const SpdMatrix sigma = state.A->sigma();
    StatRow row;
    row.slog_gfd = state.log_density.value;
    row.logd = sigma.log_det();
    if (sigma0 != nullptr) {
      row.d2sig = fm_distance(sigma, *sigma0);
      row.eigvec_angle = eigvec_angle(sigma, *sigma0);
    }
    table.rows.push_back(row);
  }
  const auto sn = sample_covariance(obs);
  if (!sn.singular) table.sn_baseline = baseline_row(sn, sigma0);
  return table;
}

CoMembershipMatrix::CoMembershipMatrix(Eigen::MatrixXd freq) : freq_(std::move(freq)) {
  if (freq_.rows() != freq_.cols()) throw std::invalid_argument("CoMembershipMatrix: square required");
  const double asym = (freq_ - freq_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) throw std::invalid_argument("CoMembershipMatrix: symmetry violated");
  for (int i = 0; i < freq_.rows(); ++i) {
    if (std::abs(freq_(i, i) - 1.0) > 1e-12) {
      throw std::invalid_argument("CoMembershipMatrix: unit diagonal violated");
    }
  }
}

Eigen::MatrixXd CoMembershipMatrix::thresholded(double level) const {
  Eigen::MatrixXd out(freq_.rows(), freq_.cols());
  for (int i = 0; i < freq_.rows(); ++i) {
    for (int j = 0; j < freq_.cols(); ++j) out(i, j) = freq_(i, j) >= level ? 1.0 : 0.0;
  }
  return out;
}

CoMembershipMatrix co_membership(const std::vector<CliqueModel>& draws) {
  if (draws.empty()) throw std::invalid_argument("co_membership: empty trace");
  const int p = draws.front().dim();
  Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(p, p);
  for (const auto& m : draws) {
    if (m.dim() != p) throw std::invalid_argument("co_membership: inconsistent dimensions");
    for (int i = 0; i < p; ++i) {
      for (int j = i; j < p; ++j) {
        if (m.same_clique(i, j)) {
          freq(i, j) += 1.0;
          freq(j, i) += i == j ? 0.0 : 1.0;
        }
      }
    }
  }
  freq /= static_cast<double>(draws.size());
  for (int i = 0; i < p; ++i) freq(i, i) = 1.0;
  return CoMembershipMatrix(std::move(freq));
}

double one_sided_pvalue(const std::vector<double>& draws, double reference) {
  if (draws.size() < 100) {
    throw std::invalid_argument("one_sided_pvalue: needs at least 100 draws");
  }
  double below = 0.0;
  for (double v : draws) {
    if (v < reference) {
      below += 1.0;
    } else if (v == reference) {
      below += 0.5;
    }
  }
  return below / static_cast<double>(draws.size());
}

ConfidenceCurve::ConfidenceCurve(std::string statistic_name, std::vector<double> samples)
    : name_(std::move(statistic_name)), sorted_(std::move(samples)) {
  if (sorted_.empty()) throw std::invalid_argument("ConfidenceCurve: empty sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double ConfidenceCurve::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("quantile: u must be in [0,1]");
  const std::size_t m = sorted_.size();
  if (m == 1) return sorted_.front();
  const double pos = u * static_cast<double>(m - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, m - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * sorted_[lo] + w * sorted_[hi];
}

std::pair<double, double> ConfidenceCurve::interval(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("interval: alpha must be in (0,1)");
  }
  return {quantile(alpha / 2.0), quantile(1.0 - alpha / 2.0)};
}

QqTable qq_coverage(const std::vector<double>& pvalues) {
  if (pvalues.size() < 20) throw std::invalid_argument("qq_coverage: needs at least 20 p-values");
  QqTable table;
  std::vector<double> sorted = pvalues;
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  table.band_halfwidth = 1.358 / std::sqrt(m);
  table.rows.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double theo = (static_cast<double>(i) + 0.5) / m;
    QqTable::Row row;
    row.theoretical = theo;
    row.empirical = sorted[i];
    row.lower = std::max(0.0, theo - table.band_halfwidth);
    row.upper = std::min(1.0, theo + table.band_halfwidth);
    table.rows.push_back(row);
  }
  table.ks_distance = ks_uniform(pvalues);
  table.inside_band = table.ks_distance < table.band_halfwidth;
  return table;
}

double ks_uniform(const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("ks_uniform: empty sample");
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double up = (static_cast<double>(i) + 1.0) / n - sorted[i];
    const double down = sorted[i] - static_cast<double>(i) / n;
    d = std::max(d, std::max(up, down));
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < a.size() && ib < b.size()) {
    const double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  return d;
}

double ess(const std::vector<double>& x) {
  const std::size_t m = x.size();
  if (m < 4) return static_cast<double>(m);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m);
  if (var <= 0.0) return static_cast<double>(m);
  // Geyer initial positive sequence over lag pairs.
  double tau = 1.0;
  for (std::size_t lag = 1; lag + 1 < m; lag += 2) {
    double rho1 = 0.0, rho2 = 0.0;
    for (std::size_t t = 0; t + lag < m; ++t) rho1 += (x[t] - mean) * (x[t + lag] - mean);
    for (std::size_t t = 0; t + lag + 1 < m; ++t) rho2 += (x[t] - mean) * (x[t + lag + 1] - mean);
    rho1 /= var * static_cast<double>(m);
    rho2 /= var * static_cast<double>(m);
    const double pair = rho1 + rho2;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return static_cast<double>(m) / tau;
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("digamma: x must be positive");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic series in 1/x^2.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return result;
}

namespace {

/// Regularized lower incomplete gamma P(a, x) via series / continued fraction.
double reg_lower_gamma(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("reg_lower_gamma: bad arguments");
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Lentz continued fraction for Q(a,x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

}  // namespace

double chi_squared_cdf(double x, double dof) {
  if (x <= 0.0) return 0.0;
  return reg_lower_gamma(0.5 * dof, 0.5 * x);
}

MardiaResult mardia_skewness(const Eigen::MatrixXd& samples) {
  const long m = samples.rows();
  const int d = static_cast<int>(samples.cols());
  if (m < d + 2) throw std::invalid_argument("mardia_skewness: too few samples");
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  Eigen::MatrixXd centered = samples.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(m);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("mardia_skewness: singular sample covariance");
  }
  // b1 = mean over pairs of (x_i' S^{-1} x_j)^3, via the whitened Gram matrix.
  const Eigen::MatrixXd w = llt.matrixL().solve(centered.transpose());
  const Eigen::MatrixXd gram = w.transpose() * w;
  double b1 = 0.0;
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j < m; ++j) b1 += std::pow(gram(i, j), 3);
  }
  b1 /= static_cast<double>(m) * static_cast<double>(m);
  MardiaResult out;
  out.statistic = static_cast<double>(m) * b1 / 6.0;
  out.dof = d * (d + 1) * (d + 2) / 6.0;
  out.p_value = 1.0 - chi_squared_cdf(out.statistic, out.dof);
  return out;
}

}  // namespace fidcov
