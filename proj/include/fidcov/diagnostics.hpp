#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fidcov/density.hpp"
#include "fidcov/matrix.hpp"
#include "fidcov/models.hpp"
#include "fidcov/samplers.hpp"

namespace fidcov {

/// Per-draw statistics: fiducial log likelihood of the draw, FM-distance to
/// the truth, log determinant, and leading-eigenvector angle. The
/// truth-dependent columns are present only when Sigma_0 is supplied.
struct StatRow {
  double slog_gfd = 0.0;
  double logd = 0.0;
  std::optional<double> d2sig;
  std::optional<double> eigvec_angle;
};

struct StatTable {
  std::vector<StatRow> rows;
  /// Comparator row for the sample covariance (slog_gfd unset there).
  std::optional<StatRow> sn_baseline;
};

/// Statistics for covariance draws from the clique (or full-model) pipeline;
/// slog_gfd evaluates the composite inverse Wishart GFD at the draw.
StatTable compute_statistics(const std::vector<std::pair<CliqueModel, SpdMatrix>>& draws,
                             const ObservationSet& obs, const SpdMatrix* sigma0);

/// Statistics for kept A-states from MH/RJMCMC chains; slog_gfd is the
/// recorded penalized log GFD.
StatTable compute_statistics(const std::vector<ChainState>& kept, const ObservationSet& obs,
                             const SpdMatrix* sigma0);

/// Pairwise frequency that two coordinates share a clique across draws.
class CoMembershipMatrix {
 public:
  explicit CoMembershipMatrix(Eigen::MatrixXd freq);
  int dim() const { return static_cast<int>(freq_.rows()); }
  double operator()(int i, int j) const { return freq_(i, j); }
  const Eigen::MatrixXd& entries() const { return freq_; }
  /// Same-clique relation after thresholding, as a 0/1 matrix.
  Eigen::MatrixXd thresholded(double level) const;

 private:
  Eigen::MatrixXd freq_;
};

CoMembershipMatrix co_membership(const std::vector<CliqueModel>& draws);

/// Fraction of draws at or below the reference, ties counted half. Requires
/// at least 100 draws.
double one_sided_pvalue(const std::vector<double>& draws, double reference);

/// Equal-tailed empirical interval family: interval(alpha) is the two-sided
/// 1-alpha interval, so intervals shrink as alpha grows.
class ConfidenceCurve {
 public:
  ConfidenceCurve(std::string statistic_name, std::vector<double> samples);
  const std::string& name() const { return name_; }
  std::pair<double, double> interval(double alpha) const;
  double quantile(double u) const;
  std::size_t size() const { return sorted_.size(); }

 private:
  std::string name_;
  std::vector<double> sorted_;
};

struct QqTable {
  struct Row {
    double theoretical;
    double empirical;
    double lower;
    double upper;
  };
  std::vector<Row> rows;
  double ks_distance = 0.0;
  double band_halfwidth = 0.0;  // 1.358/sqrt(m)
  bool inside_band = false;
};

/// QQ table of p-values against Uniform[0,1] with the 95% KS envelope.
/// Requires at least 20 p-values.
QqTable qq_coverage(const std::vector<double>& pvalues);

/// One-sample KS distance against Uniform[0,1].
double ks_uniform(const std::vector<double>& samples);

/// Two-sample KS distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Effective sample size from the initial positive autocorrelation sequence.
double ess(const std::vector<double>& x);

double digamma(double x);
double chi_squared_cdf(double x, double dof);

struct MardiaResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 0.0;
};

/// Mardia skewness test of multivariate normality; samples are rows.
MardiaResult mardia_skewness(const Eigen::MatrixXd& samples);

}  // namespace fidcov
