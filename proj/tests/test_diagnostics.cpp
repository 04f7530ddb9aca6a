#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fidcov/diagnostics.hpp"
#include "fidcov/samplers.hpp"
#include "fidcov/simulate.hpp"

using namespace fidcov;

TEST_CASE("compute_statistics at the truth gives zero distances") {
  const auto scenario = simulate_clique_scenario({2, 1}, 50, 0.5, 301);
  const CliqueModel m = *scenario.model0;
  std::vector<std::pair<CliqueModel, SpdMatrix>> draws{{m, scenario.sigma0}};
  const auto table = compute_statistics(draws, scenario.obs, &scenario.sigma0);
  REQUIRE(table.rows.size() == 1);
  CHECK(*table.rows[0].d2sig == doctest::Approx(0.0));
  CHECK(*table.rows[0].eigvec_angle == doctest::Approx(0.0));
  CHECK(table.rows[0].logd == doctest::Approx(scenario.sigma0.log_det()));
  CHECK(std::isfinite(table.rows[0].slog_gfd));
  REQUIRE(table.sn_baseline.has_value());
  CHECK(*table.sn_baseline->d2sig > 0.0);
}

TEST_CASE("compute_statistics without the truth omits truth-dependent columns") {
  const auto scenario = simulate_clique_scenario({2}, 50, 0.3, 302);
  std::vector<std::pair<CliqueModel, SpdMatrix>> draws{
      {*scenario.model0, scenario.sigma0}};
  const auto table = compute_statistics(draws, scenario.obs, nullptr);
  CHECK(!table.rows[0].d2sig.has_value());
  CHECK(!table.rows[0].eigvec_angle.has_value());
}

TEST_CASE("co-membership frequencies for degenerate traces") {
  const std::vector<CliqueModel> ones(7, CliqueModel::single_clique(3));
  const auto all_ones = co_membership(ones);
  CHECK(all_ones.entries().minCoeff() == doctest::Approx(1.0));

  const std::vector<CliqueModel> singles(5, CliqueModel::singletons(3));
  const auto ident = co_membership(singles);
  CHECK(ident(0, 1) == doctest::Approx(0.0));
  CHECK(ident(1, 1) == doctest::Approx(1.0));

  CHECK_THROWS_AS(co_membership({}), std::invalid_argument);

  const auto mixed = co_membership({CliqueModel::parse("1 2|3"), CliqueModel::singletons(3)});
  CHECK(mixed(0, 1) == doctest::Approx(0.5));
  const auto thresholded = mixed.thresholded(0.5);
  CHECK(thresholded(0, 1) == 1.0);
  CHECK(thresholded(0, 2) == 0.0);
}

TEST_CASE("one-sided p-value extremes and ties") {
  std::vector<double> draws(200);
  for (int i = 0; i < 200; ++i) draws[i] = static_cast<double>(i);
  CHECK(one_sided_pvalue(draws, -1.0) == doctest::Approx(0.0));
  CHECK(one_sided_pvalue(draws, 1000.0) == doctest::Approx(1.0));
  CHECK(one_sided_pvalue(draws, 100.0) == doctest::Approx((100.0 + 0.5) / 200.0));
  CHECK_THROWS_AS(one_sided_pvalue(std::vector<double>(50, 1.0), 0.5), std::invalid_argument);
}

TEST_CASE("confidence curve intervals nest") {
  RngStream rng(303, 0);
  std::vector<double> sample(400);
  for (auto& v : sample) v = rng.normal();
  const ConfidenceCurve curve("LogD", sample);
  double prev_lo = -1e300, prev_hi = 1e300;
  for (double alpha : {0.01, 0.05, 0.1, 0.2, 0.5, 0.8, 0.95}) {
    const auto [lo, hi] = curve.interval(alpha);
    CHECK(lo >= prev_lo);
    CHECK(hi <= prev_hi);
    CHECK(lo <= hi);
    prev_lo = lo;
    prev_hi = hi;
  }
}

TEST_CASE("qq coverage table and band") {
  std::vector<double> perfect(100);
  for (int i = 0; i < 100; ++i) perfect[i] = (i + 0.5) / 100.0;
  const auto table = qq_coverage(perfect);
  CHECK(table.inside_band);
  CHECK(table.band_halfwidth == doctest::Approx(1.358 / 10.0));
  for (const auto& row : table.rows) {
    CHECK(row.empirical == doctest::Approx(row.theoretical));
  }

  const std::vector<double> constant(50, 0.7);
  const auto bad = qq_coverage(constant);
  CHECK(!bad.inside_band);

  CHECK_THROWS_AS(qq_coverage(std::vector<double>(10, 0.5)), std::invalid_argument);
}

TEST_CASE("KS distances") {
  std::vector<double> grid(1000);
  for (int i = 0; i < 1000; ++i) grid[i] = (i + 0.5) / 1000.0;
  CHECK(ks_uniform(grid) < 0.001);
  CHECK(ks_two_sample(grid, grid) == doctest::Approx(0.0));
  std::vector<double> shifted(1000);
  for (int i = 0; i < 1000; ++i) shifted[i] = grid[i] * 0.5;
  CHECK(ks_two_sample(grid, shifted) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("effective sample size is near m for white noise and lower for AR(1)") {
  RngStream rng(304, 0);
  std::vector<double> iid(5000);
  for (auto& v : iid) v = rng.normal();
  CHECK(ess(iid) > 3000.0);

  std::vector<double> ar(5000);
  double x = 0.0;
  for (auto& v : ar) {
    x = 0.9 * x + rng.normal();
    v = x;
  }
  CHECK(ess(ar) < 1500.0);
}

TEST_CASE("digamma and chi-squared CDF reference values") {
  CHECK(digamma(1.0) == doctest::Approx(-0.5772156649).epsilon(1e-9));
  CHECK(digamma(5.5) == doctest::Approx(digamma(4.5) + 1.0 / 4.5).epsilon(1e-12));
  CHECK(chi_squared_cdf(3.841458820694124, 1.0) == doctest::Approx(0.95).epsilon(1e-9));
  // dof = 2 is exponential(1/2).
  CHECK(chi_squared_cdf(2.0, 2.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("Mardia skewness accepts Gaussian data and rejects skewed data") {
  RngStream rng(305, 0);
  Eigen::MatrixXd gauss(2000, 3);
  for (long i = 0; i < gauss.rows(); ++i) {
    for (int j = 0; j < 3; ++j) gauss(i, j) = rng.normal();
  }
  CHECK(mardia_skewness(gauss).p_value > 0.01);

  Eigen::MatrixXd skewed(2000, 3);
  for (long i = 0; i < skewed.rows(); ++i) {
    for (int j = 0; j < 3; ++j) {
      const double z = rng.normal();
      skewed(i, j) = z * z;
    }
  }
  CHECK(mardia_skewness(skewed).p_value < 0.01);
}

TEST_CASE("fiducial draws standardized around S_n pass the normality check") {
  // Full model, p = 2, n = 5000: sqrt(n) (vech Sigma-hat - vech S_n) should be
  // approximately multivariate normal.
  const auto scenario = simulate_clique_scenario({2}, 5000, 0.4, 306);
  const long n = scenario.obs.n();
  const auto sn = sample_covariance(scenario.obs);
  const SpdMatrix scale(n * sn.entries);
  RngStream rng(307, 0);
  const int draws = 3000;
  Eigen::MatrixXd standardized(draws, 3);
  for (int d = 0; d < draws; ++d) {
    const SpdMatrix sigma = sample_inverse_wishart(n, scale, rng);
    standardized(d, 0) = std::sqrt(static_cast<double>(n)) * (sigma(0, 0) - sn.entries(0, 0));
    standardized(d, 1) = std::sqrt(static_cast<double>(n)) * (sigma(0, 1) - sn.entries(0, 1));
    standardized(d, 2) = std::sqrt(static_cast<double>(n)) * (sigma(1, 1) - sn.entries(1, 1));
  }
  CHECK(mardia_skewness(standardized).p_value > 0.01);
}

TEST_CASE("statistics from A-space chains use sigma = A A^T") {
  const auto scenario = simulate_sparse_scenario(4, 80, 2, 308);
  ChainConfig config;
  config.kind = SamplerKind::Rjmcmc;
  config.penalty = PenaltyKind::Mdl;
  config.max_col = 2;
  config.burn_in = 100;
  config.window = 200;
  config.thin = 10;
  RngStream rng(309, 1);
  ChainState init;
  init.A = initial_covariate(InitKind::Diag, scenario.obs);
  const auto trace = run_chain(scenario.obs, config, init, rng);
  const auto table = compute_statistics(trace.kept, scenario.obs, &scenario.sigma0);
  REQUIRE(table.rows.size() == trace.kept.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    CHECK(table.rows[i].logd ==
          doctest::Approx(trace.kept[i].A->sigma().log_det()).epsilon(1e-10));
    CHECK(std::isfinite(*table.rows[i].d2sig));
  }
}
