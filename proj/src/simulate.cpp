#include "fidcov/simulate.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fidcov {

std::vector<int> near_equal_sizes(int p, int k) {
  if (k < 1 || k > p) throw std::invalid_argument("near_equal_sizes: need 1 <= k <= p");
  std::vector<int> sizes(k, p / k);
  for (int i = 0; i < p % k; ++i) sizes[i] += 1;
  return sizes;
}

ObservationSet draw_observations(const CovariateMatrix& a0, long n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("draw_observations: n must be positive");
  const int p = a0.dim();
  Eigen::MatrixXd z(n, p);
  for (long i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(i, j) = rng.normal();
  }
  return ObservationSet(z * a0.entries().transpose());
}

ScenarioResult simulate_clique_scenario(const std::vector<int>& sizes, long n,
                                        double intra_corr, std::uint64_t seed,
                                        std::uint64_t stream) {
  const int p = std::accumulate(sizes.begin(), sizes.end(), 0);
  if (p < 1) throw std::invalid_argument("simulate_clique_scenario: empty partition");
  for (int g : sizes) {
    if (g < 1) throw std::invalid_argument("simulate_clique_scenario: clique sizes must be positive");
    if (g > 1 && !(intra_corr < 1.0 && intra_corr > -1.0 / (g - 1))) {
      throw std::invalid_argument(
          "simulate_clique_scenario: intra_corr outside the positive-definite range");
    }
  }
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(p, p);
  std::vector<std::vector<int>> cliques;
  int start = 0;
  for (int g : sizes) {
    std::vector<int> clique(g);
    std::iota(clique.begin(), clique.end(), start);
    for (int r = start; r < start + g; ++r) {
      for (int c = start; c < start + g; ++c) {
        if (r != c) sigma(r, c) = intra_corr;
      }
    }
    cliques.push_back(std::move(clique));
    start += g;
  }
  SpdMatrix sigma0(sigma);
  CliqueModel model0 = CliqueModel::from_cliques(p, cliques);
  CovariateMatrix a0(sigma0.chol(), clique_to_pattern(model0));
  RngStream rng(seed, stream);
  ObservationSet obs = draw_observations(a0, n, rng);
  return ScenarioResult{std::move(obs), std::move(sigma0), std::move(a0), std::move(model0)};
}

ScenarioResult simulate_sparse_scenario(int p, long n, int max_col, std::uint64_t seed,
                                        std::uint64_t stream) {
  if (p < 1) throw std::invalid_argument("simulate_sparse_scenario: p must be positive");
  if (max_col < 1 || max_col > p) {
    throw std::invalid_argument("simulate_sparse_scenario: need 1 <= max_col <= p");
  }
  RngStream rng(seed, stream);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
    for (int j = 0; j < p; ++j) {
      a(j, j) = 1.0;
      const int extras = static_cast<int>(rng.uniform_index(max_col));
      for (int e = 0; e < extras; ++e) {
        int i = static_cast<int>(rng.uniform_index(p));
        if (i == j || a(i, j) != 0.0) continue;  // keep the column count exact-or-fewer
        // Magnitudes bounded away from zero so every structural entry is
        // identifiable at moderate sample sizes.
        const double magnitude = 0.6 + 0.7 * rng.uniform();
        a(i, j) = rng.uniform() < 0.5 ? magnitude : -magnitude;
      }
    }
    try {
      CovariateMatrix a0 = CovariateMatrix::from_matrix(a);
      SpdMatrix sigma0 = a0.sigma();
      ObservationSet obs = draw_observations(a0, n, rng);
      return ScenarioResult{std::move(obs), std::move(sigma0), std::move(a0), std::nullopt};
    } catch (const std::invalid_argument&) {
      continue;  // singular draw; try again
    }
  }
  throw std::runtime_error("simulate_sparse_scenario: could not draw an invertible A0");
}

}  // namespace fidcov
