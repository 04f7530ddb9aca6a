#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fidcov/covariate.hpp"
#include "fidcov/matrix.hpp"
#include "fidcov/models.hpp"
#include "fidcov/rng.hpp"

namespace fidcov {

struct ScenarioResult {
  ObservationSet obs;
  SpdMatrix sigma0;
  CovariateMatrix a0;
  std::optional<CliqueModel> model0;
};

/// Splits p into k clique sizes as evenly as possible.
std::vector<int> near_equal_sizes(int p, int k);

/// Y_i = A_0 Z_i with Z standard normal.
ObservationSet draw_observations(const CovariateMatrix& a0, long n, RngStream& rng);

/// Block covariance with unit diagonal and `intra_corr` inside each clique;
/// requires intra_corr in (-1/(g-1), 1) per block. A_0 is the block Cholesky
/// factor.
ScenarioResult simulate_clique_scenario(const std::vector<int>& sizes, long n,
                                        double intra_corr, std::uint64_t seed,
                                        std::uint64_t stream = 0);

/// Random sparse A_0 with unit diagonal, at most max_col nonzeros per column
/// (diagonal included), and off-diagonal magnitudes in [0.3, 1).
ScenarioResult simulate_sparse_scenario(int p, long n, int max_col, std::uint64_t seed,
                                        std::uint64_t stream = 0);

}  // namespace fidcov
