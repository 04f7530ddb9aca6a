#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fidcov/covariate.hpp"
#include "fidcov/density.hpp"
#include "fidcov/matrix.hpp"
#include "fidcov/models.hpp"
#include "fidcov/rng.hpp"

namespace fidcov {

enum class SamplerKind { GibbsClique, MhFixedPattern, Rjmcmc };
enum class PenaltyKind { None, Clique, Mdl };
enum class InitKind { SnPa, Chol, Dcho, Diag, Oracle };

/// One MCMC state: a clique model (Gibbs chains) or a covariate matrix with
/// its pattern (fixed-pattern MH and RJMCMC chains). `log_density` always
/// equals the penalized log GFD at the state.
struct ChainState {
  std::optional<CliqueModel> model;
  std::optional<CovariateMatrix> A;
  LogDensity log_density;
  long iteration = 0;
};

struct ChainConfig {
  SamplerKind kind = SamplerKind::GibbsClique;
  NormChoice norm = NormChoice::l2();
  PenaltyKind penalty = PenaltyKind::Clique;
  long burn_in = 5000;
  long window = 10000;
  long thin = 1;
  int max_col = 0;             // column cap; required for Rjmcmc
  double init_step = 0.25;     // random-walk scale before tuning
  double target_accept = 0.30; // Robbins-Monro target during burn-in
  bool random_scan = false;    // Gibbs coordinate order
  double jump_prob = 0.5;      // RJMCMC probability of a trans-model move

  void validate() const;
};

struct TraceRecord {
  long iteration = 0;
  bool burnin = false;
  bool kept = false;
  double log_density = 0.0;
  std::string model;  // filled on kept records
  int model_size = 0; // clique count or active entry count
};

struct ChainTrace {
  long burn_in = 0;
  std::vector<double> log_density_path;  // one entry per iteration, burn-in included
  std::vector<ChainState> kept;
  double final_step_scale = 0.0;
  double acceptance_rate = 0.0;       // within-model moves, post burn-in
  double jump_acceptance_rate = 0.0;  // RJMCMC birth/death moves, post burn-in
};

/// One draw from the inverse Wishart with `dof` degrees of freedom and scale
/// matrix `scale`, via the Bartlett factor of the Wishart of the inverse
/// scale. Requires dof >= dim.
SpdMatrix sample_inverse_wishart(long dof, const SpdMatrix& scale, RngStream& rng);

/// Block-diagonal draw with block i ~ IW(n, n S_n^i) per the clique model.
SpdMatrix sample_clique_covariance(const ObservationSet& obs, const CliqueModel& m,
                                   RngStream& rng);

/// One full Gibbs sweep over coordinates: each coordinate is reassigned to an
/// existing clique or a fresh singleton, drawn from the full conditional of
/// the (optionally penalized) clique-model GFD.
ChainState gibbs_clique_sweep(const ObservationSet& obs, const ChainState& state,
                              bool penalty, RngStream& rng,
                              const NormChoice& norm = NormChoice::l2(),
                              bool random_scan = false);

/// One random-walk MH step over all free entries of A (diagonal entries move
/// on the log scale). Zero step scale leaves the state unchanged.
ChainState mh_fixed_pattern_step(const ObservationSet& obs, const ChainState& state,
                                 const NormChoice& norm, double step_scale, RngStream& rng,
                                 PenaltyKind penalty = PenaltyKind::None);

/// One reversible-jump step: with probability 1/2 a within-model MH step,
/// otherwise a birth (activate a structurally-zero entry when its column is
/// below max_col) or death (zero an active off-diagonal entry) move with the
/// zeroth-order Gaussian proposal. Diagonal entries are never removed.
ChainState rjmcmc_step(const ObservationSet& obs, const ChainState& state,
                       const NormChoice& norm, int max_col, double step_scale,
                       RngStream& rng);

using TraceRecorder = std::function<void(const TraceRecord&)>;

/// Runs the configured sampler: burn-in with step tuning, then `window`
/// recorded iterations keeping every thin-th state. Deterministic given the
/// stream. The recorder, when given, sees every iteration.
ChainTrace run_chain(const ObservationSet& obs, const ChainConfig& config,
                     const ChainState& init, RngStream& rng,
                     const TraceRecorder& recorder = nullptr);

/// Initial covariate matrices: SnPa (matrix square root of S_n, restricted
/// to max_col), chol, dcho, diag, and oracle (supplied truth). A positive
/// max_col truncates each column to its largest entries, the diagonal always
/// kept.
CovariateMatrix initial_covariate(InitKind kind, const ObservationSet& obs, int max_col = 0,
                                  const CovariateMatrix* oracle = nullptr);

CliqueModel random_partition(int p, RngStream& rng);

/// Re-evaluates the penalized log GFD of a state (invariant checks).
double recompute_log_density(const ObservationSet& obs, const ChainState& state,
                             const NormChoice& norm, PenaltyKind penalty);

InitKind parse_init_kind(const std::string& name);
std::string to_string(InitKind kind);

}  // namespace fidcov
