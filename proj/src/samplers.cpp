#include "fidcov/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fidcov {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_normal_density(double x, double sigma) {
  return -0.5 * std::log(2.0 * M_PI) - std::log(sigma) - 0.5 * x * x / (sigma * sigma);
}

/// Lower-triangular Bartlett factor T of a Wishart(dof, I_p) draw.
Eigen::MatrixXd bartlett_factor(long dof, int p, RngStream& rng) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) {
    t(j, j) = std::sqrt(rng.chi_squared(static_cast<double>(dof - j)));
    for (int i = j + 1; i < p; ++i) t(i, j) = rng.normal();
  }
  return t;
}

/// Gibbs workspace over clique partitions. Clique contributions are cached
/// per clique and only the cliques touched by a move are re-evaluated.
class CliqueSweeper {
 public:
  CliqueSweeper(const ObservationSet& obs, const CliqueModel& init, bool penalized,
                NormChoice norm)
      : eval_(obs, norm), norm_(norm), penalized_(penalized), p_(init.dim()),
        assignment_(init.assignment()) {
    members_.assign(p_, {});
    contrib_.assign(p_, 0.0);
    in_use_.assign(p_, false);
    for (int i = 0; i < p_; ++i) members_[assignment_[i]].push_back(i);
    for (int s = 0; s < p_; ++s) {
      if (!members_[s].empty()) {
        in_use_[s] = true;
        contrib_[s] = term(members_[s], nullptr);
      }
    }
    if (!std::isfinite(total())) {
      throw std::invalid_argument("gibbs_clique_sweep: initial model has zero density");
    }
  }

  void sweep(RngStream& rng, bool random_scan) {
    SubsetPlan* plan = nullptr;
    std::optional<SubsetPlan> storage;
    if (norm_.kind == Norm::LInf) {
      storage.emplace(eval_.n(), norm_.mc_samples, rng);
      plan = &*storage;
      // Refresh every cached contribution under this sweep's draws so all
      // conditional weights share the same Monte Carlo noise.
      for (int s = 0; s < p_; ++s) {
        if (in_use_[s]) contrib_[s] = term(members_[s], plan);
      }
    }
    std::vector<int> order(p_);
    std::iota(order.begin(), order.end(), 0);
    if (random_scan) {
      for (int i = 0; i < p_; ++i) {
        const std::size_t j = i + rng.uniform_index(p_ - i);
        std::swap(order[i], order[j]);
      }
    }
    for (int j : order) update_coordinate(j, rng, plan);
  }

  double total() const {
    double s = 0.0;
    for (int slot = 0; slot < p_; ++slot) {
      if (in_use_[slot]) s += contrib_[slot];
    }
    return s;
  }

  CliqueModel model() const { return CliqueModel(assignment_); }

 private:
  struct Candidate {
    int slot;  // -1 for a fresh singleton
    double total_log;
    double new_term;
  };

  double term(const std::vector<int>& members, SubsetPlan* plan) const {
    double t = eval_.clique_term(members, plan);
    if (penalized_ && std::isfinite(t)) {
      t += eval_.penalty_term(static_cast<int>(members.size()));
    }
    return t;
  }

  void update_coordinate(int j, RngStream& rng, SubsetPlan* plan) {
    const int old_slot = assignment_[j];
    std::vector<int> minus = members_[old_slot];
    minus.erase(std::find(minus.begin(), minus.end(), j));
    const double term_minus = minus.empty() ? 0.0 : term(minus, plan);
    const double base = total() - contrib_[old_slot] + term_minus;

    std::vector<Candidate> candidates;
    candidates.reserve(p_ + 1);
    for (int s = 0; s < p_; ++s) {
      if (!in_use_[s]) continue;
      if (s == old_slot) {
        if (minus.empty()) continue;  // equivalent to the singleton candidate
        // Returning j to its clique restores the cached contribution.
        candidates.push_back({s, base - term_minus + contrib_[old_slot], contrib_[old_slot]});
      } else {
        std::vector<int> grown = members_[s];
        grown.insert(std::lower_bound(grown.begin(), grown.end(), j), j);
        const double t = term(grown, plan);
        candidates.push_back({s, base - contrib_[s] + t, t});
      }
    }
    const double singleton_term = term(std::vector<int>{j}, plan);
    candidates.push_back({-1, base + singleton_term, singleton_term});

    double max_log = kNegInf;
    for (const auto& c : candidates) max_log = std::max(max_log, c.total_log);
    double cum = 0.0;
    std::vector<double> weights(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      weights[i] = std::isfinite(candidates[i].total_log)
                       ? std::exp(candidates[i].total_log - max_log)
                       : 0.0;
      cum += weights[i];
    }
    const double u = rng.uniform() * cum;
    std::size_t pick = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      acc += weights[i];
      if (u <= acc || i + 1 == candidates.size()) {
        pick = i;
        break;
      }
    }
    apply_move(j, candidates[pick], minus, term_minus);
  }

  void apply_move(int j, const Candidate& chosen, const std::vector<int>& minus,
                  double term_minus) {
    const int old_slot = assignment_[j];
    if (chosen.slot == old_slot) return;  // j stays put
    // Shrink or retire the old clique.
    if (minus.empty()) {
      in_use_[old_slot] = false;
      members_[old_slot].clear();
    } else {
      members_[old_slot] = minus;
      contrib_[old_slot] = term_minus;
    }
    int target = chosen.slot;
    if (target < 0) {
      target = 0;
      while (in_use_[target]) ++target;
      members_[target].clear();
      in_use_[target] = true;
    }
    members_[target].insert(
        std::lower_bound(members_[target].begin(), members_[target].end(), j), j);
    contrib_[target] = chosen.new_term;
    assignment_[j] = target;
  }

  CliqueGfdEvaluator eval_;
  NormChoice norm_;
  bool penalized_;
  int p_;
  std::vector<int> assignment_;
  std::vector<std::vector<int>> members_;
  std::vector<double> contrib_;
  std::vector<bool> in_use_;
};

/// Workspace for fixed-pattern MH and RJMCMC chains over A.
class AChain {
 public:
  AChain(const ObservationSet& obs, const CovariateMatrix& a, NormChoice norm,
         PenaltyKind penalty, RngStream& rng)
      : v_(obs.rows()), n_(obs.n()), p_(obs.p()), norm_(norm), penalty_(penalty),
        a_(a.entries()), pattern_(a.pattern()) {
    if (a.dim() != p_) throw std::invalid_argument("AChain: dimension mismatch");
    if (penalty_ == PenaltyKind::Clique) {
      throw std::invalid_argument("AChain: clique penalty applies to model-space chains");
    }
    row_pen_.assign(p_ + 1, 0.0);
    for (int k = 1; k <= p_; ++k) {
      row_pen_[k] = 0.5 * k * std::log(static_cast<double>(n_) * p_) + log_binomial(p_, k);
    }
    std::optional<SubsetPlan> storage;
    SubsetPlan* plan = fresh_plan(storage, rng);
    const auto raw = detail::evaluate_raw_gfd(v_, a_, pattern_, norm_, plan);
    if (!raw.ok || !std::isfinite(raw.log_lik + raw.log_jac)) {
      throw std::invalid_argument("AChain: initial state has zero density");
    }
    log_gfd_ = raw.log_lik + raw.log_jac;
    log_pen_ = penalty_value(pattern_);
  }

  double log_penalized() const { return log_gfd_ + log_pen_; }
  const Eigen::MatrixXd& a() const { return a_; }
  const SparsityPattern& pattern() const { return pattern_; }

  bool mh_step(double step, RngStream& rng) {
    std::optional<SubsetPlan> storage;
    SubsetPlan* plan = fresh_plan(storage, rng);
    Eigen::MatrixXd prop = a_;
    double log_corr = 0.0;
    for (int i = 0; i < p_; ++i) {
      for (int j = 0; j < p_; ++j) {
        if (pattern_.is_zero(i, j)) continue;
        const double z = rng.normal();
        if (i == j) {
          prop(i, i) = a_(i, i) * std::exp(step * z);
          log_corr += std::log(prop(i, i)) - std::log(a_(i, i));
        } else {
          prop(i, j) = a_(i, j) + step * z;
        }
      }
    }
    const double current = current_log_gfd(plan);
    const auto raw = detail::evaluate_raw_gfd(v_, prop, pattern_, norm_, plan);
    const double u = rng.uniform();
    if (!raw.ok) return false;
    const double proposed = raw.log_lik + raw.log_jac;
    if (!std::isfinite(proposed)) return false;
    if (std::log(u) < proposed - current + log_corr) {
      a_ = prop;
      log_gfd_ = proposed;
      return true;
    }
    return false;
  }

  /// Birth/death move; returns {attempted, accepted}.
  std::pair<bool, bool> jump_step(bool birth, int max_col, RngStream& rng) {
    std::optional<SubsetPlan> storage;
    SubsetPlan* plan = fresh_plan(storage, rng);
    if (birth) {
      const auto births = legal_births(pattern_, max_col);
      if (births.empty()) return {false, false};
      const auto [i, j] = births[rng.uniform_index(births.size())];
      const double sigma = birth_scale(a_, pattern_, j);
      const double value = sigma * rng.normal();
      Eigen::MatrixXd prop = a_;
      prop(i, j) = value;
      SparsityPattern grown = pattern_.with_free(i, j);
      const double u = rng.uniform();
      const auto raw = detail::evaluate_raw_gfd(v_, prop, grown, norm_, plan);
      if (!raw.ok || !std::isfinite(raw.log_lik + raw.log_jac)) return {true, false};
      const double proposed = raw.log_lik + raw.log_jac + penalty_value(grown);
      const double current = current_log_gfd(plan) + log_pen_;
      const double n_death_after = static_cast<double>(active_offdiag(grown).size());
      const double log_acc = proposed - current +
                             std::log(1.0 / n_death_after) -
                             std::log(1.0 / static_cast<double>(births.size())) -
                             log_normal_density(value, sigma);
      if (std::log(u) < log_acc) {
        a_ = prop;
        pattern_ = std::move(grown);
        log_gfd_ = raw.log_lik + raw.log_jac;
        log_pen_ = penalty_value(pattern_);
        return {true, true};
      }
      return {true, false};
    }
    const auto deaths = active_offdiag(pattern_);
    if (deaths.empty()) return {false, false};
    const auto [i, j] = deaths[rng.uniform_index(deaths.size())];
    const double value = a_(i, j);
    Eigen::MatrixXd prop = a_;
    prop(i, j) = 0.0;
    SparsityPattern shrunk = pattern_.with_zero(i, j);
    const double u = rng.uniform();
    const auto raw = detail::evaluate_raw_gfd(v_, prop, shrunk, norm_, plan);
    if (!raw.ok || !std::isfinite(raw.log_lik + raw.log_jac)) return {true, false};
    // The reverse move re-births (i,j) from the post-death column scale.
    const double sigma = birth_scale(prop, shrunk, j);
    const double proposed = raw.log_lik + raw.log_jac + penalty_value(shrunk);
    const double current = current_log_gfd(plan) + log_pen_;
    const double n_birth_after = static_cast<double>(legal_births(shrunk, max_col).size());
    const double log_acc = proposed - current +
                           std::log(1.0 / n_birth_after) + log_normal_density(value, sigma) -
                           std::log(1.0 / static_cast<double>(deaths.size()));
    if (std::log(u) < log_acc) {
      a_ = prop;
      pattern_ = std::move(shrunk);
      log_gfd_ = raw.log_lik + raw.log_jac;
      log_pen_ = penalty_value(pattern_);
      return {true, true};
    }
    return {true, false};
  }

 private:
  SubsetPlan* fresh_plan(std::optional<SubsetPlan>& storage, RngStream& rng) {
    if (norm_.kind != Norm::LInf) return nullptr;
    storage.emplace(n_, norm_.mc_samples, rng);
    return &*storage;
  }

  /// Under the Monte Carlo l-infinity estimator the cached value was drawn
  /// with an older plan; both sides of a ratio must share the sweep's plan.
  double current_log_gfd(SubsetPlan* plan) {
    if (norm_.kind != Norm::LInf) return log_gfd_;
    const auto raw = detail::evaluate_raw_gfd(v_, a_, pattern_, norm_, plan);
    log_gfd_ = raw.log_lik + raw.log_jac;
    return log_gfd_;
  }

  double penalty_value(const SparsityPattern& pattern) const {
    if (penalty_ != PenaltyKind::Mdl) return 0.0;
    double s = 0.0;
    for (int i = 0; i < p_; ++i) s -= row_pen_[pattern.row_free_count(i)];
    return s;
  }

  static std::vector<std::pair<int, int>> active_offdiag(const SparsityPattern& pattern) {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < pattern.dim(); ++i) {
      for (int j = 0; j < pattern.dim(); ++j) {
        if (i != j && !pattern.is_zero(i, j)) out.emplace_back(i, j);
      }
    }
    return out;
  }

  static std::vector<std::pair<int, int>> legal_births(const SparsityPattern& pattern,
                                                       int max_col) {
    const auto counts = pattern.column_counts();
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < pattern.dim(); ++i) {
      for (int j = 0; j < pattern.dim(); ++j) {
        if (i != j && pattern.is_zero(i, j) && counts[j] < max_col) out.emplace_back(i, j);
      }
    }
    return out;
  }

  static double birth_scale(const Eigen::MatrixXd& a, const SparsityPattern& pattern, int col) {
    double ss = 0.0;
    int count = 0;
    for (int i = 0; i < pattern.dim(); ++i) {
      if (!pattern.is_zero(i, col)) {
        ss += a(i, col) * a(i, col);
        ++count;
      }
    }
    if (count > 0 && ss > 0.0) return std::sqrt(ss / count);
    ss = 0.0;
    count = 0;
    for (int i = 0; i < pattern.dim(); ++i) {
      for (int j = 0; j < pattern.dim(); ++j) {
        if (!pattern.is_zero(i, j)) {
          ss += a(i, j) * a(i, j);
          ++count;
        }
      }
    }
    if (count > 0 && ss > 0.0) return std::sqrt(ss / count);
    return 1.0;
  }

  const Eigen::MatrixXd v_;
  long n_;
  int p_;
  NormChoice norm_;
  PenaltyKind penalty_;
  Eigen::MatrixXd a_;
  SparsityPattern pattern_;
  double log_gfd_ = kNegInf;
  double log_pen_ = 0.0;
  std::vector<double> row_pen_;
};

ChainState make_clique_state(const CliqueSweeper& sweeper, long iteration) {
  ChainState s;
  s.model = sweeper.model();
  s.log_density = LogDensity{sweeper.total(), false};
  s.iteration = iteration;
  return s;
}

ChainState make_a_state(const AChain& chain, long iteration) {
  ChainState s;
  s.A = CovariateMatrix(chain.a(), chain.pattern());
  s.log_density = LogDensity{chain.log_penalized(), false};
  s.iteration = iteration;
  return s;
}

}  // namespace

void ChainConfig::validate() const {
  norm.validate();
  if (burn_in < 0) throw std::invalid_argument("ChainConfig: burn_in must be >= 0");
  if (window < 1) throw std::invalid_argument("ChainConfig: window must be >= 1");
  if (thin < 1) throw std::invalid_argument("ChainConfig: thin must be >= 1");
  if (kind == SamplerKind::Rjmcmc && max_col < 1) {
    throw std::invalid_argument("ChainConfig: Rjmcmc requires max_col >= 1");
  }
  if (kind == SamplerKind::GibbsClique && penalty == PenaltyKind::Mdl) {
    throw std::invalid_argument("ChainConfig: MDL penalty applies to A-space chains");
  }
  if (kind != SamplerKind::GibbsClique && penalty == PenaltyKind::Clique) {
    throw std::invalid_argument("ChainConfig: clique penalty applies to model-space chains");
  }
  if (!(jump_prob > 0.0 && jump_prob < 1.0)) {
    throw std::invalid_argument("ChainConfig: jump_prob must lie in (0,1)");
  }
  if (!(init_step >= 0.0)) throw std::invalid_argument("ChainConfig: init_step must be >= 0");
}

SpdMatrix sample_inverse_wishart(long dof, const SpdMatrix& scale, RngStream& rng) {
  const int p = scale.dim();
  if (dof < p) throw std::invalid_argument("sample_inverse_wishart: requires dof >= dim");
  const Eigen::MatrixXd t = bartlett_factor(dof, p, rng);
  // Sigma^{-1} ~ Wishart(dof, scale^{-1}) gives Sigma = (L T^{-T})(L T^{-T})^T.
  const Eigen::MatrixXd mt =
      t.triangularView<Eigen::Lower>().solve(scale.chol().transpose());
  return SpdMatrix(mt.transpose() * mt);
}

SpdMatrix sample_clique_covariance(const ObservationSet& obs, const CliqueModel& m,
                                   RngStream& rng) {
  if (obs.p() != m.dim()) throw std::invalid_argument("sample_clique_covariance: dimension mismatch");
  const long n = obs.n();
  const auto sn = sample_covariance(obs);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.dim(), m.dim());
  for (const auto& clique : m.cliques()) {
    const int g = static_cast<int>(clique.size());
    if (n <= g) throw std::invalid_argument("sample_clique_covariance: requires n > clique size");
    Eigen::MatrixXd block(g, g);
    for (int r = 0; r < g; ++r) {
      for (int c = 0; c < g; ++c) block(r, c) = n * sn.entries(clique[r], clique[c]);
    }
    const SpdMatrix draw = sample_inverse_wishart(n, SpdMatrix(block), rng);
    for (int r = 0; r < g; ++r) {
      for (int c = 0; c < g; ++c) out(clique[r], clique[c]) = draw(r, c);
    }
  }
  return SpdMatrix(out);
}

ChainState gibbs_clique_sweep(const ObservationSet& obs, const ChainState& state,
                              bool penalty, RngStream& rng, const NormChoice& norm,
                              bool random_scan) {
  if (!state.model) throw std::invalid_argument("gibbs_clique_sweep: state needs a clique model");
  CliqueSweeper sweeper(obs, *state.model, penalty, norm);
  sweeper.sweep(rng, random_scan);
  return make_clique_state(sweeper, state.iteration + 1);
}

ChainState mh_fixed_pattern_step(const ObservationSet& obs, const ChainState& state,
                                 const NormChoice& norm, double step_scale, RngStream& rng,
                                 PenaltyKind penalty) {
  if (!state.A) throw std::invalid_argument("mh_fixed_pattern_step: state needs a covariate matrix");
  AChain chain(obs, *state.A, norm, penalty, rng);
  chain.mh_step(step_scale, rng);
  return make_a_state(chain, state.iteration + 1);
}

ChainState rjmcmc_step(const ObservationSet& obs, const ChainState& state,
                       const NormChoice& norm, int max_col, double step_scale,
                       RngStream& rng) {
  if (!state.A) throw std::invalid_argument("rjmcmc_step: state needs a covariate matrix");
  if (max_col < 1) throw std::invalid_argument("rjmcmc_step: max_col must be >= 1");
  if (!state.A->pattern().obeys_column_cap(max_col)) {
    throw std::invalid_argument("rjmcmc_step: pattern violates the column cap");
  }
  AChain chain(obs, *state.A, norm, PenaltyKind::Mdl, rng);
  const double u = rng.uniform();
  if (u < 0.5) {
    chain.mh_step(step_scale, rng);
  } else {
    chain.jump_step(u < 0.75, max_col, rng);
  }
  return make_a_state(chain, state.iteration + 1);
}

ChainTrace run_chain(const ObservationSet& obs, const ChainConfig& config,
                     const ChainState& init, RngStream& rng, const TraceRecorder& recorder) {
  config.validate();
  ChainTrace trace;
  trace.burn_in = config.burn_in;
  const long total = config.burn_in + config.window;
  trace.log_density_path.reserve(total);

  const auto record = [&](long it, double log_density, const std::string& model,
                          int model_size) {
    const bool burnin = it < config.burn_in;
    const bool kept = !burnin && (it - config.burn_in) % config.thin == 0;
    trace.log_density_path.push_back(log_density);
    if (recorder) {
      recorder(TraceRecord{it, burnin, kept, log_density, kept ? model : std::string{},
                           model_size});
    }
    return kept;
  };

  if (config.kind == SamplerKind::GibbsClique) {
    if (!init.model) throw std::invalid_argument("run_chain: Gibbs chain needs a clique model");
    CliqueSweeper sweeper(obs, *init.model, config.penalty == PenaltyKind::Clique, config.norm);
    for (long it = 0; it < total; ++it) {
      sweeper.sweep(rng, config.random_scan);
      const CliqueModel m = sweeper.model();
      if (record(it, sweeper.total(), m.to_string(), m.count())) {
        trace.kept.push_back(make_clique_state(sweeper, it));
      }
    }
    return trace;
  }

  if (!init.A) throw std::invalid_argument("run_chain: A-space chain needs a covariate matrix");
  if (config.kind == SamplerKind::Rjmcmc && !init.A->pattern().obeys_column_cap(config.max_col)) {
    throw std::invalid_argument("run_chain: initial pattern violates the column cap");
  }
  AChain chain(obs, *init.A, config.norm, config.penalty, rng);
  double step = config.init_step;
  long tune_events = 0;
  long mh_attempts = 0, mh_accepts = 0, jump_attempts = 0, jump_accepts = 0;
  for (long it = 0; it < total; ++it) {
    const bool burnin = it < config.burn_in;
    bool did_mh = false;
    bool mh_accepted = false;
    if (config.kind == SamplerKind::MhFixedPattern) {
      did_mh = true;
      mh_accepted = chain.mh_step(step, rng);
    } else {
      const double u = rng.uniform();
      if (u < 1.0 - config.jump_prob) {
        did_mh = true;
        mh_accepted = chain.mh_step(step, rng);
      } else {
        const bool birth = u < 1.0 - 0.5 * config.jump_prob;
        const auto [attempted, accepted] = chain.jump_step(birth, config.max_col, rng);
        if (!burnin && attempted) {
          ++jump_attempts;
          jump_accepts += accepted ? 1 : 0;
        }
      }
    }
    if (did_mh) {
      if (burnin && step > 0.0) {
        ++tune_events;
        const double gain = std::pow(static_cast<double>(tune_events), -0.6);
        step = std::clamp(step * std::exp(gain * ((mh_accepted ? 1.0 : 0.0) -
                                                  config.target_accept)),
                          1e-6, 1e3);
      }
      if (!burnin) {
        ++mh_attempts;
        mh_accepts += mh_accepted ? 1 : 0;
      }
    }
    const int active = static_cast<int>(chain.pattern().total_free());
    if (record(it, chain.log_penalized(), chain.pattern().to_string(), active)) {
      trace.kept.push_back(make_a_state(chain, it));
    }
  }
  trace.final_step_scale = step;
  trace.acceptance_rate =
      mh_attempts > 0 ? static_cast<double>(mh_accepts) / mh_attempts : 0.0;
  trace.jump_acceptance_rate =
      jump_attempts > 0 ? static_cast<double>(jump_accepts) / jump_attempts : 0.0;
  return trace;
}

namespace {

Eigen::MatrixXd cap_columns(Eigen::MatrixXd m, int max_col) {
  if (max_col <= 0) return m;
  const int p = static_cast<int>(m.rows());
  for (int j = 0; j < p; ++j) {
    std::vector<std::pair<double, int>> entries;  // (-|value|, row) for stable ordering
    for (int i = 0; i < p; ++i) {
      if (i != j && m(i, j) != 0.0) entries.emplace_back(-std::abs(m(i, j)), i);
    }
    std::sort(entries.begin(), entries.end());
    for (std::size_t r = static_cast<std::size_t>(std::max(0, max_col - 1));
         r < entries.size(); ++r) {
      m(entries[r].second, j) = 0.0;
    }
  }
  return m;
}

}  // namespace

CovariateMatrix initial_covariate(InitKind kind, const ObservationSet& obs, int max_col,
                                  const CovariateMatrix* oracle) {
  if (kind == InitKind::Oracle) {
    if (oracle == nullptr) throw std::invalid_argument("initial_covariate: oracle init needs the truth");
    return *oracle;
  }
  const int p = obs.p();
  const auto sn = sample_covariance(obs);
  if (kind == InitKind::Diag) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
      if (!(sn.entries(i, i) > 0.0)) {
        throw std::invalid_argument("initial_covariate: zero-variance coordinate");
      }
      a(i, i) = std::sqrt(sn.entries(i, i));
    }
    return CovariateMatrix::from_matrix(std::move(a));
  }
  const SpdMatrix s = sn.spd();  // throws when S_n is singular
  switch (kind) {
    case InitKind::Chol:
      return CovariateMatrix::from_matrix(cap_columns(s.chol(), max_col));
    case InitKind::Dcho: {
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
      for (int i = 0; i < p; ++i) a(i, i) = s.chol()(i, i);
      return CovariateMatrix::from_matrix(std::move(a));
    }
    case InitKind::SnPa: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.entries());
      if (es.info() != Eigen::Success) {
        throw std::runtime_error("initial_covariate: eigensolver failed");
      }
      const Eigen::MatrixXd root = es.eigenvectors() *
                                   es.eigenvalues().cwiseSqrt().asDiagonal() *
                                   es.eigenvectors().transpose();
      return CovariateMatrix::from_matrix(cap_columns(root, max_col));
    }
    default:
      throw std::invalid_argument("initial_covariate: unknown initializer");
  }
}

CliqueModel random_partition(int p, RngStream& rng) {
  std::vector<int> a(p);
  for (int i = 0; i < p; ++i) a[i] = static_cast<int>(rng.uniform_index(p));
  return CliqueModel(std::move(a));
}

double recompute_log_density(const ObservationSet& obs, const ChainState& state,
                             const NormChoice& norm, PenaltyKind penalty) {
  if (state.model) {
    double v = log_clique_model_gfd(obs, *state.model, norm).value;
    if (penalty == PenaltyKind::Clique) v += log_clique_penalty(*state.model, obs.n());
    return v;
  }
  if (state.A) {
    double v = log_gfd(obs, *state.A, norm).value;
    if (penalty == PenaltyKind::Mdl) v += log_mdl_penalty(state.A->pattern(), obs.n());
    return v;
  }
  throw std::invalid_argument("recompute_log_density: empty state");
}

InitKind parse_init_kind(const std::string& name) {
  if (name == "SnPa" || name == "snpa" || name == "maxc" || name == "MaxC") return InitKind::SnPa;
  if (name == "chol") return InitKind::Chol;
  if (name == "dcho") return InitKind::Dcho;
  if (name == "diag") return InitKind::Diag;
  if (name == "oracle") return InitKind::Oracle;
  throw std::invalid_argument("unknown initializer: " + name);
}

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::SnPa: return "SnPa";
    case InitKind::Chol: return "chol";
    case InitKind::Dcho: return "dcho";
    case InitKind::Diag: return "diag";
    case InitKind::Oracle: return "oracle";
  }
  return "?";
}

}  // namespace fidcov
