#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include "fidcov/diagnostics.hpp"
#include "fidcov/io.hpp"
#include "fidcov/samplers.hpp"
#include "fidcov/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fidcov;

namespace {

constexpr const char* kVersion = "0.1.0";

// Stream id layout: chains use 1..n_chains, covariance draws 5001..,
// clique-chain initial partitions 7001.., scenario data 1000 + replication.
constexpr std::uint64_t kSigmaDrawBase = 5000;
constexpr std::uint64_t kInitBase = 7000;
constexpr std::uint64_t kDataBase = 1000;

struct Options {
  std::string input;
  std::string out;
  std::string norm = "l2";
  std::string init = "SnPa";
  std::string penalty;
  std::string clique_init = "random";
  std::string sigma0_path;
  std::string a0_path;
  long chains = 1;
  long burn_in = 5000;
  long window = 10000;
  long thin = 1;
  std::uint64_t seed = 20240601;
  int maxc = 0;
  int linf_cap = 10000;
  int linf_samples = 2000;
  // simulate / coverage scenario
  int p = 0;
  long n = 0;
  std::string gen = "clique";
  int k = 1;
  double corr = 0.5;
  std::string sizes;
  long reps = 200;
};

NormChoice make_norm(const Options& opt) {
  if (opt.norm == "l2") return NormChoice::l2();
  if (opt.norm == "linf") return NormChoice::linf(opt.linf_cap, opt.linf_samples);
  throw std::invalid_argument("unknown norm: " + opt.norm + " (expected l2 or linf)");
}

/// Flat key=value config file; '#' starts a comment. Keys are the long flag
/// names without dashes. Values are applied before flag parsing, so flags win.
void apply_config_file(const std::string& path, Options& opt) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  const std::map<std::string, std::function<void(const std::string&)>> setters{
      {"input", [&](const std::string& v) { opt.input = v; }},
      {"out", [&](const std::string& v) { opt.out = v; }},
      {"norm", [&](const std::string& v) { opt.norm = v; }},
      {"init", [&](const std::string& v) { opt.init = v; }},
      {"penalty", [&](const std::string& v) { opt.penalty = v; }},
      {"clique-init", [&](const std::string& v) { opt.clique_init = v; }},
      {"sigma0", [&](const std::string& v) { opt.sigma0_path = v; }},
      {"a0", [&](const std::string& v) { opt.a0_path = v; }},
      {"chains", [&](const std::string& v) { opt.chains = std::stol(v); }},
      {"burn-in", [&](const std::string& v) { opt.burn_in = std::stol(v); }},
      {"window", [&](const std::string& v) { opt.window = std::stol(v); }},
      {"thin", [&](const std::string& v) { opt.thin = std::stol(v); }},
      {"seed", [&](const std::string& v) { opt.seed = std::stoull(v); }},
      {"maxc", [&](const std::string& v) { opt.maxc = std::stoi(v); }},
      {"linf-cap", [&](const std::string& v) { opt.linf_cap = std::stoi(v); }},
      {"linf-samples", [&](const std::string& v) { opt.linf_samples = std::stoi(v); }},
      {"p", [&](const std::string& v) { opt.p = std::stoi(v); }},
      {"n", [&](const std::string& v) { opt.n = std::stol(v); }},
      {"gen", [&](const std::string& v) { opt.gen = v; }},
      {"k", [&](const std::string& v) { opt.k = std::stoi(v); }},
      {"corr", [&](const std::string& v) { opt.corr = std::stod(v); }},
      {"sizes", [&](const std::string& v) { opt.sizes = v; }},
      {"reps", [&](const std::string& v) { opt.reps = std::stol(v); }}};
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_number) +
                               ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw std::runtime_error("config line " + std::to_string(line_number) +
                               ": unknown key '" + key + "'");
    }
    it->second(value);
  }
}

std::vector<int> scenario_sizes(const Options& opt) {
  if (!opt.sizes.empty()) {
    std::vector<int> out;
    std::istringstream stream(opt.sizes);
    std::string token;
    while (std::getline(stream, token, ',')) out.push_back(std::stoi(token));
    return out;
  }
  return near_equal_sizes(opt.p, opt.k);
}

json config_json(const Options& opt, const std::string& mode) {
  return json{{"mode", mode},
              {"input", opt.input},
              {"out", opt.out},
              {"norm", opt.norm},
              {"init", opt.init},
              {"penalty", opt.penalty},
              {"clique_init", opt.clique_init},
              {"sigma0", opt.sigma0_path},
              {"a0", opt.a0_path},
              {"chains", opt.chains},
              {"burn_in", opt.burn_in},
              {"window", opt.window},
              {"thin", opt.thin},
              {"seed", opt.seed},
              {"maxc", opt.maxc},
              {"linf_cap", opt.linf_cap},
              {"linf_samples", opt.linf_samples},
              {"p", opt.p},
              {"n", opt.n},
              {"gen", opt.gen},
              {"k", opt.k},
              {"corr", opt.corr},
              {"sizes", opt.sizes},
              {"reps", opt.reps}};
}

void write_manifest(const Options& opt, const std::string& mode) {
  json manifest{{"tool", "fidcov"},
                {"version", kVersion},
                {"config", config_json(opt, mode)},
                {"streams",
                 {{"chains", "seed with stream_id 1..chains"},
                  {"sigma_draws", "seed with stream_id 5001..5000+chains"},
                  {"chain_inits", "seed with stream_id 7001..7000+chains"},
                  {"scenario_data", "seed with stream_id 1000+replication"}}}};
  write_json_file((fs::path(opt.out) / "manifest.json").string(), manifest);
}

void prepare_out_dir(const Options& opt, bool traces = true) {
  if (opt.out.empty()) throw std::invalid_argument("--out is required");
  fs::create_directories(opt.out);
  if (traces) {
    fs::create_directories(fs::path(opt.out) / "traces");
    fs::create_directories(fs::path(opt.out) / "diagnostics");
  }
}

std::optional<SpdMatrix> load_sigma0(const Options& opt) {
  if (opt.sigma0_path.empty()) return std::nullopt;
  return SpdMatrix(read_matrix_csv(opt.sigma0_path));
}

void write_statistics_csv(const std::string& path,
                          const std::vector<std::pair<long, StatTable>>& per_chain) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(12);
  out << "chain,draw,statistic,value\n";
  for (const auto& [chain, table] : per_chain) {
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& row = table.rows[i];
      out << chain << ',' << i << ",SlogGFD," << row.slog_gfd << '\n';
      out << chain << ',' << i << ",LogD," << row.logd << '\n';
      if (row.d2sig) out << chain << ',' << i << ",D2Sig," << *row.d2sig << '\n';
      if (row.eigvec_angle) {
        out << chain << ',' << i << ",EigvecAngle," << *row.eigvec_angle << '\n';
      }
    }
  }
}

json summarize_stat(const std::vector<double>& values, const std::string& name) {
  if (values.empty()) return json{};
  ConfidenceCurve curve(name, values);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  return json{{"mean", mean},
              {"median", curve.quantile(0.5)},
              {"q05", curve.quantile(0.05)},
              {"q95", curve.quantile(0.95)}};
}

json statistics_summary(const std::vector<std::pair<long, StatTable>>& per_chain) {
  std::vector<double> slog, logd, d2sig, angle;
  for (const auto& [chain, table] : per_chain) {
    for (const auto& row : table.rows) {
      slog.push_back(row.slog_gfd);
      logd.push_back(row.logd);
      if (row.d2sig) d2sig.push_back(*row.d2sig);
      if (row.eigvec_angle) angle.push_back(*row.eigvec_angle);
    }
  }
  json out;
  out["SlogGFD"] = summarize_stat(slog, "SlogGFD");
  out["LogD"] = summarize_stat(logd, "LogD");
  if (!d2sig.empty()) out["D2Sig"] = summarize_stat(d2sig, "D2Sig");
  if (!angle.empty()) out["EigvecAngle"] = summarize_stat(angle, "EigvecAngle");
  return out;
}

json baseline_json(const StatTable& table) {
  if (!table.sn_baseline) return json{};
  json out{{"LogD", table.sn_baseline->logd}};
  if (table.sn_baseline->d2sig) out["D2Sig"] = *table.sn_baseline->d2sig;
  if (table.sn_baseline->eigvec_angle) out["EigvecAngle"] = *table.sn_baseline->eigvec_angle;
  return out;
}

int run_simulate(const Options& opt) {
  prepare_out_dir(opt, false);
  if (opt.p < 1 || opt.n < 1) throw std::invalid_argument("simulate requires --p and --n");
  std::optional<ScenarioResult> scenario;
  if (opt.gen == "clique") {
    scenario = simulate_clique_scenario(scenario_sizes(opt), opt.n, opt.corr, opt.seed);
  } else if (opt.gen == "sparse") {
    if (opt.maxc < 1) throw std::invalid_argument("sparse generator requires --maxc");
    scenario = simulate_sparse_scenario(opt.p, opt.n, opt.maxc, opt.seed);
  } else {
    throw std::invalid_argument("unknown generator: " + opt.gen);
  }
  write_matrix_csv((fs::path(opt.out) / "obs.csv").string(), scenario->obs.rows());
  write_matrix_csv((fs::path(opt.out) / "sigma0.csv").string(), scenario->sigma0.entries());
  write_matrix_csv((fs::path(opt.out) / "a0.csv").string(), scenario->a0.entries());
  if (scenario->model0) {
    std::ofstream model_out(fs::path(opt.out) / "model0.txt");
    model_out << scenario->model0->to_string() << '\n';
  }
  write_manifest(opt, "simulate");
  return 0;
}

int run_fit_full(const Options& opt) {
  prepare_out_dir(opt);
  const ObservationSet obs = ingest_csv(opt.input);
  if (obs.n() <= obs.p()) {
    throw std::invalid_argument("fit-full requires n > p (use fit-clique or fit-general)");
  }
  const auto sigma0 = load_sigma0(opt);
  const SpdMatrix scale(static_cast<double>(obs.n()) * sample_covariance(obs).spd().entries());
  const CliqueModel full = CliqueModel::single_clique(obs.p());

  RngStream rng(opt.seed, 1);
  TraceWriter trace((fs::path(opt.out) / "traces" / "chain_00.ndjson").string());
  std::vector<std::pair<CliqueModel, SpdMatrix>> draws;
  draws.reserve(opt.window);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(obs.p(), obs.p());
  for (long i = 0; i < opt.window; ++i) {
    SpdMatrix sigma = sample_inverse_wishart(obs.n(), scale, rng);
    mean += sigma.entries();
    const double ld = log_composite_iw_density(obs, full, sigma);
    trace.write(TraceRecord{i, false, true, ld, full.to_string(), 1});
    draws.emplace_back(full, std::move(sigma));
  }
  mean /= static_cast<double>(opt.window);

  const auto table = compute_statistics(draws, obs, sigma0 ? &*sigma0 : nullptr);
  std::vector<std::pair<long, StatTable>> per_chain{{0, table}};
  write_statistics_csv((fs::path(opt.out) / "diagnostics" / "statistics.csv").string(),
                       per_chain);

  std::vector<double> logd;
  for (const auto& row : table.rows) logd.push_back(row.logd);
  json iw_summary{{"draws", opt.window},
                  {"dof", obs.n()},
                  {"posterior_mean_logdet", summarize_stat(logd, "LogD")},
                  {"mean_matrix_file", "iw_mean.csv"}};
  write_matrix_csv((fs::path(opt.out) / "diagnostics" / "iw_mean.csv").string(), mean);
  write_json_file((fs::path(opt.out) / "diagnostics" / "iw_summary.json").string(), iw_summary);

  json summary{{"mode", "fit-full"},
               {"n", obs.n()},
               {"p", obs.p()},
               {"n_chains", 1},
               {"draws", opt.window},
               {"statistics", statistics_summary(per_chain)},
               {"sn_baseline", baseline_json(table)}};
  write_json_file((fs::path(opt.out) / "summary.json").string(), summary);
  write_manifest(opt, "fit-full");
  return 0;
}

struct CliqueChainResult {
  ChainTrace trace;
  std::vector<std::pair<CliqueModel, SpdMatrix>> draws;
};

ChainConfig clique_chain_config(const Options& opt) {
  ChainConfig config;
  config.kind = SamplerKind::GibbsClique;
  config.norm = make_norm(opt);
  config.penalty = opt.penalty == "none" ? PenaltyKind::None : PenaltyKind::Clique;
  config.burn_in = opt.burn_in;
  config.window = opt.window;
  config.thin = opt.thin;
  return config;
}

CliqueChainResult run_one_clique_chain(const ObservationSet& obs, const Options& opt,
                                       const ChainConfig& config, long chain_id) {
  ChainState init;
  if (opt.clique_init == "singletons") {
    init.model = CliqueModel::singletons(obs.p());
  } else {
    RngStream init_rng(opt.seed, kInitBase + 1 + chain_id);
    init.model = random_partition(obs.p(), init_rng);
  }

  char name[32];
  std::snprintf(name, sizeof(name), "chain_%02ld.ndjson", chain_id);
  TraceWriter writer((fs::path(opt.out) / "traces" / name).string());
  RngStream rng(opt.seed, 1 + chain_id);
  CliqueChainResult result;
  result.trace = run_chain(obs, config, init, rng,
                           [&](const TraceRecord& r) { writer.write(r); });
  RngStream sigma_rng(opt.seed, kSigmaDrawBase + 1 + chain_id);
  result.draws.reserve(result.trace.kept.size());
  for (const auto& state : result.trace.kept) {
    result.draws.emplace_back(*state.model,
                              sample_clique_covariance(obs, *state.model, sigma_rng));
  }
  return result;
}

int run_fit_clique(const Options& opt) {
  prepare_out_dir(opt);
  if (opt.chains < 1) throw std::invalid_argument("--chains must be >= 1");
  const ObservationSet obs = ingest_csv(opt.input);
  const auto sigma0 = load_sigma0(opt);
  const ChainConfig config = clique_chain_config(opt);
  config.validate();

  std::vector<CliqueChainResult> results(opt.chains);
  {
    std::vector<std::thread> workers;
    for (long c = 0; c < opt.chains; ++c) {
      workers.emplace_back([&, c] { results[c] = run_one_clique_chain(obs, opt, config, c); });
    }
    for (auto& w : workers) w.join();
  }

  std::vector<CliqueModel> pooled_models;
  std::vector<std::pair<long, StatTable>> per_chain;
  std::map<std::string, long> model_freq;
  json ess_list = json::array();
  for (long c = 0; c < opt.chains; ++c) {
    for (const auto& state : results[c].trace.kept) {
      pooled_models.push_back(*state.model);
      model_freq[state.model->to_string()] += 1;
    }
    per_chain.emplace_back(c, compute_statistics(results[c].draws, obs,
                                                 sigma0 ? &*sigma0 : nullptr));
    std::vector<double> post(results[c].trace.log_density_path.begin() + opt.burn_in,
                             results[c].trace.log_density_path.end());
    ess_list.push_back(ess(post));
  }

  const auto membership = co_membership(pooled_models);
  write_matrix_csv((fs::path(opt.out) / "diagnostics" / "co_membership.csv").string(),
                   membership.entries());
  write_statistics_csv((fs::path(opt.out) / "diagnostics" / "statistics.csv").string(),
                       per_chain);

  const auto modal = std::max_element(model_freq.begin(), model_freq.end(),
                                      [](const auto& a, const auto& b) {
                                        return a.second < b.second;
                                      });
  json summary{{"mode", "fit-clique"},
               {"n", obs.n()},
               {"p", obs.p()},
               {"n_chains", opt.chains},
               {"kept_per_chain", results.front().trace.kept.size()},
               {"modal_model", modal->first},
               {"modal_frequency",
                static_cast<double>(modal->second) / static_cast<double>(pooled_models.size())},
               {"ess_log_density", ess_list},
               {"statistics", statistics_summary(per_chain)},
               {"sn_baseline", baseline_json(per_chain.front().second)}};
  write_json_file((fs::path(opt.out) / "summary.json").string(), summary);
  write_manifest(opt, "fit-clique");
  return 0;
}

int run_fit_general(const Options& opt) {
  prepare_out_dir(opt);
  if (opt.maxc < 1) throw std::invalid_argument("fit-general requires --maxc");
  const ObservationSet obs = ingest_csv(opt.input);
  const auto sigma0 = load_sigma0(opt);
  std::optional<CovariateMatrix> oracle;
  if (!opt.a0_path.empty()) oracle = CovariateMatrix::from_matrix(read_matrix_csv(opt.a0_path));
  const InitKind init_kind = parse_init_kind(opt.init);
  const CovariateMatrix init_a =
      initial_covariate(init_kind, obs, opt.maxc, oracle ? &*oracle : nullptr);

  ChainConfig config;
  config.kind = SamplerKind::Rjmcmc;
  config.norm = make_norm(opt);
  config.penalty = opt.penalty == "none" ? PenaltyKind::None : PenaltyKind::Mdl;
  config.burn_in = opt.burn_in;
  config.window = opt.window;
  config.thin = opt.thin;
  config.max_col = opt.maxc;
  config.validate();
  if (opt.chains < 1) throw std::invalid_argument("--chains must be >= 1");
  if (!init_a.pattern().obeys_column_cap(opt.maxc)) {
    throw std::invalid_argument("initial pattern violates the column cap");
  }

  std::vector<ChainTrace> traces(opt.chains);
  {
    std::vector<std::thread> workers;
    for (long c = 0; c < opt.chains; ++c) {
      workers.emplace_back([&, c] {
        char name[32];
        std::snprintf(name, sizeof(name), "chain_%02ld.ndjson", c);
        TraceWriter writer((fs::path(opt.out) / "traces" / name).string());
        ChainState init;
        init.A = init_a;
        RngStream rng(opt.seed, 1 + c);
        traces[c] = run_chain(obs, config, init, rng,
                              [&](const TraceRecord& r) { writer.write(r); });
      });
    }
    for (auto& w : workers) w.join();
  }

  std::vector<std::pair<long, StatTable>> per_chain;
  std::map<std::string, long> pattern_freq;
  long pooled = 0;
  json acceptance = json::array();
  json jump_acceptance = json::array();
  for (long c = 0; c < opt.chains; ++c) {
    per_chain.emplace_back(c, compute_statistics(traces[c].kept, obs,
                                                 sigma0 ? &*sigma0 : nullptr));
    for (const auto& state : traces[c].kept) {
      pattern_freq[state.A->pattern().to_string()] += 1;
      ++pooled;
    }
    acceptance.push_back(traces[c].acceptance_rate);
    jump_acceptance.push_back(traces[c].jump_acceptance_rate);
  }
  write_statistics_csv((fs::path(opt.out) / "diagnostics" / "statistics.csv").string(),
                       per_chain);

  const auto modal = std::max_element(pattern_freq.begin(), pattern_freq.end(),
                                      [](const auto& a, const auto& b) {
                                        return a.second < b.second;
                                      });
  json summary{{"mode", "fit-general"},
               {"n", obs.n()},
               {"p", obs.p()},
               {"n_chains", opt.chains},
               {"maxc", opt.maxc},
               {"init", opt.init},
               {"modal_pattern", modal->first},
               {"modal_frequency",
                static_cast<double>(modal->second) / static_cast<double>(pooled)},
               {"acceptance_rate", acceptance},
               {"jump_acceptance_rate", jump_acceptance},
               {"statistics", statistics_summary(per_chain)},
               {"sn_baseline", baseline_json(per_chain.front().second)}};
  write_json_file((fs::path(opt.out) / "summary.json").string(), summary);
  write_manifest(opt, "fit-general");
  return 0;
}

int run_coverage(const Options& opt) {
  prepare_out_dir(opt, false);
  if (opt.p < 1 || opt.n < 1) throw std::invalid_argument("coverage requires --p and --n");
  if (opt.reps < 20) throw std::invalid_argument("coverage requires --reps >= 20");
  if ((opt.window + opt.thin - 1) / opt.thin < 100) {
    throw std::invalid_argument("coverage requires at least 100 kept draws per replication");
  }
  ChainConfig prototype;
  prototype.kind = SamplerKind::GibbsClique;
  prototype.norm = make_norm(opt);
  prototype.penalty = PenaltyKind::Clique;
  prototype.burn_in = opt.burn_in;
  prototype.window = opt.window;
  prototype.thin = opt.thin;
  prototype.validate();
  const auto sizes = scenario_sizes(opt);
  std::vector<double> pvalues(opt.reps);
  {
    std::vector<std::thread> workers;
    const long hw = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<long> next{0};
    for (long w = 0; w < std::min<long>(hw, opt.reps); ++w) {
      workers.emplace_back([&] {
        for (long rep = next.fetch_add(1); rep < opt.reps; rep = next.fetch_add(1)) {
          const auto scenario =
              simulate_clique_scenario(sizes, opt.n, opt.corr, opt.seed, kDataBase + rep);
          ChainState init;
          init.model = CliqueModel::singletons(opt.p);
          RngStream rng(opt.seed, 1 + rep);
          const auto trace = run_chain(scenario.obs, prototype, init, rng);
          RngStream sigma_rng(opt.seed, kSigmaDrawBase + 1 + rep);
          std::vector<double> logd;
          logd.reserve(trace.kept.size());
          for (const auto& state : trace.kept) {
            logd.push_back(
                sample_clique_covariance(scenario.obs, *state.model, sigma_rng).log_det());
          }
          pvalues[rep] = one_sided_pvalue(logd, scenario.sigma0.log_det());
        }
      });
    }
    for (auto& w : workers) w.join();
  }

  {
    std::ofstream out(fs::path(opt.out) / "pvalues.csv");
    out.precision(12);
    out << "replication,pvalue\n";
    for (long rep = 0; rep < opt.reps; ++rep) out << rep << ',' << pvalues[rep] << '\n';
  }
  const auto table = qq_coverage(pvalues);
  {
    std::ofstream out(fs::path(opt.out) / "qq_band.csv");
    out.precision(12);
    out << "theoretical,empirical,lower,upper\n";
    for (const auto& row : table.rows) {
      out << row.theoretical << ',' << row.empirical << ',' << row.lower << ',' << row.upper
          << '\n';
    }
  }
  json summary{{"mode", "coverage"},
               {"replications", opt.reps},
               {"ks_distance", table.ks_distance},
               {"band_halfwidth", table.band_halfwidth},
               {"inside_band", table.inside_band}};
  write_json_file((fs::path(opt.out) / "summary.json").string(), summary);
  write_manifest(opt, "coverage");
  return 0;
}

void add_common_options(CLI::App* cmd, Options& opt, std::string& config_path) {
  cmd->add_option("--out", opt.out, "Output directory");
  cmd->add_option("--seed", opt.seed, "Random seed");
  cmd->add_option("--norm", opt.norm, "Inversion norm: l2 or linf");
  cmd->add_option("--linf-cap", opt.linf_cap, "Exact subset enumeration cap (linf)");
  cmd->add_option("--linf-samples", opt.linf_samples, "Monte Carlo subsets when capped (linf)");
  cmd->add_option("--config", config_path, "Key=value config file; flags take precedence");
}

void add_chain_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--chains", opt.chains, "Number of chains");
  cmd->add_option("--burn-in", opt.burn_in, "Burn-in iterations");
  cmd->add_option("--window", opt.window, "Post-burn-in iterations");
  cmd->add_option("--thin", opt.thin, "Keep every thin-th state");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fiducial inference for covariance matrices of zero-mean Gaussian data"};
  app.require_subcommand(1);
  Options opt;
  std::string config_path;
  // Config values act as defaults, so they are applied before flag parsing.
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      config_path = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      config_path = arg.substr(9);
    }
  }
  try {
    if (!config_path.empty()) apply_config_file(config_path, opt);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"type", "config"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  }

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic scenario");
  simulate->add_option("--p", opt.p, "Dimension");
  simulate->add_option("--n", opt.n, "Sample count");
  simulate->add_option("--gen", opt.gen, "Generator: clique or sparse");
  simulate->add_option("--k", opt.k, "Clique count (clique generator)");
  simulate->add_option("--corr", opt.corr, "Intra-clique correlation");
  simulate->add_option("--sizes", opt.sizes, "Comma-separated clique sizes (overrides --k)");
  simulate->add_option("--maxc", opt.maxc, "Column cap (sparse generator)");
  add_common_options(simulate, opt, config_path);

  auto* fit_full = app.add_subcommand("fit-full", "Exact inverse Wishart fit (full model)");
  fit_full->add_option("--input", opt.input, "Observation CSV")->required();
  fit_full->add_option("--window", opt.window, "Number of draws");
  fit_full->add_option("--sigma0", opt.sigma0_path, "True covariance CSV (simulation mode)");
  add_common_options(fit_full, opt, config_path);

  auto* fit_clique = app.add_subcommand("fit-clique", "Gibbs sampling over clique models");
  fit_clique->add_option("--input", opt.input, "Observation CSV")->required();
  fit_clique->add_option("--sigma0", opt.sigma0_path, "True covariance CSV (simulation mode)");
  fit_clique->add_option("--penalty", opt.penalty, "clique (default) or none");
  fit_clique->add_option("--clique-init", opt.clique_init, "random (default) or singletons");
  add_chain_options(fit_clique, opt);
  add_common_options(fit_clique, opt, config_path);

  auto* fit_general = app.add_subcommand("fit-general", "RJMCMC over sparse covariate patterns");
  fit_general->add_option("--input", opt.input, "Observation CSV")->required();
  fit_general->add_option("--maxc", opt.maxc, "Max nonzeros per column");
  fit_general->add_option("--init", opt.init, "SnPa, chol, dcho, diag, or oracle");
  fit_general->add_option("--penalty", opt.penalty, "mdl (default) or none");
  fit_general->add_option("--sigma0", opt.sigma0_path, "True covariance CSV (simulation mode)");
  fit_general->add_option("--a0", opt.a0_path, "True covariate CSV (oracle init)");
  add_chain_options(fit_general, opt);
  add_common_options(fit_general, opt, config_path);

  auto* coverage = app.add_subcommand("coverage", "Repeated-simulation coverage calibration");
  coverage->add_option("--reps", opt.reps, "Number of replications");
  coverage->add_option("--p", opt.p, "Dimension");
  coverage->add_option("--n", opt.n, "Sample count per replication");
  coverage->add_option("--k", opt.k, "Clique count");
  coverage->add_option("--corr", opt.corr, "Intra-clique correlation");
  coverage->add_option("--sizes", opt.sizes, "Comma-separated clique sizes");
  add_chain_options(coverage, opt);
  add_common_options(coverage, opt, config_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << json{{"error", {{"type", "usage"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  }

  try {
    if (simulate->parsed()) return run_simulate(opt);
    if (fit_full->parsed()) return run_fit_full(opt);
    if (fit_clique->parsed()) return run_fit_clique(opt);
    if (fit_general->parsed()) return run_fit_general(opt);
    if (coverage->parsed()) return run_coverage(opt);
    throw std::invalid_argument("no subcommand given");
  } catch (const std::exception& e) {
    std::cerr << json{{"error",
                       {{"type", "runtime"}, {"message", e.what()}}}}.dump()
              << '\n';
    return 1;
  }
}
