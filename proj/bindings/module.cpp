#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fidcov/diagnostics.hpp"
#include "fidcov/samplers.hpp"
#include "fidcov/simulate.hpp"

namespace py = pybind11;
using namespace fidcov;

namespace {

NormChoice norm_from_string(const std::string& name, int cap, int mc) {
  if (name == "l2") return NormChoice::l2();
  if (name == "linf") return NormChoice::linf(cap, mc);
  throw std::invalid_argument("norm must be 'l2' or 'linf'");
}

CovariateMatrix covariate_from_array(const Eigen::MatrixXd& a) {
  return CovariateMatrix::from_matrix(a);
}

py::dict trace_to_dict(const ChainTrace& trace) {
  py::dict out;
  out["burn_in"] = trace.burn_in;
  out["log_density_path"] = trace.log_density_path;
  py::list kept;
  for (const auto& state : trace.kept) {
    py::dict record;
    record["iteration"] = state.iteration;
    record["log_density"] = state.log_density.value;
    if (state.model) record["model"] = state.model->to_string();
    if (state.A) {
      record["A"] = state.A->entries();
      record["pattern"] = state.A->pattern().to_string();
    }
    kept.append(record);
  }
  out["kept"] = kept;
  out["acceptance_rate"] = trace.acceptance_rate;
  out["jump_acceptance_rate"] = trace.jump_acceptance_rate;
  out["final_step_scale"] = trace.final_step_scale;
  return out;
}

}  // namespace

PYBIND11_MODULE(_fidcov, m) {
  m.doc() = "Fiducial inference for covariance matrices of zero-mean Gaussian data";

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream_id") = 0)
      .def("uniform", &RngStream::uniform)
      .def("normal", &RngStream::normal);

  py::class_<CliqueModel>(m, "CliqueModel")
      .def(py::init([](const std::string& text) { return CliqueModel::parse(text); }))
      .def_static("singletons", &CliqueModel::singletons)
      .def_static("single_clique", &CliqueModel::single_clique)
      .def_property_readonly("dim", &CliqueModel::dim)
      .def_property_readonly("count", &CliqueModel::count)
      .def("sizes", &CliqueModel::sizes)
      .def("assignment", &CliqueModel::assignment)
      .def("__str__", &CliqueModel::to_string)
      .def("__eq__", [](const CliqueModel& a, const CliqueModel& b) { return a == b; });

  m.def("sample_covariance",
        [](const Eigen::MatrixXd& rows, bool center) {
          const auto sn = sample_covariance(ObservationSet(rows), center);
          return py::make_tuple(sn.entries, sn.singular);
        },
        py::arg("rows"), py::arg("center") = false,
        "Uncentered sample covariance and its singularity flag");

  m.def("fm_distance",
        [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
          return fm_distance(SpdMatrix(a), SpdMatrix(b));
        },
        "FM-distance between two SPD matrices");

  m.def("eigvec_angle", [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return eigvec_angle(SpdMatrix(a), SpdMatrix(b));
  });

  m.def("log_det", [](const Eigen::MatrixXd& a) { return SpdMatrix(a).log_det(); });

  m.def("restrict_to_model", [](const Eigen::MatrixXd& s, const CliqueModel& model) {
    return restrict_to_model(s, model);
  });

  m.def("is_submodel", &is_submodel);
  m.def("is_compatible",
        [](const CliqueModel& model, const Eigen::MatrixXd& sigma0, double tol) {
          return is_compatible(model, SpdMatrix(sigma0), tol);
        },
        py::arg("model"), py::arg("sigma0"), py::arg("tol") = 1e-12);
  m.def("enumerate_partitions", &enumerate_partitions);

  m.def("log_likelihood", [](const Eigen::MatrixXd& rows, const Eigen::MatrixXd& a) {
    return log_likelihood(ObservationSet(rows), covariate_from_array(a)).value;
  });

  m.def("log_jacobian",
        [](const Eigen::MatrixXd& rows, const Eigen::MatrixXd& a, const std::string& norm,
           int cap, int mc, std::optional<std::uint64_t> seed) {
          const auto choice = norm_from_string(norm, cap, mc);
          const ObservationSet obs(rows);
          const auto cov = covariate_from_array(a);
          if (choice.kind == Norm::LInf && seed) {
            RngStream rng(*seed, 0);
            SubsetPlan plan(obs.n(), choice.mc_samples, rng);
            return log_jacobian(obs, cov, choice, &plan).value;
          }
          return log_jacobian(obs, cov, choice).value;
        },
        py::arg("rows"), py::arg("a"), py::arg("norm") = "l2", py::arg("cap") = 10000,
        py::arg("mc") = 2000, py::arg("seed") = std::nullopt);

  m.def("log_gfd",
        [](const Eigen::MatrixXd& rows, const Eigen::MatrixXd& a, const std::string& norm) {
          return log_gfd(ObservationSet(rows), covariate_from_array(a),
                         norm_from_string(norm, 10000, 2000)).value;
        },
        py::arg("rows"), py::arg("a"), py::arg("norm") = "l2");

  m.def("log_multivariate_gamma", &log_multivariate_gamma);
  m.def("log_normalizing_constant_full",
        [](const Eigen::MatrixXd& rows, const std::string& norm) {
          return log_normalizing_constant_full(ObservationSet(rows),
                                               norm_from_string(norm, 10000, 2000));
        },
        py::arg("rows"), py::arg("norm") = "l2");

  m.def("log_clique_model_gfd",
        [](const Eigen::MatrixXd& rows, const CliqueModel& model, const std::string& norm) {
          return log_clique_model_gfd(ObservationSet(rows), model,
                                      norm_from_string(norm, 10000, 2000)).value;
        },
        py::arg("rows"), py::arg("model"), py::arg("norm") = "l2");

  m.def("log_clique_penalty", &log_clique_penalty);
  m.def("log_mdl_penalty", [](const std::string& pattern_rows, long n, int p) {
    // Pattern given as the free-column string produced by the library.
    std::vector<std::vector<int>> zeros(p);
    std::istringstream stream(pattern_rows);
    std::string row;
    int i = 0;
    while (std::getline(stream, row, ';') && i < p) {
      std::vector<bool> free_col(p, false);
      std::istringstream cells(row);
      int j;
      while (cells >> j) free_col[j - 1] = true;
      for (int c = 0; c < p; ++c) {
        if (!free_col[c]) zeros[i].push_back(c);
      }
      ++i;
    }
    return log_mdl_penalty(SparsityPattern(p, zeros), n);
  });

  m.def("sample_inverse_wishart",
        [](long dof, const Eigen::MatrixXd& scale, RngStream& rng) {
          return sample_inverse_wishart(dof, SpdMatrix(scale), rng).entries();
        });

  m.def("sample_clique_covariance",
        [](const Eigen::MatrixXd& rows, const CliqueModel& model, RngStream& rng) {
          return sample_clique_covariance(ObservationSet(rows), model, rng).entries();
        });

  m.def("run_gibbs_clique",
        [](const Eigen::MatrixXd& rows, long burn_in, long window, long thin, bool penalty,
           std::uint64_t seed, std::uint64_t stream, const std::string& init) {
          ChainConfig config;
          config.kind = SamplerKind::GibbsClique;
          config.penalty = penalty ? PenaltyKind::Clique : PenaltyKind::None;
          config.burn_in = burn_in;
          config.window = window;
          config.thin = thin;
          const ObservationSet obs(rows);
          ChainState state;
          state.model = init.empty() ? CliqueModel::singletons(obs.p())
                                     : CliqueModel::parse(init);
          RngStream rng(seed, stream);
          return trace_to_dict(run_chain(obs, config, state, rng));
        },
        py::arg("rows"), py::arg("burn_in") = 1000, py::arg("window") = 3000,
        py::arg("thin") = 1, py::arg("penalty") = true, py::arg("seed") = 0,
        py::arg("stream") = 1, py::arg("init") = "");

  m.def("run_mh_fixed",
        [](const Eigen::MatrixXd& rows, const Eigen::MatrixXd& a0, long burn_in, long window,
           long thin, std::uint64_t seed, std::uint64_t stream) {
          ChainConfig config;
          config.kind = SamplerKind::MhFixedPattern;
          config.penalty = PenaltyKind::None;
          config.burn_in = burn_in;
          config.window = window;
          config.thin = thin;
          const ObservationSet obs(rows);
          ChainState state;
          state.A = covariate_from_array(a0);
          RngStream rng(seed, stream);
          return trace_to_dict(run_chain(obs, config, state, rng));
        },
        py::arg("rows"), py::arg("a0"), py::arg("burn_in") = 5000, py::arg("window") = 10000,
        py::arg("thin") = 1, py::arg("seed") = 0, py::arg("stream") = 1);

  m.def("run_rjmcmc",
        [](const Eigen::MatrixXd& rows, const Eigen::MatrixXd& a0, int max_col, long burn_in,
           long window, long thin, std::uint64_t seed, std::uint64_t stream) {
          ChainConfig config;
          config.kind = SamplerKind::Rjmcmc;
          config.penalty = PenaltyKind::Mdl;
          config.max_col = max_col;
          config.burn_in = burn_in;
          config.window = window;
          config.thin = thin;
          const ObservationSet obs(rows);
          ChainState state;
          state.A = covariate_from_array(a0);
          RngStream rng(seed, stream);
          return trace_to_dict(run_chain(obs, config, state, rng));
        },
        py::arg("rows"), py::arg("a0"), py::arg("max_col"), py::arg("burn_in") = 5000,
        py::arg("window") = 10000, py::arg("thin") = 1, py::arg("seed") = 0,
        py::arg("stream") = 1);

  m.def("initial_covariate",
        [](const std::string& kind, const Eigen::MatrixXd& rows, int max_col) {
          return initial_covariate(parse_init_kind(kind), ObservationSet(rows), max_col)
              .entries();
        },
        py::arg("kind"), py::arg("rows"), py::arg("max_col") = 0);

  m.def("co_membership", [](const std::vector<std::string>& models) {
    std::vector<CliqueModel> parsed;
    parsed.reserve(models.size());
    for (const auto& text : models) parsed.push_back(CliqueModel::parse(text));
    return co_membership(parsed).entries();
  });

  m.def("one_sided_pvalue", &one_sided_pvalue);
  m.def("ks_uniform", &ks_uniform);
  m.def("ess", &ess);

  m.def("simulate_clique_scenario",
        [](const std::vector<int>& sizes, long n, double corr, std::uint64_t seed,
           std::uint64_t stream) {
          const auto scenario = simulate_clique_scenario(sizes, n, corr, seed, stream);
          py::dict out;
          out["obs"] = scenario.obs.rows();
          out["sigma0"] = scenario.sigma0.entries();
          out["a0"] = scenario.a0.entries();
          out["model0"] = scenario.model0->to_string();
          return out;
        },
        py::arg("sizes"), py::arg("n"), py::arg("corr"), py::arg("seed"),
        py::arg("stream") = 0);

  m.def("simulate_sparse_scenario",
        [](int p, long n, int max_col, std::uint64_t seed, std::uint64_t stream) {
          const auto scenario = simulate_sparse_scenario(p, n, max_col, seed, stream);
          py::dict out;
          out["obs"] = scenario.obs.rows();
          out["sigma0"] = scenario.sigma0.entries();
          out["a0"] = scenario.a0.entries();
          return out;
        },
        py::arg("p"), py::arg("n"), py::arg("max_col"), py::arg("seed"),
        py::arg("stream") = 0);

  m.attr("__version__") = "0.1.0";
}
