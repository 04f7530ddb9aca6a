"""Smoke tests for the python module."""

import math

import numpy as np
import pytest

try:
    import fidcov as m
except ImportError:  # in-tree: the extension sits on PYTHONPATH directly
    import _fidcov as m


def test_fm_distance_analytic():
    eye = np.eye(2)
    assert m.fm_distance(eye, eye) == pytest.approx(0.0)
    assert m.fm_distance(2 * eye, eye) == pytest.approx(math.sqrt(2) * math.log(2))


def test_sample_covariance_uncentered():
    rows = np.array([[1.0, 0.0], [0.0, 1.0]])
    sn, singular = m.sample_covariance(rows)
    assert not singular
    np.testing.assert_allclose(sn, 0.5 * np.eye(2))


def test_partitions_and_penalties():
    assert len(m.enumerate_partitions(4)) == 15
    model = m.CliqueModel("1 2|3")
    assert str(model) == "1 2|3"
    assert model.sizes() == [2, 1]
    assert m.log_clique_penalty(m.CliqueModel("1 2"), 100) == pytest.approx(math.log(4 / 100))
    singles = m.CliqueModel.singletons(4)
    assert m.log_clique_penalty(singles, 100) == pytest.approx(-math.log(100))


def test_restrict_and_compatibility():
    sigma = np.array([[1.0, 0.5], [0.5, 1.0]])
    restricted = m.restrict_to_model(sigma, m.CliqueModel.singletons(2))
    np.testing.assert_allclose(restricted, np.eye(2))
    assert m.is_compatible(m.CliqueModel.singletons(2), np.eye(2))
    assert not m.is_compatible(m.CliqueModel.singletons(2), sigma)


def test_scalar_gfd_values():
    obs = np.array([[3.0], [4.0]])
    a = np.array([[1.0]])
    assert m.log_jacobian(obs, a, "l2") == pytest.approx(math.log(math.sqrt(12.5)))
    assert m.log_jacobian(obs, a, "linf") == pytest.approx(math.log(3.5))
    assert m.log_likelihood(np.array([[0.0]]), a) == pytest.approx(-0.5 * math.log(2 * math.pi))


def test_inverse_wishart_mean():
    rng = m.RngStream(7, 0)
    scale = np.array([[5.0]])
    draws = [m.sample_inverse_wishart(10, scale, rng)[0, 0] for _ in range(20000)]
    assert np.mean(draws) == pytest.approx(5.0 / 8.0, rel=0.05)


def test_gibbs_chain_recovers_cliques_and_is_deterministic():
    scenario = m.simulate_clique_scenario([3, 3], 500, 0.5, seed=42)
    trace_a = m.run_gibbs_clique(scenario["obs"], burn_in=100, window=200, seed=9, stream=1)
    trace_b = m.run_gibbs_clique(scenario["obs"], burn_in=100, window=200, seed=9, stream=1)
    assert trace_a["log_density_path"] == trace_b["log_density_path"]
    models = [record["model"] for record in trace_a["kept"]]
    modal = max(set(models), key=models.count)
    assert modal == scenario["model0"]
    membership = m.co_membership(models)
    assert membership.shape == (6, 6)
    assert membership[0, 1] > 0.9
    assert membership[0, 5] < 0.1


def test_rjmcmc_runs_and_reports_acceptance():
    scenario = m.simulate_sparse_scenario(5, 60, 2, seed=11)
    a0 = m.initial_covariate("diag", scenario["obs"])
    trace = m.run_rjmcmc(scenario["obs"], a0, max_col=2, burn_in=300, window=300, seed=3)
    assert len(trace["kept"]) == 300
    assert 0.0 <= trace["acceptance_rate"] <= 1.0
    sigma = trace["kept"][-1]["A"] @ trace["kept"][-1]["A"].T
    assert np.all(np.isfinite(sigma))


def test_diagnostics_helpers():
    pvals = [(i + 0.5) / 100 for i in range(100)]
    assert m.ks_uniform(pvals) < 0.01
    assert m.one_sided_pvalue(list(np.arange(200.0)), -1.0) == 0.0
    assert m.log_multivariate_gamma(2, 1.5) == pytest.approx(math.log(math.pi / 2))
