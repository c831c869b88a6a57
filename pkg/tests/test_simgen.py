import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rstc import ConfigError, ContractError, NumericError
from rstc.simgen import (DEFAULT_REGION, SimConfig, _jittered_cholesky, eigenfunctions,
                         generate_scenario, gibbs_mrf_labels, knn_neighbors, load_sites,
                         mean_function, outlier_curve, rule_labels, rule_scores,
                         sample_gp_effects, uniform_sites)


def test_mean_functions():
    assert mean_function(1, 0.0) == pytest.approx(1.8)
    assert mean_function(2, 1.0) == pytest.approx(-1.0)
    assert mean_function(1, 1.0) == pytest.approx(-1.8)
    with pytest.raises(ContractError):
        mean_function(3, 0.5)


def test_eigenfunctions():
    assert eigenfunctions(1, 0.25) == pytest.approx(math.sqrt(2))
    assert eigenfunctions(2, 0.0) == 0.0 and eigenfunctions(2, 1.0) == 0.0
    assert eigenfunctions(2, 2 / 3) == pytest.approx(4 / 9, abs=1e-15)
    with pytest.raises(ContractError):
        eigenfunctions(0, 0.5)


def test_bundled_sites():
    s = load_sites()
    lo0, lo1, la0, la1 = DEFAULT_REGION
    assert s.shape == (156, 2)
    assert np.all((s[:, 0] >= lo0) & (s[:, 0] <= lo1) & (s[:, 1] >= la0) & (s[:, 1] <= la1))


def test_site_file(tmp_path):
    p = tmp_path / "sites.txt"
    p.write_text("# lon lat\n110 30\n111.5 31\n")
    np.testing.assert_array_equal(load_sites(str(p)), [[110, 30], [111.5, 31]])
    p.write_text("110 abc\n")
    with pytest.raises(ConfigError):
        load_sites(str(p))


def test_knn_neighbors_excludes_self():
    pts = np.array([[0, 0], [1, 0], [0, 1], [5, 5], [5, 6], [0, 0]], float)
    nb = knn_neighbors(pts, 4)
    assert nb.shape == (6, 4)
    assert all(i not in nb[i] for i in range(6))


def _agreement(z, nbrs):
    return np.mean(z[:, None] == z[nbrs])


def test_gibbs_nu_zero_is_iid():
    r = np.random.default_rng(0)
    pts = uniform_sites(1000, DEFAULT_REGION, r)
    z = gibbs_mrf_labels(pts, nu=0.0, K=2, sweeps=5, seed=1).labels
    sd = math.sqrt(1000 * 0.25)
    assert abs(np.sum(z == 1) - 500) <= 3 * sd


def test_gibbs_strong_coupling():
    pts = load_sites()
    z = gibbs_mrf_labels(pts, nu=5.0, K=2, sweeps=200, seed=3).labels
    assert _agreement(z, knn_neighbors(pts)) >= 0.9


@settings(max_examples=10, deadline=None)
@given(st.floats(0, 3), st.integers(1, 3), st.integers(0, 1000))
def test_gibbs_label_range_and_determinism(nu, K, seed):
    pts = load_sites()[:40]
    a = gibbs_mrf_labels(pts, nu, K, 3, seed).labels
    b = gibbs_mrf_labels(pts, nu, K, 3, seed).labels
    assert set(a) <= set(range(1, K + 1))
    np.testing.assert_array_equal(a, b)


def test_gibbs_requires_sweep():
    with pytest.raises(ContractError):
        gibbs_mrf_labels(load_sites(), sweeps=0)


def test_mrf_autocorrelation_over_seeds():
    pts = load_sites()
    nb = knn_neighbors(pts)
    fr = [_agreement(gibbs_mrf_labels(pts, 0.5, 2, 100, s).labels, nb) for s in range(50)]
    assert np.mean(fr) > 0.5


@pytest.mark.parametrize("beta", [0.3, 0.45, 0.7])
def test_rule_quantile_count(beta):
    pts = load_sites()
    z = rule_labels(pts, params=(0.4, 0.2, beta)).labels
    s = rule_scores(pts, 0.4, 0.2)
    cut = np.sort(s)[math.ceil(beta * 156) - 1]
    assert np.sum(z == 2) == np.sum(s > cut) == 156 - math.ceil(beta * 156)


def test_rule_degenerate_and_range():
    pts = load_sites()
    np.testing.assert_array_equal(rule_labels(pts, params=(0.0, 0.0, 0.5)).labels, 1)
    for seed in range(10):
        assert set(rule_labels(pts, seed).labels) <= {1, 2}


def test_gp_zero_variance_and_coincident():
    pts = np.array([[110, 30], [110, 30], [112, 33]], float)
    np.testing.assert_array_equal(sample_gp_effects(pts, 0.0, 1.0, 0), 0.0)
    for s in range(20):
        g = sample_gp_effects(pts, 3.0, 1.0, s)
        assert g[0] == g[1]


def test_gp_empirical_covariance():
    pts = np.array([[0.0, 0.0], [0.5, 0.0], [0.0, 1.5]])
    target = 2.0 * np.exp(-np.linalg.norm(pts[:, None] - pts[None], axis=-1) / 1.0)
    r = np.random.default_rng(42)
    draws = np.array([sample_gp_effects(pts, 2.0, 1.0, r) for _ in range(20000)])
    emp = draws.T @ draws / len(draws)
    np.testing.assert_allclose(emp, target, rtol=0.05)


def test_gp_errors():
    with pytest.raises(ContractError):
        sample_gp_effects([[0, 0]], -1.0, 1.0)
    with pytest.raises(NumericError):
        _jittered_cholesky(np.array([[1.0, 0.0], [0.0, -1.0]]))
    # near-singular matrix recovers with jitter
    L = _jittered_cholesky(np.ones((3, 3)))
    np.testing.assert_allclose(L @ L.T, np.ones((3, 3)), atol=1e-3)


def test_outlier_curve():
    t = np.arange(1, 31) / 30
    y = outlier_curve(t, 1.0, 0.0)
    np.testing.assert_allclose(y, 3 * np.exp(np.cos(np.pi * t)))
    assert y.min() == pytest.approx(3 / math.e)
    assert np.argmin(y) == 29


def test_noiseless_scenario_equals_means():
    ds, truth = generate_scenario(SimConfig(sigma_gamma=(0, 0), sigma_eps=0.0, seed=4))
    for i in range(len(ds)):
        np.testing.assert_array_equal(ds.curves[i], truth.true_means[int(truth.labels[i])])


def test_scenario_sizes_and_bookkeeping():
    ds, truth = generate_scenario(SimConfig(scenario="rule", n_outliers=15, seed=1))
    assert len(ds) == 171 and ds.curves.shape == (171, 30)
    assert truth.outlier_flags.sum() == 15 and np.all(truth.labels[156:] == 0)
    assert set(truth.labels[:156]) <= {1, 2}
    assert len(truth.inlier_partition()) == 156
    assert ds.ids[0] == "s001" and ds.ids[-1] == "o015"
    assert np.all(np.isfinite(ds.curves))
    lo0, lo1, la0, la1 = DEFAULT_REGION
    out = ds.locations[156:]
    assert np.all((out[:, 0] >= lo0) & (out[:, 0] <= lo1) & (out[:, 1] >= la0) & (out[:, 1] <= la1))


def test_scenario_deterministic():
    cfg = SimConfig(scenario="rule", n_outliers=15, seed=77)
    a, ta = generate_scenario(cfg)
    b, tb = generate_scenario(cfg)
    assert np.array_equal(a.curves, b.curves) and np.array_equal(ta.labels, tb.labels)
    c, _ = generate_scenario(SimConfig(scenario="rule", n_outliers=15, seed=78))
    assert not np.array_equal(a.curves, c.curves)


def test_uniform_sites_option():
    ds, _ = generate_scenario(SimConfig(n=30, sites=None, seed=2, gibbs_sweeps=5))
    assert len(ds) == 30


def test_outliers_dominate_in_magnitude():
    inl, out = [], []
    for s in range(50):
        ds, truth = generate_scenario(SimConfig(scenario="rule", n_outliers=15, seed=s))
        sup = np.abs(ds.curves).max(axis=1)
        inl.append(sup[~truth.outlier_flags].mean())
        out.append(sup[truth.outlier_flags].mean())
    assert np.mean(out) > np.mean(inl)


@pytest.mark.parametrize("kw", [dict(n=1), dict(scenario="grid"), dict(K=3), dict(phi=0),
                                dict(sigma_gamma=(-1, 2)), dict(sigma_eps=-0.1),
                                dict(n_outliers=-1), dict(region=(125, 107, 28, 43)),
                                dict(grid=(0.5, 0.2)), dict(scenario="rule", K=1)])
def test_config_rejects(kw):
    with pytest.raises(ConfigError):
        SimConfig(**kw)


def test_site_count_mismatch():
    with pytest.raises(ConfigError):
        generate_scenario(SimConfig(n=100))
