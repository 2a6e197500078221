import itertools
import json

import numpy as np
import pytest

import rcdvs


def psd(n, rank=None, seed=0):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, rank or n))
    return g @ g.T


def test_volume_probabilities_match_minors():
    b = psd(5, seed=1)
    for tau in (1, 2, 3):
        subsets, probs = rcdvs.volume_probabilities(b, tau)
        dets = [np.linalg.det(b[np.ix_(s, s)]) for s in itertools.combinations(range(5), tau)]
        assert [tuple(s) for s in subsets] == list(itertools.combinations(range(5), tau))
        np.testing.assert_allclose(probs, np.array(dets) / sum(dets), rtol=1e-10)


def test_sampler_frequencies():
    b = psd(4, seed=2)
    subsets, probs = rcdvs.volume_probabilities(b, 2)
    draws = rcdvs.volume_sample(b, 2, 40000, seed=3)
    counts = {tuple(s): 0 for s in subsets}
    for s in draws:
        counts[tuple(s)] += 1
    freq = np.array([counts[tuple(s)] for s in subsets]) / len(draws)
    assert 0.5 * np.abs(freq - probs).sum() < 0.02
    pairs = rcdvs.sparse2_sample(b, 40000, seed=4)
    counts = {tuple(s): 0 for s in subsets}
    for i, j in pairs:
        counts[(i, j)] += 1
    freq = np.array([counts[tuple(s)] for s in subsets]) / len(pairs)
    assert 0.5 * np.abs(freq - probs).sum() < 0.02


def test_theory_helpers():
    assert rcdvs.elementary_symmetric([1, 2, 3], 2) == pytest.approx(11.0)
    b = psd(6, seed=5)
    lam = np.linalg.eigvalsh(b)
    assert rcdvs.sum_principal_minors(b, 3) == pytest.approx(rcdvs.elementary_symmetric(list(lam), 3), rel=1e-9)
    m, ev = rcdvs.b_tau(b, 6)
    np.testing.assert_allclose(m, b, atol=1e-8 * np.abs(b).max())
    assert rcdvs.acceleration_ratio(list(lam), 1, 1) == pytest.approx(1.0)
    e = rcdvs.expected_step_matrix(b, 1)
    np.testing.assert_allclose(e, np.eye(6) / np.trace(b), atol=1e-12)


def test_objectives_and_solve():
    a = psd(8, seed=6) + np.eye(8)
    rhs = np.ones(8)
    f = rcdvs.quadratic(a, rhs)
    x_star = np.linalg.solve(a, rhs)
    f_star = -0.5 * rhs @ x_star
    assert f.value(x_star) == pytest.approx(f_star)
    np.testing.assert_allclose(f.gradient(x_star), 0, atol=1e-9)
    rep = rcdvs.solve(f, method="RCDVS", tau=8, max_iterations=5, seed=1)
    assert rep["final_value"] == pytest.approx(f_star, abs=1e-9)
    rep = rcdvs.solve(f, method="RCD", tau=1, max_iterations=20000, epsilon=1e-6, f_star=f_star, seed=2,
                      trace_every=100)
    assert rep["reached_target"]
    assert all(np.diff(rep["trace_values"]) <= 1e-12)


def test_separable_and_ridge():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((20, 5))
    y = np.sign(rng.standard_normal(20))
    f = rcdvs.ridge(rcdvs.separable(a, y, "logistic"), 1.0)
    x = rng.standard_normal(5)
    want = np.sum(np.log1p(np.exp(-y * (a @ x)))) + 0.5 * x @ x
    assert f.value(x) == pytest.approx(want, rel=1e-12)
    assert f.dimension == 5


def test_generators_and_experiment():
    p = rcdvs.gen_quadratic(30, seed=1)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(p["curvature"])), np.sort(p["spectrum"]), rtol=1e-9)
    h = rcdvs.gen_huber(10, m=12, seed=2)
    assert h["curvature"].shape == (10, 10)
    table = rcdvs.experiment_table(n=30, methods=["RCD:1", "RCDVS:2"], repetitions=2, seed=3, timing=False)
    assert isinstance(table, (dict, list))
    assert "method" in json.dumps(table)


def test_errors_carry_kind():
    with pytest.raises(rcdvs.Error) as info:
        rcdvs.solve(rcdvs.quadratic(np.eye(3), np.ones(3)), tau=0)
    assert info.value.kind == "Config"
    with pytest.raises(rcdvs.Error):
        rcdvs.separable(np.eye(2), np.ones(2), "nope")
