import json
import math

import numpy as np
import pytest

import kqlearn as kq


def test_kernel_values_and_gram():
    k = kq.Kernel.squared_exponential(1.0)
    assert k(np.zeros(2), np.array([0.6, 0.8])) == pytest.approx(math.exp(-0.5), abs=1e-15)
    pts = np.random.default_rng(0).random((12, 2))
    g = kq.Kernel.matern(1.5, 0.3).gram(pts)
    assert g.shape == (12, 12)
    assert np.allclose(g, g.T)
    assert np.linalg.eigvalsh(g).min() > -1e-10
    assert kq.Kernel.from_json(k.to_json()).to_json() == k.to_json()
    with pytest.raises(ValueError):
        kq.Kernel.matern(2.0)


def test_regression_matches_numpy():
    rng = np.random.default_rng(1)
    k = kq.Kernel.squared_exponential(0.3)
    pts = rng.random((9, 2))
    y = rng.normal(size=9)
    model = kq.fit(k, pts, y, lam=0.7)
    z = rng.random(2)
    kv = k.cross_gram(z[None, :], pts)[0]
    a = k.gram(pts) + 0.49 * np.eye(9)
    assert model.predict(z) == pytest.approx(kv @ np.linalg.solve(a, y), abs=1e-10)
    var = 1.0 - kv @ np.linalg.solve(a, kv)
    assert model.posterior_std(z) == pytest.approx(math.sqrt(var), abs=1e-10)


def test_greedy_design_and_gain():
    grid = np.array([[0.0], [0.5], [1.0]])
    k = kq.Kernel.squared_exponential(0.2)
    tr = kq.build_max_uncertainty_set(k, grid, 2, 1.0)
    assert tr.selected == [0, 2]
    assert kq.info_gain(k, grid[:1], 1.0) == pytest.approx(0.5 * math.log(2), abs=1e-15)
    assert kq.verify_uncertainty_sum(tr, k, grid, 1.0)["holds"]


def test_mdp_round_trip_and_oracles():
    k = kq.Kernel.squared_exponential(0.2)
    mdp = kq.build_rkhs_mdp(k, n_states=6, n_actions=2, d=2, gamma=0.7, seed=3)
    assert mdp.transition.shape == (6, 2, 6)
    assert np.allclose(mdp.transition.sum(axis=2), 1.0, atol=1e-12)
    back = kq.FiniteMdp.from_json(mdp.to_json())
    assert np.array_equal(back.transition, mdp.transition)
    v, q = kq.value_iteration(mdp, 1e-10)
    pi = kq.greedy_policy(q)
    assert np.max(np.abs(kq.policy_value(mdp, pi, 1e-10) - v)) <= 2e-10
    with pytest.raises(ValueError):
        kq.FiniteMdp(np.full((1, 1, 1), 0.5), np.zeros((1, 1)), 0.5, np.zeros((1, 1)))


def test_run_accounting_and_determinism():
    k = kq.Kernel.squared_exponential(0.2)
    mdp = kq.build_rkhs_mdp(k, n_states=8, n_actions=3, gamma=0.8, seed=1)
    cfg = kq.Config(J=20, L=6, gamma=0.8, seed=5)
    a, b = kq.run(mdp, k, cfg), kq.run(mdp, k, cfg)
    assert a.samples_used == 120
    assert a.policy == b.policy
    assert np.array_equal(a.weights, b.weights)
    assert len(a.y_history) == 7
    for y in a.y_history:
        assert y.min() >= 0.0 and y.max() <= 5.0
    assert a.policy == kq.greedy_policy(a.q)
    assert a.theorem1_bound > 0


def test_sweep_and_slope():
    config = {
        "mdp": {"n_states": 6, "n_actions": 2, "d": 2, "gamma": 0.7},
        "kernel": {"kind": "se", "lengthscale": 0.2},
        "n_values": [20, 40, 80, 160],
        "split": {"rule": "explicit", "pairs": [[4, 5], [8, 5], [16, 5], [32, 5]]},
        "seeds": [0, 1],
    }
    recs = kq.sweep(config)
    assert len(recs) == 8
    assert all(r["error"] == "" and r["samples_used"] == r["J"] * r["L"] for r in recs)
    assert recs == kq.sweep(json.loads(json.dumps(config)))
    synthetic = [{"N": n, "measured_error": n ** -0.5} for n in (100, 400, 1600, 6400)]
    assert kq.fit_loglog_slope(synthetic) == pytest.approx(-0.5, abs=1e-9)


def test_helpers():
    assert kq.suggest_jl(0.1, 0.5)[1] == 11
    assert kq.confidence_width(1, 1, 1, 100, 0.05) == pytest.approx(5.072849037247030, abs=1e-12)
    assert kq.validate("krr")["all_passed"]
    with pytest.raises(ValueError):
        kq.validate("nope")
