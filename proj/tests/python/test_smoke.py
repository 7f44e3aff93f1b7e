import json

import numpy as np
import pytest

import corrlasso


def project_l1_reference(v, radius):
    if np.sum(np.abs(v)) <= radius:
        return v.copy()
    u = np.sort(np.abs(v))[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, len(v) + 1)
    valid = u - (css - radius) / ks > 0
    k = ks[valid][-1]
    tau = (css[k - 1] - radius) / k
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def test_projection_matches_reference():
    rng = np.random.default_rng(7)
    for _ in range(200):
        p = rng.integers(1, 8)
        v = rng.normal(size=p) * 2.0
        radius = rng.uniform(0.1, 3.0)
        got = corrlasso.project_l1(v, radius)
        ref = project_l1_reference(v, radius)
        assert np.max(np.abs(got - ref)) < 1e-10
        assert np.sum(np.abs(got)) <= radius + 1e-9


def test_prox_reduces_to_soft_threshold_inside_ball():
    v = np.array([2.0, -1.0, 0.2])
    got = corrlasso.prox_l1_in_ball(v, 0.5, 100.0)
    ref = np.sign(v) * np.maximum(np.abs(v) - 0.5, 0.0)
    assert np.allclose(got, ref, atol=1e-12)


def test_additive_recovery():
    cfg = {
        "n": 400,
        "p": 32,
        "k": 4,
        "mode": "iid",
        "sigma_eps": 0.3,
        "sigma_w": 0.2,
        "seed": 11,
    }
    inst = corrlasso.make_dataset(json.dumps(cfg))
    sigma_w = 0.04 * np.eye(32)
    cov, cross = corrlasso.additive_pair(inst["z"], inst["y"], sigma_w)
    beta_hat = corrlasso.solve_constrained(
        cov, cross, radius=np.sum(np.abs(inst["beta"]))
    )
    err = np.linalg.norm(beta_hat - inst["beta"])
    assert err < 0.35
    naive_cov, naive_cross = corrlasso.lasso_pair(inst["z"], inst["y"])
    naive = corrlasso.solve_constrained(
        naive_cov, naive_cross, radius=np.sum(np.abs(inst["beta"]))
    )
    assert err < np.linalg.norm(naive - inst["beta"])


def test_dataset_determinism():
    cfg = json.dumps({"n": 50, "p": 8, "k": 2, "sigma_eps": 0.5, "rho": 0.2,
                      "seed": 99})
    a = corrlasso.make_dataset(cfg)
    b = corrlasso.make_dataset(cfg)
    assert np.array_equal(a["z"], b["z"])
    assert np.array_equal(a["y"], b["y"])
    assert np.array_equal(a["mask"], b["mask"])
    assert a["seed"] == b["seed"]


def test_precision_population_identity():
    rng = np.random.default_rng(5)
    p = 4
    a = rng.normal(size=(p, p))
    sigma = a @ a.T / p + 0.5 * np.eye(p)
    sigma /= np.linalg.norm(sigma, 2)
    theta = np.linalg.inv(sigma)
    el = np.linalg.cholesky(sigma)
    z = np.sqrt(p) * el.T
    out = corrlasso.estimate_precision(
        z, kind="none", truth=theta, tol=1e-14, max_iter=200000
    )
    assert out["used_lp"]
    assert np.max(np.abs(out["theta"] - theta)) < 1e-7


def test_stationary_covariance_fixed_point():
    a = np.array([[0.5, 0.1], [0.0, 0.4]])
    q = np.eye(2)
    s = corrlasso.stationary_covariance(a, q)
    assert np.max(np.abs(a @ s @ a.T + q - s)) < 1e-10


def test_missing_pair_rejects_bad_rates():
    z = np.zeros((4, 2))
    y = np.zeros(4)
    with pytest.raises(Exception):
        corrlasso.missing_pair(z, y, np.array([0.5, 1.0]))
