import math

import numpy as np
import pytest

import graphwhittle as gw
from graphwhittle.errors import NotPositiveDefiniteError


def test_factorize_identity():
    f = gw.factorize_covariance(np.eye(4))
    assert np.array_equal(f.lower, np.eye(4))
    assert f.jitter == 0.0


def test_factorize_closed_form_2x2():
    k = np.array([[1.0, 0.5], [0.5, 1.0]])
    f = gw.factorize_covariance(k)
    expected = np.array([[1.0, 0.0], [0.5, math.sqrt(0.75)]])
    assert np.allclose(f.lower, expected)


def test_factorize_reference_covariance_no_jitter(chain_host, ar2_family):
    window = np.arange(80, 160)
    k = gw.covariance_matrix(ar2_family.series(0.5), chain_host, window)
    # min eigenvalue >= min of the truncated density minus nothing: check both
    assert np.linalg.eigvalsh(k.values).min() > 0
    f = gw.factorize_covariance(k)
    assert f.jitter == 0.0


def test_factorize_rejects_indefinite():
    k = np.diag([1.0, -1.0])
    with pytest.raises(NotPositiveDefiniteError) as err:
        gw.factorize_covariance(k)
    assert err.value.min_eigenvalue == pytest.approx(-1.0)


def test_factorize_jitter_ladder_on_semidefinite():
    k = np.ones((3, 3))  # rank one, positive semidefinite
    f = gw.factorize_covariance(k)
    assert f.jitter > 0
    assert np.allclose(f.lower @ f.lower.T, k + f.jitter * np.eye(3), atol=1e-12)


def test_seed_replicate_determinism():
    f = gw.factorize_covariance(np.eye(16))
    batch = gw.sample_field(f, seed=42, count=10)
    alone = gw.sample_field(f, seed=42, count=1, first_replicate=7)[0]
    assert np.array_equal(batch[7].values, alone.values)
    other_seed = gw.sample_field(f, seed=43, count=1, first_replicate=7)[0]
    assert not np.array_equal(batch[7].values, other_seed.values)


def test_white_noise_moments():
    f = gw.factorize_covariance(np.eye(32))
    count = 4000
    samples = np.stack([s.values for s in gw.sample_field(f, seed=5, count=count)])
    var = samples.var(axis=0)
    assert np.max(np.abs(var - 1.0)) < 3.0 / math.sqrt(count) * 3
    assert np.max(np.abs(samples.mean(axis=0))) < 3.0 / math.sqrt(count)


def test_empirical_covariance_law_of_large_numbers():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((5, 5))
    k = a @ a.T + np.eye(5)
    f = gw.factorize_covariance(k)
    count = 10_000
    samples = np.stack([s.values for s in gw.sample_field(f, seed=11, count=count)])
    emp = samples.T @ samples / count
    tol = 5.0 * np.abs(k).max() / math.sqrt(count)
    assert np.max(np.abs(emp - k)) < tol


def test_quadratic_form_concentration(chain_host, ar2_family, chain_measure):
    # (1/m) X' Lambda X concentrates on the transfer integral for all three
    # Lambda choices
    window = np.arange(60, 180)
    m = window.size
    theta0, theta = 0.5, 0.3
    k0 = gw.covariance_matrix(ar2_family.series(theta0), chain_host, window)
    factor = gw.factorize_covariance(k0)
    inv = ar2_family.inv_series(theta)
    k_inv = gw.covariance_matrix(inv, chain_host, window).values
    k_theta = gw.covariance_matrix(ar2_family.series(theta), chain_host, window).values
    b = gw.correction_matrix(gw.pair_classes(chain_host, window, radius=2))
    q_inv = gw.unbiased_matrix(k_inv, b)
    f0 = ar2_family.series(theta0)
    f_theta = ar2_family.series(theta)
    cases = [
        (k_inv, gw.integrate(chain_measure, lambda lam: f0(lam) * inv(lam))),
        (np.linalg.inv(k_theta), gw.integrate(chain_measure,
                                              lambda lam: f0(lam) / f_theta(lam))),
        (q_inv, gw.integrate(chain_measure, lambda lam: f0(lam) * inv(lam))),
    ]
    count = 400
    samples = gw.sample_field(factor, seed=21, count=count)
    for lam_mat, target in cases:
        vals = np.array([s.values @ (lam_mat @ s.values) / m for s in samples])
        se = vals.std(ddof=1) / math.sqrt(count)
        assert abs(vals.mean() - target) <= 3 * se


def test_exact_expectation_at_theta0(chain_host, ar2_family):
    # E[(1/m) X' K^{-1} X] = 1 exactly for every window size
    window = np.arange(100, 148)
    k0 = gw.covariance_matrix(ar2_family.series(0.5), chain_host, window)
    factor = gw.factorize_covariance(k0)
    inv_k = np.linalg.inv(k0.values)
    count = 600
    vals = [s.values @ (inv_k @ s.values) / window.size
            for s in gw.sample_field(factor, seed=9, count=count)]
    se = np.std(vals, ddof=1) / math.sqrt(count)
    assert abs(np.mean(vals) - 1.0) <= 3 * se
