"""K-functional and interpolation quasi-norms against brute-force scans."""

import math

import numpy as np
import pytest

from fracbesov import reference as ref
from fracbesov.interpolation import CoupleSpec, interpolation_norm, k_functional
from fracbesov.operators import NormKind, OperatorHandle

DIAG14 = OperatorHandle.diagonal([1.0, 4.0])
ONES2 = np.array([1.0, 1.0], dtype=complex)


def test_couple_validation():
    with pytest.raises(ValueError):
        CoupleSpec(DIAG14, -0.5, 0.5, 2.0)
    with pytest.raises(ValueError):
        CoupleSpec(DIAG14, 1.0, 1.5, 2.0)
    with pytest.raises(ValueError, match="injective"):
        k_functional(CoupleSpec(OperatorHandle.diagonal([0.0, 1.0]), 1.0, 0.5, 2.0),
                     1.0, ONES2)


def test_scalar_minimization():
    # A = [2], alpha = 1, t = 1: min_y |1-y| + 2|y| = 1 attained at y = 0
    c = CoupleSpec(OperatorHandle.diagonal([2.0]), 1.0, 0.5, 2.0)
    assert k_functional(c, 1.0, np.array([1.0 + 0j]), validate=True) == \
        pytest.approx(1.0, abs=1e-12)


def test_endpoint_behavior():
    c = CoupleSpec(DIAG14, 1.0, 0.5, 2.0)
    x = np.array([1.0, 0.0], dtype=complex)
    k_big = k_functional(c, 1e8, x)
    assert 1.0 - 1e-6 <= k_big <= 1.0 + 1e-12
    k_small = k_functional(c, 1e-8, x)
    assert k_small / 1e-8 == pytest.approx(1.0, rel=1e-5)   # ||A x|| = 1


def test_matches_reference_scan():
    rng = np.random.default_rng(0)
    c = CoupleSpec(DIAG14, 1.0, 0.5, 2.0)
    for t in (0.01, 0.3, 1.0, 7.0, 40.0):
        x = rng.normal(size=2) + 1j * rng.normal(size=2)
        got = k_functional(c, t, x, validate=True)
        want = ref.k_functional([1.0, 4.0], x, 1.0, t, n_mu=4000)
        assert got <= want * (1 + 1e-9)           # ours refines the scan
        assert got == pytest.approx(want, rel=1e-5)


def test_k_monotone_concave_and_dominated():
    rng = np.random.default_rng(1)
    x = rng.normal(size=2) + 1j * rng.normal(size=2)
    c = CoupleSpec(DIAG14, 0.7, 0.5, 2.0)
    ts = np.geomspace(1e-4, 1e4, 41)
    ks = np.array([k_functional(c, float(t), x) for t in ts])
    assert np.all(np.diff(ks) >= -1e-12)               # nondecreasing
    nx = np.linalg.norm(x)
    from fracbesov.fractional import spectral_frac_power
    ncx = np.linalg.norm(spectral_frac_power(DIAG14, 0.7, x))
    assert np.all(ks <= np.minimum(nx, ts * ncx) * (1 + 1e-12))
    # concavity on the linear t-scale, sampled triples
    for i in range(1, len(ts) - 1):
        t_mid = 0.5 * (ts[i - 1] + ts[i + 1])
        k_mid = k_functional(c, float(t_mid), x)
        chord = 0.5 * (ks[i - 1] + ks[i + 1])
        assert k_mid >= chord * (1 - 1e-9)


def test_k_is_quasi_norm_in_x():
    rng = np.random.default_rng(2)
    c = CoupleSpec(DIAG14, 1.0, 0.5, 2.0)
    t = 0.8
    for _ in range(20):
        x = rng.normal(size=2) + 1j * rng.normal(size=2)
        y = rng.normal(size=2) + 1j * rng.normal(size=2)
        kx = k_functional(c, t, x)
        ky = k_functional(c, t, y)
        kxy = k_functional(c, t, x + y)
        assert kxy <= (kx + ky) * (1 + 1e-9)
        assert k_functional(c, t, 3.0 * x) == pytest.approx(3.0 * kx, rel=1e-9)


def test_k_requires_euclidean():
    c = CoupleSpec(DIAG14, 1.0, 0.5, 2.0)
    with pytest.raises(ValueError, match="euclidean"):
        k_functional(c, 1.0, ONES2, norm=NormKind("p", p=1.0))


def test_interpolation_norm_zero_and_scaling():
    c = CoupleSpec(DIAG14, 1.0, 0.5, 2.0)
    assert interpolation_norm(c, np.zeros(2, dtype=complex)).value == 0.0
    rng = np.random.default_rng(3)
    x = rng.normal(size=2) + 1j * rng.normal(size=2)
    v1 = interpolation_norm(c, x).value
    v3 = interpolation_norm(c, 3.0 * x).value
    assert v3 == pytest.approx(3.0 * v1, rel=1e-9)


def test_interpolation_norm_against_brute_grid():
    c = CoupleSpec(DIAG14, 1.0, 0.5, 2.0)
    got = interpolation_norm(c, ONES2).value
    want = ref.interpolation_norm([1.0, 4.0], ONES2, 1.0, 0.5, 2.0,
                                  n_t=2000, n_mu=2000)
    assert got == pytest.approx(want, rel=1e-4)


def test_interpolation_norm_sup_variant():
    c = CoupleSpec(DIAG14, 1.0, 0.4, math.inf)
    got = interpolation_norm(c, ONES2).value
    want = ref.interpolation_norm([1.0, 4.0], ONES2, 1.0, 0.4, math.inf,
                                  n_t=4000, n_mu=2000)
    assert got == pytest.approx(want, rel=1e-4)


def test_dense_couple_route():
    # non-normal operator: the couple diagonalizes (A^a)^H (A^a) internally
    m = np.array([[1.0, 0.6], [0.0, 2.0]])
    h = OperatorHandle.dense(m)
    c = CoupleSpec(h, 1.0, 0.5, 2.0)
    x = np.array([1.0, -0.5], dtype=complex)
    got = k_functional(c, 0.7, x, validate=True)
    # brute scan over the same minimizer curve built from dense matrices
    best = min(np.linalg.norm(x), 0.7 * np.linalg.norm(m @ x))
    b = m.conj().T @ m
    for mu in np.geomspace(1e-12, 1e12, 4001):
        y = np.linalg.solve(np.eye(2) + mu * b, x)
        best = min(best, np.linalg.norm(x - y) + 0.7 * np.linalg.norm(m @ y))
    assert got == pytest.approx(best, rel=1e-6)
