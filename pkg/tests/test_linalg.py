"""Jacobi SVD / symmetric eig against numpy's LAPACK-backed oracles."""

import numpy as np
import pytest

from boundaryscope.errors import (
    NonFiniteError,
    NotSymmetricError,
    ShapeMismatchError,
)
from boundaryscope.linalg import as_matrix, numerical_rank, svd, sym_eig

REL_TOL = 1e-8


def random_matrix(rng, n, d, scale=1.0):
    return scale * rng.standard_normal((n, d))


def rank_deficient(rng, n, d, r):
    """Exact rank r by construction: product of two thin factors."""
    left = rng.standard_normal((n, r))
    right = rng.standard_normal((r, d))
    return left @ right


def reconstruction_error(m, res):
    approx = res.u @ np.diag(res.s) @ res.v.T
    denom = max(np.linalg.norm(m), 1e-30)
    return np.linalg.norm(approx - m) / denom


def test_svd_reconstructs_random_matrices():
    rng = np.random.default_rng(42)
    shapes = [(6, 4), (4, 6), (10, 10), (1, 5), (5, 1), (17, 3), (3, 17), (32, 8)]
    for trial in range(60):
        n, d = shapes[trial % len(shapes)]
        scale = 10.0 ** ((trial % 7) - 3)
        m = random_matrix(rng, n, d, scale)
        res = svd(m)
        assert reconstruction_error(m, res) <= REL_TOL
        # descending, nonnegative
        assert np.all(res.s[:-1] >= res.s[1:] - 1e-300)
        assert np.all(res.s >= 0.0)


def test_svd_vectors_orthonormal():
    rng = np.random.default_rng(7)
    for _ in range(20):
        m = random_matrix(rng, 12, 5)
        res = svd(m)
        k = len(res.s)
        assert np.allclose(res.u.T @ res.u, np.eye(k), atol=1e-10)
        assert np.allclose(res.v.T @ res.v, np.eye(k), atol=1e-10)


def test_singular_values_match_numpy():
    rng = np.random.default_rng(3)
    for _ in range(40):
        m = random_matrix(rng, 9, 6)
        mine = svd(m).s
        ref = np.linalg.svd(m, compute_uv=False)
        assert np.allclose(mine, ref, rtol=1e-9, atol=1e-12)


def test_svd_known_singular_values():
    # Columns scaled canonical basis: singular values are the scales, sorted.
    m = np.zeros((5, 3))
    m[0, 0] = 2.0
    m[1, 1] = 7.0
    m[2, 2] = 0.5
    res = svd(m)
    assert np.allclose(res.s, [7.0, 2.0, 0.5])


def test_sym_eig_matches_numpy_and_reconstructs():
    rng = np.random.default_rng(11)
    for _ in range(30):
        a = random_matrix(rng, 8, 8)
        a = (a + a.T) / 2.0
        values, vectors = sym_eig(a)
        ref = np.linalg.eigvalsh(a)[::-1]
        assert np.allclose(values, ref, rtol=1e-9, atol=1e-10)
        approx = vectors @ np.diag(values) @ vectors.T
        assert np.linalg.norm(approx - a) <= REL_TOL * max(np.linalg.norm(a), 1e-30)


def test_sym_eig_vs_squared_singular_values():
    """Dual route: eig(M^T M) must equal svd(M).s ** 2."""
    rng = np.random.default_rng(23)
    for _ in range(30):
        m = random_matrix(rng, 10, 6)
        gram = m.T @ m
        values, _ = sym_eig(gram)
        squared = svd(m).s ** 2
        denom = max(np.max(np.abs(values)), 1e-30)
        assert np.max(np.abs(values - squared)) / denom <= REL_TOL


def test_known_rank_recovery():
    rng = np.random.default_rng(5)
    for r in (0, 1, 2, 3, 5):
        n, d = 20, 8
        m = rank_deficient(rng, n, d, r) if r else np.zeros((n, d))
        s = svd(m).s
        assert numerical_rank(s, n, d) == r
        assert np.linalg.matrix_rank(m) == r


def test_rank_of_duplicated_column():
    rng = np.random.default_rng(19)
    base = rng.standard_normal((15, 4))
    m = np.column_stack([base, base[:, 0]])
    s = svd(m).s
    assert numerical_rank(s, 15, 5) == 4


def test_rank_zero_and_identity():
    assert numerical_rank(np.zeros(4), 6, 4) == 0
    s = svd(np.eye(7)).s
    assert numerical_rank(s, 7, 7) == 7


def test_near_zero_singular_value_below_cutoff():
    # One column at machine-noise scale relative to the rest.
    m = np.diag([1.0, 1.0, 1e-18])
    s = svd(m).s
    assert numerical_rank(s, 3, 3) == 2


def test_svd_empty_and_vector_edge_shapes():
    res = svd(np.zeros((3, 1)))
    assert res.s.shape == (1,)
    res = svd(np.ones((1, 1)))
    assert np.allclose(res.s, [1.0])


def test_as_matrix_rejects_bad_input():
    with pytest.raises(ShapeMismatchError):
        as_matrix(np.zeros(3))
    with pytest.raises(ShapeMismatchError):
        as_matrix(np.zeros((2, 2, 2)))
    with pytest.raises(NonFiniteError):
        as_matrix(np.array([[1.0, np.nan]]))
    with pytest.raises(NonFiniteError):
        svd(np.array([[np.inf, 1.0], [0.0, 1.0]]))


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(NotSymmetricError):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(NotSymmetricError):
        sym_eig(np.zeros((3, 4)))


def test_sym_eig_accepts_roundoff_asymmetry():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((6, 6))
    a = (a + a.T) / 2.0
    a[0, 1] += 1e-13 * abs(a).max()
    values, _ = sym_eig(a)  # must not raise
    assert values.shape == (6,)


def test_svd_deterministic_across_calls():
    rng = np.random.default_rng(77)
    m = random_matrix(rng, 9, 5)
    r1, r2 = svd(m.copy()), svd(m.copy())
    assert np.array_equal(r1.u, r2.u)
    assert np.array_equal(r1.s, r2.s)
    assert np.array_equal(r1.v, r2.v)
