"""Deterministic dense linear algebra: SVD, symmetric eigendecomposition, rank.

Both decompositions are cyclic Jacobi iterations.  The SVD is the one-sided
(Hestenes) variant: plane rotations orthogonalize the columns of a working
copy of the input while the accumulated rotations form the right singular
vectors.  The symmetric eigensolver is the classical two-sided Jacobi sweep.
Jacobi converges quadratically once the off-diagonal mass is small, is
deterministic for identical input (fixed cyclic pivot order, no pivot
searches over floating-point ties), and computes small singular values to
high relative accuracy, which keeps the downstream rank decisions stable.

Iteration budget: at most ``MAX_SWEEPS`` full sweeps (default 100); a sweep
in which no rotation fires means the decomposition has converged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    NoConvergenceError,
    NonFiniteError,
    NotSymmetricError,
    ShapeMismatchError,
)

MAX_SWEEPS = 100

# Relative cosine below which a column pair counts as orthogonal.  This is
# directly the orthonormality level of the returned singular vectors.
_JACOBI_TOL = 1e-12

_EPS = float(np.finfo(np.float64).eps)


def as_matrix(data, *, require_finite: bool = True) -> np.ndarray:
    """Coerce to a 2-D float64 array, optionally insisting on finite entries."""
    m = np.asarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeMismatchError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if require_finite and not np.all(np.isfinite(m)):
        raise NonFiniteError("matrix has NaN or Inf entries")
    return m


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``m = u @ diag(s) @ v.T`` with k = min(rows, cols).

    ``s`` is descending and nonnegative; the columns of ``u`` (rows x k) and
    ``v`` (cols x k) are orthonormal.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def _orthonormal_completion(u: np.ndarray, cols: list[int]) -> None:
    """Fill the listed columns of ``u`` with unit vectors orthogonal to the rest.

    Candidates are canonical basis vectors, projected against the current
    columns (twice, for stability) and accepted when the residual is not
    degenerate.  Deterministic: basis vectors are tried in index order.
    """
    n = u.shape[0]
    filled = [j for j in range(u.shape[1]) if j not in cols]
    for col in cols:
        for i in range(n):
            cand = np.zeros(n)
            cand[i] = 1.0
            for _ in range(2):
                for j in filled:
                    cand -= (u[:, j] @ cand) * u[:, j]
            norm = math.sqrt(cand @ cand)
            if norm > 0.5:
                u[:, col] = cand / norm
                break
        else:  # pragma: no cover - n basis vectors always span the complement
            raise NoConvergenceError("orthonormal completion failed")
        filled.append(col)


def _one_sided_jacobi(m: np.ndarray, max_sweeps: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Core Hestenes iteration on a matrix with rows >= cols.

    Returns (u, s, v) with orthonormal u (n x d), descending s, orthogonal v.
    """
    a = np.array(m, dtype=np.float64, copy=True)
    n, d = a.shape
    v = np.eye(d)

    for _ in range(max_sweeps):
        rotated = False
        for p in range(d - 1):
            for q in range(p + 1, d):
                app = float(a[:, p] @ a[:, p])
                aqq = float(a[:, q] @ a[:, q])
                apq = float(a[:, p] @ a[:, q])
                if apq == 0.0 or apq * apq <= _JACOBI_TOL * _JACOBI_TOL * app * aqq:
                    continue
                rotated = True
                zeta = (aqq - app) / (2.0 * apq)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                col_p = a[:, p].copy()
                a[:, p] = c * col_p - s * a[:, q]
                a[:, q] = s * col_p + c * a[:, q]
                rot_p = v[:, p].copy()
                v[:, p] = c * rot_p - s * v[:, q]
                v[:, q] = s * rot_p + c * v[:, q]
        if not rotated:
            break
    else:
        raise NoConvergenceError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")

    norms = np.sqrt(np.einsum("ij,ij->j", a, a))
    order = np.argsort(-norms, kind="stable")
    a = a[:, order]
    v = v[:, order]
    s_vals = norms[order]

    u = np.zeros((n, d))
    cutoff = max(n, d) * _EPS * (s_vals[0] if s_vals.size else 0.0)
    dead: list[int] = []
    for j in range(d):
        if s_vals[j] > cutoff:
            u[:, j] = a[:, j] / s_vals[j]
        else:
            s_vals[j] = 0.0
            dead.append(j)
    if dead:
        _orthonormal_completion(u, dead)
    return u, s_vals, v


def svd(m) -> SvdResult:
    """Thin singular value decomposition of a dense matrix.

    Raises NonFinite for NaN/Inf input and NoConvergence if the sweep budget
    is exhausted.  Deterministic: identical input gives identical output.
    """
    a = as_matrix(m)
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise ShapeMismatchError("matrix must have at least one row and one column")
    if a.shape[0] >= a.shape[1]:
        u, s, v = _one_sided_jacobi(a, MAX_SWEEPS)
        return SvdResult(u=u, s=s, v=v)
    # Wide input: decompose the transpose and swap the factor roles.
    u_t, s, v_t = _one_sided_jacobi(a.T, MAX_SWEEPS)
    return SvdResult(u=v_t, s=s, v=u_t)


def sym_eig(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic two-sided Jacobi.

    Returns (values, vectors) with values descending and ``vectors[:, i]``
    the unit eigenvector of ``values[i]``.  Raises NotSymmetric when
    ``max|a - a.T|`` exceeds ``1e-10 * max(1, max|a|)``.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise NotSymmetricError(f"matrix is {m.shape[0]}x{m.shape[1]}, not square")
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asym > 1e-10 * max(1.0, scale):
        raise NotSymmetricError(f"asymmetry {asym:.3e} exceeds tolerance")

    w = 0.5 * (m + m.T)
    d = w.shape[0]
    vec = np.eye(d)
    if d == 1:
        return w[0].copy(), vec

    frob = math.sqrt(float(np.sum(w * w)))
    stop = 1e-14 * frob
    # Summing the off-diagonal squares directly avoids the cancellation in
    # ||W||^2 - ||diag||^2, which is noisy at the level frob^2 * eps.
    off_mask = ~np.eye(d, dtype=bool)
    for _ in range(MAX_SWEEPS):
        off = math.sqrt(float(np.sum(w[off_mask] ** 2)))
        if off <= stop:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = w[p, q]
                if apq == 0.0 or abs(apq) <= 1e-16 * frob:
                    continue
                tau = (w[q, q] - w[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                app, aqq = w[p, p], w[q, q]
                row_p = w[p, :].copy()
                row_q = w[q, :].copy()
                w[p, :] = c * row_p - s * row_q
                w[q, :] = s * row_p + c * row_q
                col_p = w[:, p].copy()
                col_q = w[:, q].copy()
                w[:, p] = c * col_p - s * col_q
                w[:, q] = s * col_p + c * col_q
                w[p, p] = app - t * apq
                w[q, q] = aqq + t * apq
                w[p, q] = 0.0
                w[q, p] = 0.0
                v_p = vec[:, p].copy()
                vec[:, p] = c * v_p - s * vec[:, q]
                vec[:, q] = s * v_p + c * vec[:, q]
    else:
        raise NoConvergenceError(f"Jacobi eigensolve did not converge in {MAX_SWEEPS} sweeps")

    values = np.diag(w).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], vec[:, order]


def numerical_rank(s, n: int, d: int) -> int:
    """Count spectrum entries above ``max(n, d) * eps * s[0]``.

    ``s`` must be descending and nonnegative (e.g. from :func:`svd` or
    :func:`sym_eig` of a PSD matrix).  Returns 0 for an empty or all-zero
    spectrum; the threshold is relative to the leading value, so uniform
    scaling does not change the result.
    """
    vals = np.asarray(s, dtype=np.float64)
    if vals.size == 0 or vals[0] <= 0.0:
        return 0
    threshold = max(n, d) * _EPS * float(vals[0])
    return int(np.sum(vals > threshold))
