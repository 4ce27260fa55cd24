"""Auto-correlation spectra, explained variances, and optimizer profiling.

Two deliberately different normalizations live side by side: the spectrum
of A = phi^T phi uses the raw, uncentered matrix, while explained variances
describe the centered matrix (PCA semantics, 1/(n-1) normalization).  Both
are kept because they answer different questions about the same features.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import net as mlp
from .boundary import fit_pair_plane, pair_matrix
from .datasets import LabeledDataset
from .errors import BadSpecError, TooFewSamplesError
from .linalg import as_matrix, numerical_rank, svd, sym_eig
from .training import RunArchive, evaluate


@dataclass(frozen=True)
class SpectrumReport:
    pair: tuple[int, int] | None
    values: np.ndarray  # eigenvalues of A, descending
    rank: int
    sigma1: float
    sigma2: float
    n: int
    d: int


@dataclass(frozen=True)
class ProfileRow:
    optimizer: str
    train_accuracy: float
    test_accuracy: float
    spectrum: SpectrumReport


@dataclass(frozen=True)
class VariancePoint:
    milestone_index: int
    epoch: int
    train_accuracy: float
    variances: tuple[float, ...]


def autocorrelation(phi) -> np.ndarray:
    """A = phi^T phi of the raw (uncentered) feature matrix."""
    m = as_matrix(phi)
    return m.T @ m


def acm_spectrum(phi, pair: tuple[int, int] | None = None) -> SpectrumReport:
    """Eigenvalues of A descending; equal to squared singular values of phi."""
    m = as_matrix(phi)
    n, d = m.shape
    eigenvalues, _ = sym_eig(autocorrelation(m))
    values = np.maximum(eigenvalues, 0.0)
    rank = numerical_rank(np.sqrt(values), n, d)
    return SpectrumReport(
        pair=pair,
        values=values,
        rank=rank,
        sigma1=float(values[0]) if d >= 1 else 0.0,
        sigma2=float(values[1]) if d >= 2 else 0.0,
        n=n,
        d=d,
    )


def explained_variances(phi, m: int) -> tuple[float, ...]:
    """Top-m variances s_i^2 / (n-1) of the centered matrix, descending."""
    mat = as_matrix(phi)
    n, d = mat.shape
    if m < 1:
        raise BadSpecError("m must be >= 1")
    if n < 2 or m > min(n - 1, d):
        raise TooFewSamplesError(f"m={m} needs at least m+1 rows and m columns, got {n}x{d}")
    s = svd(mat - mat.mean(axis=0)).s
    return tuple(float(v * v / (n - 1)) for v in s[:m])


def variance_evolution(
    run: RunArchive, pair: tuple[int, int], dataset: LabeledDataset, m: int = 3
) -> list[VariancePoint]:
    """Explained variances of the pair features at every milestone, in order."""
    i, j = pair
    points = []
    for milestone in run.milestones:
        embeddings, _ = mlp.forward(milestone.params, dataset.features)
        phi, _ = pair_matrix(embeddings, dataset.labels, i, j)
        count = min(m, phi.shape[0] - 1, phi.shape[1])
        points.append(
            VariancePoint(
                milestone_index=milestone.index,
                epoch=milestone.epoch,
                train_accuracy=milestone.train_accuracy,
                variances=explained_variances(phi, count),
            )
        )
    return points


def optimizer_profile(
    runs: list[RunArchive],
    pair: tuple[int, int],
    dataset: LabeledDataset,
    test_set: LabeledDataset,
) -> list[ProfileRow]:
    """One row per run: final accuracies plus the hard-pair spectrum.

    Rows are sorted by test accuracy, best first; ties fall back to the
    optimizer name so the ordering is reproducible.
    """
    i, j = pair
    rows = []
    for run in runs:
        params = run.final.params
        test_metrics = evaluate(params, test_set)
        embeddings, _ = mlp.forward(params, dataset.features)
        phi, _ = pair_matrix(embeddings, dataset.labels, i, j)
        rows.append(
            ProfileRow(
                optimizer=str(run.config_snapshot["optimizer"]),
                train_accuracy=run.final.train_accuracy,
                test_accuracy=test_metrics.accuracy,
                spectrum=acm_spectrum(phi, pair=pair),
            )
        )
    rows.sort(key=lambda r: (-r.test_accuracy, r.optimizer))
    return rows


def first_component_sufficiency(
    params: mlp.NetParams, pair: tuple[int, int], dataset: LabeledDataset
) -> tuple[float, float]:
    """Best 1-D threshold on the first stabilized component, with accuracy.

    All n+1 candidate positions (midpoints between sorted coordinates plus
    one position outside each end) are evaluated for both orientations of
    the rule "left of the threshold is the first class".
    """
    i, j = pair
    embeddings, _ = mlp.forward(params, dataset.features)
    _, coords, _ = fit_pair_plane(embeddings, dataset.labels, i, j, params.head.class_names)
    x = coords.coords[:, 0]
    is_first = coords.labels == 0
    xs = np.sort(x, kind="stable")
    candidates = np.concatenate(
        [[xs[0] - 1.0], (xs[:-1] + xs[1:]) / 2.0, [xs[-1] + 1.0]]
    )
    below = x[None, :] < candidates[:, None]
    acc_left = (below == is_first[None, :]).mean(axis=1)
    acc = np.maximum(acc_left, 1.0 - acc_left)
    best = int(np.argmax(acc))
    return float(candidates[best]), float(acc[best])
