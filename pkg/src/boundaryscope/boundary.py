"""Class-pair geometry in embedding space.

Given embeddings of two classes, this module fits a PCA(2) plane, pins the
component signs so the first class sits left of the second on every axis,
and derives the published analyses: probability heat maps through a
nearest-neighbor inverse map, center trajectories across checkpoints,
resistor extraction, decision-space probabilities, and PCA(3) triples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import net as mlp
from .datasets import LabeledDataset
from .errors import (
    BadClassError,
    BadSpecError,
    EmptyClassError,
    EmptyPairError,
    EmptyTrainingSetError,
    MismatchedUniverseError,
    ShapeMismatchError,
    TooFewSamplesError,
)
from .linalg import as_matrix, svd

DEFAULT_NEIGHBORS = 10
DEFAULT_RESOLUTION = 100
DEFAULT_MARGIN = 0.1
DEFAULT_FRACTION = 0.05


@dataclass(frozen=True)
class PCAModel:
    mean: np.ndarray  # (d,)
    components: np.ndarray  # (d, k), orthonormal columns
    singular_values: np.ndarray  # (k,) descending, of the centered matrix
    sign_flips: tuple[bool, ...]


@dataclass(frozen=True)
class PairCoords:
    coords: np.ndarray  # (n, k)
    labels: np.ndarray  # (n,) 0 = first class of the pair, 1 = second
    class_names: tuple[str, str]


@dataclass(frozen=True)
class HeatmapGrid:
    bounds: tuple[float, float, float, float]  # x_min, x_max, y_min, y_max
    resolution: int
    values: np.ndarray  # (R, R), [iy][ix], first-class probability


@dataclass(frozen=True)
class ResistorSet:
    side: int  # 0 = first class of the pair, 1 = second
    class_name: str
    indices: tuple[int, ...]  # into the pair matrix, ascending by distance
    distances: tuple[float, ...]
    universe_size: int  # samples of this class in the pair


@dataclass(frozen=True)
class TrajectoryPoint:
    milestone_index: int
    epoch: int
    train_accuracy: float
    c_first: np.ndarray
    c_second: np.ndarray
    variances: tuple[float, float, float]


def pair_matrix(features, labels, i: int, j: int):
    """Stack the class-i rows then the class-j rows, original order kept.

    Returns (pair matrix, side labels) with side 0 = class i, 1 = class j.
    """
    f = as_matrix(features)
    y = np.asarray(labels)
    if y.shape != (f.shape[0],):
        raise ShapeMismatchError(f"labels shape {y.shape} for {f.shape[0]} rows")
    if i == j:
        raise EmptyPairError(f"pair ({i}, {j}) must name two distinct classes")
    rows_i = np.flatnonzero(y == i)
    rows_j = np.flatnonzero(y == j)
    if rows_i.size == 0:
        raise EmptyClassError(f"class {i} has no samples")
    if rows_j.size == 0:
        raise EmptyClassError(f"class {j} has no samples")
    phi = np.concatenate([f[rows_i], f[rows_j]], axis=0)
    side = np.concatenate([np.zeros(rows_i.size, dtype=np.int64), np.ones(rows_j.size, dtype=np.int64)])
    return phi, side


def pca_fit(phi, k: int) -> PCAModel:
    """Top-k right singular directions of the centered matrix."""
    m = as_matrix(phi)
    n, d = m.shape
    if k < 1:
        raise BadSpecError("k must be >= 1")
    if n < 2 or k > min(n - 1, d):
        raise TooFewSamplesError(f"k={k} needs at least k+1 rows and k columns, got {n}x{d}")
    mean = m.mean(axis=0)
    result = svd(m - mean)
    components = result.v[:, :k].copy()
    values = result.s[:k].copy()
    return PCAModel(
        mean=mean,
        components=components,
        singular_values=values,
        sign_flips=tuple(False for _ in range(k)),
    )


def project(model: PCAModel, phi) -> np.ndarray:
    m = as_matrix(phi)
    if m.shape[1] != model.mean.shape[0]:
        raise ShapeMismatchError(f"{m.shape[1]} columns vs model dim {model.mean.shape[0]}")
    return (m - model.mean) @ model.components


def class_centers(coords: PairCoords) -> tuple[np.ndarray, np.ndarray]:
    """Per-side coordinate means; sizes-weighted sum is zero by centering."""
    first = coords.coords[coords.labels == 0]
    second = coords.coords[coords.labels == 1]
    if first.shape[0] == 0 or second.shape[0] == 0:
        raise EmptyClassError("both pair classes need samples")
    return first.mean(axis=0), second.mean(axis=0)


def stabilize_signs(model: PCAModel, coords: PairCoords) -> tuple[PCAModel, PairCoords]:
    """Flip components until the first class center is left of the second.

    Each component is treated independently; flipping negates the component
    vector and the matching coordinate column. Idempotent: a second call
    finds every center pair already ordered.
    """
    c_first, c_second = class_centers(coords)
    flips = c_first > c_second
    if not flips.any():
        return model, coords
    signs = np.where(flips, -1.0, 1.0)
    new_model = PCAModel(
        mean=model.mean,
        components=model.components * signs,
        singular_values=model.singular_values,
        sign_flips=tuple(bool(f) ^ bool(p) for f, p in zip(flips, model.sign_flips)),
    )
    new_coords = PairCoords(
        coords=coords.coords * signs,
        labels=coords.labels,
        class_names=coords.class_names,
    )
    return new_model, new_coords


def fit_pair_plane(
    embeddings, labels, i: int, j: int, class_names, k: int = 2
) -> tuple[PCAModel, PairCoords, np.ndarray]:
    """pair_matrix + pca_fit + project + stabilize_signs in one call.

    Returns (stabilized model, stabilized coords, pair embedding rows).
    """
    phi, side = pair_matrix(embeddings, labels, i, j)
    model = pca_fit(phi, k)
    coords = PairCoords(
        coords=project(model, phi),
        labels=side,
        class_names=(str(class_names[i]), str(class_names[j])),
    )
    model, coords = stabilize_signs(model, coords)
    return model, coords, phi


def inverse_map(coords_train: PairCoords, phi_train, x, neighbors: int) -> np.ndarray:
    """Mean of the original embedding rows of the nearest training coords.

    Distance is Euclidean in PCA coordinates; ties go to the lower index.
    """
    train = coords_train.coords
    n = train.shape[0]
    if n == 0:
        raise EmptyTrainingSetError("no training coordinates")
    if not 1 <= neighbors <= n:
        raise BadSpecError(f"neighbors must lie in [1, {n}]")
    phi = as_matrix(phi_train)
    if phi.shape[0] != n:
        raise ShapeMismatchError(f"{phi.shape[0]} embedding rows for {n} coords")
    q = np.asarray(x, dtype=np.float64).reshape(-1)
    if q.shape[0] != train.shape[1]:
        raise ShapeMismatchError(f"query dim {q.shape[0]} vs coords dim {train.shape[1]}")
    dist = np.sqrt(((train - q) ** 2).sum(axis=1))
    nearest = np.argsort(dist, kind="stable")[:neighbors]
    return phi[nearest].mean(axis=0)


def _expand_bounds(lo: float, hi: float, margin: float) -> tuple[float, float]:
    span = hi - lo
    if span == 0.0:
        return lo - 0.5, hi + 0.5
    return lo - margin * span, hi + margin * span


def heatmap(
    params: mlp.NetParams,
    pair: tuple[int, int],
    dataset: LabeledDataset,
    resolution: int = DEFAULT_RESOLUTION,
    margin: float = DEFAULT_MARGIN,
    neighbors: int = DEFAULT_NEIGHBORS,
) -> tuple[HeatmapGrid, PairCoords]:
    """First-class probability over a grid covering the pair coordinates.

    Every cell center is pulled back to embedding space through the k-NN
    inverse map and pushed through the two-class softmax of the head.
    """
    if resolution < 2:
        raise BadSpecError("resolution must be >= 2")
    i, j = pair
    embeddings, _ = mlp.forward(params, dataset.features)
    model, coords, phi = fit_pair_plane(
        embeddings, dataset.labels, i, j, params.head.class_names
    )
    n = coords.coords.shape[0]
    if not 1 <= neighbors <= n:
        raise BadSpecError(f"neighbors must lie in [1, {n}]")

    x_min, x_max = _expand_bounds(coords.coords[:, 0].min(), coords.coords[:, 0].max(), margin)
    y_min, y_max = _expand_bounds(coords.coords[:, 1].min(), coords.coords[:, 1].max(), margin)
    xs = x_min + (np.arange(resolution) + 0.5) * (x_max - x_min) / resolution
    ys = y_min + (np.arange(resolution) + 0.5) * (y_max - y_min) / resolution

    values = np.empty((resolution, resolution), dtype=np.float64)
    train = coords.coords
    for iy in range(resolution):
        centers = np.stack([xs, np.full(resolution, ys[iy])], axis=1)
        dist = np.sqrt(((centers[:, None, :] - train[None, :, :]) ** 2).sum(axis=2))
        nearest = np.argsort(dist, axis=1, kind="stable")[:, :neighbors]
        psi = phi[nearest].mean(axis=1)
        values[iy] = mlp.pair_probability_batch(params.head, psi, i, j)
    grid = HeatmapGrid(
        bounds=(float(x_min), float(x_max), float(y_min), float(y_max)),
        resolution=resolution,
        values=values,
    )
    return grid, coords


def center_trajectory(run, pair: tuple[int, int], dataset: LabeledDataset) -> list[TrajectoryPoint]:
    """Stabilized pair centers and top-3 explained variances per milestone."""
    from .spectra import explained_variances

    i, j = pair
    points = []
    for m in run.milestones:
        embeddings, _ = mlp.forward(m.params, dataset.features)
        _, coords, phi = fit_pair_plane(
            embeddings, dataset.labels, i, j, m.params.head.class_names
        )
        c_first, c_second = class_centers(coords)
        count = min(3, phi.shape[0] - 1, phi.shape[1])
        var = list(explained_variances(phi, count)) + [0.0] * (3 - count)
        points.append(
            TrajectoryPoint(
                milestone_index=m.index,
                epoch=m.epoch,
                train_accuracy=m.train_accuracy,
                c_first=c_first,
                c_second=c_second,
                variances=(var[0], var[1], var[2]),
            )
        )
    return points


def resistors(coords: PairCoords, fraction: float) -> tuple[ResistorSet, ResistorSet]:
    """Per class: the ceil(fraction * n) samples nearest the OTHER center."""
    if not 0 < fraction <= 1:
        raise BadSpecError("fraction must lie in (0, 1]")
    c_first, c_second = class_centers(coords)
    out = []
    for side, other_center in ((0, c_second), (1, c_first)):
        rows = np.flatnonzero(coords.labels == side)
        dist = np.sqrt(((coords.coords[rows] - other_center) ** 2).sum(axis=1))
        # Subtract float dust so fraction * n that is mathematically an
        # integer does not round up an extra sample.
        count = max(1, math.ceil(fraction * rows.size - 1e-9))
        order = np.argsort(dist, kind="stable")[:count]
        out.append(
            ResistorSet(
                side=side,
                class_name=coords.class_names[side],
                indices=tuple(int(rows[o]) for o in order),
                distances=tuple(float(dist[o]) for o in order),
                universe_size=int(rows.size),
            )
        )
    return out[0], out[1]


def resistor_overlap(a: ResistorSet, b: ResistorSet) -> float:
    """Jaccard index of two resistor selections over the same class."""
    if (
        a.side != b.side
        or a.class_name != b.class_name
        or a.universe_size != b.universe_size
    ):
        raise MismatchedUniverseError(
            f"sets describe different universes: {a.class_name}/{a.side}/{a.universe_size}"
            f" vs {b.class_name}/{b.side}/{b.universe_size}"
        )
    sa, sb = set(a.indices), set(b.indices)
    union = sa | sb
    if not union:
        return 1.0
    return len(sa & sb) / len(union)


def decision_space(
    params: mlp.NetParams, pair: tuple[int, int], dataset: LabeledDataset
) -> tuple[np.ndarray, np.ndarray]:
    """Full-softmax probabilities (p_i, p_j) per pair sample.

    Rows align with pair_matrix order; the remaining classes' mass makes
    each row sum to at most one.
    """
    i, j = pair
    features, side = pair_matrix(dataset.features, dataset.labels, i, j)
    _, logits = mlp.forward(params, features)
    probs = mlp.full_softmax(logits)
    return np.stack([probs[:, i], probs[:, j]], axis=1), side


def pca3_export(features, labels, triple: tuple[int, int, int]):
    """PCA(3) coordinates of three classes' joint matrix.

    Returns (coords n x 3, original class labels, explained variances).
    """
    a, b, c = triple
    if len({a, b, c}) != 3:
        raise BadClassError(f"triple {triple} must name three distinct classes")
    f = as_matrix(features)
    y = np.asarray(labels)
    blocks = []
    labs = []
    for cls in triple:
        rows = np.flatnonzero(y == cls)
        if rows.size == 0:
            raise EmptyClassError(f"class {cls} has no samples")
        blocks.append(f[rows])
        labs.append(np.full(rows.size, cls, dtype=np.int64))
    phi = np.concatenate(blocks, axis=0)
    model = pca_fit(phi, 3)
    coords = project(model, phi)
    n = phi.shape[0]
    variances = tuple(float(s * s / (n - 1)) for s in model.singular_values)
    return coords, np.concatenate(labs), variances
