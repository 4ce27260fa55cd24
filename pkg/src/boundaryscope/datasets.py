"""Seeded synthetic multi-class datasets with controllable class overlap.

Classes are isotropic Gaussian blobs.  The reference task is four classes in
16 input dimensions with one deliberately overlapping pair (the "hard pair")
and well-separated remaining pairs, so that pairwise analyses see one
interfering pair and several easy ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadSpecError

HARD_PAIR = (0, 1)


@dataclass(frozen=True)
class ClassSpec:
    name: str
    mean: tuple[float, ...]
    std: float
    count: int


@dataclass(frozen=True)
class MixtureSpec:
    """Per-class blob parameters plus optional pairwise mean-distance pins.

    ``overlap_pairs`` entries are ``(i, j, distance)``: the mean of class j
    is moved along the line through the two means until it sits exactly
    ``distance`` away from the mean of class i.
    """

    classes: tuple[ClassSpec, ...]
    overlap_pairs: tuple[tuple[int, int, float], ...] = ()


@dataclass(frozen=True)
class LabeledDataset:
    features: np.ndarray  # (n, p) float64
    labels: np.ndarray  # (n,) int64, class indices
    class_names: tuple[str, ...]
    seed: int

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def class_indices(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)


def _validate(spec: MixtureSpec) -> int:
    if not spec.classes:
        raise BadSpecError("mixture needs at least one class")
    dim = len(spec.classes[0].mean)
    for cs in spec.classes:
        if cs.count <= 0:
            raise BadSpecError(f"class {cs.name!r} has nonpositive count {cs.count}")
        if cs.std <= 0:
            raise BadSpecError(f"class {cs.name!r} has nonpositive std {cs.std}")
        if len(cs.mean) != dim:
            raise BadSpecError(f"class {cs.name!r} mean has dimension {len(cs.mean)}, expected {dim}")
    for i, j, dist in spec.overlap_pairs:
        if not (0 <= i < len(spec.classes) and 0 <= j < len(spec.classes)) or i == j:
            raise BadSpecError(f"bad overlap pair ({i}, {j})")
        if dist <= 0:
            raise BadSpecError(f"overlap distance must be positive, got {dist}")
    return dim


def resolve_means(spec: MixtureSpec) -> np.ndarray:
    """Class means after applying the overlap-distance pins, in order."""
    dim = _validate(spec)
    means = np.array([cs.mean for cs in spec.classes], dtype=np.float64)
    for i, j, dist in spec.overlap_pairs:
        delta = means[j] - means[i]
        norm = float(np.linalg.norm(delta))
        if norm == 0.0:
            direction = np.zeros(dim)
            direction[0] = 1.0
        else:
            direction = delta / norm
        means[j] = means[i] + dist * direction
    return means


def gaussian_mixture(spec: MixtureSpec, seed: int) -> LabeledDataset:
    """Draw the dataset described by ``spec``; bit-identical per (spec, seed)."""
    _validate(spec)
    means = resolve_means(spec)
    # Own stream id: net init consumes default_rng(seed) for the same seed.
    rng = np.random.default_rng([seed, 0xDA7A])
    blocks = []
    labels = []
    for c, cs in enumerate(spec.classes):
        blocks.append(means[c] + cs.std * rng.standard_normal((cs.count, means.shape[1])))
        labels.append(np.full(cs.count, c, dtype=np.int64))
    return LabeledDataset(
        features=np.concatenate(blocks, axis=0),
        labels=np.concatenate(labels),
        class_names=tuple(cs.name for cs in spec.classes),
        seed=seed,
    )


def reference_spec(
    samples_per_class: int = 500,
    input_dim: int = 16,
    hard_distance: float = 3.1,
    easy_distance: float = 12.0,
    std: float = 1.0,
) -> MixtureSpec:
    """The default four-class task: classes 0 and 1 are the hard pair.

    Classes 2 and 3 sit on their own axes far from everything else, so any
    pair other than (0, 1) separates easily.
    """
    if input_dim < 4:
        raise BadSpecError("reference task needs at least 4 input dimensions")
    names = ("alpha", "beta", "gamma", "delta")
    means = np.zeros((4, input_dim))
    means[1, 0] = hard_distance
    means[2, 1] = easy_distance
    means[3, 2] = easy_distance
    classes = tuple(
        ClassSpec(name=names[c], mean=tuple(means[c]), std=std, count=samples_per_class)
        for c in range(4)
    )
    return MixtureSpec(classes=classes, overlap_pairs=((0, 1, hard_distance),))


def train_test_split(ds: LabeledDataset, test_fraction: float = 0.2) -> tuple[LabeledDataset, LabeledDataset]:
    """Deterministic stratified split; a pure function of (dataset, fraction)."""
    if not (0.0 <= test_fraction < 1.0):
        raise BadSpecError(f"test fraction must be in [0, 1), got {test_fraction}")
    rng = np.random.default_rng([ds.seed, 0x5B117])
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for c in range(ds.num_classes):
        idx = ds.class_indices(c)
        perm = idx[rng.permutation(idx.size)]
        n_test = int(round(test_fraction * idx.size))
        if n_test >= idx.size:
            n_test = idx.size - 1
        test_idx.append(np.sort(perm[:n_test]))
        train_idx.append(np.sort(perm[n_test:]))
    tr = np.concatenate(train_idx)
    te = np.concatenate(test_idx)
    make = lambda sel: LabeledDataset(
        features=ds.features[sel].copy(),
        labels=ds.labels[sel].copy(),
        class_names=ds.class_names,
        seed=ds.seed,
    )
    return make(tr), make(te)


def epoch_permutation(n: int, seed: int, epoch: int) -> np.ndarray:
    """Shuffling order for one epoch; a pure function of (seed, epoch)."""
    return np.random.default_rng([seed, 0xE60C4, epoch]).permutation(n)
