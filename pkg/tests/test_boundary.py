import numpy as np
import pytest

from boundaryscope.boundary import (
    HeatmapGrid,
    PairCoords,
    PCAModel,
    ResistorSet,
    _expand_bounds,
    center_trajectory,
    class_centers,
    decision_space,
    fit_pair_plane,
    heatmap,
    inverse_map,
    pair_matrix,
    pca3_export,
    pca_fit,
    project,
    resistor_overlap,
    resistors,
    stabilize_signs,
)
from boundaryscope.datasets import gaussian_mixture, reference_spec
from boundaryscope.errors import (
    BadClassError,
    BadSpecError,
    EmptyClassError,
    EmptyPairError,
    EmptyTrainingSetError,
    MismatchedUniverseError,
    ShapeMismatchError,
    TooFewSamplesError,
)
from boundaryscope.net import (
    NetConfig,
    forward,
    init_params,
    pair_probability,
)
from boundaryscope.optim import preset_schedule
from boundaryscope.training import TrainConfig, train


def small_setup(samples_per_class=30, seed=5):
    ds = gaussian_mixture(reference_spec(samples_per_class=samples_per_class), seed)
    config = NetConfig(
        input_dim=16, hidden_widths=(8,), num_classes=4, variant="plain", seed=seed
    )
    params = init_params(config, ds.class_names)
    return ds, params


def random_pair_coords(rng, n_first, n_second, dim=2):
    coords = rng.normal(size=(n_first + n_second, dim))
    labels = np.concatenate(
        [np.zeros(n_first, dtype=np.int64), np.ones(n_second, dtype=np.int64)]
    )
    return PairCoords(coords=coords, labels=labels, class_names=("a", "b"))


def knn_mean_oracle(train, phi, q, k):
    """Brute-force k nearest rows by (distance, index), then mean the rows."""
    dist = [float(np.sqrt(((train[t] - q) ** 2).sum())) for t in range(train.shape[0])]
    order = sorted(range(train.shape[0]), key=lambda t: (dist[t], t))[:k]
    return phi[order].mean(axis=0)


# --- PCA fitting -------------------------------------------------------------

def test_pca_hand_example():
    # one informative column: centered matrix has singular values (sqrt(10), 0)
    phi = np.array([[1.0, 0.0], [-1.0, 0.0], [2.0, 0.0], [-2.0, 0.0]])
    model = pca_fit(phi, 2)
    assert np.allclose(model.mean, [0.0, 0.0])
    assert abs(model.singular_values[0] - np.sqrt(10.0)) < 1e-12
    assert abs(model.singular_values[1]) < 1e-12
    assert np.allclose(model.components.T @ model.components, np.eye(2), atol=1e-12)
    assert np.allclose(np.abs(model.components[:, 0]), [1.0, 0.0], atol=1e-12)
    assert model.sign_flips == (False, False)
    # variances of the centered matrix: s^2 / (n - 1)
    variances = model.singular_values**2 / (phi.shape[0] - 1)
    assert np.allclose(variances, [10.0 / 3.0, 0.0], atol=1e-12)


def test_pca_fit_matches_numpy(rng):
    phi = rng.normal(size=(40, 6)) * rng.uniform(0.5, 3.0, size=6)
    model = pca_fit(phi, 2)
    centered = phi - phi.mean(axis=0)
    s_np = np.linalg.svd(centered, compute_uv=False)
    assert np.allclose(model.singular_values, s_np[:2], rtol=1e-9)
    # same subspace regardless of per-column sign: compare projectors
    _, _, vt = np.linalg.svd(centered)
    p_ours = model.components @ model.components.T
    p_np = vt[:2].T @ vt[:2]
    assert np.allclose(p_ours, p_np, atol=1e-8)


def test_pca_fit_rejects_bad_sizes(rng):
    with pytest.raises(BadSpecError):
        pca_fit(rng.normal(size=(5, 3)), 0)
    with pytest.raises(TooFewSamplesError):
        pca_fit(rng.normal(size=(2, 5)), 2)  # n - 1 = 1 < k
    with pytest.raises(TooFewSamplesError):
        pca_fit(rng.normal(size=(9, 1)), 2)  # d = 1 < k
    with pytest.raises(TooFewSamplesError):
        pca_fit(rng.normal(size=(1, 4)), 1)


def test_project_checks_width(rng):
    model = pca_fit(rng.normal(size=(10, 4)), 2)
    with pytest.raises(ShapeMismatchError):
        project(model, rng.normal(size=(3, 5)))


# --- pair extraction and centers ---------------------------------------------

def test_pair_matrix_blocks_keep_original_order(rng):
    features = rng.normal(size=(9, 3))
    labels = np.array([2, 0, 1, 0, 2, 1, 0, 2, 1])
    phi, side = pair_matrix(features, labels, 2, 0)
    assert phi.shape == (6, 3)
    assert np.array_equal(phi[:3], features[[0, 4, 7]])
    assert np.array_equal(phi[3:], features[[1, 3, 6]])
    assert np.array_equal(side, [0, 0, 0, 1, 1, 1])


def test_pair_matrix_rejections(rng):
    features = rng.normal(size=(4, 2))
    labels = np.array([0, 0, 1, 1])
    with pytest.raises(EmptyPairError):
        pair_matrix(features, labels, 1, 1)
    with pytest.raises(EmptyClassError):
        pair_matrix(features, labels, 0, 3)
    with pytest.raises(ShapeMismatchError):
        pair_matrix(features, labels[:3], 0, 1)


def test_weighted_center_identity(rng):
    # centering makes n1*c1 + n2*c2 vanish, even with unequal class sizes
    features = rng.normal(size=(130, 12)) + rng.uniform(-4, 4, size=12)
    labels = np.concatenate([np.zeros(80, dtype=int), np.ones(50, dtype=int)])
    _, coords, _ = fit_pair_plane(features, labels, 0, 1, ("a", "b"))
    c1, c2 = class_centers(coords)
    resultant = 80 * c1 + 50 * c2
    scale = 80 * np.linalg.norm(c1) + 50 * np.linalg.norm(c2)
    assert np.linalg.norm(resultant) <= 1e-9 * max(scale, 1e-30)


def test_stabilize_signs_orders_and_flags():
    # first-class center sits right of the second on x only: flip x alone
    coords = PairCoords(
        coords=np.array([[2.0, -1.0], [4.0, 1.0], [-3.0, -2.0], [-1.0, 4.0]]),
        labels=np.array([0, 0, 1, 1]),
        class_names=("a", "b"),
    )
    model = PCAModel(
        mean=np.zeros(2),
        components=np.eye(2),
        singular_values=np.array([2.0, 1.0]),
        sign_flips=(False, False),
    )
    new_model, new_coords = stabilize_signs(model, coords)
    assert new_model.sign_flips == (True, False)
    assert np.array_equal(new_model.components[:, 0], [-1.0, 0.0])
    assert np.array_equal(new_model.components[:, 1], [0.0, 1.0])
    c1, c2 = class_centers(new_coords)
    assert np.all(c1 <= c2)
    # idempotent: a second pass flips nothing and returns the same objects
    again_model, again_coords = stabilize_signs(new_model, new_coords)
    assert again_model is new_model
    assert again_coords is new_coords
    # flags track parity: flipping an already-flipped axis clears it
    third_model, _ = stabilize_signs(
        PCAModel(
            mean=model.mean,
            components=model.components,
            singular_values=model.singular_values,
            sign_flips=(True, True),
        ),
        coords,
    )
    assert third_model.sign_flips == (False, True)


def test_fit_pair_plane_stabilized(rng):
    features = rng.normal(size=(60, 5))
    features[:30] += 3.0
    labels = np.concatenate([np.zeros(30, dtype=int), np.ones(30, dtype=int)])
    model, coords, phi = fit_pair_plane(features, labels, 0, 1, ("left", "right"))
    assert coords.coords.shape == (60, 2)
    assert coords.class_names == ("left", "right")
    assert phi.shape == (60, 5)
    c1, c2 = class_centers(coords)
    assert np.all(c1 <= c2 + 1e-15)
    # projection of the stabilized model reproduces the stabilized coords
    assert np.allclose(project(model, phi), coords.coords, atol=1e-12)


# --- inverse map ---------------------------------------------------------------

def test_inverse_map_single_neighbor_exact(rng):
    coords = random_pair_coords(rng, 20, 20)
    phi = rng.normal(size=(40, 7))
    for t in (0, 13, 39):
        out = inverse_map(coords, phi, coords.coords[t], neighbors=1)
        assert np.array_equal(out, phi[t])


def test_inverse_map_matches_brute_force(rng):
    coords = random_pair_coords(rng, 250, 250)
    phi = rng.normal(size=(500, 16))
    for k in (1, 7, 10, 499):
        for _ in range(5):
            q = rng.normal(size=2) * 2.0
            ours = inverse_map(coords, phi, q, neighbors=k)
            oracle = knn_mean_oracle(coords.coords, phi, q, k)
            assert np.allclose(ours, oracle, atol=1e-12)


def test_inverse_map_tie_goes_to_lower_index(rng):
    coords = random_pair_coords(rng, 30, 30)
    dup = coords.coords.copy()
    dup[41] = dup[17]  # exact duplicate, equidistant from any query
    tied = PairCoords(coords=dup, labels=coords.labels, class_names=coords.class_names)
    phi = rng.normal(size=(60, 4))
    out = inverse_map(tied, phi, dup[17], neighbors=1)
    assert np.array_equal(out, phi[17])
    out2 = inverse_map(tied, phi, dup[17], neighbors=2)
    assert np.allclose(out2, (phi[17] + phi[41]) / 2.0, atol=1e-15)


def test_inverse_map_rejections(rng):
    coords = random_pair_coords(rng, 5, 5)
    phi = rng.normal(size=(10, 3))
    with pytest.raises(BadSpecError):
        inverse_map(coords, phi, np.zeros(2), neighbors=0)
    with pytest.raises(BadSpecError):
        inverse_map(coords, phi, np.zeros(2), neighbors=11)
    with pytest.raises(ShapeMismatchError):
        inverse_map(coords, phi[:9], np.zeros(2), neighbors=1)
    with pytest.raises(ShapeMismatchError):
        inverse_map(coords, phi, np.zeros(3), neighbors=1)
    empty = PairCoords(
        coords=np.zeros((0, 2)), labels=np.zeros(0, dtype=int), class_names=("a", "b")
    )
    with pytest.raises(EmptyTrainingSetError):
        inverse_map(empty, np.zeros((0, 3)), np.zeros(2), neighbors=1)


# --- resistors -----------------------------------------------------------------

def test_resistors_match_sort_oracle(rng):
    coords = random_pair_coords(rng, 500, 500)
    first, second = resistors(coords, 0.05)
    assert first.universe_size == 500 and second.universe_size == 500
    assert len(first.indices) == 25 and len(second.indices) == 25
    c1 = coords.coords[coords.labels == 0].mean(axis=0)
    c2 = coords.coords[coords.labels == 1].mean(axis=0)
    for rset, other in ((first, c2), (second, c1)):
        rows = np.flatnonzero(coords.labels == rset.side)
        dist = np.sqrt(((coords.coords[rows] - other) ** 2).sum(axis=1))
        order = sorted(range(rows.size), key=lambda t: (dist[t], t))[:25]
        assert rset.indices == tuple(int(rows[t]) for t in order)
        assert rset.distances == tuple(sorted(rset.distances))
        assert np.allclose(rset.distances, dist[order], atol=1e-12)


def test_resistors_count_edges(rng):
    coords = random_pair_coords(rng, 30, 30)
    # 0.1 * 30 is an exact integer: the float-dust guard must not round it up
    first, _ = resistors(coords, 0.1)
    assert len(first.indices) == 3
    tiny, _ = resistors(coords, 1e-6)
    assert len(tiny.indices) == 1
    everything, _ = resistors(coords, 1.0)
    assert len(everything.indices) == 30
    for bad in (0.0, -0.2, 1.5):
        with pytest.raises(BadSpecError):
            resistors(coords, bad)


def rset(indices, side=0, name="a", universe=10):
    return ResistorSet(
        side=side,
        class_name=name,
        indices=tuple(indices),
        distances=tuple(float(i) for i in indices),
        universe_size=universe,
    )


def test_resistor_overlap_jaccard():
    assert resistor_overlap(rset([1, 2, 3]), rset([2, 3, 4])) == 0.5
    assert resistor_overlap(rset([1, 2, 3]), rset([1, 2, 3])) == 1.0
    assert resistor_overlap(rset([1, 2]), rset([3, 4])) == 0.0
    assert resistor_overlap(rset([]), rset([])) == 1.0


def test_resistor_overlap_rejects_mismatched_universes():
    with pytest.raises(MismatchedUniverseError):
        resistor_overlap(rset([1], side=0), rset([1], side=1))
    with pytest.raises(MismatchedUniverseError):
        resistor_overlap(rset([1], name="a"), rset([1], name="b"))
    with pytest.raises(MismatchedUniverseError):
        resistor_overlap(rset([1], universe=10), rset([1], universe=11))


# --- heat maps -----------------------------------------------------------------

def test_heatmap_uniform_head_is_half_everywhere():
    ds, params = small_setup()
    params.head.weights[:] = 0.0
    params.head.bias[:] = 0.0
    grid, coords = heatmap(params, (0, 1), ds, resolution=5)
    assert grid.values.shape == (5, 5)
    assert np.allclose(grid.values, 0.5, atol=1e-12)
    x_min, x_max, y_min, y_max = grid.bounds
    lo, hi = coords.coords[:, 0].min(), coords.coords[:, 0].max()
    assert x_min == pytest.approx(lo - 0.1 * (hi - lo))
    assert x_max == pytest.approx(hi + 0.1 * (hi - lo))
    lo, hi = coords.coords[:, 1].min(), coords.coords[:, 1].max()
    assert y_min == pytest.approx(lo - 0.1 * (hi - lo))
    assert y_max == pytest.approx(hi + 0.1 * (hi - lo))


def test_heatmap_matches_pointwise_inverse_map():
    ds, params = small_setup(samples_per_class=15, seed=9)
    resolution, neighbors = 4, 3
    grid, coords = heatmap(params, (0, 1), ds, resolution=resolution, neighbors=neighbors)
    embeddings, _ = forward(params, ds.features)
    _, _, phi = fit_pair_plane(embeddings, ds.labels, 0, 1, params.head.class_names)
    x_min, x_max, y_min, y_max = grid.bounds
    xs = x_min + (np.arange(resolution) + 0.5) * (x_max - x_min) / resolution
    ys = y_min + (np.arange(resolution) + 0.5) * (y_max - y_min) / resolution
    for iy in (0, 3):
        for ix in (1, 2):
            psi = inverse_map(coords, phi, np.array([xs[ix], ys[iy]]), neighbors)
            expected = pair_probability(params.head, psi, 0, 1)
            assert grid.values[iy, ix] == pytest.approx(expected, abs=1e-12)


def test_heatmap_rejections():
    ds, params = small_setup(samples_per_class=5)
    with pytest.raises(BadSpecError):
        heatmap(params, (0, 1), ds, resolution=1)
    with pytest.raises(BadSpecError):
        heatmap(params, (0, 1), ds, neighbors=11)  # pair holds 10 samples


def test_expand_bounds_margin_and_zero_span():
    assert _expand_bounds(2.0, 6.0, 0.1) == (2.0 - 0.4, 6.0 + 0.4)
    assert _expand_bounds(3.0, 3.0, 0.1) == (2.5, 3.5)


# --- decision space and PCA(3) ---------------------------------------------------

def test_decision_space_rows_follow_pair_order(rng):
    ds, params = small_setup(samples_per_class=10, seed=2)
    probs, side = decision_space(params, (1, 3), ds)
    features, oracle_side = pair_matrix(ds.features, ds.labels, 1, 3)
    assert np.array_equal(side, oracle_side)
    _, logits = forward(params, features)
    shifted = np.exp(logits - logits.max(axis=1, keepdims=True))
    full = shifted / shifted.sum(axis=1, keepdims=True)
    assert np.allclose(probs[:, 0], full[:, 1], atol=1e-12)
    assert np.allclose(probs[:, 1], full[:, 3], atol=1e-12)
    assert np.all(probs.sum(axis=1) <= 1.0 + 1e-12)


def test_pca3_export_matches_numpy(rng):
    ds, _ = small_setup(samples_per_class=20, seed=4)
    coords, labels, variances = pca3_export(ds.features, ds.labels, (0, 2, 3))
    assert coords.shape == (60, 3)
    assert np.array_equal(np.unique(labels), [0, 2, 3])
    blocks = [ds.features[ds.labels == c] for c in (0, 2, 3)]
    phi = np.concatenate(blocks, axis=0)
    s = np.linalg.svd(phi - phi.mean(axis=0), compute_uv=False)
    assert np.allclose(variances, s[:3] ** 2 / (phi.shape[0] - 1), rtol=1e-9)
    assert variances[0] >= variances[1] >= variances[2]


def test_pca3_export_rejections(rng):
    ds, _ = small_setup(samples_per_class=5)
    with pytest.raises(BadClassError):
        pca3_export(ds.features, ds.labels, (0, 0, 1))
    with pytest.raises(EmptyClassError):
        pca3_export(ds.features, ds.labels, (0, 1, 9))


# --- center trajectories across a run ---------------------------------------------

def test_center_trajectory_tracks_milestones():
    ds, _ = small_setup(samples_per_class=25, seed=6)
    config = TrainConfig(
        dataset=ds,
        net=NetConfig(input_dim=16, hidden_widths=(8,), num_classes=4, variant="plain", seed=6),
        optimizer="sgd",
        schedule=preset_schedule("sgd-anneal", total_steps=4),
        epochs=4,
        batch_size=32,
        seed=6,
    )
    run = train(config)
    points = center_trajectory(run, (0, 1), ds)
    assert len(points) == len(run.milestones)
    n1 = int((ds.labels == 0).sum())
    n2 = int((ds.labels == 1).sum())
    for point, milestone in zip(points, run.milestones):
        assert point.milestone_index == milestone.index
        assert point.epoch == milestone.epoch
        assert point.train_accuracy == milestone.train_accuracy
        assert point.c_first.shape == (2,) and point.c_second.shape == (2,)
        assert len(point.variances) == 3
        assert point.variances[0] >= point.variances[1] >= point.variances[2] >= 0.0
        # stabilized order and the weighted-center identity hold at every milestone
        assert np.all(point.c_first <= point.c_second + 1e-15)
        resultant = np.linalg.norm(n1 * point.c_first + n2 * point.c_second)
        scale = n1 * np.linalg.norm(point.c_first) + n2 * np.linalg.norm(point.c_second)
        assert resultant <= 1e-9 * max(scale, 1e-30)
