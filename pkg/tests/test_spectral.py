"""Eigensolver, embedding invariants, K-means, SGC pipeline, sin-Theta."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlsgc import (
    ClusterAssignment,
    DisconnectedGraphError,
    LayerWeights,
    SpectralEmbedding,
    TwoLayerCorrelatedParams,
    aggregate,
    detectability,
    generate_two_layer,
    kmeans,
    multilayer_sgc,
    partial_eigenvalue_sum,
    smallest_eigenpairs,
    subspace_distance,
)

from .conftest import (
    adjacency_from_edges,
    connected_random_multilayer,
    dense_graph,
    ids,
)


def dense_laplacian_spectrum(agg):
    return np.linalg.eigvalsh(agg.laplacian_dense())


# ------------------------------------------------------------ eigensolver


def test_triangle_spectrum(triangle, uniform2):
    agg = aggregate(triangle, LayerWeights.uniform(1))
    emb = smallest_eigenpairs(agg, 2)
    assert emb.eigenvalues == pytest.approx([3.0], abs=1e-8)
    assert emb.lambda_kplus1 == pytest.approx(3.0, abs=1e-8)
    assert partial_eigenvalue_sum(emb) == pytest.approx(3.0, abs=1e-8)


def test_complete_graph_spectrum_and_invariants():
    n = 7
    g = dense_graph(ids(n), np.ones((n, n)) - np.eye(n))
    agg = aggregate(g, LayerWeights.uniform(1))
    for K in range(2, n):
        emb = smallest_eigenpairs(agg, K)
        assert emb.eigenvalues == pytest.approx([n] * (K - 1), abs=1e-7)
        assert emb.Y.T @ emb.Y == pytest.approx(np.eye(K - 1), abs=1e-8)
        assert emb.Y.T @ np.ones(n) == pytest.approx(np.zeros(K - 1), abs=1e-8)


def test_random_graph_matches_dense_oracle():
    rng = np.random.default_rng(11)
    g = connected_random_multilayer(rng, 30, 2)
    agg = aggregate(g, LayerWeights.uniform(2))
    dense = dense_laplacian_spectrum(agg)
    emb = smallest_eigenpairs(agg, 5)
    got = np.append(emb.eigenvalues, emb.lambda_kplus1)
    scale = max(1.0, abs(dense[5]))
    assert np.max(np.abs(got - dense[1:6])) <= 1e-8 * scale


def test_eigenvector_residuals_within_contract():
    rng = np.random.default_rng(3)
    g = connected_random_multilayer(rng, 24, 2)
    agg = aggregate(g, LayerWeights.uniform(2))
    emb = smallest_eigenpairs(agg, 4)
    lap = agg.laplacian_dense()
    linf = np.max(np.abs(lap).sum(axis=1))
    for j in range(emb.Y.shape[1]):
        resid = lap @ emb.Y[:, j] - emb.eigenvalues[j] * emb.Y[:, j]
        assert np.linalg.norm(resid) <= 1e-6 * linf


def test_disconnected_graph_rejected(two_triangles):
    agg = aggregate(two_triangles, LayerWeights.uniform(1))
    with pytest.raises(DisconnectedGraphError):
        smallest_eigenpairs(agg, 2)


def test_k_out_of_range_rejected(triangle):
    agg = aggregate(triangle, LayerWeights.uniform(1))
    with pytest.raises(ValueError):
        smallest_eigenpairs(agg, 1)
    with pytest.raises(ValueError):
        smallest_eigenpairs(agg, 3)  # K must be <= n-1


def test_eigenvector_sign_convention():
    rng = np.random.default_rng(7)
    g = connected_random_multilayer(rng, 15, 1)
    agg = aggregate(g, LayerWeights.uniform(1))
    emb = smallest_eigenpairs(agg, 3)
    for col in emb.Y.T:
        assert col[np.argmax(np.abs(col))] > 0


@given(seed=st.integers(0, 300), K=st.integers(2, 6))
@settings(max_examples=25, deadline=None)
def test_eigenvalue_ordering(seed, K):
    rng = np.random.default_rng(seed)
    g = connected_random_multilayer(rng, 12, 2, density=0.6)
    agg = aggregate(g, LayerWeights.uniform(2))
    emb = smallest_eigenpairs(agg, K)
    full = np.append(emb.eigenvalues, emb.lambda_kplus1)
    assert np.all(np.diff(full) >= -1e-10)
    assert np.all(full >= 0.0)


# ------------------------------------------------------ partial sums


def test_partial_sum_triangle_k3_from_dense_oracle(triangle):
    agg = aggregate(triangle, LayerWeights.uniform(1))
    spectrum = dense_laplacian_spectrum(agg)
    emb = SpectralEmbedding(
        Y=np.zeros((3, 2)), eigenvalues=spectrum[1:3], lambda_kplus1=float("nan")
    )
    assert partial_eigenvalue_sum(emb) == pytest.approx(6.0, abs=1e-9)


def test_partial_sum_equals_trace_form():
    rng = np.random.default_rng(19)
    g = connected_random_multilayer(rng, 20, 2)
    agg = aggregate(g, LayerWeights.uniform(2))
    emb = smallest_eigenpairs(agg, 4)
    lap = agg.laplacian_dense()
    assert partial_eigenvalue_sum(emb) == pytest.approx(
        float(np.trace(emb.Y.T @ lap @ emb.Y)), abs=1e-8
    )


# ----------------------------------------------------------------- kmeans


def test_kmeans_separated_clouds():
    rng = np.random.default_rng(0)
    rows = np.vstack([
        rng.normal((-10, 0), 0.1, (20, 2)),
        rng.normal((10, 0), 0.1, (20, 2)),
    ])
    asn = kmeans(rows, 2, seed=1)
    assert asn.labels[:20].min() == asn.labels[:20].max()
    assert asn.labels[20:].min() == asn.labels[20:].max()
    assert asn.labels[0] != asn.labels[20]


def test_kmeans_identical_points_repaired_singleton():
    rows = np.ones((6, 2))
    asn = kmeans(rows, 2, seed=0)
    assert asn.K == 2
    assert sorted(asn.sizes) == [1, 5]
    centroids = [rows[asn.labels == k].mean(axis=0) for k in range(2)]
    wcss = sum(
        float(np.sum((rows[asn.labels == k] - centroids[k]) ** 2)) for k in range(2)
    )
    assert wcss == pytest.approx(0.0, abs=1e-12)


def exhaustive_best_wcss(rows):
    n = rows.shape[0]
    best = np.inf
    for mask in range(1, 2 ** (n - 1)):  # fix point 0 in cluster 0 (symmetry)
        labels = np.array([(mask >> i) & 1 for i in range(n)])
        wcss = 0.0
        for k in (0, 1):
            pts = rows[labels == k]
            if len(pts):
                wcss += float(np.sum((pts - pts.mean(axis=0)) ** 2))
        best = min(best, wcss)
    return best


def test_kmeans_wcss_matches_exhaustive_oracle():
    rng = np.random.default_rng(42)
    rows = rng.standard_normal((8, 1))
    asn = kmeans(rows, 2, seed=3)
    wcss = 0.0
    for k in range(2):
        pts = rows[asn.labels == k]
        wcss += float(np.sum((pts - pts.mean(axis=0)) ** 2))
    assert wcss == pytest.approx(exhaustive_best_wcss(rows), abs=1e-9)


def test_kmeans_deterministic_and_restarts_never_worse():
    rng = np.random.default_rng(9)
    rows = rng.standard_normal((40, 3))

    def wcss_of(asn):
        total = 0.0
        for k in range(asn.K):
            pts = rows[asn.labels == k]
            total += float(np.sum((pts - pts.mean(axis=0)) ** 2))
        return total

    a = kmeans(rows, 4, seed=5)
    b = kmeans(rows, 4, seed=5)
    assert np.array_equal(a.labels, b.labels)
    assert wcss_of(kmeans(rows, 4, seed=5, restarts=20)) <= wcss_of(
        kmeans(rows, 4, seed=5, restarts=1)
    ) + 1e-12


# ---------------------------------------------------------------- pipeline


def test_sgc_bisects_weakly_joined_cliques(clique_pair_graph):
    asn, _ = multilayer_sgc(clique_pair_graph, LayerWeights.uniform(1), 2, seed=0)
    assert asn.labels[:5].min() == asn.labels[:5].max()
    assert asn.labels[5:].min() == asn.labels[5:].max()
    assert asn.labels[0] != asn.labels[5]


def test_sgc_reliable_regime_detectability():
    params = TwoLayerCorrelatedParams(
        cluster_sizes=(100, 100, 100), q11=0.3, q10=0.2, q01=0.1, q00=0.4,
        p1=0.05, p2=0.05, seed=21,
    )
    graph, truth = generate_two_layer(params)
    asn, _ = multilayer_sgc(graph, LayerWeights((0.5, 0.5)), 3, seed=0)
    assert detectability(asn, truth) >= 0.95


def test_sgc_noise_regime_near_random_guess():
    dets = []
    for trial in range(3):
        params = TwoLayerCorrelatedParams(
            cluster_sizes=(100, 100, 100), q11=0.3, q10=0.2, q01=0.1, q00=0.4,
            p1=0.45, p2=0.45, seed=60 + trial,
        )
        graph, truth = generate_two_layer(params)
        asn, _ = multilayer_sgc(graph, LayerWeights((0.5, 0.5)), 3, seed=trial)
        dets.append(detectability(asn, truth))
    assert 0.28 <= np.mean(dets) <= 0.50


def test_assignment_invariant_under_uniform_weight_scaling():
    rng = np.random.default_rng(23)
    g = connected_random_multilayer(rng, 18, 1)
    scaled = dense_graph(g.node_ids, 2.0 * g.layers[0].toarray())
    a1, _ = multilayer_sgc(g, LayerWeights.uniform(1), 3, seed=4)
    a2, _ = multilayer_sgc(scaled, LayerWeights.uniform(1), 3, seed=4)
    assert np.array_equal(a1.labels, a2.labels)


# --------------------------------------------------------- sin-Theta dist


def test_subspace_distance_identical_is_zero():
    rng = np.random.default_rng(1)
    Y = np.linalg.qr(rng.standard_normal((10, 3)))[0]
    assert subspace_distance(Y, Y) == pytest.approx(0.0, abs=1e-12)


def test_subspace_distance_orthogonal_complements():
    Y = np.eye(4)[:, :2]
    Yt = np.eye(4)[:, 2:]
    assert subspace_distance(Y, Yt) == pytest.approx(np.sqrt(2.0), abs=1e-12)


def test_subspace_distance_rotation_invariant():
    rng = np.random.default_rng(2)
    Y = np.linalg.qr(rng.standard_normal((12, 3)))[0]
    rot = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    assert subspace_distance(Y, Y @ rot) == pytest.approx(0.0, abs=1e-10)


def test_subspace_distance_shape_mismatch_rejected():
    Y = np.eye(4)[:, :2]
    with pytest.raises(ValueError):
        subspace_distance(Y, np.eye(4)[:, :3])


# ------------------------------------------------------- assignment type


def test_cluster_assignment_validation():
    with pytest.raises(ValueError):
        ClusterAssignment(np.array([0, 2]))  # label 1 missing
    asn = ClusterAssignment(np.array([1, 0, 1, 2]))
    assert asn.K == 3
    assert tuple(asn.sizes) == (1, 2, 1)
    assert asn.n_min == 1
    assert asn.n_max == 2


def test_from_label_map_lexicographic():
    asn = ClusterAssignment.from_label_map(
        {"a": "red", "b": "blue", "c": "red"}, ["a", "b", "c"]
    )
    # labels sorted lexicographically: blue -> 0, red -> 1
    assert list(asn.labels) == [1, 0, 1]
