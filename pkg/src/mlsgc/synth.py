"""Synthetic multilayer graph generators and ground-truth scoring.

Two generators:

* a two-layer correlated model — within each cluster, every node pair draws
  one of four joint outcomes (edge in both layers / layer 1 only / layer 2
  only / neither), so the layers are correlated; between clusters each layer
  adds independent Bernoulli noise edges; all weights are 1;
* a general random-interconnection model — arbitrary per-layer within-cluster
  edge probabilities (or explicitly supplied within-cluster subgraphs) plus
  between-cluster blocks with per-block edge probabilities and weight
  distributions.

Plus cluster detectability: the best-matching fraction of nodes two
assignments agree on, via optimal assignment over cluster overlaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment

from .graph_core import MultilayerGraph
from .metrics import contingency_table
from .spectral import ClusterAssignment

__all__ = [
    "GeneralRimParams",
    "TwoLayerCorrelatedParams",
    "detectability",
    "generate_rim",
    "generate_two_layer",
]


def _node_ids(n: int) -> tuple[str, ...]:
    """Zero-padded node names whose lexicographic order is the numeric order."""
    width = max(1, len(str(n - 1)))
    return tuple(f"n{i:0{width}d}" for i in range(n))


def _truth_assignment(cluster_sizes: tuple[int, ...]) -> ClusterAssignment:
    return ClusterAssignment(np.repeat(np.arange(len(cluster_sizes)), cluster_sizes))


def _cluster_slices(cluster_sizes: tuple[int, ...]) -> list[slice]:
    offsets = np.concatenate(([0], np.cumsum(cluster_sizes)))
    return [slice(int(offsets[k]), int(offsets[k + 1])) for k in range(len(cluster_sizes))]


def _validate_sizes(cluster_sizes: tuple[int, ...]) -> None:
    if len(cluster_sizes) == 0:
        raise ValueError("at least one cluster is required")
    if any(int(s) < 1 for s in cluster_sizes):
        raise ValueError("cluster sizes must be positive")


def _block_from_mask(rows: np.ndarray, cols: np.ndarray, weights: np.ndarray,
                     row_off: int, col_off: int,
                     out_rows: list[np.ndarray], out_cols: list[np.ndarray],
                     out_data: list[np.ndarray]) -> None:
    """Append a (symmetrized later) off-diagonal block's entries."""
    out_rows.append(rows + row_off)
    out_cols.append(cols + col_off)
    out_data.append(weights)


@dataclass(frozen=True)
class TwoLayerCorrelatedParams:
    """Parameters of the two-layer correlated generator.

    Attributes:
        cluster_sizes: planted cluster sizes (node count is their sum).
        q11, q10, q01, q00: within-cluster joint edge probabilities — both
            layers / layer 1 only / layer 2 only / neither.  Must be
            nonnegative and sum to 1 (tolerance 1e-12).
        p1, p2: per-layer between-cluster edge probabilities in [0, 1].
        seed: RNG seed; the generated graph is a pure function of the params.
    """

    cluster_sizes: tuple[int, ...]
    q11: float
    q10: float
    q01: float
    q00: float
    p1: float
    p2: float
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "cluster_sizes", tuple(int(s) for s in self.cluster_sizes))
        _validate_sizes(self.cluster_sizes)
        qs = (self.q11, self.q10, self.q01, self.q00)
        if any(q < 0.0 for q in qs):
            raise ValueError("joint probabilities must be nonnegative")
        if abs(sum(qs) - 1.0) > 1e-12:
            raise ValueError(f"joint probabilities must sum to 1, got {sum(qs)}")
        for name, p in (("p1", self.p1), ("p2", self.p2)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")

    @property
    def n(self) -> int:
        return int(sum(self.cluster_sizes))


def generate_two_layer(params: TwoLayerCorrelatedParams) -> tuple[MultilayerGraph, ClusterAssignment]:
    """Sample a two-layer correlated multilayer graph with planted clusters.

    Within each cluster, each node pair draws a single uniform variate and
    the four joint outcomes partition [0, 1] as
    ``[0, q11) -> both layers``, ``[q11, q11+q10) -> layer 1 only``,
    ``[q11+q10, q11+q10+q01) -> layer 2 only``, rest -> neither.  Between
    clusters each layer includes each pair independently with its own
    probability.  All edge weights are 1.

    Returns:
        The graph (nodes named ``n000...``, cluster blocks contiguous) and
        the planted ground-truth assignment.
    """
    rng = np.random.default_rng(params.seed)
    n = params.n
    K = len(params.cluster_sizes)
    slices = _cluster_slices(params.cluster_sizes)

    rows1: list[np.ndarray] = []
    cols1: list[np.ndarray] = []
    rows2: list[np.ndarray] = []
    cols2: list[np.ndarray] = []

    edge1_hi = params.q11 + params.q10
    edge2_lo = edge1_hi
    edge2_hi = edge1_hi + params.q01

    for k in range(K):
        sl = slices[k]
        size = sl.stop - sl.start
        iu, ju = np.triu_indices(size, k=1)
        u = rng.random(iu.size)
        in1 = u < edge1_hi
        in2 = (u < params.q11) | ((u >= edge2_lo) & (u < edge2_hi))
        rows1.append(iu[in1] + sl.start)
        cols1.append(ju[in1] + sl.start)
        rows2.append(iu[in2] + sl.start)
        cols2.append(ju[in2] + sl.start)

    for ki in range(K):
        for kj in range(ki + 1, K):
            si, sj = slices[ki], slices[kj]
            shape = (si.stop - si.start, sj.stop - sj.start)
            for p, rows, cols in ((params.p1, rows1, cols1), (params.p2, rows2, cols2)):
                mask = rng.random(shape) < p
                bi, bj = np.nonzero(mask)
                rows.append(bi + si.start)
                cols.append(bj + sj.start)

    def build(rows: list[np.ndarray], cols: list[np.ndarray]) -> sparse.coo_array:
        r = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
        c = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
        data = np.ones(r.size + c.size)
        return sparse.coo_array(
            (data, (np.concatenate((r, c)), np.concatenate((c, r)))), shape=(n, n)
        )

    graph = MultilayerGraph.from_matrices(_node_ids(n), [build(rows1, cols1), build(rows2, cols2)])
    return graph, _truth_assignment(params.cluster_sizes)


@dataclass(frozen=True)
class GeneralRimParams:
    """Parameters of the general random-interconnection generator.

    Exactly one of ``within_probs`` and ``within_graphs`` must be given.

    Attributes:
        cluster_sizes: planted cluster sizes.
        n_layers: number of layers L.
        within_probs: per-layer per-cluster within-cluster edge
            probabilities, shape (L, K); generated within-cluster subgraphs
            are Bernoulli with unit weights.
        within_graphs: explicit within-cluster weight matrices, nested
            ``[layer][cluster]`` (each a dense or sparse symmetric
            nonnegative matrix of the cluster's size).  Lets callers reuse
            identical signal across graphs that differ only in noise.
        noise_probs: between-cluster edge probabilities — a scalar per layer
            (length-L sequence, all blocks alike) or a full (L, K, K)
            symmetric array (diagonal ignored).
        noise_weight_means: mean between-cluster edge weights, same shape
            options as ``noise_probs``; default 1 everywhere.  Must be
            positive wherever the matching probability is positive.
        weight_distribution: "constant" (every noise edge weighs exactly its
            mean) or "uniform" (weights ~ U(0, 2 mean); same mean, bounded
            moments).
        seed: RNG seed.
    """

    cluster_sizes: tuple[int, ...]
    n_layers: int
    within_probs: np.ndarray | None = None
    within_graphs: tuple[tuple[object, ...], ...] | None = None
    noise_probs: np.ndarray | float | None = None
    noise_weight_means: np.ndarray | float = 1.0
    weight_distribution: str = "constant"
    seed: int = 0
    _noise_p: np.ndarray = field(init=False, repr=False)
    _noise_w: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "cluster_sizes", tuple(int(s) for s in self.cluster_sizes))
        _validate_sizes(self.cluster_sizes)
        K = len(self.cluster_sizes)
        L = int(self.n_layers)
        if L < 1:
            raise ValueError("need at least one layer")
        object.__setattr__(self, "n_layers", L)
        if (self.within_probs is None) == (self.within_graphs is None):
            raise ValueError("exactly one of within_probs and within_graphs is required")
        if self.within_probs is not None:
            probs = np.asarray(self.within_probs, dtype=np.float64)
            if probs.shape != (L, K):
                raise ValueError(f"within_probs must have shape {(L, K)}, got {probs.shape}")
            if np.any((probs < 0.0) | (probs > 1.0)):
                raise ValueError("within-cluster probabilities must be in [0, 1]")
            probs.setflags(write=False)
            object.__setattr__(self, "within_probs", probs)
        else:
            graphs = tuple(tuple(layer) for layer in self.within_graphs)
            if len(graphs) != L or any(len(layer) != K for layer in graphs):
                raise ValueError(f"within_graphs must be nested (L={L}) x (K={K})")
            object.__setattr__(self, "within_graphs", graphs)
        if self.weight_distribution not in ("constant", "uniform"):
            raise ValueError("weight_distribution must be 'constant' or 'uniform'")

        object.__setattr__(self, "_noise_p", self._expand(self.noise_probs, "noise_probs", 0.0))
        object.__setattr__(self, "_noise_w", self._expand(self.noise_weight_means, "noise_weight_means", 1.0))
        if np.any((self._noise_p < 0.0) | (self._noise_p > 1.0)):
            raise ValueError("noise probabilities must be in [0, 1]")
        bad = (self._noise_p > 0.0) & (self._noise_w <= 0.0)
        iu = np.triu_indices(K, k=1)
        if any(bad[layer][iu].any() for layer in range(L)):
            raise ValueError("noise weight means must be positive wherever the probability is positive")

    def _expand(self, value, name: str, default: float) -> np.ndarray:
        """Normalize a scalar / per-layer / full (L, K, K) spec to (L, K, K)."""
        K = len(self.cluster_sizes)
        L = self.n_layers
        if value is None:
            out = np.full((L, K, K), default)
        else:
            arr = np.asarray(value, dtype=np.float64)
            if arr.ndim == 0:
                out = np.full((L, K, K), float(arr))
            elif arr.shape == (L,):
                out = np.repeat(arr, K * K).reshape(L, K, K)
            elif arr.shape == (L, K, K):
                if not np.allclose(arr, np.swapaxes(arr, 1, 2), atol=0.0, rtol=0.0):
                    raise ValueError(f"{name} per-pair matrices must be symmetric")
                out = arr.copy()
            else:
                raise ValueError(f"{name} must be scalar, shape ({L},), or ({L}, {K}, {K})")
        out.setflags(write=False)
        return out

    @property
    def n(self) -> int:
        return int(sum(self.cluster_sizes))

    def noise_prob(self, layer: int, i: int, j: int) -> float:
        return float(self._noise_p[layer, i, j])

    def noise_weight_mean(self, layer: int, i: int, j: int) -> float:
        return float(self._noise_w[layer, i, j])

    def noise_level(self, layer: int, i: int, j: int) -> float:
        """The block noise level ``t = p * mean weight``."""
        return self.noise_prob(layer, i, j) * self.noise_weight_mean(layer, i, j)

    def noise_level_matrix(self) -> np.ndarray:
        """All block noise levels, shape (L, K, K) with zero diagonal."""
        out = self._noise_p * self._noise_w
        for layer in range(self.n_layers):
            np.fill_diagonal(out[layer], 0.0)
        return out


def generate_rim(params: GeneralRimParams) -> tuple[MultilayerGraph, ClusterAssignment]:
    """Sample a general random-interconnection multilayer graph.

    Within-cluster subgraphs are either Bernoulli(``within_probs``) with unit
    weights or the explicit ``within_graphs``.  Between-cluster blocks draw
    edges Bernoulli(p_ij) per layer with weights from the configured
    distribution around the block mean.

    Returns:
        The graph and the planted ground-truth assignment.
    """
    rng = np.random.default_rng(params.seed)
    n = params.n
    K = len(params.cluster_sizes)
    slices = _cluster_slices(params.cluster_sizes)
    matrices = []

    for layer in range(params.n_layers):
        rows: list[np.ndarray] = []
        cols: list[np.ndarray] = []
        data: list[np.ndarray] = []

        for k in range(K):
            sl = slices[k]
            size = sl.stop - sl.start
            if params.within_probs is not None:
                iu, ju = np.triu_indices(size, k=1)
                mask = rng.random(iu.size) < params.within_probs[layer, k]
                rows.append(iu[mask] + sl.start)
                cols.append(ju[mask] + sl.start)
                data.append(np.ones(int(mask.sum())))
            else:
                block = sparse.coo_array(sparse.csr_array(
                    np.asarray(params.within_graphs[layer][k].toarray()
                               if sparse.issparse(params.within_graphs[layer][k])
                               else params.within_graphs[layer][k], dtype=np.float64)
                ))
                upper = block.row < block.col
                rows.append(block.row[upper] + sl.start)
                cols.append(block.col[upper] + sl.start)
                data.append(block.data[upper])

        for ki in range(K):
            for kj in range(ki + 1, K):
                p = params.noise_prob(layer, ki, kj)
                if p <= 0.0:
                    continue
                si, sj = slices[ki], slices[kj]
                mask = rng.random((si.stop - si.start, sj.stop - sj.start)) < p
                bi, bj = np.nonzero(mask)
                mean = params.noise_weight_mean(layer, ki, kj)
                if params.weight_distribution == "constant":
                    weights = np.full(bi.size, mean)
                else:
                    weights = rng.uniform(0.0, 2.0 * mean, size=bi.size)
                    keep = weights > 0.0  # drop measure-zero exact zeros
                    weights, bi, bj = weights[keep], bi[keep], bj[keep]
                rows.append(bi + si.start)
                cols.append(bj + sj.start)
                data.append(weights)

        r = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
        c = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
        d = np.concatenate(data) if data else np.empty(0)
        matrices.append(
            sparse.coo_array(
                (np.concatenate((d, d)), (np.concatenate((r, c)), np.concatenate((c, r)))),
                shape=(n, n),
            )
        )

    graph = MultilayerGraph.from_matrices(_node_ids(n), matrices)
    return graph, _truth_assignment(params.cluster_sizes)


def detectability(found: ClusterAssignment, truth: ClusterAssignment) -> float:
    """Best-matching agreement fraction between two assignments, in [0, 1].

    The maximum over cluster relabelings of ``(1/n) sum_k |found_perm(k) ∩
    truth_k|``, computed as a maximum-weight assignment on the overlap
    matrix (padded square when the cluster counts differ, extra clusters
    matching nothing).  Equals 1 iff the partitions coincide.
    """
    table = contingency_table(found, truth)
    size = max(table.shape)
    padded = np.zeros((size, size), dtype=np.float64)
    padded[: table.shape[0], : table.shape[1]] = table
    rows, cols = linear_sum_assignment(padded, maximize=True)
    return float(padded[rows, cols].sum() / found.n)
