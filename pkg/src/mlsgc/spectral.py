"""Spectral embedding and K-means for aggregated multilayer graphs.

The pipeline: aggregate the layers with a convex weight vector, take the
eigenvectors of the Laplacian for its 2nd..K-th smallest eigenvalues as an
``(n, K-1)`` embedding, and run seeded K-means with restarts on the rows.
The partial eigenvalue sum ``lambda_2 + ... + lambda_K`` doubles as the
objective value of the relaxed multi-way cut and drives the phase-transition
analysis elsewhere in the package.

The Lanczos solver here deflates the known null vector ``1/sqrt(n)`` of every
Laplacian of a connected graph and fully reorthogonalizes, trading memory for
the robustness needed at phase-transition boundaries where eigenvalue gaps
shrink toward zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .graph_core import AggregatedGraph, LayerWeights, MultilayerGraph, aggregate, connected_components

__all__ = [
    "ClusterAssignment",
    "ConvergenceError",
    "DisconnectedGraphError",
    "SpectralEmbedding",
    "kmeans",
    "multilayer_sgc",
    "partial_eigenvalue_sum",
    "smallest_eigenpairs",
    "subspace_distance",
]

_LANCZOS_TOL = 1e-9
_MAX_STEPS_PER_VECTOR = 50


class ConvergenceError(RuntimeError):
    """The iterative eigensolver ran out of iterations before converging.

    Attributes:
        residual: the worst Ritz-pair residual estimate at the final step.
    """

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(message)
        self.residual = residual


class DisconnectedGraphError(ValueError):
    """The aggregated graph is disconnected where connectivity is required."""


@dataclass(frozen=True)
class SpectralEmbedding:
    """Eigenpairs 2..K of an aggregated Laplacian.

    Attributes:
        Y: ``(n, K-1)`` matrix whose columns are unit eigenvectors for the
            2nd..K-th smallest eigenvalues, each with a deterministic sign
            (the entry of largest magnitude is positive).
        eigenvalues: the corresponding eigenvalues, ascending.
        lambda_kplus1: the (K+1)-th smallest eigenvalue, used by the spectral
            gap in the subspace-perturbation bound.
    """

    Y: np.ndarray
    eigenvalues: np.ndarray
    lambda_kplus1: float

    @property
    def K(self) -> int:
        return self.Y.shape[1] + 1

    @property
    def n(self) -> int:
        return self.Y.shape[0]


def partial_eigenvalue_sum(embedding: SpectralEmbedding) -> float:
    """Sum of Laplacian eigenvalues 2..K held by an embedding."""
    return float(np.sum(embedding.eigenvalues))


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    """A hard assignment of every node to one of K non-empty clusters.

    Attributes:
        labels: int64 array of length n with values exactly 0..K-1, each
            value appearing at least once.
    """

    labels: np.ndarray
    _sizes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int64).ravel().copy()
        if labels.size == 0:
            raise ValueError("an assignment needs at least one node")
        k = int(labels.max()) + 1
        if labels.min() < 0:
            raise ValueError("labels must be nonnegative")
        sizes = np.bincount(labels, minlength=k)
        if np.any(sizes == 0):
            raise ValueError("labels must be dense: every value in 0..K-1 must appear")
        labels.setflags(write=False)
        sizes.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_sizes", sizes)

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def K(self) -> int:
        return self._sizes.size

    @property
    def sizes(self) -> np.ndarray:
        """Cluster sizes indexed by label."""
        return self._sizes

    @property
    def n_min(self) -> int:
        return int(self._sizes.min())

    @property
    def n_max(self) -> int:
        return int(self._sizes.max())

    def members(self, k: int) -> np.ndarray:
        """Sorted node indices of cluster ``k``."""
        if not 0 <= k < self.K:
            raise IndexError(f"cluster index {k} out of range for K={self.K}")
        return np.flatnonzero(self.labels == k)

    @classmethod
    def from_label_map(cls, mapping: Mapping[str, str], node_ids: Sequence[str]) -> "ClusterAssignment":
        """Build an assignment from a ``{node_id: label}`` mapping.

        Distinct label strings are mapped to integers 0..K-1 by lexicographic
        order of the label strings, so the integerization is reproducible.

        Raises:
            ValueError: a node is missing from the mapping, or the mapping
                labels nodes outside ``node_ids``.
        """
        missing = [node for node in node_ids if node not in mapping]
        if missing:
            raise ValueError(f"no label for node(s): {', '.join(missing[:5])}")
        extra = set(mapping) - set(node_ids)
        if extra:
            raise ValueError(f"labels for unknown node(s): {', '.join(sorted(extra)[:5])}")
        distinct = sorted(set(mapping.values()))
        label_index = {lab: i for i, lab in enumerate(distinct)}
        return cls(np.array([label_index[mapping[node]] for node in node_ids], dtype=np.int64))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClusterAssignment):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self) -> None:  # type: ignore[override]
        raise TypeError("ClusterAssignment is not hashable")


# ---------------------------------------------------------------------------
# Lanczos with deflation and full reorthogonalization
# ---------------------------------------------------------------------------


def _orthonormalize_against(v: np.ndarray, basis: list[np.ndarray]) -> tuple[np.ndarray, float]:
    """Two-pass classical Gram-Schmidt of ``v`` against ``basis``.

    Returns the orthogonal component and its norm (possibly ~0 on breakdown).
    """
    for _ in range(2):
        for b in basis:
            v = v - (b @ v) * b
    return v, float(np.linalg.norm(v))


def smallest_eigenpairs(
    g: AggregatedGraph,
    K: int,
    *,
    rng: np.random.Generator | None = None,
    warm_start: np.ndarray | None = None,
) -> SpectralEmbedding:
    """Eigenpairs 2..K (plus eigenvalue K+1) of the aggregated Laplacian.

    Runs Lanczos on the Laplacian matvec with the constant null vector
    deflated and full reorthogonalization against all previous Lanczos
    vectors.  On near-breakdown (the new Krylov direction vanishes, as
    happens with eigenvalue multiplicity) the iteration restarts with a
    fresh random direction orthogonal to everything found so far.

    Args:
        g: aggregated graph; must be connected.
        K: number of clusters; needs ``2 <= K <= n - 1`` so that eigenvalues
            2..K+1 all exist.
        rng: random source for start vectors; defaults to a fixed seed so
            repeated calls are identical.
        warm_start: optional ``(n, j)`` matrix whose column span seeds the
            start vector (e.g. the previous embedding when sweeping weight
            vectors).  Falls back to a cold start if the warm run fails.

    Raises:
        DisconnectedGraphError: the graph is disconnected (the deflation
            of a single constant vector would silently miss the extra
            zero eigenvalues).
        ValueError: K out of range.
        ConvergenceError: iteration cap hit before residuals fell below
            tolerance.
    """
    n = g.n
    if not 2 <= K <= n - 1:
        raise ValueError(f"K must satisfy 2 <= K <= n-1 = {n - 1}, got {K}")
    if len(connected_components(g)) != 1:
        raise DisconnectedGraphError("aggregated graph is disconnected")
    if rng is None:
        rng = np.random.default_rng(0)

    if warm_start is not None:
        try:
            return _lanczos(g, K, rng, warm_start)
        except ConvergenceError:
            pass
    return _lanczos(g, K, rng, None)


def _start_vector(n: int, rng: np.random.Generator, warm_start: np.ndarray | None,
                  deflate: list[np.ndarray]) -> np.ndarray:
    if warm_start is not None:
        v = np.sum(np.asarray(warm_start, dtype=np.float64), axis=1)
        v = v + 1e-3 * rng.standard_normal(n)
    else:
        v = rng.standard_normal(n)
    v, norm = _orthonormalize_against(v, deflate)
    while norm < 1e-12:  # pathological draw; try again
        v, norm = _orthonormalize_against(rng.standard_normal(n), deflate)
    return v / norm


def _lanczos(g: AggregatedGraph, K: int, rng: np.random.Generator,
             warm_start: np.ndarray | None) -> SpectralEmbedding:
    n = g.n
    nev = K  # eigenvalues 2..K+1 of L, i.e. the nev smallest after deflation
    max_steps = _MAX_STEPS_PER_VECTOR * (K + 2)
    ones = np.full(n, 1.0 / np.sqrt(n))
    deflate = [ones]

    V: list[np.ndarray] = []  # Lanczos vectors
    alphas: list[float] = []
    betas: list[float] = []  # betas[j] couples V[j] and V[j+1]
    v = _start_vector(n, rng, warm_start, deflate)
    scale = max(1.0, 2.0 * float(g.strength.max(initial=0.0)))
    krylov_cap = n - 1  # dimension of the deflated invariant subspace
    last_residual = np.inf

    step = 0
    while True:
        V.append(v)
        w = g.laplacian_matvec(v)
        alpha = float(v @ w)
        alphas.append(alpha)
        w, beta = _orthonormalize_against(w, deflate + V)
        step += 1
        j = len(alphas)

        theta = s = None
        if j >= nev:
            theta, s = eigh_tridiagonal(
                np.asarray(alphas), np.asarray(betas), select="i", select_range=(0, nev - 1)
            )
            # Residual bound for Ritz pair m: |beta_j * s[last, m]|.
            last_residual = float(np.max(np.abs(beta * s[-1, :])))
            if last_residual <= _LANCZOS_TOL * scale:
                break
        if j >= krylov_cap:
            # The Krylov space exhausted the deflated subspace: T is exact.
            theta, s = eigh_tridiagonal(
                np.asarray(alphas), np.asarray(betas), select="i", select_range=(0, nev - 1)
            )
            break
        if step >= max_steps:
            raise ConvergenceError(
                f"Lanczos did not converge within {max_steps} steps (residual {last_residual:.3e})",
                residual=last_residual,
            )
        if beta < 1e-12 * scale:
            # Breakdown: the Krylov space closed early (e.g. multiplicity).
            # Record a zero coupling and restart from a fresh direction.
            betas.append(0.0)
            v, norm = _orthonormalize_against(rng.standard_normal(n), deflate + V)
            while norm < 1e-12:
                v, norm = _orthonormalize_against(rng.standard_normal(n), deflate + V)
            v = v / norm
        else:
            betas.append(beta)
            v = w / beta

    basis = np.column_stack(V)  # (n, j)
    eigenvalues = np.maximum(theta, 0.0)  # clip tiny negative round-off
    X = basis @ s  # Ritz vectors, (n, nev); no extra QR so residuals stay per-column
    Y = X[:, : K - 1].copy()
    for col in range(Y.shape[1]):
        pivot = int(np.argmax(np.abs(Y[:, col])))
        if Y[pivot, col] < 0:
            Y[:, col] = -Y[:, col]
    Y.setflags(write=False)
    eig = eigenvalues[: K - 1].copy()
    eig.setflags(write=False)
    return SpectralEmbedding(Y=Y, eigenvalues=eig, lambda_kplus1=float(eigenvalues[K - 1]))


# ---------------------------------------------------------------------------
# K-means
# ---------------------------------------------------------------------------


def _kmeans_plusplus_init(rows: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    """K-means++ seeding: D^2-weighted incremental center choice."""
    n = rows.shape[0]
    centers = np.empty((K, rows.shape[1]))
    first = int(rng.integers(n))
    centers[0] = rows[first]
    d2 = np.sum((rows - centers[0]) ** 2, axis=1)
    for k in range(1, K):
        total = d2.sum()
        if total <= 0.0:
            choice = int(rng.integers(n))
        else:
            choice = int(rng.choice(n, p=d2 / total))
        centers[k] = rows[choice]
        d2 = np.minimum(d2, np.sum((rows - centers[k]) ** 2, axis=1))
    return centers


def _assign(rows: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Nearest-center labels; ties go to the lowest center index."""
    d2 = (
        np.sum(rows**2, axis=1)[:, None]
        - 2.0 * rows @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    )
    return np.argmin(d2, axis=1)


def _centers_from_labels(rows: np.ndarray, labels: np.ndarray, K: int) -> np.ndarray:
    centers = np.zeros((K, rows.shape[1]))
    counts = np.bincount(labels, minlength=K).astype(np.float64)
    np.add.at(centers, labels, rows)
    nonzero = counts > 0
    centers[nonzero] /= counts[nonzero, None]
    return centers


def _repair_empty(rows: np.ndarray, labels: np.ndarray, K: int) -> np.ndarray:
    """Fill each empty cluster with the farthest point a size->=2 cluster can spare."""
    counts = np.bincount(labels, minlength=K)
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return labels
    labels = labels.copy()
    for k in empty:
        centers = _centers_from_labels(rows, labels, K)
        dist = np.sum((rows - centers[labels]) ** 2, axis=1)
        dist[counts[labels] < 2] = -np.inf
        donor = int(np.argmax(dist))
        counts[labels[donor]] -= 1
        labels[donor] = k
        counts[k] = 1
    return labels


def _lloyd(rows: np.ndarray, centers: np.ndarray, max_iter: int) -> tuple[np.ndarray, float]:
    K = centers.shape[0]
    labels = _repair_empty(rows, _assign(rows, centers), K)
    for _ in range(max_iter):
        centers = _centers_from_labels(rows, labels, K)
        new_labels = _repair_empty(rows, _assign(rows, centers), K)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    centers = _centers_from_labels(rows, labels, K)
    inertia = float(np.sum((rows - centers[labels]) ** 2))
    return labels, inertia


def kmeans(
    rows: np.ndarray,
    K: int,
    seed: int = 0,
    *,
    restarts: int = 20,
    max_iter: int = 300,
) -> ClusterAssignment:
    """Seeded K-means with restarts on embedding rows.

    Runs ``restarts`` independent K-means++ seedings from one seeded
    generator (so the whole call is a pure function of its arguments) and
    keeps the result with the strictly lowest within-cluster sum of squares;
    ties keep the earliest restart.  Empty clusters during Lloyd iterations
    are repaired by reseeding them with the point farthest from its current
    centroid.

    Raises:
        ValueError: fewer rows than clusters.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise ValueError("rows must be a 2-D array")
    if K < 1 or rows.shape[0] < K:
        raise ValueError(f"need at least K={K} rows, got {rows.shape[0]}")
    rng = np.random.default_rng(seed)
    best_labels: np.ndarray | None = None
    best_inertia = np.inf
    for _ in range(restarts):
        centers = _kmeans_plusplus_init(rows, K, rng)
        labels, inertia = _lloyd(rows, centers, max_iter)
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    assert best_labels is not None
    return ClusterAssignment(best_labels)


def multilayer_sgc(
    graph: MultilayerGraph,
    weights: LayerWeights,
    K: int,
    seed: int = 0,
) -> tuple[ClusterAssignment, SpectralEmbedding]:
    """Full spectral-clustering pass: aggregate, embed, cluster.

    The seed splits deterministically into one stream for the eigensolver
    start vectors and one for K-means, so a single integer reproduces the
    whole pipeline.

    Raises:
        DisconnectedGraphError: the aggregated graph is disconnected.
    """
    eig_seed, km_seed = np.random.SeedSequence(seed).spawn(2)
    agg = aggregate(graph, weights)
    embedding = smallest_eigenpairs(agg, K, rng=np.random.default_rng(eig_seed))
    assignment = kmeans(embedding.Y, K, seed=int(km_seed.generate_state(1)[0]))
    return assignment, embedding


def subspace_distance(Y: np.ndarray, Y_tilde: np.ndarray) -> float:
    """Frobenius sin-theta distance between two orthonormal column spans.

    ``sqrt(sum_k (1 - sigma_k^2))`` over the singular values of
    ``Y^T Y_tilde``; zero iff the spans coincide, at most ``sqrt(K-1)``.
    """
    Y = np.asarray(Y, dtype=np.float64)
    Y_tilde = np.asarray(Y_tilde, dtype=np.float64)
    if Y.shape != Y_tilde.shape:
        raise ValueError("embeddings must have identical shapes")
    # Evaluated as the projection residual ||Y_tilde - Y (Y^T Y_tilde)||_F,
    # which equals sqrt(sum_k (1 - sigma_k^2)) exactly for orthonormal Y but
    # avoids the catastrophic cancellation of 1 - sigma^2 near sigma = 1.
    gram = Y.T @ Y_tilde
    return float(np.linalg.norm(Y_tilde - Y @ gram))
