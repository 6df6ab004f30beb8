"""Automated model-order selection with noise-adaptive layer weighting.

The algorithm grows the cluster count K from 2 upward.  At each K it first
clusters with the initial layer weights and estimates each layer's noise
level, then scans a grid of adaptation strengths tau, reweighting layers
inversely to ``1 + tau * noise`` and re-clustering.  Each candidate
clustering must pass a battery of reliability tests:

1. every detected cluster has at least K nodes,
2. a block-wise homogeneity test on every ordered cluster pair in every
   layer finds no evidence against the block-constant edge model,
3. either all layers accept the identical-noise likelihood-ratio test and
   the aggregated noise estimate sits below the estimated phase-transition
   lower bound, or all layers accept the non-identical threshold test and
   the aggregated maximum noise level does.

The first K with any surviving candidates wins; among its candidates, the
one maximizing the signal-to-noise ratio (transition bound over aggregated
noise) provides the final weights and clustering.  When no K up to the cap
produces a reliable candidate, the result is marked not applicable.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .graph_core import LayerWeights, MultilayerGraph, aggregate, connected_components
from .noise_stats import (
    anscombe_nonidentical_test,
    estimate_noise,
    glrt_identical_noise,
    vtest_from_row_sums,
)
from .spectral import (
    ClusterAssignment,
    SpectralEmbedding,
    kmeans,
    smallest_eigenpairs,
)
from .theory import cluster_partial_sums

__all__ = [
    "MimosaConfig",
    "MimosaResult",
    "ReliableCandidate",
    "TraceRecord",
    "adapt_weights",
    "parse_result",
    "run_mimosa",
    "serialize_result",
    "snr",
]

_DEFAULT_TAUS = (0.0, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4, 1e5)


@dataclass(frozen=True)
class MimosaConfig:
    """Tuning knobs of the model-order selection loop.

    Attributes:
        w_ini: initial layer weights; None means uniform.
        tau_set: ordered grid of adaptation strengths (nonnegative).
        eta: homogeneity-test significance level; any block p-value at or
            below it rejects the candidate clustering.
        alpha: identical-noise test level, one scalar for every layer or a
            per-layer sequence.
        alpha_prime: non-identical threshold test level, scalar or per-layer.
        max_k: largest cluster count to try; None means ``n // 2``.
        seed: root seed; the whole run is a pure function of (graph, config).
    """

    w_ini: LayerWeights | None = None
    tau_set: tuple[float, ...] = _DEFAULT_TAUS
    eta: float = 1e-5
    alpha: float | tuple[float, ...] = 0.05
    alpha_prime: float | tuple[float, ...] = 0.05
    max_k: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        taus = tuple(float(t) for t in self.tau_set)
        if not taus:
            raise ValueError("tau_set must not be empty")
        if any(not math.isfinite(t) or t < 0.0 for t in taus):
            raise ValueError("every tau must be finite and nonnegative")
        object.__setattr__(self, "tau_set", taus)
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must be in (0, 1), got {self.eta}")
        for name in ("alpha", "alpha_prime"):
            value = getattr(self, name)
            levels = (value,) if np.isscalar(value) else tuple(float(a) for a in value)
            if any(not 0.0 < a < 1.0 for a in levels):
                raise ValueError(f"{name} levels must be in (0, 1)")
            if not np.isscalar(value):
                object.__setattr__(self, name, levels)
        if self.max_k is not None and self.max_k < 2:
            raise ValueError(f"max_k must be at least 2, got {self.max_k}")
        if int(self.seed) < 0:
            raise ValueError("seed must be nonnegative")


def adapt_weights(w_ini: LayerWeights, t_hat: np.ndarray, tau: float) -> LayerWeights:
    """Reweight layers inversely to their estimated noise.

    ``w_l proportional to w_ini_l / (1 + tau * t_hat_l)``, renormalized to
    the simplex.  ``tau = 0`` returns ``w_ini`` unchanged; equal noise across
    layers cancels in the normalization for every tau.

    Raises:
        ValueError: negative tau, negative noise estimates, or length
            mismatch.
    """
    t_hat = np.asarray(t_hat, dtype=np.float64).ravel()
    if tau < 0.0 or not math.isfinite(tau):
        raise ValueError(f"tau must be finite and nonnegative, got {tau}")
    if t_hat.size != len(w_ini):
        raise ValueError("noise vector length must match the weight vector")
    if np.any(t_hat < 0.0):
        raise ValueError("noise estimates must be nonnegative")
    return LayerWeights(w_ini.values / (1.0 + tau * t_hat))


def snr(t_lb_hat: float, t_hat_w: float) -> float:
    """Signal-to-noise ratio of a candidate: transition bound over noise.

    A zero (or negative) aggregated noise estimate returns +infinity, which
    sorts above every finite ratio.
    """
    if t_hat_w <= 0.0:
        return float("inf")
    return float(t_lb_hat / t_hat_w)


@dataclass(frozen=True)
class TraceRecord:
    """One logged step of the selection loop.

    ``tau`` is None on per-K initialization records.  ``outcome`` is one of
    ``init_ok``, ``init_component_too_small``, ``component_too_small``,
    ``degenerate_cluster``, ``homogeneity_reject``, ``reliable`` and
    ``not_reliable``.
    """

    index: int
    K: int
    tau: float | None
    w: tuple[float, ...] | None
    outcome: str
    disconnected: bool = False
    component_size: int | None = None
    cluster_sizes: tuple[int, ...] | None = None
    vtest_min_p: float | None = None
    vtest_min_arg: tuple[int, int, int] | None = None
    t_hat_layers: tuple[float, ...] | None = None
    t_max_layers: tuple[float, ...] | None = None
    t_hat_w: float | None = None
    t_max_w: float | None = None
    t_lb_hat: float | None = None
    glrt_accepts: tuple[bool, ...] | None = None
    anscombe_accepts: tuple[bool, ...] | None = None
    route: str | None = None
    reliable: bool = False
    snr: float | None = None


@dataclass(frozen=True)
class ReliableCandidate:
    """A clustering that passed every reliability test.

    ``assignment`` always covers the full node set; when the aggregation was
    disconnected, nodes outside the clustered component carry pseudo-cluster
    labels K, K+1, ... (one per extra component) for reporting only.
    """

    w: LayerWeights
    assignment: ClusterAssignment
    snr: float
    K: int
    tau: float
    trace_index: int
    t_lb_hat: float
    t_hat_w: float
    t_max_w: float
    route: str


@dataclass(frozen=True)
class MimosaResult:
    """Outcome of a selection run.

    ``status`` is "found" (all selection fields populated) or
    "not_applicable" (only the trace is populated).  ``K`` is the selected
    model order; on disconnected fallbacks the assignment may contain extra
    pseudo-clusters beyond K.
    """

    status: str
    node_ids: tuple[str, ...]
    K: int | None
    assignment: ClusterAssignment | None
    w_star: LayerWeights | None
    snr: float | None
    reliable_set: tuple[ReliableCandidate, ...]
    trace: tuple[TraceRecord, ...]


def _per_layer(value: float | tuple[float, ...], L: int, name: str) -> tuple[float, ...]:
    if np.isscalar(value):
        return (float(value),) * L
    levels = tuple(float(v) for v in value)
    if len(levels) != L:
        raise ValueError(f"{name} has {len(levels)} levels for {L} layers")
    return levels


def _induced_subgraph(graph: MultilayerGraph, nodes: np.ndarray) -> MultilayerGraph:
    ids = tuple(graph.node_ids[i] for i in nodes)
    return MultilayerGraph.from_matrices(ids, [mat[nodes][:, nodes] for mat in graph.layers])


def _vtest_scan(graph: MultilayerGraph, assignment: ClusterAssignment) -> tuple[float, tuple[int, int, int]]:
    """Smallest homogeneity p-value over all ordered cluster pairs and layers.

    Returns (min p, (i, j, layer)); ties keep the first in (layer, i, j)
    scan order.
    """
    K = assignment.K
    onehot = np.zeros((graph.n, K))
    onehot[np.arange(graph.n), assignment.labels] = 1.0
    members = [assignment.members(k) for k in range(K)]
    sizes = assignment.sizes
    best_p, best_arg = np.inf, (0, 0, 0)
    for layer, W in enumerate(graph.layers):
        A = W.copy()
        A.data = np.ones_like(A.data)
        counts = A @ onehot  # counts[u, k] = edges from node u into cluster k
        for i in range(K):
            for j in range(K):
                if i == j:
                    continue
                p = vtest_from_row_sums(counts[members[i], j], int(sizes[j]))
                if p < best_p:
                    best_p, best_arg = p, (i, j, layer)
    return float(best_p), best_arg


def _full_assignment(
    n: int,
    component: np.ndarray,
    sub_labels: np.ndarray,
    other_components: list[np.ndarray],
    K: int,
) -> ClusterAssignment:
    """Extend component labels to all nodes with pseudo-clusters per component."""
    labels = np.empty(n, dtype=np.int64)
    labels[component] = sub_labels
    for offset, nodes in enumerate(other_components):
        labels[nodes] = K + offset
    return ClusterAssignment(labels)


def run_mimosa(graph: MultilayerGraph, config: MimosaConfig | None = None) -> MimosaResult:
    """Select the model order and layer weights of a multilayer graph.

    See the module docstring for the loop structure.  The run is
    deterministic given (graph, config).  A disconnected aggregation is
    handled by clustering the largest connected component and reporting the
    remaining components as whole pseudo-clusters (flagged in the trace).

    Raises:
        ValueError: fewer than 4 nodes, or config/graph shape mismatches.
        Numeric errors from the eigensolver propagate with the partial
        trace attached as a ``mimosa_trace`` attribute.
    """
    if config is None:
        config = MimosaConfig()
    n = graph.n
    if n < 4:
        raise ValueError(f"model-order selection needs at least 4 nodes, got {n}")
    w_ini = config.w_ini if config.w_ini is not None else LayerWeights.uniform(graph.L)
    if len(w_ini) != graph.L:
        raise ValueError(f"w_ini has {len(w_ini)} entries for {graph.L} layers")
    alpha = _per_layer(config.alpha, graph.L, "alpha")
    alpha_prime = _per_layer(config.alpha_prime, graph.L, "alpha_prime")
    max_k = config.max_k if config.max_k is not None else n // 2
    seed = int(config.seed)

    trace: list[TraceRecord] = []
    reliable: list[ReliableCandidate] = []
    try:
        _mimosa_loop(graph, config, w_ini, alpha, alpha_prime, max_k, seed, trace, reliable)
    except Exception as err:  # attach partial trace for post-mortem inspection
        err.mimosa_trace = tuple(trace)  # type: ignore[attr-defined]
        raise

    if reliable:
        best = min(reliable, key=lambda c: (-c.snr, c.tau, c.trace_index))
        return MimosaResult(
            status="found",
            node_ids=graph.node_ids,
            K=best.K,
            assignment=best.assignment,
            w_star=best.w,
            snr=best.snr,
            reliable_set=tuple(reliable),
            trace=tuple(trace),
        )
    return MimosaResult(
        status="not_applicable",
        node_ids=graph.node_ids,
        K=None,
        assignment=None,
        w_star=None,
        snr=None,
        reliable_set=(),
        trace=tuple(trace),
    )


def _rng_for(seed: int, K: int, z: int, stage: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, K, z, stage]))


def _kmeans_seed(seed: int, K: int, z: int) -> int:
    return int(np.random.SeedSequence([seed, K, z, 1]).generate_state(1)[0])


def _prepare_component(graph: MultilayerGraph, w: LayerWeights):
    """Aggregate and, when disconnected, restrict to the largest component.

    Returns (aggregated subgraph view, subgraph, component indices or None,
    other components, disconnected flag).  The component of maximal size
    (ties: smallest node index) is clustered.
    """
    agg = aggregate(graph, w)
    comps = connected_components(agg)
    if len(comps) == 1:
        return agg, graph, None, [], False
    sizes = np.array([c.size for c in comps])
    main = int(np.argmax(sizes))  # first maximal component wins ties
    component = comps[main]
    others = [c for i, c in enumerate(comps) if i != main]
    sub = _induced_subgraph(graph, component)
    return aggregate(sub, w), sub, component, others, True


def _mimosa_loop(
    graph: MultilayerGraph,
    config: MimosaConfig,
    w_ini: LayerWeights,
    alpha: tuple[float, ...],
    alpha_prime: tuple[float, ...],
    max_k: int,
    seed: int,
    trace: list[TraceRecord],
    reliable: list[ReliableCandidate],
) -> None:
    prev_embedding: SpectralEmbedding | None = None
    prev_component_key: tuple[int, ...] | None = None

    for K in range(2, max_k + 1):
        # Step 1: cluster with the initial weights.
        agg_ini, sub_ini, comp_ini, others_ini, disc_ini = _prepare_component(graph, w_ini)
        if disc_ini:
            warnings.warn(
                f"aggregated graph is disconnected; clustering its largest component "
                f"({sub_ini.n} of {graph.n} nodes)",
                stacklevel=3,
            )
        comp_key = tuple(comp_ini) if comp_ini is not None else None
        if sub_ini.n < K + 1:
            trace.append(TraceRecord(
                index=len(trace), K=K, tau=None, w=tuple(w_ini.values),
                outcome="init_component_too_small", disconnected=disc_ini,
                component_size=sub_ini.n,
            ))
            prev_embedding, prev_component_key = None, None
            continue

        warm = prev_embedding.Y if (prev_embedding is not None and prev_component_key == comp_key) else None
        emb_ini = smallest_eigenpairs(agg_ini, K, rng=_rng_for(seed, K, 0, 0), warm_start=warm)
        asg_ini = kmeans(emb_ini.Y, K, seed=_kmeans_seed(seed, K, 0))
        est_ini = estimate_noise(sub_ini, asg_ini)
        t_ini = est_ini.t_hat_layer
        trace.append(TraceRecord(
            index=len(trace), K=K, tau=None, w=tuple(w_ini.values), outcome="init_ok",
            disconnected=disc_ini, component_size=sub_ini.n if disc_ini else None,
            cluster_sizes=tuple(int(s) for s in asg_ini.sizes),
            t_hat_layers=tuple(float(t) for t in t_ini),
        ))
        prev_embedding, prev_component_key = emb_ini, comp_key

        found_at_k = False
        for z, tau in enumerate(config.tau_set, start=1):
            w = adapt_weights(w_ini, t_ini, tau)
            record = _tau_iteration(
                graph, w, K, tau, len(trace), seed, z, emb_ini, comp_key,
                alpha, alpha_prime, config.eta, reliable,
            )
            trace.append(record)
            if record.reliable:
                found_at_k = True
        if found_at_k:
            return


def _tau_iteration(
    graph: MultilayerGraph,
    w: LayerWeights,
    K: int,
    tau: float,
    trace_index: int,
    seed: int,
    z: int,
    emb_ini: SpectralEmbedding,
    init_component_key: tuple[int, ...] | None,
    alpha: tuple[float, ...],
    alpha_prime: tuple[float, ...],
    eta: float,
    reliable: list[ReliableCandidate],
) -> TraceRecord:
    agg, sub, component, others, disconnected = _prepare_component(graph, w)
    comp_key = tuple(component) if component is not None else None
    base = dict(index=trace_index, K=K, tau=float(tau), w=tuple(w.values), disconnected=disconnected,
                component_size=sub.n if disconnected else None)
    if sub.n < K + 1:
        return TraceRecord(outcome="component_too_small", **base)

    warm = emb_ini.Y if comp_key == init_component_key else None
    embedding = smallest_eigenpairs(agg, K, rng=_rng_for(seed, K, z, 0), warm_start=warm)
    sub_assignment = kmeans(embedding.Y, K, seed=_kmeans_seed(seed, K, z))
    base["cluster_sizes"] = tuple(int(s) for s in sub_assignment.sizes)

    if sub_assignment.n_min < K:
        return TraceRecord(outcome="degenerate_cluster", **base)

    min_p, min_arg = _vtest_scan(sub, sub_assignment)
    base["vtest_min_p"] = min_p
    base["vtest_min_arg"] = min_arg
    if min_p <= eta:
        return TraceRecord(outcome="homogeneity_reject", **base)

    est = estimate_noise(sub, sub_assignment)
    sums = cluster_partial_sums(sub, sub_assignment, w)
    t_lb_hat = float(sums.min() / ((K - 1) * sub_assignment.n_max))
    t_hat_w = float(w.values @ est.t_hat_layer)
    t_max_w = float(w.values @ est.t_max_layer)
    base.update(
        t_hat_layers=tuple(float(t) for t in est.t_hat_layer),
        t_max_layers=tuple(float(t) for t in est.t_max_layer),
        t_hat_w=t_hat_w,
        t_max_w=t_max_w,
        t_lb_hat=t_lb_hat,
    )

    glrt = tuple(glrt_identical_noise(est, layer, alpha[layer]).accept for layer in range(graph.L))
    base["glrt_accepts"] = glrt
    route = None
    if all(glrt):
        if t_hat_w < t_lb_hat:
            route = "identical"
    else:
        ans = tuple(
            anscombe_nonidentical_test(est, layer, t_lb_hat, alpha_prime[layer]).accept
            for layer in range(graph.L)
        )
        base["anscombe_accepts"] = ans
        if all(ans) and t_max_w < t_lb_hat:
            route = "nonidentical"

    if route is None:
        return TraceRecord(outcome="not_reliable", **base)

    if component is not None:
        assignment = _full_assignment(graph.n, component, sub_assignment.labels, others, K)
    else:
        assignment = sub_assignment
    ratio = snr(t_lb_hat, t_hat_w)
    reliable.append(ReliableCandidate(
        w=w, assignment=assignment, snr=ratio, K=K, tau=float(tau), trace_index=trace_index,
        t_lb_hat=t_lb_hat, t_hat_w=t_hat_w, t_max_w=t_max_w, route=route,
    ))
    return TraceRecord(outcome="reliable", route=route, reliable=True, snr=ratio, **base)


# ---------------------------------------------------------------------------
# Result document
# ---------------------------------------------------------------------------


def _encode(value):
    """Recursively convert a result structure to strict-JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    return value


def _decode(value):
    """Inverse of :func:`_encode` for value positions."""
    if isinstance(value, dict):
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    if value == "inf":
        return float("inf")
    if value == "-inf":
        return float("-inf")
    if value == "nan":
        return float("nan")
    return value


def _record_dict(record: TraceRecord) -> dict:
    return {
        "index": record.index,
        "K": record.K,
        "tau": record.tau,
        "w": list(record.w) if record.w is not None else None,
        "outcome": record.outcome,
        "disconnected": record.disconnected,
        "component_size": record.component_size,
        "cluster_sizes": list(record.cluster_sizes) if record.cluster_sizes is not None else None,
        "vtest_min_p": record.vtest_min_p,
        "vtest_min_arg": list(record.vtest_min_arg) if record.vtest_min_arg is not None else None,
        "t_hat_layers": list(record.t_hat_layers) if record.t_hat_layers is not None else None,
        "t_max_layers": list(record.t_max_layers) if record.t_max_layers is not None else None,
        "t_hat_w": record.t_hat_w,
        "t_max_w": record.t_max_w,
        "t_lb_hat": record.t_lb_hat,
        "glrt_accepts": list(record.glrt_accepts) if record.glrt_accepts is not None else None,
        "anscombe_accepts": list(record.anscombe_accepts) if record.anscombe_accepts is not None else None,
        "route": record.route,
        "reliable": record.reliable,
        "snr": record.snr,
    }


def _candidate_dict(candidate: ReliableCandidate, node_ids: tuple[str, ...]) -> dict:
    return {
        "K": candidate.K,
        "tau": candidate.tau,
        "trace_index": candidate.trace_index,
        "snr": candidate.snr,
        "t_lb_hat": candidate.t_lb_hat,
        "t_hat_w": candidate.t_hat_w,
        "t_max_w": candidate.t_max_w,
        "route": candidate.route,
        "w": list(candidate.w.values),
        "labels": {node: int(label) for node, label in zip(node_ids, candidate.assignment.labels)},
    }


def serialize_result(result: MimosaResult) -> str:
    """Serialize a result to a deterministic key-sorted JSON document.

    Non-finite floats are encoded as the strings "inf"/"-inf"/"nan" so the
    document stays strict JSON.  A not-applicable result carries only the
    status and the trace.
    """
    doc: dict = {
        "status": result.status,
        "trace": [_record_dict(r) for r in result.trace],
    }
    if result.status == "found":
        doc["K"] = result.K
        doc["labels"] = {
            node: int(label) for node, label in zip(result.node_ids, result.assignment.labels)
        }
        doc["w_star"] = list(result.w_star.values)
        doc["snr"] = result.snr
        doc["reliable_set"] = [_candidate_dict(c, result.node_ids) for c in result.reliable_set]
    return json.dumps(_encode(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def parse_result(text: str) -> dict:
    """Parse a serialized result document back into plain Python structures.

    Numeric sentinels ("inf"/"-inf"/"nan") decode back to floats.
    """
    doc = json.loads(text)
    if not isinstance(doc, dict) or "status" not in doc:
        raise ValueError("not a result document: missing status field")
    return _decode(doc)
