"""External and internal clustering quality metrics.

External metrics (need ground truth): normalized mutual information, Rand
index, and mean per-cluster F-measure.  Internal metrics (need only the
graph): conductance and normalized cut, evaluated per layer with the
single-layer formulas, averaged over clusters within a layer, and summed
across layers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .graph_core import MultilayerGraph
from .spectral import ClusterAssignment

__all__ = [
    "MetricReport",
    "conductance",
    "contingency_table",
    "f_measure",
    "metric_report",
    "nmi",
    "normalized_cut",
    "rand_index",
]


def contingency_table(found: ClusterAssignment, truth: ClusterAssignment) -> np.ndarray:
    """Integer overlap counts; entry (k, k') = |found cluster k ∩ truth cluster k'|.

    Raises:
        ValueError: the assignments cover different node counts.
    """
    if found.n != truth.n:
        raise ValueError("assignments must cover the same node set")
    table = np.zeros((found.K, truth.K), dtype=np.int64)
    np.add.at(table, (found.labels, truth.labels), 1)
    return table


def nmi(found: ClusterAssignment, truth: ClusterAssignment) -> float:
    """Normalized mutual information ``2 I / (H(found) + H(truth))``.

    Natural-log entropies (the base cancels).  When both partitions are the
    single all-nodes cluster, both entropies vanish and the partitions agree
    exactly; that 0/0 is defined as 1.
    """
    table = contingency_table(found, truth).astype(np.float64)
    n = float(found.n)
    joint = table / n
    pf = joint.sum(axis=1)
    pt = joint.sum(axis=0)
    outer = pf[:, None] * pt[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        log_ratio = np.where(joint > 0, np.log(np.where(joint > 0, joint, 1.0) / np.where(outer > 0, outer, 1.0)), 0.0)
    mutual = float(np.sum(joint * log_ratio))
    h_found = -float(np.sum(special.xlogy(pf, pf)))
    h_truth = -float(np.sum(special.xlogy(pt, pt)))
    if h_found + h_truth == 0.0:
        return 1.0
    value = 2.0 * mutual / (h_found + h_truth)
    return float(min(max(value, 0.0), 1.0))


def rand_index(found: ClusterAssignment, truth: ClusterAssignment) -> float:
    """Rand index: the fraction of unordered node pairs the partitions agree on.

    Agreement means together in both partitions or apart in both.  Computed
    exactly with integer pair counts from the contingency table.
    """
    table = contingency_table(found, truth)
    n = found.n
    if n < 2:
        return 1.0

    def pairs(x: np.ndarray) -> int:
        x = x.astype(object)  # exact integer arithmetic for large n
        return int(np.sum(x * (x - 1) // 2))

    together_both = pairs(table.ravel())
    together_found = pairs(table.sum(axis=1))
    together_truth = pairs(table.sum(axis=0))
    total = n * (n - 1) // 2
    # apart-in-both = total - together_found - together_truth + together_both
    agreements = together_both + (total - together_found - together_truth + together_both)
    return agreements / total


def f_measure(found: ClusterAssignment, truth: ClusterAssignment) -> float:
    """Mean per-found-cluster F score against each cluster's best-overlap truth cluster.

    For each found cluster, the truth cluster with the largest overlap
    defines precision = overlap / found size and recall = overlap / truth
    size; overlap ties resolve toward the smaller truth cluster (the larger
    recall, hence larger F), which keeps the metric invariant under
    relabeling of either argument.  A zero precision+recall contributes 0.
    """
    table = contingency_table(found, truth)
    found_sizes = table.sum(axis=1)
    truth_sizes = table.sum(axis=0)
    total = 0.0
    for k in range(found.K):
        best = int(table[k].max())
        candidates = np.flatnonzero(table[k] == best)
        j = int(candidates[np.argmin(truth_sizes[candidates])])
        overlap = float(best)
        prec = overlap / found_sizes[k]
        rec = overlap / truth_sizes[j] if truth_sizes[j] > 0 else 0.0
        total += 0.0 if prec + rec == 0.0 else 2.0 * prec * rec / (prec + rec)
    return total / found.K


def _layer_cut_stats(W, labels: np.ndarray, K: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Per-cluster within weight, cut weight, and the layer's total weight."""
    n = labels.size
    onehot = np.zeros((n, K))
    onehot[np.arange(n), labels] = 1.0
    blocks = onehot.T @ (W @ onehot)
    within = np.diag(blocks) / 2.0
    cut = blocks.sum(axis=1) - np.diag(blocks)
    total = float(blocks.sum()) / 2.0
    return within, cut, total


def conductance(found: ClusterAssignment, graph: MultilayerGraph) -> float:
    """Sum over layers of the mean per-cluster conductance.

    Within a layer, cluster k with internal weight W_in and boundary weight
    W_out contributes ``W_out / (2 W_in + W_out)`` (0 when the denominator
    is 0); the layer value is the mean over the K clusters, and layers add.
    Lower is better.
    """
    if found.n != graph.n:
        raise ValueError("assignment does not cover the node set")
    total = 0.0
    for W in graph.layers:
        within, cut, _ = _layer_cut_stats(W, found.labels, found.K)
        denom = 2.0 * within + cut
        terms = np.where(denom > 0, cut / np.where(denom > 0, denom, 1.0), 0.0)
        total += float(terms.mean())
    return total


def normalized_cut(found: ClusterAssignment, graph: MultilayerGraph) -> float:
    """Sum over layers of the mean per-cluster normalized cut.

    Cluster k contributes
    ``W_out/(2 W_in + W_out) + W_out/(2 (W_all - W_in) + W_out)`` where
    W_all is the layer's total edge weight; zero-denominator terms are 0.
    Lower is better.
    """
    if found.n != graph.n:
        raise ValueError("assignment does not cover the node set")
    total = 0.0
    for W in graph.layers:
        within, cut, w_all = _layer_cut_stats(W, found.labels, found.K)
        d1 = 2.0 * within + cut
        d2 = 2.0 * (w_all - within) + cut
        terms = np.where(d1 > 0, cut / np.where(d1 > 0, d1, 1.0), 0.0)
        terms = terms + np.where(d2 > 0, cut / np.where(d2 > 0, d2, 1.0), 0.0)
        total += float(terms.mean())
    return total


@dataclass(frozen=True)
class MetricReport:
    """Clustering quality summary.

    External metrics are None when no ground truth was supplied.
    """

    nmi: float | None
    ri: float | None
    f_measure: float | None
    conductance: float
    nc: float


def metric_report(
    found: ClusterAssignment,
    graph: MultilayerGraph,
    truth: ClusterAssignment | None = None,
) -> MetricReport:
    """Assemble all metrics for one clustering of one graph."""
    return MetricReport(
        nmi=None if truth is None else nmi(found, truth),
        ri=None if truth is None else rand_index(found, truth),
        f_measure=None if truth is None else f_measure(found, truth),
        conductance=conductance(found, graph),
        nc=normalized_cut(found, graph),
    )
