"""Non-parametric multi-scale partitioning via iterated heavy-edge matching.

Produces hard one-hot assignment matrices on the same coarse-count schedule
the learned coarsening network uses, so the two can be swapped behind the
prompt chain. Everything here is deterministic: ties in edge weight break by
sorted endpoint ids, and every fallback merge has a fixed rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Graph, GraphCollection
from .errors import ConfigError, ShapeError

__all__ = [
    "coarse_schedule",
    "heavy_edge_matching",
    "PartitionPool",
    "build_partition_pool",
]

# guards float fuzz in ratio * count (e.g. 0.2 * 10 -> 2.0000000000000004)
_CEIL_EPS = 1e-9


def coarse_schedule(num_nodes, ratio, levels):
    """Coarse node counts per level: ``C_l = max(1, ceil(ratio * C_{l-1}))``."""
    if not 0 < ratio < 1:
        raise ConfigError(f"coarsening ratio must lie in (0, 1), got {ratio}")
    if levels < 0:
        raise ConfigError("levels must be non-negative")
    counts, c = [], num_nodes
    for _ in range(levels):
        c = max(1, math.ceil(ratio * c - _CEIL_EPS))
        counts.append(int(c))
    return counts


def _matching_pass(weights):
    """One greedy maximal-matching sweep over heaviest edges first (ties by
    sorted endpoint ids); returns disjoint pairs in pick order."""
    order = sorted(weights, key=lambda e: (-weights[e], e))
    matched, pairs = set(), []
    for u, v in order:
        if u not in matched and v not in matched:
            matched.update((u, v))
            pairs.append((u, v))
    return pairs


def heavy_edge_matching(graph, target):
    """Hard assignment of ``graph``'s nodes onto exactly ``target`` clusters.

    Rounds of greedy maximal matching contract the heaviest edges first
    (unit weights initially, so the first round's order is by sorted endpoint
    ids; contracted multi-edges accumulate weight); a round stops early once
    the cluster count reaches the target. If matching stalls above the target
    — isolated leftovers or fully contracted components — leftover singletons
    merge into their highest-degree neighbor's cluster, and as a last resort
    the smallest cluster merges into the lowest-indexed other cluster.
    """
    n = graph.num_nodes
    if not 1 <= target <= n:
        raise ShapeError(f"target must lie in [1, {n}], got {target}")

    cluster = np.arange(n)  # node -> cluster id (ids are representatives, not compact)
    raw = getattr(graph, "_weights", None)
    weights = (
        dict(raw) if raw is not None else {(int(i), int(j)): 1.0 for i, j in graph.edges}
    )
    count = n

    degree = np.zeros(n)
    for (i, j), w in weights.items():
        degree[i] += w
        degree[j] += w

    def rebuild(mapping):
        nonlocal weights
        merged = {}
        for (u, v), w in weights.items():
            u, v = mapping.get(u, u), mapping.get(v, v)
            if u != v:
                key = (min(u, v), max(u, v))
                merged[key] = merged.get(key, 0.0) + w
        weights = merged

    def apply(mapping):
        nonlocal count
        for node in range(n):
            cluster[node] = mapping.get(int(cluster[node]), int(cluster[node]))
        rebuild(mapping)
        count -= len(mapping)

    while count > target:
        pairs = _matching_pass(weights)
        if not pairs:
            break
        take = pairs[: count - target]
        apply({max(u, v): min(u, v) for u, v in take})

    if count > target:
        neighbor_sets = graph.neighbor_sets()
        while count > target:
            ids, sizes = np.unique(cluster, return_counts=True)
            singles = [int(c) for c, s in zip(ids, sizes) if s == 1]
            merge = None
            for node in singles:
                options = [
                    (degree[v], -v, int(cluster[v]))
                    for v in neighbor_sets[node]
                    if cluster[v] != node
                ]
                if options:
                    merge = (node, max(options)[2])
                    break
            if merge is None:
                smallest = int(ids[sizes.argmin()])
                other = next(int(c) for c in ids if c != smallest)
                merge = (smallest, other)
            absorb, into = merge
            apply({max(absorb, into): min(absorb, into)})

    ids = np.unique(cluster)
    lut = {int(c): k for k, c in enumerate(ids)}
    assignment = np.zeros((n, target))
    assignment[np.arange(n), [lut[int(c)] for c in cluster]] = 1.0
    return assignment


@dataclass(frozen=True)
class PartitionPool:
    """Hard assignments ``S_1 .. S_L`` (fine to coarse), one-hot rows, every
    coarse cluster non-empty."""

    assignments: tuple

    def __post_init__(self):
        mats = tuple(np.asarray(s) for s in self.assignments)
        prev = None
        for s in mats:
            if s.ndim != 2:
                raise ShapeError("assignments must be matrices")
            if not np.isin(s, (0.0, 1.0)).all() or not (s.sum(axis=1) == 1).all():
                raise ShapeError("assignment rows must be one-hot")
            if (s.sum(axis=0) == 0).any():
                raise ShapeError("every coarse cluster needs at least one member")
            if prev is not None and s.shape[0] != prev:
                raise ShapeError("assignment shapes must chain")
            prev = s.shape[1]
        object.__setattr__(self, "assignments", mats)

    @property
    def levels(self):
        return len(self.assignments)

    def counts(self):
        return [s.shape[1] for s in self.assignments]


def _contract_graph(graph, assignment):
    """The quotient graph after applying a hard assignment; parallel edges
    accumulate as weights, which a plain Graph cannot carry, so this returns
    (num_clusters, weights dict) for internal reuse."""
    labels = assignment.argmax(axis=1)
    raw = getattr(graph, "_weights", None)
    edge_weights = (
        raw.items() if raw is not None else (((i, j), 1.0) for i, j in graph.edges)
    )
    weights = {}
    for (i, j), w in edge_weights:
        a, b = int(labels[i]), int(labels[j])
        if a != b:
            key = (min(a, b), max(a, b))
            weights[key] = weights.get(key, 0.0) + w
    return assignment.shape[1], weights


def build_partition_pool(data, ratio, levels):
    """Level-by-level hard partitions on the contracted graph.

    For a :class:`GraphCollection`, returns one pool per graph (each graph's
    schedule follows its own node count).
    """
    if isinstance(data, GraphCollection):
        return [build_partition_pool(g, ratio, levels) for g in data.graphs]

    counts = coarse_schedule(data.num_nodes, ratio, levels)
    assignments = []
    current = data
    for target in counts:
        s = heavy_edge_matching(current, target)
        assignments.append(s)
        current = _as_weighted_graph(current, s)
    return PartitionPool(assignments=tuple(assignments))


class _WeightedView:
    """Minimal graph-shaped view over a contracted weighted graph, enough for
    :func:`heavy_edge_matching` (num_nodes, edges, neighbor_sets, weights)."""

    def __init__(self, num_nodes, weights):
        self.num_nodes = num_nodes
        self._weights = weights
        self.edges = np.array(sorted(weights), dtype=np.int64).reshape(-1, 2)

    def neighbor_sets(self):
        out = [set() for _ in range(self.num_nodes)]
        for i, j in self.edges:
            out[i].add(int(j))
            out[j].add(int(i))
        return out


def _as_weighted_graph(graph, assignment):
    num, weights = _contract_graph(graph, assignment)
    return _WeightedView(num, weights)
