"""Seeded synthetic datasets in the same shapes the loaders produce.

These exist so the pipeline can be exercised end to end without the published
benchmark files: a homophilous citation-style graph with sparse class-themed
bag-of-words features, and a collection of small graphs whose density and
node-label mix depend on the class.
"""

from __future__ import annotations

import numpy as np

from .data import Graph, GraphCollection

__all__ = ["synthetic_citation_graph", "synthetic_graph_collection"]


def synthetic_citation_graph(
    num_nodes=120,
    feature_dim=64,
    num_classes=4,
    num_edges=None,
    homophily=0.9,
    words_per_node=6,
    seed=0,
    name="synthcite",
):
    """A planted-partition graph with class-specific sparse binary features.

    Each class owns a contiguous block of feature columns; a node activates
    ``words_per_node`` columns mostly from its own block. Edges prefer
    same-class endpoints with probability ``homophily``.
    """
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, num_classes, size=num_nodes)
    if num_edges is None:
        num_edges = 2 * num_nodes

    by_class = [np.flatnonzero(labels == c) for c in range(num_classes)]
    edges = set()
    guard = 0
    while len(edges) < num_edges and guard < 50 * num_edges:
        guard += 1
        u = int(rng.integers(num_nodes))
        if rng.random() < homophily and by_class[labels[u]].size > 1:
            v = int(rng.choice(by_class[labels[u]]))
        else:
            v = int(rng.integers(num_nodes))
        if u != v:
            edges.add((min(u, v), max(u, v)))

    block = feature_dim // num_classes
    features = np.zeros((num_nodes, feature_dim))
    for i in range(num_nodes):
        own = labels[i] * block + rng.integers(0, max(block, 1), size=words_per_node)
        noise = rng.integers(0, feature_dim, size=max(1, words_per_node // 3))
        features[i, np.concatenate([own, noise]) % feature_dim] = 1.0
    sums = features.sum(axis=1, keepdims=True)
    features = np.divide(features, sums, out=np.zeros_like(features), where=sums > 0)

    return Graph(
        features=features,
        edges=np.array(sorted(edges), dtype=np.int64).reshape(-1, 2),
        labels=labels,
        name=name,
    )


def synthetic_graph_collection(
    num_graphs=40,
    num_classes=2,
    feature_dim=5,
    nodes_range=(6, 14),
    seed=0,
    name="synthmol",
):
    """Small random graphs whose class decides density and node-label bias."""
    rng = np.random.default_rng(seed)
    graphs, labels = [], []
    for g in range(num_graphs):
        c = g % num_classes
        n = int(rng.integers(*nodes_range))
        p = 0.25 + 0.35 * c / max(1, num_classes - 1)
        edges = {
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < p
        }
        # ring backbone keeps every graph connected
        edges |= {(i, (i + 1) % n) if i + 1 < n else (0, n - 1) for i in range(n - 1)}
        node_labels = rng.choice(
            feature_dim, size=n, p=_label_mix(feature_dim, c, num_classes)
        )
        feats = np.zeros((n, feature_dim))
        feats[np.arange(n), node_labels] = 1.0
        graphs.append(
            Graph(
                features=feats,
                edges=np.array(sorted(edges), dtype=np.int64).reshape(-1, 2),
                name=f"{name}[{g}]",
            )
        )
        labels.append(c)
    return GraphCollection(
        graphs=tuple(graphs),
        graph_labels=np.array(labels),
        num_classes=num_classes,
        name=name,
    )


def _label_mix(feature_dim, c, num_classes):
    w = np.ones(feature_dim)
    w[c % feature_dim] = 4.0
    w[(c + 1) % feature_dim] = 2.0
    return w / w.sum()
