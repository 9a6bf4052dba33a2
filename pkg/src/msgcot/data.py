"""Graph data model, dataset loaders, adjacency normalization, task sampling.

Two on-disk layouts are understood, matching the published conventions:

Citation networks (single graph), two whitespace-separated text files::

    <name>.content      one line per node: <id> <F feature values> <label>
    <name>.cites        one line per edge: <id> <id>

    31336   0 0 1 0 ... 0   Neural_Networks
    1061127 0 1 0 0 ... 0   Rule_Learning
    35      887
    35      1033

Multi-graph benchmarks (TU layout), 1-indexed text files::

    <name>_A.txt                "i, j" pairs, both directions listed
    <name>_graph_indicator.txt  graph id of node i on line i
    <name>_graph_labels.txt     one class label per graph
    <name>_node_labels.txt      one integer label per node (one-hot features)

Loaded structures are frozen: their arrays are write-protected so they can be
shared across threads and trials.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from .errors import DatasetFormatError, DatasetNotFoundError, SamplingError

__all__ = [
    "Graph",
    "GraphCollection",
    "NormalizedAdjacency",
    "TaskSplit",
    "load_citation_dataset",
    "load_tu_dataset",
    "write_citation_dataset",
    "write_tu_dataset",
    "normalize_adjacency",
    "sample_task",
]


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Graph:
    """An undirected graph with dense node features and optional node labels.

    ``edges`` holds each undirected edge once as ``(i, j)`` with ``i < j``;
    self-loops are never stored (normalization adds them).
    """

    features: np.ndarray
    edges: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[1] < 1:
            raise DatasetFormatError(f"features must be N x F with F > 0, got {feats.shape}")
        n = feats.shape[0]
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise DatasetFormatError("edge endpoint outside [0, num_nodes)")
            if (edges[:, 0] == edges[:, 1]).any():
                raise DatasetFormatError("self-loops may not be stored")
            edges = np.unique(np.sort(edges, axis=1), axis=0)
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (n,):
                raise DatasetFormatError("labels must have one entry per node")
            if labels.size and labels.min() < 0:
                raise DatasetFormatError("labels must be non-negative class indices")
        object.__setattr__(self, "features", _frozen(feats))
        object.__setattr__(self, "edges", _frozen(edges))
        object.__setattr__(self, "labels", None if labels is None else _frozen(labels))

    @property
    def num_nodes(self):
        return self.features.shape[0]

    @property
    def feature_dim(self):
        return self.features.shape[1]

    @property
    def num_edges(self):
        return self.edges.shape[0]

    @property
    def num_classes(self):
        if self.labels is None or self.labels.size == 0:
            return 0
        return int(self.labels.max()) + 1

    def neighbor_sets(self):
        """List of neighbor sets, one per node."""
        out = [set() for _ in range(self.num_nodes)]
        for i, j in self.edges:
            out[i].add(int(j))
            out[j].add(int(i))
        return out


@dataclass(frozen=True)
class GraphCollection:
    """A multi-graph dataset with one class label per graph."""

    graphs: tuple
    graph_labels: np.ndarray
    num_classes: int
    name: str = ""

    def __post_init__(self):
        graphs = tuple(self.graphs)
        if not graphs:
            raise DatasetFormatError("a collection needs at least one graph")
        f = graphs[0].feature_dim
        if any(g.feature_dim != f for g in graphs):
            raise DatasetFormatError("all graphs must share one feature dimension")
        labels = np.asarray(self.graph_labels, dtype=np.int64)
        if labels.shape != (len(graphs),):
            raise DatasetFormatError("need exactly one label per graph")
        if labels.min() < 0 or labels.max() >= self.num_classes:
            raise DatasetFormatError("graph label outside [0, num_classes)")
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "graph_labels", _frozen(labels))

    @property
    def num_graphs(self):
        return len(self.graphs)

    @property
    def feature_dim(self):
        return self.graphs[0].feature_dim

    @property
    def total_nodes(self):
        return sum(g.num_nodes for g in self.graphs)

    def subset(self, indices):
        """A new collection keeping the given graphs (order preserved)."""
        indices = list(indices)
        return GraphCollection(
            graphs=tuple(self.graphs[i] for i in indices),
            graph_labels=self.graph_labels[indices],
            num_classes=self.num_classes,
            name=self.name,
        )


@dataclass(frozen=True)
class NormalizedAdjacency:
    """Symmetric-degree normalized adjacency with self-loops, kept sparse."""

    matrix: sparse.csr_matrix
    construction: str = "symmetric-degree"

    @property
    def shape(self):
        return self.matrix.shape

    def astype(self, dtype):
        return NormalizedAdjacency(self.matrix.astype(dtype), self.construction)


def normalize_adjacency(graph, dtype=np.float64):
    """``D^{-1/2} (A + I) D^{-1/2}`` where D is the degree of ``A + I``.

    Isolated nodes end up with a pure self-loop entry of 1.
    """
    n = graph.num_nodes
    e = graph.edges
    rows = np.concatenate([e[:, 0], e[:, 1], np.arange(n)])
    cols = np.concatenate([e[:, 1], e[:, 0], np.arange(n)])
    vals = np.ones(rows.shape[0], dtype=np.float64)
    a = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    deg = np.asarray(a.sum(axis=1)).ravel()
    inv_sqrt = 1.0 / np.sqrt(deg)
    norm = a.multiply(inv_sqrt[:, None]).multiply(inv_sqrt[None, :])
    return NormalizedAdjacency(sparse.csr_matrix(norm, dtype=dtype))


@dataclass(frozen=True)
class TaskSplit:
    """A k-shot task: k train items per class plus a held-out test set."""

    k: int
    train_items: tuple  # ((item_id, class), ...)
    test_items: tuple
    seed: int
    level: str  # "node" | "graph"

    def __post_init__(self):
        if self.level not in ("node", "graph"):
            raise SamplingError(f"unknown task level {self.level!r}")

    @property
    def train_ids(self):
        return np.array([i for i, _ in self.train_items], dtype=np.int64)

    @property
    def train_labels(self):
        return np.array([c for _, c in self.train_items], dtype=np.int64)

    @property
    def test_ids(self):
        return np.array([i for i, _ in self.test_items], dtype=np.int64)

    @property
    def test_labels(self):
        return np.array([c for _, c in self.test_items], dtype=np.int64)


NODE_TEST_CAP = 1000


def sample_task(data, k, seed):
    """Draw a reproducible k-shot task from a graph or a graph collection.

    Node level: k train nodes per class, then ``min(1000, remaining)`` test
    nodes drawn uniformly without replacement from the rest. Graph level:
    k train graphs per class, every remaining graph becomes a test item.
    """
    if k < 1:
        raise SamplingError("k must be at least 1")
    rng = np.random.default_rng(seed)
    if isinstance(data, GraphCollection):
        labels, level = data.graph_labels, "graph"
    else:
        if data.labels is None:
            raise SamplingError("node-level tasks need node labels")
        labels, level = data.labels, "node"

    num_classes = int(labels.max()) + 1
    train = []
    for c in range(num_classes):
        members = np.flatnonzero(labels == c)
        if members.size < k:
            raise SamplingError(f"class {c} has only {members.size} items, need k={k}")
        chosen = rng.choice(members, size=k, replace=False)
        train.extend((int(i), c) for i in sorted(chosen))

    train_ids = {i for i, _ in train}
    remaining = np.array([i for i in range(labels.shape[0]) if i not in train_ids])
    if level == "node":
        take = min(NODE_TEST_CAP, remaining.size)
        chosen = rng.choice(remaining, size=take, replace=False) if take else []
        test = [(int(i), int(labels[i])) for i in sorted(chosen)]
    else:
        test = [(int(i), int(labels[i])) for i in remaining]
    return TaskSplit(k=k, train_items=tuple(train), test_items=tuple(test), seed=seed, level=level)


# ---------------------------------------------------------------------------
# citation layout


def _require(path):
    if not path.is_file():
        raise DatasetNotFoundError(f"missing dataset file: {path}")
    return path


def load_citation_dataset(path, name, strict=True):
    """Load a citation network from ``<path>/<name.lower()>.content/.cites``.

    Features are row-normalized to unit L1 norm (all-zero rows stay zero);
    string class labels map to indices by sorted order. With ``strict`` (the
    default) an edge mentioning an id without a feature record raises
    :class:`DatasetFormatError`; ``strict=False`` drops such edges, which the
    published Citeseer files need.
    """
    base = Path(path)
    content = _require(base / f"{name.lower()}.content")
    cites = _require(base / f"{name.lower()}.cites")

    ids, rows, raw_labels = [], [], []
    with content.open() as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 3:
                raise DatasetFormatError(f"{content}: short record {parts!r}")
            ids.append(parts[0])
            rows.append(np.array(parts[1:-1], dtype=np.float64))
            raw_labels.append(parts[-1])
    if not ids:
        raise DatasetFormatError(f"{content}: no node records")
    widths = {r.shape[0] for r in rows}
    if len(widths) != 1:
        raise DatasetFormatError(f"{content}: inconsistent feature widths {sorted(widths)}")
    index = {node_id: i for i, node_id in enumerate(ids)}
    if len(index) != len(ids):
        raise DatasetFormatError(f"{content}: duplicate node ids")

    classes = sorted(set(raw_labels))
    label_of = {c: i for i, c in enumerate(classes)}
    labels = np.array([label_of[c] for c in raw_labels], dtype=np.int64)

    edges = []
    with cites.open() as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise DatasetFormatError(f"{cites}: malformed edge line {line!r}")
            u, v = parts
            if u not in index or v not in index:
                if strict:
                    missing = u if u not in index else v
                    raise DatasetFormatError(
                        f"{cites}: edge references unknown node id {missing!r}"
                    )
                continue
            a, b = index[u], index[v]
            if a != b:
                edges.append((min(a, b), max(a, b)))

    features = np.stack(rows)
    sums = np.abs(features).sum(axis=1, keepdims=True)
    features = np.divide(features, sums, out=np.zeros_like(features), where=sums > 0)
    edge_arr = np.array(sorted(set(edges)), dtype=np.int64).reshape(-1, 2)
    return Graph(features=features, edges=edge_arr, labels=labels, name=name)


def write_citation_dataset(graph, path, name):
    """Inverse of :func:`load_citation_dataset` (labels become ``c<k>``,
    zero-padded so the loader's sorted-string ordering restores them)."""
    base = Path(path)
    base.mkdir(parents=True, exist_ok=True)
    with (base / f"{name.lower()}.content").open("w") as fh:
        for i in range(graph.num_nodes):
            feats = " ".join(repr(float(v)) for v in graph.features[i])
            label = f"c{graph.labels[i]:04d}" if graph.labels is not None else "c0000"
            fh.write(f"n{i} {feats} {label}\n")
    with (base / f"{name.lower()}.cites").open("w") as fh:
        for i, j in graph.edges:
            fh.write(f"n{i} n{j}\n")


# ---------------------------------------------------------------------------
# TU layout


def load_tu_dataset(path, name):
    """Load a TU-format multi-graph dataset from ``<path>/<name>_*.txt``.

    Node labels become one-hot features (sorted label order). Graph labels
    map to indices by sorted order. Graph ids must cover 1..G exactly.
    """
    base = Path(path)
    adj_file = _require(base / f"{name}_A.txt")
    ind_file = _require(base / f"{name}_graph_indicator.txt")
    glab_file = _require(base / f"{name}_graph_labels.txt")
    nlab_file = base / f"{name}_node_labels.txt"

    indicator = np.array(
        [int(x) for x in ind_file.read_text().split()], dtype=np.int64
    )
    n = indicator.shape[0]
    if n == 0:
        raise DatasetFormatError(f"{ind_file}: empty")
    num_graphs = int(indicator.max())
    present = np.unique(indicator)
    if indicator.min() < 1 or present.size != num_graphs:
        raise DatasetFormatError(f"{ind_file}: graph ids must cover 1..{num_graphs}")

    raw_glabels = [x for x in glab_file.read_text().split()]
    if len(raw_glabels) != num_graphs:
        raise DatasetFormatError(
            f"{glab_file}: {len(raw_glabels)} labels for {num_graphs} graphs"
        )
    classes = sorted({int(x) for x in raw_glabels})
    glabels = np.array([classes.index(int(x)) for x in raw_glabels], dtype=np.int64)

    if nlab_file.is_file():
        node_labels = np.array([int(x) for x in nlab_file.read_text().split()], dtype=np.int64)
        if node_labels.shape[0] != n:
            raise DatasetFormatError(f"{nlab_file}: {node_labels.shape[0]} labels for {n} nodes")
        values = sorted(set(node_labels.tolist()))
        lut = {v: i for i, v in enumerate(values)}
        features = np.zeros((n, len(values)), dtype=np.float64)
        features[np.arange(n), [lut[v] for v in node_labels]] = 1.0
    else:
        features = np.ones((n, 1), dtype=np.float64)

    # global node id -> (graph, local id), graphs keep their nodes in file order
    order = np.argsort(indicator, kind="stable")
    local = np.empty(n, dtype=np.int64)
    graph_nodes = [[] for _ in range(num_graphs)]
    for global_id in order:
        g = indicator[global_id] - 1
        local[global_id] = len(graph_nodes[g])
        graph_nodes[g].append(global_id)

    per_graph_edges = [[] for _ in range(num_graphs)]
    with adj_file.open() as fh:
        for line in fh:
            row = line.replace(",", " ").split()
            if not row:
                continue
            if len(row) != 2:
                raise DatasetFormatError(f"{adj_file}: malformed line {line!r}")
            u, v = int(row[0]) - 1, int(row[1]) - 1
            if not (0 <= u < n and 0 <= v < n):
                raise DatasetFormatError(f"{adj_file}: node id outside 1..{n}")
            gu, gv = indicator[u] - 1, indicator[v] - 1
            if gu != gv:
                raise DatasetFormatError(
                    f"{adj_file}: edge ({u + 1}, {v + 1}) crosses graphs {gu + 1} and {gv + 1}"
                )
            if u != v:
                per_graph_edges[gu].append((int(local[u]), int(local[v])))

    graphs = []
    for g in range(num_graphs):
        nodes = graph_nodes[g]
        edges = {(min(a, b), max(a, b)) for a, b in per_graph_edges[g]}
        graphs.append(
            Graph(
                features=features[nodes],
                edges=np.array(sorted(edges), dtype=np.int64).reshape(-1, 2),
                name=f"{name}[{g}]",
            )
        )
    return GraphCollection(
        graphs=tuple(graphs), graph_labels=glabels, num_classes=len(classes), name=name
    )


def write_tu_dataset(collection, path, name):
    """Inverse of :func:`load_tu_dataset` for one-hot-feature collections."""
    base = Path(path)
    base.mkdir(parents=True, exist_ok=True)
    a_lines, ind_lines, nlab_lines = [], [], []
    offset = 0
    for g_idx, g in enumerate(collection.graphs):
        for i, j in g.edges:
            a_lines.append(f"{offset + i + 1}, {offset + j + 1}")
            a_lines.append(f"{offset + j + 1}, {offset + i + 1}")
        ind_lines.extend([str(g_idx + 1)] * g.num_nodes)
        nlab_lines.extend(str(int(row.argmax())) for row in g.features)
        offset += g.num_nodes
    (base / f"{name}_A.txt").write_text("\n".join(a_lines) + "\n")
    (base / f"{name}_graph_indicator.txt").write_text("\n".join(ind_lines) + "\n")
    (base / f"{name}_graph_labels.txt").write_text(
        "\n".join(str(int(c)) for c in collection.graph_labels) + "\n"
    )
    (base / f"{name}_node_labels.txt").write_text("\n".join(nlab_lines) + "\n")
