"""Link-prediction pre-training of the encoder, plus checkpoint persistence.

The objective is pairwise contrastive: for each sampled (anchor, positive,
negative) triple, minimize ``-ln p`` of picking the true neighbor under a
temperature-scaled softmax over cosine similarities, i.e.
``softplus((sim(a, n) - sim(a, p)) / temperature)``. Each epoch performs one
full-graph forward pass and one Adam step over a fresh triple batch.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import sparse

from . import autodiff as ad
from .data import Graph, GraphCollection, normalize_adjacency
from .encoder import EncoderParams, init_encoder
from .errors import CheckpointError, SamplingError, TrainingError
from .optim import Adam
from .serialize import read_blob_file, write_blob_file

__all__ = [
    "PretrainConfig",
    "EncoderCheckpoint",
    "dataset_fingerprint",
    "sample_lp_batch",
    "lp_loss",
    "pretrain",
    "save_checkpoint",
    "load_checkpoint",
]

CHECKPOINT_VERSION = 1


@dataclass
class PretrainConfig:
    epochs: int = 200
    lr: float = 1e-3
    batch: int = 256
    seed: int = 0
    temperature: float = 1.0
    hidden: int = 256
    encoder_layers: int = 2
    dtype: str = "float32"


def dataset_fingerprint(data):
    """Identity of a dataset: name, node/feature counts and a content hash."""
    h = hashlib.sha256()
    if isinstance(data, GraphCollection):
        graphs, name = data.graphs, data.name
        n = data.total_nodes
        f = data.feature_dim
        h.update(np.int64(data.num_graphs).tobytes())
    else:
        graphs, name = (data,), data.name
        n, f = data.num_nodes, data.feature_dim
    for g in graphs:
        h.update(np.ascontiguousarray(g.features, dtype=np.float64).tobytes())
        h.update(np.ascontiguousarray(g.edges, dtype=np.int64).tobytes())
    return {"name": name, "num_nodes": n, "feature_dim": f, "hash": h.hexdigest()[:16]}


@dataclass
class EncoderCheckpoint:
    """Frozen encoder weights plus enough metadata to refuse the wrong dataset."""

    params: EncoderParams
    fingerprint: dict
    config: PretrainConfig
    version: int = CHECKPOINT_VERSION
    loss_history: list = field(default_factory=list, repr=False)

    @property
    def dims(self):
        return self.params.dims

    def matches(self, data):
        fp = dataset_fingerprint(data)
        return all(self.fingerprint.get(k) == fp[k] for k in ("name", "num_nodes", "feature_dim", "hash"))


# ---------------------------------------------------------------------------
# triple sampling


def _edge_orientations(rng, edges):
    flip = rng.integers(0, 2, size=edges.shape[0]).astype(bool)
    anchors = np.where(flip, edges[:, 1], edges[:, 0])
    positives = np.where(flip, edges[:, 0], edges[:, 1])
    return anchors, positives


def sample_lp_batch(graph, batch, seed):
    """Uniform positive edges with one uniform non-neighbor negative each.

    Returns a list of ``(anchor, positive, negative)`` node triples.
    Raises :class:`SamplingError` when the graph has no edges or is complete
    (no negatives exist).
    """
    if graph.num_edges == 0:
        raise SamplingError("graph has no edges to sample positives from")
    n = graph.num_nodes
    if graph.num_edges == n * (n - 1) // 2:
        raise SamplingError("complete graph: no negative candidates")
    rng = np.random.default_rng(seed)
    neighbors = graph.neighbor_sets()
    picks = rng.integers(0, graph.num_edges, size=batch)
    anchors, positives = _edge_orientations(rng, graph.edges[picks])
    triples = []
    for a, p in zip(anchors, positives):
        a = int(a)
        blocked = neighbors[a] | {a}
        candidates = np.array([v for v in range(n) if v not in blocked])
        if candidates.size == 0:
            # saturated anchor: fall back to the other endpoint
            a, p = int(p), a
            blocked = neighbors[a] | {a}
            candidates = np.array([v for v in range(n) if v not in blocked])
            if candidates.size == 0:
                continue
        triples.append((a, int(p), int(rng.choice(candidates))))
    if not triples:
        raise SamplingError("no edge admits a negative sample")
    return triples


def _pooled_lp_batch(collection, batch, seed):
    """Collection variant: positives pooled across graphs, negatives stay
    inside the anchor's graph."""
    rng = np.random.default_rng(seed)
    offsets = np.cumsum([0] + [g.num_nodes for g in collection.graphs])
    eligible = []
    for gi, g in enumerate(collection.graphs):
        n = g.num_nodes
        if g.num_edges and g.num_edges < n * (n - 1) // 2:
            eligible.append(gi)
    if not eligible:
        raise SamplingError("no graph in the collection admits negative samples")
    edge_pool = np.concatenate(
        [
            np.column_stack(
                [np.full(collection.graphs[gi].num_edges, gi), np.arange(collection.graphs[gi].num_edges)]
            )
            for gi in eligible
        ]
    )
    neighbor_cache = {gi: collection.graphs[gi].neighbor_sets() for gi in eligible}
    picks = edge_pool[rng.integers(0, edge_pool.shape[0], size=batch)]
    triples = []
    for gi, ei in picks:
        g = collection.graphs[gi]
        i, j = g.edges[ei]
        if rng.integers(0, 2):
            i, j = j, i
        blocked = neighbor_cache[gi][int(i)] | {int(i)}
        candidates = [v for v in range(g.num_nodes) if v not in blocked]
        if not candidates:
            blocked = neighbor_cache[gi][int(j)] | {int(j)}
            i, j = j, i
            candidates = [v for v in range(g.num_nodes) if v not in blocked]
            if not candidates:
                continue
        neg = int(rng.choice(candidates))
        base = offsets[gi]
        triples.append((base + int(i), base + int(j), base + neg))
    if not triples:
        raise SamplingError("no edge admits a negative sample")
    return triples


def lp_loss(h, triples, temperature=1.0):
    """Mean contrastive loss over triples; ``h`` is a Tensor or ndarray."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    h = ad.as_tensor(h)
    idx = np.asarray(triples, dtype=np.intp)
    anchors = ad.normalize_rows(ad.gather_rows(h, idx[:, 0]))
    pos = ad.normalize_rows(ad.gather_rows(h, idx[:, 1]))
    neg = ad.normalize_rows(ad.gather_rows(h, idx[:, 2]))
    s_pos = ad.tsum(ad.mul(anchors, pos), axis=1)
    s_neg = ad.tsum(ad.mul(anchors, neg), axis=1)
    gap = ad.mul(ad.sub(s_neg, s_pos), 1.0 / temperature)
    return ad.tmean(ad.softplus(gap))


# ---------------------------------------------------------------------------
# training loop


def batched_graph(collection, dtype=np.float64):
    """Stack a collection into one block-diagonal system.

    Returns ``(features, adjacency, membership)`` where membership maps each
    stacked row to its graph index.
    """
    feats = np.concatenate([g.features for g in collection.graphs]).astype(dtype)
    blocks = [normalize_adjacency(g, dtype=dtype).matrix for g in collection.graphs]
    adj = sparse.block_diag(blocks, format="csr")
    membership = np.concatenate(
        [np.full(g.num_nodes, i, dtype=np.intp) for i, g in enumerate(collection.graphs)]
    )
    return feats, adj, membership


def pretrain(data, cfg=None, **overrides):
    """Train the encoder on link prediction and return a frozen checkpoint."""
    cfg = cfg or PretrainConfig(**overrides)
    dtype = np.dtype(cfg.dtype).type
    if isinstance(data, GraphCollection):
        x, adj, _ = batched_graph(data, dtype=dtype)
        feature_dim = data.feature_dim
    else:
        x = data.features.astype(dtype)
        adj = normalize_adjacency(data, dtype=dtype).matrix
        feature_dim = data.feature_dim

    dims = (feature_dim,) + (cfg.hidden,) * cfg.encoder_layers
    params = init_encoder(dims, seed=cfg.seed, dtype=dtype)
    leaves = [ad.Tensor(w, requires_grad=True) for w in params.layers]
    opt = Adam(leaves, lr=cfg.lr)
    batch_rng = np.random.default_rng(cfg.seed)

    losses = []
    for epoch in range(cfg.epochs):
        batch_seed = int(batch_rng.integers(0, 2**63 - 1))
        if isinstance(data, GraphCollection):
            triples = _pooled_lp_batch(data, cfg.batch, batch_seed)
        else:
            triples = sample_lp_batch(data, cfg.batch, batch_seed)
        from .encoder import gcn_forward

        h = gcn_forward(leaves, x, adj)
        loss = lp_loss(h, triples, cfg.temperature)
        value = loss.item()
        if not np.isfinite(value):
            raise TrainingError(f"pre-training loss became {value} at epoch {epoch}", epoch=epoch)
        losses.append(float(value))
        opt.zero_grad()
        loss.backward()
        opt.step()

    trained = EncoderParams(
        layers=[leaf.data for leaf in leaves], dims=dims
    ).freeze()
    return EncoderCheckpoint(
        params=trained,
        fingerprint=dataset_fingerprint(data),
        config=cfg,
        loss_history=losses,
    )


# ---------------------------------------------------------------------------
# persistence


def save_checkpoint(ckpt, path):
    meta = {
        "version": str(ckpt.version),
        "dims": ",".join(str(d) for d in ckpt.dims),
        "dataset.name": ckpt.fingerprint["name"],
        "dataset.num_nodes": str(ckpt.fingerprint["num_nodes"]),
        "dataset.feature_dim": str(ckpt.fingerprint["feature_dim"]),
        "dataset.hash": ckpt.fingerprint["hash"],
    }
    for key, value in asdict(ckpt.config).items():
        meta[f"pretrain.{key}"] = str(value)
    matrices = [(f"layer{i}", w) for i, w in enumerate(ckpt.params.layers)]
    write_blob_file(path, "encoder", meta, matrices)


def load_checkpoint(path, data=None):
    """Load a checkpoint; with ``data`` given, refuse a fingerprint mismatch."""
    kind, meta, matrices = read_blob_file(path)
    if kind != "encoder":
        raise CheckpointError(f"{path}: expected an encoder checkpoint, found kind={kind!r}")
    if meta.get("version") != str(CHECKPOINT_VERSION):
        raise CheckpointError(
            f"{path}: checkpoint version {meta.get('version')!r}, "
            f"this build reads version {CHECKPOINT_VERSION}"
        )
    dims = tuple(int(d) for d in meta["dims"].split(","))
    layers = [matrices[f"layer{i}"] for i in range(len(dims) - 1)]
    params = EncoderParams(layers=layers, dims=dims).freeze()
    cfg = PretrainConfig(
        epochs=int(meta["pretrain.epochs"]),
        lr=float(meta["pretrain.lr"]),
        batch=int(meta["pretrain.batch"]),
        seed=int(meta["pretrain.seed"]),
        temperature=float(meta["pretrain.temperature"]),
        hidden=int(meta["pretrain.hidden"]),
        encoder_layers=int(meta["pretrain.encoder_layers"]),
        dtype=meta["pretrain.dtype"],
    )
    fingerprint = {
        "name": meta["dataset.name"],
        "num_nodes": int(meta["dataset.num_nodes"]),
        "feature_dim": int(meta["dataset.feature_dim"]),
        "hash": meta["dataset.hash"],
    }
    ckpt = EncoderCheckpoint(params=params, fingerprint=fingerprint, config=cfg)
    if data is not None and not ckpt.matches(data):
        fp = dataset_fingerprint(data)
        raise CheckpointError(
            f"{path}: checkpoint was trained on {fingerprint['name']!r} "
            f"but the requested dataset is {fp['name']!r} (fingerprint mismatch)"
        )
    return ckpt
