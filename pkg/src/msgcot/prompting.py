"""Multi-scale chain-of-thought prompt tuning over a frozen encoder.

The moving parts, in forward order:

1. A conditional network turns the frozen embeddings into per-node
   multiplicative feature prompts ``P = 2 * sigmoid(ELU(H W_in) W_out)``,
   strictly inside (0, 2) and exactly 1 at initialization (W_out starts at
   zero), so tuning begins at the frozen-encoder baseline.
2. The prompted features ``X * P`` go back through the frozen encoder.
3. A low-rank coarsening network builds soft assignments
   ``S_l = row_softmax(ELU(T_{l-1} W_down) W_up)`` and coarse representations
   ``T_l = S_l^T T_{l-1}``, collected coarsest-first into a thought pool.
4. A backtracking chain injects one prompt per pool entry:
   attention of each node over the level's thoughts, prompt = attention-
   weighted thought mix, added onto the running representation.
5. Losses: a prototype cross-entropy over cosine similarities at every
   exposed chain step, plus an optional cosine reconstruction penalty back
   toward the frozen embeddings.

Only the conditional and coarsening networks train; the encoder stays
bitwise frozen throughout.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .data import GraphCollection, normalize_adjacency
from .encoder import gcn_forward, mean_readout, xavier_uniform
from .errors import CheckpointError, ConfigError, ShapeError, TrainingError
from .optim import Adam
from .partition import build_partition_pool, coarse_schedule
from .pretrain import batched_graph
from .serialize import read_blob_file, write_blob_file

__all__ = [
    "Variant",
    "CondNetParams",
    "CoarsenNetParams",
    "ThoughtPool",
    "ChainTrace",
    "PromptModel",
    "init_cond_net",
    "init_coarsen_net",
    "condnet_forward",
    "prompted_encode",
    "coarsen_step",
    "build_thought_pool",
    "pool_from_partitions",
    "backtrack_prompt_step",
    "run_prompt_chain",
    "reconstruction_loss",
    "compute_prototypes",
    "downstream_loss",
    "total_loss",
    "prompt_tune",
    "predict",
    "save_prompt_model",
    "load_prompt_model",
]


class Variant(enum.Enum):
    """Ablation switches; exactly one is active per run."""

    FULL = "full"
    NO_MSP = "no_msp"  # node-level prompt only, no chain
    NO_RE = "no_re"  # reconstruction penalty off
    NO_TB = "no_tb"  # chain runs finest-first instead of coarsest-first
    NO_IU = "no_iu"  # only the last prompt is added onto the start state

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(v.value for v in cls)
            raise ConfigError(f"unknown variant {value!r} (one of: {names})") from None


@dataclass
class CondNetParams:
    """Bottleneck hypernetwork d -> b -> F producing feature prompts."""

    w_in: object  # (d, b) ndarray or Tensor
    w_out: object  # (b, F)

    def tensors(self):
        return [ad.as_tensor(self.w_in), ad.as_tensor(self.w_out)]

    def arrays(self):
        return [np.asarray(getattr(w, "data", w)) for w in (self.w_in, self.w_out)]


@dataclass
class CoarsenNetParams:
    """Per-level low-rank pair (W_down: d x r, W_up: r x C_l).

    For multi-graph data the per-level column capacity follows the largest
    graph; smaller graphs use a leading slice of W_up.
    """

    w_down: list
    w_up: list
    rank: int
    ratio: float
    levels: int

    def tensors(self):
        return [ad.as_tensor(w) for w in self.w_down] + [ad.as_tensor(w) for w in self.w_up]

    def arrays(self):
        return [np.asarray(getattr(w, "data", w)) for w in self.w_down + self.w_up]

    def capacity(self):
        return [np.shape(getattr(w, "data", w))[1] for w in self.w_up]


def init_cond_net(hidden_dim, feature_dim, bottleneck=32, seed=0, dtype=np.float64):
    if bottleneck < 1:
        raise ConfigError("bottleneck width must be at least 1")
    rng = np.random.default_rng(seed)
    w_in = xavier_uniform(rng, hidden_dim, bottleneck, dtype)
    # zero output weights make the prompt exactly 1 at step 0
    w_out = np.zeros((bottleneck, feature_dim), dtype=dtype)
    return CondNetParams(w_in=w_in, w_out=w_out)


def init_coarsen_net(hidden_dim, rank, ratio, levels, max_nodes, seed=0, dtype=np.float64):
    if rank < 1:
        raise ConfigError("rank must be at least 1")
    if rank > hidden_dim // 4:
        raise ConfigError(f"rank {rank} too large for hidden dim {hidden_dim} (need rank <= d/4)")
    counts = coarse_schedule(max_nodes, ratio, levels)
    rng = np.random.default_rng(seed)
    w_down = [xavier_uniform(rng, hidden_dim, rank, dtype) for _ in counts]
    w_up = [xavier_uniform(rng, rank, c, dtype) for c in counts]
    return CoarsenNetParams(w_down=w_down, w_up=w_up, rank=rank, ratio=ratio, levels=levels)


# ---------------------------------------------------------------------------
# forward pieces


def condnet_forward(cond, h):
    """Feature prompts ``2 * sigmoid(ELU(H W_in) W_out)``, entries in (0, 2)."""
    w_in, w_out = cond.tensors() if isinstance(cond, CondNetParams) else map(ad.as_tensor, cond)
    h = ad.as_tensor(h)
    hidden = ad.elu(ad.matmul(h, w_in))
    return ad.mul(ad.sigmoid(ad.matmul(hidden, w_out)), 2.0)


def prompted_encode(encoder, x, p, adj):
    """Re-encode the elementwise-prompted features ``X * P``."""
    x = ad.as_tensor(x)
    p = ad.as_tensor(p)
    if x.data.shape != p.data.shape:
        raise ShapeError(f"prompt shape {p.data.shape} must match features {x.data.shape}")
    return gcn_forward(encoder, ad.mul(x, p), adj)


def coarsen_step(w_down, w_up, t_prev, num_coarse=None):
    """One soft-coarsening level: returns (assignment S, coarse thoughts T).

    ``S = row_softmax(ELU(T_prev W_down) W_up[:, :num_coarse])`` and
    ``T = S^T T_prev``. Rows of S sum to 1.
    """
    w_down, w_up, t_prev = ad.as_tensor(w_down), ad.as_tensor(w_up), ad.as_tensor(t_prev)
    if num_coarse is not None and num_coarse < w_up.data.shape[1]:
        w_up = ad.slice_cols(w_up, num_coarse)
    logits = ad.matmul(ad.elu(ad.matmul(t_prev, w_down)), w_up)
    s = ad.softmax_rows(logits)
    t = ad.matmul(ad.transpose(s), t_prev)
    return s, t


@dataclass
class ThoughtPool:
    """Coarsened representations, coarsest first: entries ``(level, T_level)``.

    ``assignments`` keeps the per-level S matrices fine-to-coarse; for learned
    coarsening they are row-stochastic, for precomputed partitions one-hot.
    """

    entries: list
    assignments: list

    @property
    def levels(self):
        return len(self.entries)


def build_thought_pool(h_hat, coarsen):
    """Apply every coarsening level to ``h_hat`` and collect thoughts
    coarsest-first. Coarse counts follow the input's own row count."""
    h_hat = ad.as_tensor(h_hat)
    counts = coarse_schedule(h_hat.data.shape[0], coarsen.ratio, coarsen.levels)
    for c, cap in zip(counts, coarsen.capacity()):
        if c > cap:
            raise ConfigError(
                f"graph needs {c} coarse nodes but the net was sized for {cap}; "
                "initialize the coarsening net from the largest graph"
            )
    entries, assignments = [], []
    t = h_hat
    w_down, w_up = coarsen.tensors()[: coarsen.levels], coarsen.tensors()[coarsen.levels :]
    for level, (wd, wu, c) in enumerate(zip(w_down, w_up, counts), start=1):
        s, t = coarsen_step(wd, wu, t, num_coarse=c)
        entries.append((level, t))
        assignments.append(s)
    entries.reverse()
    return ThoughtPool(entries=entries, assignments=assignments)


def pool_from_partitions(h_hat, partitions):
    """Thought pool from fixed hard partitions: coarse thoughts are cluster
    means (assignments column-normalized before the transpose product)."""
    h_hat = ad.as_tensor(h_hat)
    if partitions.assignments and partitions.assignments[0].shape[0] != h_hat.data.shape[0]:
        raise ShapeError("partition pool was built for a different graph")
    entries, assignments = [], []
    t = h_hat
    for level, s in enumerate(partitions.assignments, start=1):
        s = s.astype(h_hat.data.dtype)
        mean_weights = s / s.sum(axis=0, keepdims=True)
        t = ad.matmul(ad.as_tensor(mean_weights.T), t)
        entries.append((level, t))
        assignments.append(ad.as_tensor(s))
    entries.reverse()
    return ThoughtPool(entries=entries, assignments=assignments)


def backtrack_prompt_step(h, thoughts):
    """One chain step: softmax attention of each row of ``h`` over the level's
    thoughts (plain dot-product logits), prompt = attention-weighted thought
    mix, new state = old state + prompt. Returns (attention, prompt, state).
    """
    h, thoughts = ad.as_tensor(h), ad.as_tensor(thoughts)
    logits = ad.matmul(h, ad.transpose(thoughts))
    attention = ad.softmax_rows(logits)
    prompt = ad.matmul(attention, thoughts)
    return attention, prompt, ad.add(h, prompt)


@dataclass
class ChainTrace:
    """Everything the chain produced: states ``h_0..h_S``, prompts,
    attention maps, the per-step pool levels, the representations the loss
    supervises, and the model's final representation."""

    h_steps: list
    prompts: list
    attentions: list
    levels: list
    loss_reps: list
    final: object

    def telescoped(self):
        """``h_0 + sum(prompts)`` recomputed independently of the stored states."""
        total = self.h_steps[0].data.copy()
        for p in self.prompts:
            total = total + p.data
        return total


def run_prompt_chain(h_hat, pool, variant=Variant.FULL):
    """Consume the thought pool step by step and record a :class:`ChainTrace`.

    FULL / NO_RE walk the pool coarsest-first; NO_TB walks it finest-first;
    NO_IU walks like FULL but the final representation is ``h_0 + p_last``
    and only the start and final representations feed the loss; NO_MSP skips
    the chain entirely.
    """
    variant = Variant.parse(variant)
    h0 = ad.as_tensor(h_hat)
    if variant is Variant.NO_MSP:
        return ChainTrace([h0], [], [], [], loss_reps=[h0], final=h0)

    order = list(pool.entries)
    if variant is Variant.NO_TB:
        order.reverse()
    for _, thoughts in order:
        if thoughts.data.shape[1] != h0.data.shape[1]:
            raise ShapeError(
                f"pool width {thoughts.data.shape[1]} does not match state width "
                f"{h0.data.shape[1]}"
            )

    h_steps, prompts, attentions, levels = [h0], [], [], []
    h = h0
    for level, thoughts in order:
        attention, prompt, h = backtrack_prompt_step(h, thoughts)
        attentions.append(attention)
        prompts.append(prompt)
        levels.append(level)
        h_steps.append(h)

    if variant is Variant.NO_IU:
        final = ad.add(h0, prompts[-1]) if prompts else h0
        loss_reps = [h0, final] if prompts else [h0]
    else:
        final = h
        loss_reps = list(h_steps)
    return ChainTrace(h_steps, prompts, attentions, levels, loss_reps=loss_reps, final=final)


# ---------------------------------------------------------------------------
# losses


def reconstruction_loss(h_final, h_ref, gamma=2.0):
    """Mean over rows of ``(1 - cos(h_final_i, h_ref_i)) ** gamma``.

    Zero-norm rows count as fully off (cosine 0). ``gamma >= 1``.
    """
    if gamma < 1:
        raise ConfigError("gamma must be at least 1")
    cos = ad.cosine_rowwise(ad.as_tensor(h_final), ad.as_tensor(h_ref))
    base = ad.clamp_min(ad.sub(1.0, cos), 0.0)
    return ad.tmean(ad.power(base, gamma))


def compute_prototypes(step_embeddings, labels, num_classes):
    """Class-mean prototypes at every chain step.

    ``step_embeddings`` is one (items x d) matrix per exposed step; every
    class must contribute at least one item.
    """
    labels = np.asarray(labels, dtype=np.intp)
    return [ad.segment_mean(ad.as_tensor(e), labels, num_classes) for e in step_embeddings]


def downstream_loss(step_embeddings, step_prototypes, labels, tau):
    """Prototype cross-entropy summed over items and exposed chain steps.

    Per item and step: ``-ln softmax(sim / tau)[label]`` where ``sim`` is the
    cosine similarity of the item's embedding to each class prototype.
    """
    if tau <= 0:
        raise ConfigError("tau must be positive")
    labels = np.asarray(labels, dtype=np.intp)
    total = None
    for emb, protos in zip(step_embeddings, step_prototypes):
        sims = ad.cosine_matrix(ad.as_tensor(emb), ad.as_tensor(protos))
        logits = ad.mul(sims, 1.0 / tau)
        lse = ad.logsumexp_rows(logits)
        onehot = np.zeros(logits.data.shape, dtype=logits.data.dtype)
        onehot[np.arange(labels.shape[0]), labels] = 1.0
        picked = ad.tsum(ad.mul(logits, onehot), axis=1)
        term = ad.tsum(ad.sub(lse, picked))
        total = term if total is None else ad.add(total, term)
    return total


def total_loss(l_ds, l_r=None, alpha=0.0):
    """``L = L_downstream + alpha * L_reconstruction``."""
    if alpha < 0:
        raise ConfigError("alpha must be non-negative")
    if l_r is None or alpha == 0:
        return l_ds
    return ad.add(l_ds, ad.mul(l_r, alpha))


# ---------------------------------------------------------------------------
# tuning


@dataclass
class TuneSettings:
    """Hyperparameters :func:`prompt_tune` actually consumes."""

    epochs: int = 100
    lr: float = 1e-3
    weight_decay: float = 0.0
    ratio: float = 0.1
    levels: int = 2
    rank: int = 8
    bottleneck: int = 32
    alpha: float = 1.0
    tau: float = 0.1
    gamma: float = 2.0
    coarsening: str = "learned"  # or "precomputed"
    seed: int = 0
    dtype: str = "float32"


@dataclass
class PromptModel:
    """A tuned prompting stack: trainable nets, per-step prototypes, cached
    final embeddings for every item, and the config that produced it."""

    condnet: CondNetParams
    coarsen: CoarsenNetParams | None
    partitions: object  # PartitionPool | list[PartitionPool] | None
    prototypes: list
    item_embeddings: np.ndarray
    variant: Variant
    level: str
    settings: TuneSettings
    fingerprint: dict
    loss_history: list = field(default_factory=list, repr=False)
    epoch_seconds: list = field(default_factory=list, repr=False)

    def trainable_parameter_count(self):
        condnet = sum(a.size for a in self.condnet.arrays())
        coarsen = sum(a.size for a in self.coarsen.arrays()) if self.coarsen else 0
        return condnet + coarsen


class _TuningContext:
    """Precomputed constants for one tuning run: features, adjacency, frozen
    embeddings and per-graph row slices of the stacked system."""

    def __init__(self, encoder, data, dtype):
        if isinstance(data, GraphCollection):
            x, adj, membership = batched_graph(data, dtype=dtype)
            sizes = [g.num_nodes for g in data.graphs]
        else:
            x = data.features.astype(dtype)
            adj = normalize_adjacency(data, dtype=dtype).matrix
            membership = np.zeros(data.num_nodes, dtype=np.intp)
            sizes = [data.num_nodes]
        self.x = x
        self.adj = adj
        self.membership = membership
        bounds = np.cumsum([0] + sizes)
        self.slices = list(zip(bounds[:-1], bounds[1:]))
        self.h_frozen = gcn_forward(encoder, x, adj).data

    @property
    def num_graphs(self):
        return len(self.slices)


def _forward(ctx, encoder, cond, coarsen, partitions, variant):
    """One full forward pass; returns (prompted embeddings, per-graph traces)."""
    p = condnet_forward(cond, ctx.h_frozen)
    h_hat = prompted_encode(encoder, ctx.x, p, ctx.adj)
    traces = []
    for g, (start, stop) in enumerate(ctx.slices):
        rows = h_hat if len(ctx.slices) == 1 else ad.slice_rows(h_hat, int(start), int(stop))
        if variant is Variant.NO_MSP:
            traces.append(run_prompt_chain(rows, None, variant))
            continue
        if partitions is not None:
            part = partitions[g] if isinstance(partitions, list) else partitions
            pool = pool_from_partitions(rows, part)
        else:
            pool = build_thought_pool(rows, coarsen)
        traces.append(run_prompt_chain(rows, pool, variant))
    return h_hat, traces


def _step_item_embeddings(traces, ctx, level, item_ids):
    """Per exposed step, one (items x d) matrix: node rows for node tasks,
    per-graph mean readouts for graph tasks."""
    num_steps = len(traces[0].loss_reps)
    out = []
    for s in range(num_steps):
        if level == "node":
            rep = traces[0].loss_reps[s]
            out.append(ad.gather_rows(rep, item_ids))
        else:
            cat = ad.concat_rows([t.loss_reps[s] for t in traces])
            readouts = mean_readout(cat, ctx.membership, ctx.num_graphs)
            out.append(ad.gather_rows(readouts, item_ids))
    return out


def prompt_tune(ckpt, data, task, settings=None, variant=Variant.FULL, **overrides):
    """Train the conditional + coarsening networks on one few-shot task.

    The encoder from ``ckpt`` stays bitwise frozen; prompts, coarse thoughts
    and the chain are rebuilt every epoch because the conditional network
    keeps moving. Raises :class:`CheckpointError` on a dataset/checkpoint
    fingerprint mismatch and :class:`TrainingError` if the loss leaves the
    reals.
    """
    settings = settings or TuneSettings(**overrides)
    variant = Variant.parse(variant)
    if not ckpt.matches(data):
        raise CheckpointError(
            f"checkpoint fingerprint ({ckpt.fingerprint['name']}) does not match "
            f"the dataset ({getattr(data, 'name', '?')})"
        )
    dtype = np.dtype(settings.dtype).type
    encoder = ckpt.params if np.dtype(settings.dtype) == ckpt.params.layers[0].dtype else ckpt.params.astype(dtype)
    hidden = ckpt.dims[-1]
    level = task.level
    num_classes = int(task.train_labels.max()) + 1

    rng_seed = settings.seed
    cond_init = init_cond_net(
        hidden, ckpt.dims[0], settings.bottleneck, seed=rng_seed, dtype=dtype
    )
    cond = CondNetParams(
        w_in=ad.Tensor(cond_init.w_in, requires_grad=True),
        w_out=ad.Tensor(cond_init.w_out, requires_grad=True),
    )
    trainable = [cond.w_in, cond.w_out]

    use_partitions = settings.coarsening == "precomputed"
    train_coarsen = variant is not Variant.NO_MSP and not use_partitions
    coarsen = None
    partitions = None
    if use_partitions and variant is not Variant.NO_MSP:
        partitions = build_partition_pool(data, settings.ratio, settings.levels)
    if train_coarsen:
        max_nodes = (
            max(g.num_nodes for g in data.graphs)
            if isinstance(data, GraphCollection)
            else data.num_nodes
        )
        base = init_coarsen_net(
            hidden,
            settings.rank,
            settings.ratio,
            settings.levels,
            max_nodes,
            seed=rng_seed + 1,
            dtype=dtype,
        )
        coarsen = CoarsenNetParams(
            w_down=[ad.Tensor(w, requires_grad=True) for w in base.w_down],
            w_up=[ad.Tensor(w, requires_grad=True) for w in base.w_up],
            rank=base.rank,
            ratio=base.ratio,
            levels=base.levels,
        )
        trainable += coarsen.w_down + coarsen.w_up

    # one full forward per epoch over the whole dataset (the conditional net
    # keeps moving, so prompts, thoughts and the chain are rebuilt each time);
    # the loss reads only the train items out of it
    ctx = _TuningContext(encoder, data, dtype)

    alpha = 0.0 if variant is Variant.NO_RE else settings.alpha
    opt = Adam(trainable, lr=settings.lr, weight_decay=settings.weight_decay)
    losses, epoch_seconds = [], []
    for epoch in range(settings.epochs):
        tick = time.perf_counter()
        h_hat, traces = _forward(ctx, encoder, cond, coarsen, partitions, variant)
        step_embs = _step_item_embeddings(traces, ctx, level, task.train_ids)
        protos = compute_prototypes(step_embs, task.train_labels, num_classes)
        l_ds = downstream_loss(step_embs, protos, task.train_labels, settings.tau)
        l_r = None
        if alpha > 0:
            finals = (
                traces[0].final
                if len(traces) == 1
                else ad.concat_rows([t.final for t in traces])
            )
            l_r = reconstruction_loss(finals, ctx.h_frozen, settings.gamma)
        loss = total_loss(l_ds, l_r, alpha)
        value = loss.item()
        if not np.isfinite(value):
            raise TrainingError(f"tuning loss became {value} at epoch {epoch}", epoch=epoch)
        losses.append(float(value))
        opt.zero_grad()
        loss.backward()
        opt.step()
        epoch_seconds.append(time.perf_counter() - tick)

    # final inference pass with the tuned parameters
    _, traces = _forward(ctx, encoder, cond, coarsen, partitions, variant)
    if level == "node":
        item_embeddings = traces[0].final.data
        step_embs = [ad.gather_rows(rep, task.train_ids).data for rep in traces[0].loss_reps]
    else:
        reps = len(traces[0].loss_reps)
        step_embs = []
        for s in range(reps):
            cat = ad.concat_rows([t.loss_reps[s] for t in traces])
            step_embs.append(mean_readout(cat, ctx.membership, ctx.num_graphs).data)
        item_embeddings = mean_readout(
            ad.concat_rows([t.final for t in traces]), ctx.membership, ctx.num_graphs
        ).data
        step_embs = [e[task.train_ids] for e in step_embs]
    prototypes = [
        p.data for p in compute_prototypes(step_embs, task.train_labels, num_classes)
    ]

    return PromptModel(
        condnet=CondNetParams(*[np.array(a) for a in cond.arrays()]),
        coarsen=(
            CoarsenNetParams(
                w_down=[np.array(w.data) for w in coarsen.w_down],
                w_up=[np.array(w.data) for w in coarsen.w_up],
                rank=coarsen.rank,
                ratio=coarsen.ratio,
                levels=coarsen.levels,
            )
            if coarsen is not None
            else None
        ),
        partitions=partitions,
        prototypes=prototypes,
        item_embeddings=np.array(item_embeddings),
        variant=variant,
        level=level,
        settings=settings,
        fingerprint=dict(ckpt.fingerprint),
        loss_history=losses,
        epoch_seconds=epoch_seconds,
    )


def predict(model, items):
    """Nearest-prototype classification of items by final-step cosine
    similarity; ties resolve to the lowest class index."""
    items = np.asarray(items, dtype=np.intp)
    embeddings = model.item_embeddings[items]
    sims = ad.cosine_matrix(embeddings, model.prototypes[-1]).data
    return np.argmax(sims, axis=1)


# ---------------------------------------------------------------------------
# persistence


def save_prompt_model(model, path):
    meta = {
        "variant": model.variant.value,
        "level": model.level,
        "dataset.name": model.fingerprint["name"],
        "dataset.num_nodes": str(model.fingerprint["num_nodes"]),
        "dataset.feature_dim": str(model.fingerprint["feature_dim"]),
        "dataset.hash": model.fingerprint["hash"],
        "steps": str(len(model.prototypes)),
    }
    for key, value in vars(model.settings).items():
        meta[f"tune.{key}"] = str(value)
    matrices = [("cond.w_in", model.condnet.arrays()[0]), ("cond.w_out", model.condnet.arrays()[1])]
    if model.coarsen is not None:
        meta["coarsen.levels"] = str(model.coarsen.levels)
        meta["coarsen.rank"] = str(model.coarsen.rank)
        meta["coarsen.ratio"] = repr(model.coarsen.ratio)
        for i, w in enumerate(model.coarsen.w_down):
            matrices.append((f"coarsen.down{i}", np.asarray(getattr(w, "data", w))))
        for i, w in enumerate(model.coarsen.w_up):
            matrices.append((f"coarsen.up{i}", np.asarray(getattr(w, "data", w))))
    for s, proto in enumerate(model.prototypes):
        matrices.append((f"prototypes{s}", proto))
    matrices.append(("item_embeddings", model.item_embeddings))
    write_blob_file(path, "prompt-model", meta, matrices)


def load_prompt_model(path):
    """Reload a tuned model; partitions are structural and are rebuilt from
    data when needed, so the precomputed variant stores none here."""
    kind, meta, matrices = read_blob_file(path)
    if kind != "prompt-model":
        raise CheckpointError(f"{path}: expected a prompt model, found kind={kind!r}")
    condnet = CondNetParams(w_in=matrices["cond.w_in"], w_out=matrices["cond.w_out"])
    coarsen = None
    if "coarsen.levels" in meta:
        levels = int(meta["coarsen.levels"])
        coarsen = CoarsenNetParams(
            w_down=[matrices[f"coarsen.down{i}"] for i in range(levels)],
            w_up=[matrices[f"coarsen.up{i}"] for i in range(levels)],
            rank=int(meta["coarsen.rank"]),
            ratio=float(meta["coarsen.ratio"]),
            levels=levels,
        )
    steps = int(meta["steps"])
    settings = TuneSettings(
        epochs=int(meta["tune.epochs"]),
        lr=float(meta["tune.lr"]),
        weight_decay=float(meta["tune.weight_decay"]),
        ratio=float(meta["tune.ratio"]),
        levels=int(meta["tune.levels"]),
        rank=int(meta["tune.rank"]),
        bottleneck=int(meta["tune.bottleneck"]),
        alpha=float(meta["tune.alpha"]),
        tau=float(meta["tune.tau"]),
        gamma=float(meta["tune.gamma"]),
        coarsening=meta["tune.coarsening"],
        seed=int(meta["tune.seed"]),
        dtype=meta["tune.dtype"],
    )
    return PromptModel(
        condnet=condnet,
        coarsen=coarsen,
        partitions=None,
        prototypes=[matrices[f"prototypes{s}"] for s in range(steps)],
        item_embeddings=matrices["item_embeddings"],
        variant=Variant.parse(meta["variant"]),
        level=meta["level"],
        settings=settings,
        fingerprint={
            "name": meta["dataset.name"],
            "num_nodes": int(meta["dataset.num_nodes"]),
            "feature_dim": int(meta["dataset.feature_dim"]),
            "hash": meta["dataset.hash"],
        },
    )
