"""Experiment orchestration: seeded few-shot trials, paired ablations,
trainable-parameter accounting and tuning-time measurement.

A run is fully determined by its config: trial ``t`` samples its task with
seed ``cfg.seed + t``, so two runs (or two variants inside one ablation)
see identical tasks trial for trial.
"""

from __future__ import annotations

import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .data import GraphCollection, load_citation_dataset, load_tu_dataset, sample_task
from .errors import ConfigError, DatasetNotFoundError, MsgcotError
from .partition import coarse_schedule
from .pretrain import PretrainConfig, load_checkpoint, pretrain, save_checkpoint
from .prompting import TuneSettings, Variant, predict, prompt_tune

__all__ = [
    "ResultsTable",
    "load_dataset",
    "ensure_checkpoint",
    "run_experiment",
    "run_ablation",
    "run_sweep",
    "count_trainable_params",
    "time_tuning_epochs",
]


@dataclass
class ResultsTable:
    """Per-trial accuracies plus the derived summary statistics."""

    dataset: str
    variant: str
    accuracies: list
    config: dict
    seconds_per_epoch: float = 0.0
    param_counts: dict = field(default_factory=dict)
    trial_seeds: list = field(default_factory=list)

    @property
    def mean(self):
        return float(np.mean(self.accuracies))

    @property
    def std(self):
        """Population standard deviation, matching a reported ``mean ± std``."""
        return float(np.std(self.accuracies))

    def to_record(self):
        return {
            "dataset": self.dataset,
            "variant": self.variant,
            "accuracies": list(self.accuracies),
            "mean": self.mean,
            "std": self.std,
            "seconds_per_epoch": self.seconds_per_epoch,
            "param_counts": self.param_counts,
            "trial_seeds": list(self.trial_seeds),
            "config": self.config,
        }


def load_dataset(cfg):
    """Load the configured dataset (citation layout for node tasks, TU layout
    for graph tasks). TU names are tried as given and upper-cased, matching
    the published file prefixes."""
    if not cfg.dataset:
        raise ConfigError("no dataset configured")
    if cfg.level == "node":
        return load_citation_dataset(cfg.data_dir, cfg.dataset, strict=False)
    try:
        return load_tu_dataset(cfg.data_dir, cfg.dataset)
    except DatasetNotFoundError:
        if cfg.dataset != cfg.dataset.upper():
            return load_tu_dataset(cfg.data_dir, cfg.dataset.upper())
        raise


def ensure_checkpoint(cfg, data):
    """Load the configured checkpoint, or pre-train one (and persist it when
    a path is configured)."""
    path = Path(cfg.checkpoint) if cfg.checkpoint else None
    if path and path.is_file():
        return load_checkpoint(path, data=data)
    ckpt = pretrain(
        data,
        PretrainConfig(
            epochs=cfg.pretrain_epochs,
            lr=cfg.pretrain_lr,
            batch=cfg.pretrain_batch,
            seed=cfg.seed,
            temperature=cfg.pretrain_temperature,
            hidden=cfg.hidden,
            encoder_layers=cfg.encoder_layers,
            dtype=cfg.dtype,
        ),
    )
    if path:
        path.parent.mkdir(parents=True, exist_ok=True)
        save_checkpoint(ckpt, path)
    return ckpt


def tune_settings(cfg):
    return TuneSettings(
        epochs=cfg.tune_epochs,
        lr=cfg.lr,
        weight_decay=cfg.weight_decay,
        ratio=cfg.ratio,
        levels=cfg.levels,
        rank=cfg.rank,
        bottleneck=cfg.bottleneck,
        alpha=cfg.alpha,
        tau=cfg.tau,
        gamma=cfg.gamma,
        coarsening=cfg.coarsening,
        seed=cfg.seed,
        dtype=cfg.dtype,
    )


def accuracy(model, task):
    predictions = predict(model, task.test_ids)
    return float(np.mean(predictions == task.test_labels))


def run_trial(ckpt, data, cfg, trial, variant=None):
    """One seeded trial: sample task -> tune -> score. Returns
    (accuracy, seconds per tuning epoch)."""
    task = sample_task(data, cfg.shots, seed=cfg.seed + trial)
    model = prompt_tune(
        ckpt, data, task, settings=tune_settings(cfg), variant=variant or cfg.variant
    )
    secs = statistics.median(model.epoch_seconds) if model.epoch_seconds else 0.0
    return accuracy(model, task), secs


_WORKER_CTX = {}


def _worker_init(ckpt, data, cfg, variant):
    _WORKER_CTX["args"] = (ckpt, data, cfg, variant)


def _worker_trial(trial):
    ckpt, data, cfg, variant = _WORKER_CTX["args"]
    return _guarded_trial(ckpt, data, cfg, trial, variant)


def _guarded_trial(ckpt, data, cfg, trial, variant):
    try:
        return run_trial(ckpt, data, cfg, trial, variant)
    except MsgcotError as exc:
        raise MsgcotError(f"trial {trial} failed: {exc}") from exc


def run_experiment(cfg, data=None, ckpt=None, variant=None):
    """Run ``cfg.trials`` seeded few-shot trials and aggregate the results."""
    cfg.validate()
    data = data if data is not None else load_dataset(cfg)
    ckpt = ckpt if ckpt is not None else ensure_checkpoint(cfg, data)
    variant = Variant.parse(variant or cfg.variant)

    trials = list(range(1, cfg.trials + 1))
    if cfg.workers > 1:
        with ProcessPoolExecutor(
            max_workers=cfg.workers,
            initializer=_worker_init,
            initargs=(ckpt, data, cfg, variant),
        ) as pool:
            outcomes = list(pool.map(_worker_trial, trials))
    else:
        outcomes = [_guarded_trial(ckpt, data, cfg, t, variant) for t in trials]

    accuracies = [a for a, _ in outcomes]
    per_epoch = statistics.median(s for _, s in outcomes)
    sizes = (
        [g.num_nodes for g in data.graphs]
        if isinstance(data, GraphCollection)
        else data.num_nodes
    )
    counts = count_trainable_params(cfg, sizes, feature_dim=data.feature_dim, variant=variant)
    return ResultsTable(
        dataset=cfg.dataset or getattr(data, "name", ""),
        variant=variant.value,
        accuracies=accuracies,
        config=cfg.snapshot(),
        seconds_per_epoch=per_epoch,
        param_counts=counts,
        trial_seeds=[cfg.seed + t for t in trials],
    )


def run_ablation(cfg, variants, data=None, ckpt=None):
    """One :func:`run_experiment` per variant over identical per-trial tasks."""
    data = data if data is not None else load_dataset(cfg)
    ckpt = ckpt if ckpt is not None else ensure_checkpoint(cfg, data)
    results = {}
    for variant in variants:
        variant = Variant.parse(variant)
        results[variant.value] = run_experiment(cfg, data=data, ckpt=ckpt, variant=variant)
    return results


def run_sweep(cfg, key, values, data=None, ckpt=None):
    """Re-run the experiment for each value of one config field."""
    data = data if data is not None else load_dataset(cfg)
    ckpt = ckpt if ckpt is not None else ensure_checkpoint(cfg, data)
    out = []
    for value in values:
        out.append(run_experiment(cfg.replace(**{key: value}), data=data, ckpt=ckpt))
    return out


def count_trainable_params(cfg, num_nodes_or_sizes, feature_dim=None, variant=Variant.FULL):
    """Trainable-parameter budget per component.

    Coarsening level l costs ``hidden * rank + rank * C_l`` (no biases) with
    ``C_l`` following the coarse-count schedule of the node count (the
    largest graph, for per-graph sizes); the conditional net costs
    ``hidden * bottleneck + bottleneck * feature_dim``. The full-rank
    counterfactual ``hidden * C_l`` is reported per level for comparison.
    Variants that never train the coarsening net report it as zero.
    """
    variant = Variant.parse(variant)
    if isinstance(num_nodes_or_sizes, (list, tuple)):
        base_nodes = max(num_nodes_or_sizes)
    else:
        base_nodes = int(num_nodes_or_sizes)
    counts = coarse_schedule(base_nodes, cfg.ratio, cfg.levels)
    levels = [cfg.hidden * cfg.rank + cfg.rank * c for c in counts]
    full_rank = [cfg.hidden * c for c in counts]

    include_coarsen = variant is not Variant.NO_MSP and cfg.coarsening == "learned"
    out = {
        "coarse_counts": counts,
        "coarsen_levels": levels if include_coarsen else [0] * len(levels),
        "coarsen_total": sum(levels) if include_coarsen else 0,
        "full_rank_levels": full_rank,
    }
    if feature_dim:
        out["condnet"] = cfg.hidden * cfg.bottleneck + cfg.bottleneck * int(feature_dim)
        out["total"] = out["coarsen_total"] + out["condnet"]
    return out


def time_tuning_epochs(cfg, warmup=3, measured=10, data=None, ckpt=None):
    """Median wall-clock seconds per tuning epoch, first ``warmup`` epochs
    discarded."""
    if measured < 1:
        raise ConfigError("need at least one measured epoch")
    data = data if data is not None else load_dataset(cfg)
    ckpt = ckpt if ckpt is not None else ensure_checkpoint(cfg, data)
    task = sample_task(data, cfg.shots, seed=cfg.seed + 1)
    settings = tune_settings(cfg)
    settings.epochs = warmup + measured
    model = prompt_tune(ckpt, data, task, settings=settings, variant=cfg.variant)
    return float(statistics.median(model.epoch_seconds[warmup:]))
