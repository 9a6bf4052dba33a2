"""Experiment configuration: one flat record covering data location, task
shape, model hyperparameters and run control, with per-dataset defaults.

Config files are flat ``key=value`` text; ``#`` starts a comment. Values use
the field's type (ints, floats, strings; booleans accept true/false). CLI
flags override file values, which override dataset presets, which override
the dataclass defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

__all__ = ["ExperimentConfig", "DATASET_PRESETS", "make_config", "load_config_file"]


@dataclass
class ExperimentConfig:
    # data
    dataset: str = ""
    data_dir: str = "data"
    level: str = "node"  # node | graph
    # task
    shots: int = 1
    trials: int = 100
    seed: int = 0
    # model
    hidden: int = 256
    encoder_layers: int = 2
    ratio: float = 0.1
    levels: int = 2
    rank: int = 8
    bottleneck: int = 32
    alpha: float = 1.0
    tau: float = 0.1
    gamma: float = 2.0
    variant: str = "full"
    coarsening: str = "learned"  # learned | precomputed
    # optimization
    lr: float = 1e-3
    weight_decay: float = 0.0
    tune_epochs: int = 100
    pretrain_epochs: int = 200
    pretrain_lr: float = 1e-3
    pretrain_batch: int = 256
    pretrain_temperature: float = 1.0
    # run control
    dtype: str = "float32"
    workers: int = 1
    checkpoint: str = ""
    out_dir: str = "results"

    def validate(self):
        if not 0 < self.ratio < 1:
            raise ConfigError(f"ratio must lie in (0, 1), got {self.ratio}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.shots < 1:
            raise ConfigError("shots must be at least 1")
        if self.level not in ("node", "graph"):
            raise ConfigError(f"level must be node or graph, got {self.level!r}")
        if self.coarsening not in ("learned", "precomputed"):
            raise ConfigError(f"coarsening must be learned or precomputed, got {self.coarsening!r}")
        if self.levels < 0:
            raise ConfigError("levels must be non-negative")
        if self.dtype not in ("float32", "float64"):
            raise ConfigError(f"dtype must be float32 or float64, got {self.dtype!r}")
        return self

    def snapshot(self):
        return dataclasses.asdict(self)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes).validate()


# per-dataset hyperparameters: coarsening ratio/levels, low-rank width,
# learning rate, weight decay, encoder depth, task level, reconstruction weight
DATASET_PRESETS = {
    "cora": dict(level="node", ratio=0.1, levels=2, rank=8, lr=1e-3, weight_decay=0.0,
                 encoder_layers=2, alpha=1.0),
    "citeseer": dict(level="node", ratio=0.1, levels=2, rank=8, lr=1e-3, weight_decay=0.0,
                     encoder_layers=2, alpha=1.0),
    "pubmed": dict(level="node", ratio=0.1, levels=1, rank=8, lr=1e-3, weight_decay=0.0,
                   encoder_layers=3, alpha=1.0),
    "photo": dict(level="node", ratio=0.3, levels=2, rank=8, lr=1e-3, weight_decay=0.0,
                  encoder_layers=2, alpha=1.0),
    "mutag": dict(level="graph", ratio=0.05, levels=2, rank=1, lr=1e-3, weight_decay=1e-4,
                  encoder_layers=3, alpha=0.0),
    "cox2": dict(level="graph", ratio=0.01, levels=2, rank=1, lr=1e-3, weight_decay=1e-4,
                 encoder_layers=3, alpha=0.0),
    "bzr": dict(level="graph", ratio=0.01, levels=2, rank=1, lr=1e-3, weight_decay=1e-4,
                encoder_layers=3, alpha=0.0),
    "proteins": dict(level="graph", ratio=0.1, levels=2, rank=1, lr=1e-3, weight_decay=1e-4,
                     encoder_layers=3, alpha=0.0),
}

_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name, raw):
    if name not in _FIELDS:
        raise ConfigError(f"unknown config key {name!r}")
    target = _FIELDS[name].type
    if isinstance(raw, str):
        raw = raw.strip()
    try:
        if target == "int":
            return int(raw)
        if target == "float":
            return float(raw)
        if target == "bool":
            return str(raw).lower() in ("1", "true", "yes")
        return str(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def load_config_file(path):
    """Parse a flat key=value config file into a dict of typed values."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        values[key.strip()] = _coerce(key.strip(), value)
    return values


def make_config(dataset="", file_values=None, overrides=None):
    """Assemble a validated config: defaults < dataset preset < file < overrides."""
    values = {}
    name = (overrides or {}).get("dataset") or (file_values or {}).get("dataset") or dataset
    if name:
        values["dataset"] = name
        preset = DATASET_PRESETS.get(str(name).lower())
        if preset:
            values.update(preset)
    for source in (file_values, overrides):
        for key, value in (source or {}).items():
            if value is not None:
                values[key] = _coerce(key, value)
    return ExperimentConfig(**values).validate()
