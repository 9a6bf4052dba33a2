"""Command-line entry point.

Subcommands: ``pretrain``, ``tune``, ``ablate``, ``sweep``, ``params``,
``time``, ``report``. Every run-shaped command shares the same flags; values
resolve as CLI flag > config file (``--config``) > dataset preset > default.
Exits nonzero on any error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import make_config, load_config_file
from .data import GraphCollection
from .errors import MsgcotError
from .experiments import (
    count_trainable_params,
    ensure_checkpoint,
    load_dataset,
    run_ablation,
    run_experiment,
    run_sweep,
    time_tuning_epochs,
)
from .pretrain import save_checkpoint
from .prompting import Variant
from .reporting import emit_report, load_report

_CONFIG_FLAGS = [
    ("--dataset", str, "dataset name (preset key: cora, citeseer, mutag, ...)"),
    ("--data-dir", str, "directory holding the dataset files"),
    ("--level", str, "task level: node or graph"),
    ("--shots", int, "labeled items per class"),
    ("--trials", int, "number of sampled tasks"),
    ("--seed", int, "base random seed"),
    ("--hidden", int, "encoder hidden width"),
    ("--encoder-layers", int, "encoder depth"),
    ("--ratio", float, "coarsening ratio"),
    ("--levels", int, "coarsening levels / chain steps"),
    ("--rank", int, "low-rank width of the coarsening net"),
    ("--bottleneck", int, "conditional-net bottleneck width"),
    ("--alpha", float, "reconstruction loss weight"),
    ("--tau", float, "similarity temperature"),
    ("--gamma", float, "reconstruction exponent"),
    ("--variant", str, "full | no_msp | no_re | no_tb | no_iu"),
    ("--coarsening", str, "learned | precomputed"),
    ("--lr", float, "tuning learning rate"),
    ("--weight-decay", float, "tuning weight decay"),
    ("--tune-epochs", int, "tuning epochs per trial"),
    ("--pretrain-epochs", int, "pre-training epochs"),
    ("--pretrain-lr", float, "pre-training learning rate"),
    ("--pretrain-batch", int, "edge triples per pre-training epoch"),
    ("--dtype", str, "float32 | float64"),
    ("--workers", int, "parallel trial processes"),
    ("--checkpoint", str, "encoder checkpoint path (loaded or written)"),
    ("--out-dir", str, "report output directory"),
]


def _add_config_flags(parser):
    parser.add_argument("--config", help="flat key=value config file")
    for flag, typ, help_text in _CONFIG_FLAGS:
        parser.add_argument(flag, type=typ, help=help_text)


def _build_config(args):
    file_values = load_config_file(args.config) if args.config else None
    overrides = {}
    for flag, _, _ in _CONFIG_FLAGS:
        attr = flag.lstrip("-").replace("-", "_")
        value = getattr(args, attr, None)
        if value is not None:
            overrides[attr] = value
    return make_config(file_values=file_values, overrides=overrides)


def _print_table(table):
    params = table.param_counts.get("total", table.param_counts.get("coarsen_total", 0))
    print(
        f"{table.dataset:<10} {table.variant:<8} "
        f"acc {100 * table.mean:6.2f} ± {100 * table.std:5.2f}  "
        f"({len(table.accuracies)} trials, {params} params, "
        f"{table.seconds_per_epoch * 1000:.1f} ms/epoch)"
    )


def cmd_pretrain(args):
    cfg = _build_config(args)
    data = load_dataset(cfg)
    if not cfg.checkpoint:
        cfg = cfg.replace(checkpoint=str(Path(cfg.out_dir) / f"{cfg.dataset}_encoder.ckpt"))
    ckpt = ensure_checkpoint(cfg, data)
    if not Path(cfg.checkpoint).is_file():
        save_checkpoint(ckpt, cfg.checkpoint)
    first = ckpt.loss_history[0] if ckpt.loss_history else float("nan")
    last = ckpt.loss_history[-1] if ckpt.loss_history else float("nan")
    print(f"encoder for {cfg.dataset}: loss {first:.4f} -> {last:.4f}, saved {cfg.checkpoint}")


def cmd_tune(args):
    cfg = _build_config(args)
    table = run_experiment(cfg)
    _print_table(table)
    emit_report(table, cfg.out_dir)
    print(f"report written to {cfg.out_dir}")


def cmd_ablate(args):
    cfg = _build_config(args)
    variants = [Variant.parse(v) for v in args.variants.split(",")] if args.variants else list(Variant)
    results = run_ablation(cfg, variants)
    for table in results.values():
        _print_table(table)
    emit_report(list(results.values()), cfg.out_dir)
    print(f"report written to {cfg.out_dir}")


def cmd_sweep(args):
    cfg = _build_config(args)
    raw = args.values.split(",")
    caster = {"shots": int, "levels": int, "rank": int, "trials": int}.get(args.key, float)
    values = [caster(v) for v in raw]
    tables = run_sweep(cfg, args.key, values)
    for table in tables:
        _print_table(table)
    emit_report(tables, cfg.out_dir, sweep_key=args.key)
    print(f"report written to {cfg.out_dir}")


def cmd_params(args):
    cfg = _build_config(args)
    if args.num_nodes:
        sizes, feature_dim = args.num_nodes, args.feature_dim
    else:
        data = load_dataset(cfg)
        feature_dim = data.feature_dim
        sizes = (
            [g.num_nodes for g in data.graphs]
            if isinstance(data, GraphCollection)
            else data.num_nodes
        )
    counts = count_trainable_params(cfg, sizes, feature_dim=feature_dim, variant=cfg.variant)
    print(f"coarse counts per level: {counts['coarse_counts']}")
    for i, (low, full) in enumerate(zip(counts["coarsen_levels"], counts["full_rank_levels"]), 1):
        print(f"level {i}: low-rank {low}  vs full-rank {full}")
    print(f"coarsening total: {counts['coarsen_total']}")
    if "condnet" in counts:
        print(f"conditional net: {counts['condnet']}")
        print(f"trainable total: {counts['total']}")


def cmd_time(args):
    cfg = _build_config(args)
    secs = time_tuning_epochs(cfg, warmup=args.warmup, measured=args.measured)
    print(f"{cfg.dataset}: {secs:.4f} s/epoch (median of {args.measured} epochs)")


def cmd_report(args):
    sweep_key, records = load_report(args.results_dir)
    print(f"{'dataset':<10} {'variant':<8} {'mean':>7} {'std':>6}")
    for rec in records:
        print(
            f"{rec['dataset']:<10} {rec['variant']:<8} "
            f"{100 * rec['mean']:7.2f} {100 * rec['std']:6.2f}"
        )
    if sweep_key:
        print(f"(sweep over {sweep_key})")


def main(argv=None):
    parser = argparse.ArgumentParser(prog="msgcot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, extra in [
        ("pretrain", cmd_pretrain, None),
        ("tune", cmd_tune, None),
        ("ablate", cmd_ablate, "ablate"),
        ("sweep", cmd_sweep, "sweep"),
        ("params", cmd_params, "params"),
        ("time", cmd_time, "time"),
    ]:
        p = sub.add_parser(name)
        _add_config_flags(p)
        if extra == "ablate":
            p.add_argument("--variants", help="comma-separated variant list (default: all)")
        elif extra == "sweep":
            p.add_argument("--key", required=True, help="config field to sweep (e.g. ratio, shots)")
            p.add_argument("--values", required=True, help="comma-separated values")
        elif extra == "params":
            p.add_argument("--num-nodes", type=int, help="node count (skips loading the dataset)")
            p.add_argument("--feature-dim", type=int, help="feature width for the conditional net")
        elif extra == "time":
            p.add_argument("--warmup", type=int, default=3)
            p.add_argument("--measured", type=int, default=10)
        p.set_defaults(fn=fn)

    p = sub.add_parser("report")
    p.add_argument("results_dir", help="directory holding results.json")
    p.set_defaults(fn=cmd_report)

    args = parser.parse_args(argv)
    try:
        args.fn(args)
    except MsgcotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
