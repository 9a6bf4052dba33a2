"""Result emission: per-trial JSON, summary CSV, and sweep plots.

``results.json`` keeps everything needed to recompute the summaries;
``results.csv`` has one row per (dataset, variant) with mean, std, trainable
parameters and seconds per epoch. When the results came from a sweep, one
plot per swept key shows mean accuracy (with a std band) against the key.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

__all__ = ["emit_report", "load_report"]


def _atomic_write(path, data):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    with os.fdopen(fd, "w") as fh:
        fh.write(data)
    os.replace(tmp, path)


def emit_report(results, out_dir, sweep_key=None):
    """Write results.json, results.csv and (for sweeps) a plot; returns the
    list of written paths. ``results`` is one ResultsTable or a list."""
    tables = results if isinstance(results, (list, tuple)) else [results]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    records = [t.to_record() for t in tables]
    json_path = out_dir / "results.json"
    _atomic_write(json_path, json.dumps({"sweep_key": sweep_key, "runs": records}, indent=2))
    written.append(json_path)

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["dataset", "variant", "shots", "trials", "mean", "std", "params_total", "seconds_per_epoch"]
        + ([sweep_key] if sweep_key else [])
    )
    for rec in records:
        row = [
            rec["dataset"],
            rec["variant"],
            rec["config"].get("shots"),
            len(rec["accuracies"]),
            f"{rec['mean']:.4f}",
            f"{rec['std']:.4f}",
            rec["param_counts"].get("total", rec["param_counts"].get("coarsen_total")),
            f"{rec['seconds_per_epoch']:.4f}",
        ]
        if sweep_key:
            row.append(rec["config"].get(sweep_key))
        writer.writerow(row)
    csv_path = out_dir / "results.csv"
    _atomic_write(csv_path, buf.getvalue())
    written.append(csv_path)

    if sweep_key and len(records) > 1:
        written.append(_sweep_plot(records, sweep_key, out_dir))
    return written


def _sweep_plot(records, sweep_key, out_dir):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [rec["config"].get(sweep_key) for rec in records]
    means = [100.0 * rec["mean"] for rec in records]
    stds = [100.0 * rec["std"] for rec in records]
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.errorbar(xs, means, yerr=stds, marker="o", capsize=3)
    labels = {
        "ratio": "coarsening rate",
        "levels": "coarsening layers",
        "rank": "coarsening net width",
        "shots": "shots",
    }
    ax.set_xlabel(labels.get(sweep_key, sweep_key))
    ax.set_ylabel("accuracy (%)")
    dataset = records[0]["dataset"]
    ax.set_title(f"{dataset}: accuracy vs {labels.get(sweep_key, sweep_key)}")
    fig.tight_layout()
    path = Path(out_dir) / f"sweep_{sweep_key}.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def load_report(out_dir):
    """Read back results.json as (sweep_key, list of records)."""
    payload = json.loads((Path(out_dir) / "results.json").read_text())
    return payload.get("sweep_key"), payload["runs"]
