"""Empirical CDF extraction and rendering.

Input is the simulator's sample table: columns population, metric, drop,
user, value, optionally preceded by a group column from a parameter sweep.
Curves use the plotting positions i/(n-1), so reading a curve at a
probability level reproduces the simulator's linear-interpolation
quantiles exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

METRICS = ("SINR_dB", "INR_dB", "rate_bps")

_AXIS_LABEL = {
    "SINR_dB": "SINR (dB)",
    "INR_dB": "INR (dB)",
    "rate_bps": "Rate (Mbit/s)",
}


@dataclass
class FigureSpec:
    """What to draw: which files, metric, populations, grouping, output."""

    csv_paths: list
    metric: str
    out_path: str
    populations: tuple = ("UE", "UAV")
    group_key: str | None = None   # column name; None = by file when several
    title: str = ""


def load_samples(csv_paths, group_key: str | None = None) -> list[dict]:
    """Rows from one or more sample CSVs, each tagged with a group label.

    The label comes from ``group_key`` when that column exists, otherwise
    from the file stem when several files are given, otherwise "all".
    """
    paths = [Path(p) for p in csv_paths]
    rows: list[dict] = []
    for path in paths:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            fields = reader.fieldnames or []
            for needed in ("population", "metric", "value"):
                if needed not in fields:
                    raise ValueError(f"{path}: missing column {needed!r}")
            use_group = group_key if group_key and group_key in fields else None
            if group_key and use_group is None and ("group" in fields):
                use_group = "group"
            for record in reader:
                if use_group:
                    label = record[use_group]
                elif len(paths) > 1:
                    label = path.stem
                else:
                    label = "all"
                rows.append({
                    "group": label,
                    "population": record["population"],
                    "metric": record["metric"],
                    "value": float(record["value"]),
                })
    return rows


def select_series(rows, metric: str, populations) -> dict[tuple[str, str], np.ndarray]:
    """Sorted sample arrays keyed by (group, population) for one metric."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    buckets: dict[tuple[str, str], list] = {}
    for row in rows:
        if row["metric"] != metric or row["population"] not in populations:
            continue
        buckets.setdefault((row["group"], row["population"]), []).append(row["value"])
    if not buckets:
        groups = sorted({r["group"] for r in rows})
        pops = sorted({r["population"] for r in rows})
        raise ValueError(
            f"no samples for metric={metric!r}, populations={tuple(populations)!r}; "
            f"available groups: {groups}, populations: {pops}")
    return {key: np.sort(np.asarray(values, dtype=float))
            for key, values in sorted(buckets.items())}


def ecdf(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sorted samples and plotting positions i/(n-1), spanning [0, 1]."""
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        raise ValueError("empty sample set has no distribution")
    if x.size == 1:
        return x, np.array([1.0])
    return x, np.arange(x.size) / (x.size - 1.0)


def curve_quantiles(x: np.ndarray, p: np.ndarray, levels) -> np.ndarray:
    """Read the curve at probability levels (inverse of the ECDF polyline)."""
    return np.interp(np.asarray(levels, dtype=float), p, x)


def plot_cdf(spec: FigureSpec) -> dict[tuple[str, str], tuple[np.ndarray, np.ndarray]]:
    """Render one CDF figure; returns the plotted curves keyed like the series.

    One curve per (group, population). Rates are drawn in Mbit/s on a log
    axis since they span orders of magnitude across schedule sizes.
    """
    rows = load_samples(spec.csv_paths, spec.group_key)
    series = select_series(rows, spec.metric, spec.populations)

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    curves = {}
    for (group, population), values in series.items():
        x, p = ecdf(values)
        curves[(group, population)] = (x, p)
        plot_x = x / 1e6 if spec.metric == "rate_bps" else x
        label = population if group == "all" else f"{population} {group}"
        ax.plot(plot_x, p, label=label)
    if spec.metric == "rate_bps":
        ax.set_xscale("log")
    ax.set_xlabel(_AXIS_LABEL[spec.metric])
    ax.set_ylabel("Empirical CDF")
    ax.set_ylim(0.0, 1.0)
    ax.grid(True, alpha=0.4)
    ax.legend()
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=120, metadata={"Software": "coexplot"})
    plt.close(fig)
    return curves
