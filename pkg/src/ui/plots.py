#!/usr/bin/env python3
"""
Result Charts - SVG line charts and plot-data files for experiment records

Records are grouped into series (one per solver, split further by ensemble
and noise level when a run mixes them), aggregated per x value, and drawn as
one polyline per series. Error charts use a logarithmic y axis with values
clamped to a 1e-16 floor; success-rate charts are fixed to [0, 1].

Each chart is written as a self-contained SVG plus a sibling `.dat` text
file holding the aggregated series.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..utils.errors import HarnessIOError  # noqa: E402

logger = logging.getLogger(__name__)

LOG_FLOOR = 1e-16

# reproducible SVG ids
plt.rcParams["svg.hashsalt"] = "qmr"


class PlotKind(Enum):
    """Chart types"""
    SUCCESS_VS_RATIO = "success_vs_ratio"
    ERR_VS_P = "err_vs_p"
    TIME_VS_P = "time_vs_p"
    ERR_VS_SIGMA = "err_vs_sigma"
    ERR_VS_N = "err_vs_n"


_AXES = {
    PlotKind.SUCCESS_VS_RATIO: ("n/p", "Success rate", False),
    PlotKind.ERR_VS_P: ("p", "Relative error", True),
    PlotKind.TIME_VS_P: ("p", "CPU time (s)", False),
    PlotKind.ERR_VS_SIGMA: ("sigma", "Relative error", True),
    PlotKind.ERR_VS_N: ("n", "Relative error", True),
}


@dataclass
class PlotSeries:
    """Aggregated points of one polyline"""
    label: str
    points: List[Tuple[float, float]] = field(default_factory=list)


def _x_value(kind: PlotKind, record) -> float:
    if kind is PlotKind.SUCCESS_VS_RATIO:
        return round(record.n / record.p, 6)
    if kind is PlotKind.ERR_VS_SIGMA:
        return float(record.sigma)
    if kind is PlotKind.ERR_VS_N:
        return float(record.n)
    return float(record.p)


def _y_value(kind: PlotKind, records) -> float:
    if kind is PlotKind.SUCCESS_VS_RATIO:
        return sum(1 for r in records if r.success) / len(records)
    if kind is PlotKind.TIME_VS_P:
        return float(np.mean([r.time_seconds for r in records]))
    errors = [r.rel_err for r in records if np.isfinite(r.rel_err)]
    if not errors:
        return float("nan")
    return max(float(np.mean(errors)), LOG_FLOOR)


def build_series(records, kind: PlotKind) -> List[PlotSeries]:
    """Group records into labelled series of (x, y) points sorted by x"""
    kinds = {r.kind for r in records}
    noises = {r.noise_sigma for r in records}
    sigmas = {r.sigma for r in records} if kind is not PlotKind.ERR_VS_SIGMA else set()

    groups: Dict[str, Dict[float, list]] = {}
    for record in records:
        label = record.solver
        if len(kinds) > 1:
            label += f" {record.kind}"
        if len(noises) > 1:
            label += f" noise={record.noise_sigma:g}"
        if len(sigmas) > 1:
            label += f" sigma={record.sigma:g}"
        groups.setdefault(label, {}).setdefault(_x_value(kind, record), []).append(record)

    series = []
    for label in sorted(groups):
        points = [(x, _y_value(kind, rows)) for x, rows in sorted(groups[label].items())]
        points = [(x, y) for x, y in points if np.isfinite(y)]
        if not points:
            logger.warning(f"Skipping empty series {label!r} for {kind.value}")
            continue
        series.append(PlotSeries(label=label, points=points))
    return series


def write_plot_data(series: List[PlotSeries], kind: PlotKind, path: Union[str, Path]) -> Path:
    """Whitespace-separated series dump"""
    path = Path(path)
    x_label, y_label, _ = _AXES[kind]
    lines = [f"# {kind.value}: {x_label} vs {y_label}"]
    for s in series:
        lines.append(f"# series: {s.label}")
        lines.extend(f"{x!r} {y!r}" for x, y in s.points)
        lines.append("")
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as e:
        raise HarnessIOError(f"Cannot write plot data {path}: {e}") from e
    return path


def emit_plot(records, kind: PlotKind, path: Union[str, Path]) -> List[PlotSeries]:
    """Write `path` (SVG) and `path` with a .dat suffix; return the plotted series"""
    path = Path(path)
    series = build_series(records, kind)
    x_label, y_label, log_y = _AXES[kind]

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for s in series:
        xs, ys = zip(*s.points)
        ax.plot(xs, ys, marker="o", label=s.label)
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    if log_y:
        ax.set_yscale("log")
    if kind is PlotKind.SUCCESS_VS_RATIO:
        ax.set_ylim(0.0, 1.0)
    if series:
        ax.legend()
    ax.grid(True, alpha=0.3)

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as e:
        raise HarnessIOError(f"Cannot write plot {path}: {e}") from e
    finally:
        plt.close(fig)

    write_plot_data(series, kind, path.with_suffix(".dat"))
    logger.info(f"Plot written: {path}")
    return series
