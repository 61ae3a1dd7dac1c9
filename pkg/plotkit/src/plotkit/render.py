"""Figure rendering from the report CSV contract.

The input is a grid report: an optional '# shiftlab-config: {...}' comment
line, one header line, then one row per scale. The columns each figure kind
needs are part of the producer's CSV contract; a missing one is an input
error naming the column. Cells may hold 'n/a' (refused simulation) or a
value past float range; such cells drop out of the affected series with a
count in the render notes, never silently. Nothing is recomputed: every
plotted number traces to a CSV cell."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

CONFIG_PREFIX = "# shiftlab-config: "

KIND_COLUMNS = {
    "cover_scaling": ("delta", "Ecov_mean", "Ecov_se", "main_lo", "main_hi"),
    "dim_diagnostic": ("delta", "dim_ratio"),
    "hitting_sandwich": ("delta", "Ehit_exact", "Ecov_mean", "Ecov_se",
                         "coupon"),
}

# (log x, log y) defaults: step counts need log-log; the dimension
# diagnostic is a ratio and keeps a linear value axis
KIND_LOG_DEFAULTS = {
    "cover_scaling": (True, True),
    "dim_diagnostic": (True, False),
    "hitting_sandwich": (True, True),
}

# fixed size and dpi: identical inputs must give identical bytes
FIGSIZE = (6.4, 4.2)
DPI = 120


class ColumnError(ValueError):
    def __init__(self, column: str):
        super().__init__(f"missing column '{column}'")
        self.column = column


@dataclass(frozen=True)
class FigureSpec:
    csv_path: str
    kind: str
    out_path: str
    log_x: bool | None = None  # None picks the kind default
    log_y: bool | None = None

    def __post_init__(self):
        if self.kind not in KIND_COLUMNS:
            raise ValueError(f"unknown figure kind '{self.kind}'")

    def axis_scales(self) -> tuple[bool, bool]:
        default_x, default_y = KIND_LOG_DEFAULTS[self.kind]
        return (default_x if self.log_x is None else self.log_x,
                default_y if self.log_y is None else self.log_y)


def read_report(path: str):
    """(config dict or None, header list, rows as dicts of raw strings)."""
    config = None
    data_lines = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                if config is None and line.startswith(CONFIG_PREFIX):
                    config = json.loads(line[len(CONFIG_PREFIX):])
                continue
            data_lines.append(line)
    if not data_lines:
        raise ValueError("empty CSV: no header line")
    reader = csv.DictReader(io.StringIO("".join(data_lines)))
    return config, list(reader.fieldnames or ()), list(reader)


def _cell(row, column):
    """float or None; 'n/a' and anything non-numeric count as absent."""
    raw = (row.get(column) or "").strip()
    if not raw or raw == "n/a":
        return None
    try:
        return float(raw)
    except ValueError:
        return None


def _series(rows, x_col, y_col):
    """Paired finite values plus the count of rows that dropped out."""
    xs, ys, dropped = [], [], 0
    for row in rows:
        x, y = _cell(row, x_col), _cell(row, y_col)
        if x is None or y is None or not (math.isfinite(x) and math.isfinite(y)):
            dropped += 1
            continue
        xs.append(x)
        ys.append(y)
    return xs, ys, dropped


def _points_with_err(rows, x_col, y_col, se_col):
    """Like _series but carrying an error column; absent errors become 0."""
    xs, ys, errs, dropped = [], [], [], 0
    for row in rows:
        x, y, e = _cell(row, x_col), _cell(row, y_col), _cell(row, se_col)
        if x is None or y is None or not (math.isfinite(x) and math.isfinite(y)):
            dropped += 1
            continue
        xs.append(x)
        ys.append(y)
        errs.append(e if e is not None and math.isfinite(e) else 0.0)
    return xs, ys, errs, dropped


def _render_cover_scaling(ax, rows, notes):
    xs, ys, errs, dropped = _points_with_err(rows, "delta", "Ecov_mean",
                                             "Ecov_se")
    ax.errorbar(xs, ys, yerr=errs, fmt="o", capsize=3,
                label="measured cover time")
    notes["points"] = len(xs)
    notes["dropped"]["Ecov_mean"] = dropped
    curves = 0
    for column, style, label in (("main_lo", "--", "envelope lower"),
                                 ("main_hi", ":", "envelope upper")):
        cx, cy, cd = _series(rows, "delta", column)
        notes["dropped"][column] = cd
        if cx:
            ax.plot(cx, cy, style, label=label)
            curves += 1
    notes["curves"] = curves
    ax.set_ylabel("steps")


def _render_dim_diagnostic(ax, rows, notes):
    xs, ys, dropped = _series(rows, "delta", "dim_ratio")
    ax.plot(xs, ys, "o-", label="log(min cell mass) / log(delta)")
    notes["points"] = len(xs)
    notes["dropped"]["dim_ratio"] = dropped
    ax.set_ylabel("mass/scale log-ratio")


def _render_hitting_sandwich(ax, rows, notes):
    xs, ys, errs, dropped = _points_with_err(rows, "delta", "Ecov_mean",
                                             "Ecov_se")
    ax.errorbar(xs, ys, yerr=errs, fmt="o", capsize=3,
                label="measured cover time")
    notes["points"] = len(xs)
    notes["dropped"]["Ecov_mean"] = dropped
    for column, style, label in (("Ehit_exact", "--",
                                  "worst-cell exact hitting"),
                                 ("coupon", ":", "coupon envelope")):
        cx, cy, cd = _series(rows, "delta", column)
        notes["dropped"][column] = cd
        ax.plot(cx, cy, style, label=label)
    ax.set_ylabel("steps")


def render(spec: FigureSpec) -> dict:
    """Write the figure for `spec`; return counts of plotted/dropped cells."""
    config, header, rows = read_report(spec.csv_path)
    for column in KIND_COLUMNS[spec.kind]:
        if column not in header:
            raise ColumnError(column)
    notes = {"kind": spec.kind, "rows": len(rows), "dropped": {}}
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    try:
        if spec.kind == "cover_scaling":
            _render_cover_scaling(ax, rows, notes)
        elif spec.kind == "dim_diagnostic":
            _render_dim_diagnostic(ax, rows, notes)
        else:
            _render_hitting_sandwich(ax, rows, notes)
        log_x, log_y = spec.axis_scales()
        if log_x:
            ax.set_xscale("log")
        if log_y:
            ax.set_yscale("log")
        ax.set_xlabel("delta")
        title = spec.kind
        if config:
            tags = [str(config[key]) for key in ("metric", "model")
                    if config.get(key)]
            if tags:
                title += " (" + ", ".join(tags) + ")"
        ax.set_title(title)
        ax.legend(loc="best")
        # fixed metadata: the default stamps the renderer version into the
        # file, which would break byte-identity across environments
        fig.savefig(spec.out_path, format="png",
                    metadata={"Software": "plotkit"})
    finally:
        plt.close(fig)
    return notes
