"""Render benchmark figures from experiment CSV logs.

This package does no computation of its own: it consumes the CSV files the
training/online/benchmark tools document and turns them into figures.
Inputs are validated against the expected headers and never modified.
"""

import csv
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["FigureSpec", "SchemaError", "render", "KINDS"]


class SchemaError(ValueError):
    """An input CSV does not carry the columns a figure kind needs."""


# columns each figure kind consumes, keyed by kind
KINDS = {
    "prediction": ("n", "prediction", "target"),
    "convergence": ("total_nodes", "train_nrmse"),
    "weight_error": ("n", "weight_error_fro"),
    "grid_curve": ("param_value", "val_nrmse_mean"),
}


@dataclass
class FigureSpec:
    kind: str
    inputs: list
    out: str
    labels: list = field(default_factory=list)


def _load_columns(path, wanted):
    try:
        f = open(path, newline="")
    except OSError as err:
        raise SchemaError(f"cannot open {path}: {err}") from err
    with f:
        reader = csv.reader(f)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        for col in wanted:
            if col not in header:
                raise SchemaError(f"{path}: missing required column {col!r}")
        idx = [header.index(col) for col in wanted]
        cols = {col: [] for col in wanted}
        for row in reader:
            for col, i in zip(wanted, idx):
                cols[col].append(float(row[i]))
    return cols


def _label(spec, i):
    if i < len(spec.labels) and spec.labels[i]:
        return spec.labels[i]
    return os.path.splitext(os.path.basename(spec.inputs[i]))[0]


def render(spec):
    """Write the figure described by spec; returns the plotted series info.

    The return value maps each series label to its point count, which makes
    the plotted data deterministic and checkable without decoding the image.
    """
    if spec.kind not in KINDS:
        raise SchemaError(f"unknown figure kind {spec.kind!r}; expected one of {sorted(KINDS)}")
    if not spec.inputs:
        raise SchemaError("at least one input CSV is required")
    wanted = KINDS[spec.kind]
    series = {}
    fig, ax = plt.subplots(figsize=(7, 4.2))
    try:
        for i, path in enumerate(spec.inputs):
            cols = _load_columns(path, wanted)
            label = _label(spec, i)
            if spec.kind == "prediction":
                ax.plot(cols["n"], cols["target"], label=f"{label} target", lw=1.4)
                ax.plot(
                    cols["n"], cols["prediction"], "--", label=f"{label} prediction", lw=1.1
                )
                ax.set_xlabel("step")
                ax.set_ylabel("output")
                series[f"{label} target"] = len(cols["target"])
                series[f"{label} prediction"] = len(cols["prediction"])
            elif spec.kind == "convergence":
                ax.plot(cols["total_nodes"], cols["train_nrmse"], marker="o", label=label)
                ax.set_xlabel("reservoir nodes")
                ax.set_ylabel("training NRMSE")
                ax.set_yscale("log")
                series[label] = len(cols["train_nrmse"])
            elif spec.kind == "weight_error":
                ax.plot(cols["n"], cols["weight_error_fro"], label=label)
                ax.set_xlabel("step")
                ax.set_ylabel("readout weight error (Frobenius)")
                series[label] = len(cols["weight_error_fro"])
            else:  # grid_curve
                ax.plot(cols["param_value"], cols["val_nrmse_mean"], marker="s", label=label)
                ax.set_xlabel("parameter value")
                ax.set_ylabel("validation NRMSE (mean)")
                series[label] = len(cols["val_nrmse_mean"])
        ax.legend(loc="best", fontsize=8)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(spec.out)
    finally:
        plt.close(fig)
    return series
