"""Experiment orchestration: repeated seeded trials, size sweeps, reports.

Each trial owns one seed that drives both the data realization and the
model construction, so different model kinds compared at the same base seed
see identical data (paired comparisons). Aggregation is deterministic; only
the wall-clock fields vary between reruns.
"""

import csv
import json
import time
from dataclasses import dataclass, replace

import numpy as np

from .builder import train_brscn, train_esn, train_rscn
from .data import (
    add_noise_validation,
    build_mg_task,
    debutanizer_features,
    gen_mackey_glass,
    gen_plant,
    load_csv,
    MGConfig,
)
from .errors import InvalidArgumentError
from .numeric import nrmse
from .reservoir import evaluate, harvest_states

__all__ = [
    "TaskSpec",
    "mg_task",
    "plant_task",
    "csv_task",
    "debutanizer_task",
    "TrialReport",
    "GridResult",
    "run_trials",
    "grid_search",
    "emit_report",
    "load_report",
    "emit_grid",
]

MODEL_KINDS = ("esn", "rscn", "brscn")


@dataclass
class TaskSpec:
    """A named dataset factory: seed -> (train, val, test)."""

    name: str
    make: callable


def mg_task(variant="mg"):
    return TaskSpec(
        name=variant,
        make=lambda seed: build_mg_task(gen_mackey_glass(MGConfig(seed=seed)), variant),
    )


def plant_task():
    return TaskSpec(name="plant", make=gen_plant)


def csv_task(train_path, val_path, test_path, k, l, washout, name="csv"):
    def make(seed):
        return (
            load_csv(train_path, k, l, washout),
            load_csv(val_path, k, l, washout),
            load_csv(test_path, k, l, washout),
        )

    return TaskSpec(name=name, make=make)


def debutanizer_task(raw_path, mode="reduced", sigma_rel=0.05):
    """Soft-sensor task from the raw column data; the validation split is
    the noisy copy of the test split, re-seeded per trial."""

    def make(seed):
        raw = load_csv(raw_path, k=7, l=1, washout=0)
        train, test = debutanizer_features(raw, mode)
        return train, add_noise_validation(test, sigma_rel, seed), test

    return TaskSpec(name=f"debutanizer-{mode}", make=make)


@dataclass
class TrialReport:
    model_kind: str
    n_sub: int
    reservoir_size: int
    trials: int
    train_nrmse_mean: float
    train_nrmse_std: float
    test_nrmse_mean: float
    test_nrmse_std: float
    train_time_mean: float
    train_time_std: float


@dataclass
class GridResult:
    param: str
    points: list  # [(value, val_nrmse_mean)]
    chosen: float


def _train_one(model_kind, train, val, cfg, esn_nodes):
    t0 = time.perf_counter()
    if model_kind == "brscn":
        model, log = train_brscn(train, val, cfg)
        train_err = log.records[-1].train_nrmse
    elif model_kind == "rscn":
        model, log = train_rscn(train, val, cfg)
        train_err = log.records[-1].train_nrmse
    elif model_kind == "esn":
        model = train_esn(train, cfg, esn_nodes)
        log = None
        sm = harvest_states(model.blocks, train.u, train.washout, True)
        train_err = nrmse(model.w_out @ sm.values, train.t[:, train.washout :])
    else:
        raise InvalidArgumentError(f"model_kind must be one of {MODEL_KINDS}, got {model_kind!r}")
    elapsed = time.perf_counter() - t0
    return model, log, train_err, elapsed


def _mean_std(values):
    arr = np.asarray(values, dtype=float)
    if len(arr) == 1:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std(ddof=1))


def run_trials(task, model_kind, cfg, trials, base_seed, esn_nodes=100):
    """Independent seeded builds and evaluations, aggregated.

    Trial i uses seed base_seed + i for both the data realization and the
    construction randomness. Standard deviations are sample std; a single
    trial reports 0.
    """
    if trials < 1:
        raise InvalidArgumentError("trials must be at least 1")
    train_errs, test_errs, times, sizes = [], [], [], []
    for i in range(trials):
        seed = base_seed + i
        train, val, test = task.make(seed)
        cfg_i = replace(cfg, base_seed=seed)
        model, _, train_err, elapsed = _train_one(model_kind, train, val, cfg_i, esn_nodes)
        train_errs.append(train_err)
        test_errs.append(evaluate(model, test))
        times.append(elapsed)
        sizes.append(model.state_dim)
    train_mean, train_std = _mean_std(train_errs)
    test_mean, test_std = _mean_std(test_errs)
    time_mean, time_std = _mean_std(times)
    return TrialReport(
        model_kind=model_kind,
        n_sub={"brscn": cfg.n_sub, "rscn": 1, "esn": 0}[model_kind],
        reservoir_size=int(round(float(np.mean(sizes)))),
        trials=trials,
        train_nrmse_mean=train_mean,
        train_nrmse_std=train_std,
        test_nrmse_mean=test_mean,
        test_nrmse_std=test_std,
        train_time_mean=time_mean,
        train_time_std=time_std,
    )


def grid_search(task, model_kind, cfg, param, values, trials_per_point, base_seed, esn_nodes=100):
    """Sweep one size parameter, scoring by mean validation NRMSE.

    param 'nsub' sweeps the block size (block trainer only); 'nodes' sweeps
    the fixed reservoir size for the baseline or the node budget for the
    point-incremental trainer. Ties at the minimum go to the smaller value.
    """
    values = [int(v) for v in values]
    if not values:
        raise InvalidArgumentError("value list must be nonempty")
    if param not in ("nsub", "nodes"):
        raise InvalidArgumentError(f"param must be 'nsub' or 'nodes', got {param!r}")
    if param == "nsub" and model_kind != "brscn":
        raise InvalidArgumentError("the nsub sweep applies to the block trainer")
    points = []
    for value in values:
        errs = []
        for i in range(trials_per_point):
            seed = base_seed + i
            train, val, test = task.make(seed)
            cfg_i = replace(cfg, base_seed=seed)
            nodes = esn_nodes
            if param == "nsub":
                cfg_i = replace(cfg_i, n_sub=value)
            elif model_kind == "esn":
                nodes = value
            else:
                cfg_i = replace(cfg_i, j_max=value)
            model, _, _, _ = _train_one(model_kind, train, val, cfg_i, nodes)
            errs.append(evaluate(model, val))
        points.append((value, float(np.mean(errs))))
    chosen = min(points, key=lambda p: (p[1], p[0]))[0]
    return GridResult(param=param, points=points, chosen=chosen)


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

def emit_report(report, path):
    with open(path, "w") as f:
        json.dump(report.__dict__, f, indent=2)


def load_report(path):
    with open(path) as f:
        obj = json.load(f)
    return TrialReport(**obj)


def emit_grid(result, path):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["param_value", "val_nrmse_mean"])
        for value, err in result.points:
            writer.writerow([value, repr(err)])
