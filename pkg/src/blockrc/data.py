"""Benchmark data: delay-differential series, a nonlinear plant, CSV ingestion,
lagged-feature construction, splits, and validation-noise synthesis.

All generators are pure functions of their seeds. Sequences are stored
column-per-sample: u has shape (K, n) and t has shape (L, n).
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError, InvalidArgumentError
from .numeric import substream

__all__ = [
    "Dataset",
    "MGConfig",
    "gen_mackey_glass",
    "build_mg_task",
    "simulate_plant",
    "plant_test_input",
    "gen_plant",
    "load_csv",
    "save_csv",
    "debutanizer_features",
    "add_noise_validation",
]


@dataclass
class Dataset:
    u: np.ndarray
    t: np.ndarray
    washout: int
    name: str = ""

    def __post_init__(self):
        self.u = np.atleast_2d(np.asarray(self.u, dtype=float))
        self.t = np.atleast_2d(np.asarray(self.t, dtype=float))
        if self.u.shape[1] != self.t.shape[1]:
            raise InvalidArgumentError(
                f"u and t must share sample counts, got {self.u.shape[1]} vs {self.t.shape[1]}"
            )
        # zero-length datasets are legal carriers (e.g. empty online streams)
        if not 0 <= self.washout <= max(self.u.shape[1] - 1, 0):
            raise InvalidArgumentError(
                f"washout {self.washout} must lie in [0, {self.u.shape[1]})"
            )

    @property
    def n(self):
        return self.u.shape[1]

    @property
    def k(self):
        return self.u.shape[0]

    @property
    def l(self):
        return self.t.shape[0]


@dataclass
class MGConfig:
    """Delay-differential benchmark generator settings.

    The defaults give the classical chaotic regime (the delay exceeds the
    chaos onset near 16.8). tau_delay counts samples; dt scales the
    integration step.
    """

    upsilon: float = -0.1
    alpha_mg: float = 0.2
    tau_delay: int = 17
    dt: float = 1.0
    length: int = 1177
    init_range: tuple = (0.1, 1.3)
    seed: int = 0

    def __post_init__(self):
        if self.tau_delay < 1:
            raise InvalidArgumentError("tau_delay must be at least 1")
        if self.length <= self.tau_delay:
            raise InvalidArgumentError("length must exceed tau_delay")
        if self.dt <= 0:
            raise InvalidArgumentError("dt must be positive")


def gen_mackey_glass(cfg):
    """Integrate the delayed feedback series with the midpoint method.

    du/dn = upsilon*u(n) + alpha_mg*u(n-tau) / (1 + u(n-tau)^10). The delayed
    value at half steps is linearly interpolated between samples. The initial
    history is one uniform draw held constant, so zero dynamics yield a
    constant series.
    """
    rng = substream(cfg.seed, 101)
    series = np.empty(cfg.length)
    series[: cfg.tau_delay + 1] = rng.uniform(*cfg.init_range)

    def deriv(u, u_delay):
        return cfg.upsilon * u + cfg.alpha_mg * u_delay / (1.0 + u_delay**10)

    tau = cfg.tau_delay
    for i in range(tau, cfg.length - 1):
        k1 = deriv(series[i], series[i - tau])
        mid = series[i] + 0.5 * cfg.dt * k1
        delay_mid = 0.5 * (series[i - tau] + series[i - tau + 1])
        series[i + 1] = series[i] + cfg.dt * deriv(mid, delay_mid)
    return series


_MG_LAGS = {"mg": (0, 6, 12, 18), "mg1": (6, 12, 18), "mg2": (12, 18)}
_MG_HEADROOM = 18  # deepest lag across variants, kept fixed so splits align
_MG_HORIZON = 6
_MG_SPLITS = (500, 300)
_MG_WASHOUT = 20


def build_mg_task(series, variant):
    """Lagged inputs predicting six steps ahead, split train/val/test.

    Variant selects which lags are observed; the prediction target is always
    y(n+6). Sample positions are identical across variants so the splits
    stay comparable.
    """
    variant = variant.lower()
    if variant not in _MG_LAGS:
        raise InvalidArgumentError(f"variant must be one of {sorted(_MG_LAGS)}")
    series = np.asarray(series, dtype=float).reshape(-1)
    lags = _MG_LAGS[variant]
    n_samples = len(series) - _MG_HEADROOM - _MG_HORIZON
    n_train, n_val = _MG_SPLITS
    if n_samples <= n_train + n_val + _MG_WASHOUT:
        raise InvalidArgumentError(
            f"series too short: {n_samples} usable samples, need > {n_train + n_val + _MG_WASHOUT}"
        )
    centers = np.arange(_MG_HEADROOM, _MG_HEADROOM + n_samples)
    u = np.stack([series[centers - lag] for lag in lags])
    t = series[centers + _MG_HORIZON][None, :]

    def cut(lo, hi, tag):
        return Dataset(u[:, lo:hi], t[:, lo:hi], washout=_MG_WASHOUT, name=f"{variant}-{tag}")

    return (
        cut(0, n_train, "train"),
        cut(n_train, n_train + n_val, "val"),
        cut(n_train + n_val, n_samples, "test"),
    )


def simulate_plant(u):
    """Fourth-order nonlinear plant response to a drive sequence.

    u holds u(1)..u(m) and the return holds y(1)..y(m), with
    y(1)=y(2)=y(3)=0, y(4)=0.1 and
    y(n+1) = 0.72 y(n) + 0.025 y(n-1) u(n-1) + 0.01 u(n-2)^2 + 0.2 u(n-3).
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    m = len(u)
    y = np.zeros(m)
    if m >= 4:
        y[3] = 0.1
    for i in range(3, m - 1):
        y[i + 1] = (
            0.72 * y[i]
            + 0.025 * y[i - 1] * u[i - 1]
            + 0.01 * u[i - 2] ** 2
            + 0.2 * u[i - 3]
        )
    return y


def plant_test_input(m):
    """Piecewise identification drive: sine, steps, then a three-tone mix."""
    n = np.arange(1, m + 1, dtype=float)
    mix = (
        0.6 * np.cos(np.pi * n / 10.0)
        + 0.1 * np.cos(np.pi * n / 32.0)
        + 0.3 * np.sin(np.pi * n / 25.0)
    )
    u = np.select(
        [n < 250, n < 500, n < 750],
        [np.sin(np.pi * n / 25.0), np.ones_like(n), -np.ones_like(n)],
        default=mix,  # the mix branch also covers the margin past n=1000
    )
    return u


_PLANT_WASHOUT = 100
_PLANT_MARGIN = 4  # initial conditions occupy y(1)..y(4)


def _plant_split(u, n_samples, tag):
    y = simulate_plant(u)
    idx = np.arange(_PLANT_MARGIN - 1, _PLANT_MARGIN - 1 + n_samples)
    inputs = np.stack([y[idx], u[idx]])
    targets = y[idx + 1][None, :]
    return Dataset(inputs, targets, washout=_PLANT_WASHOUT, name=f"plant-{tag}")


def gen_plant(seed):
    """Identification task: predict y(n+1) from [y(n), u(n)] alone.

    Training uses 2000 samples of uniform drive; validation is a fresh
    uniform drive of 1000 samples; testing uses the fixed piecewise drive.
    """
    m_train = 2000 + _PLANT_MARGIN
    m_eval = 1000 + _PLANT_MARGIN
    u_train = substream(seed, 102).uniform(-1.0, 1.0, m_train)
    u_val = substream(seed, 103).uniform(-1.0, 1.0, m_eval)
    u_test = plant_test_input(m_eval)
    return (
        _plant_split(u_train, 2000, "train"),
        _plant_split(u_val, 1000, "val"),
        _plant_split(u_test, 1000, "test"),
    )


# ---------------------------------------------------------------------------
# CSV ingestion / emission
# ---------------------------------------------------------------------------

def _expected_header(k, l):
    return [f"u_{i}" for i in range(1, k + 1)] + [f"t_{i}" for i in range(1, l + 1)]


def csv_dims(path):
    """Input/target column counts encoded by a dataset file's header."""
    try:
        f = open(path, newline="")
    except OSError as err:
        raise DataError(f"cannot open {path}: {err}") from err
    with f:
        try:
            header = [h.strip() for h in next(csv.reader(f))]
        except StopIteration:
            raise DataError(f"{path}: empty file, header row required") from None
    k = sum(1 for h in header if h.startswith("u_"))
    l = len(header) - k
    if k < 1 or l < 1 or header != _expected_header(k, l):
        raise DataError(
            f"{path}: header {','.join(header)} does not follow u_1..u_K,t_1..t_L"
        )
    return k, l


def load_csv(path, k, l, washout, name=None):
    """Read a (K inputs, L targets) dataset from a headed CSV file."""
    k, l = int(k), int(l)
    expected = _expected_header(k, l)
    try:
        f = open(path, newline="")
    except OSError as err:
        raise DataError(f"cannot open {path}: {err}") from err
    with f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, header row required") from None
        if [h.strip() for h in header] != expected:
            raise DataError(
                f"{path}: header mismatch, expected {','.join(expected)}, got {','.join(header)}"
            )
        rows = []
        for row_idx, row in enumerate(reader, start=1):
            if len(row) != k + l:
                raise DataError(
                    f"{path}: row {row_idx} has {len(row)} columns, expected {k + l}"
                )
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                bad = next(i for i, c in enumerate(row) if not _is_number(c))
                raise DataError(
                    f"{path}: non-numeric cell at row {row_idx}, column {expected[bad]}"
                ) from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=float).T
    return Dataset(arr[:k], arr[k:], washout=washout, name=name or str(path))


def _is_number(cell):
    try:
        float(cell)
        return True
    except ValueError:
        return False


def save_csv(dataset, path):
    """Write a dataset in the same headed format load_csv reads."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(_expected_header(dataset.k, dataset.l))
        for col in range(dataset.n):
            writer.writerow(
                [repr(float(v)) for v in dataset.u[:, col]]
                + [repr(float(v)) for v in dataset.t[:, col]]
            )


# ---------------------------------------------------------------------------
# industrial feature construction
# ---------------------------------------------------------------------------

_DEBUT_WASHOUT = 100
_DEBUT_TRAIN_RAW = 1500


def debutanizer_features(raw, mode="reduced"):
    """Soft-sensor regressors for the butane-concentration column data.

    raw must carry seven process inputs and the concentration target.
    reduced mode keeps the five tower-top measurements plus y(n-1); full mode
    adds the 6th-tray temperature lags, the top temperature/pressure average,
    and deeper target lags. Returns (train, test) split at raw sample 1500.
    """
    if raw.k != 7 or raw.l != 1:
        raise InvalidArgumentError(
            f"raw debutanizer data needs 7 input columns and 1 target, got {raw.k}/{raw.l}"
        )
    u, y = raw.u, raw.t[0]
    if mode == "reduced":
        headroom = 1
        cols = lambda c: np.concatenate([u[0:5, c], [y[c - 1]]])  # noqa: E731
        k = 6
    elif mode == "full":
        headroom = 4
        k = 13

        def cols(c):
            return np.concatenate(
                [
                    u[0:5, c],
                    [u[4, c - 1], u[4, c - 2], u[4, c - 3]],
                    [(u[0, c] + u[1, c]) / 2.0],
                    [y[c - 1], y[c - 2], y[c - 3], y[c - 4]],
                ]
            )

    else:
        raise InvalidArgumentError(f"mode must be 'reduced' or 'full', got {mode!r}")

    centers = np.arange(headroom, raw.n)
    feats = np.empty((k, len(centers)))
    for i, c in enumerate(centers):
        feats[:, i] = cols(c)
    targets = y[centers][None, :]
    split = int(np.searchsorted(centers, _DEBUT_TRAIN_RAW))
    train = Dataset(feats[:, :split], targets[:, :split], _DEBUT_WASHOUT, f"debutanizer-{mode}-train")
    test = Dataset(feats[:, split:], targets[:, split:], _DEBUT_WASHOUT, f"debutanizer-{mode}-test")
    return train, test


def add_noise_validation(base, sigma_rel, seed):
    """Perturb every channel with zero-mean noise scaled to its spread.

    Each input and target channel independently receives Gaussian noise with
    standard deviation sigma_rel times that channel's population std.
    """
    if sigma_rel < 0:
        raise InvalidArgumentError("sigma_rel must be non-negative")
    if sigma_rel == 0:
        return Dataset(base.u.copy(), base.t.copy(), base.washout, base.name + "-val")
    rng = substream(seed, 104)
    u = base.u + rng.normal(size=base.u.shape) * base.u.std(axis=1, keepdims=True) * sigma_rel
    t = base.t + rng.normal(size=base.t.shape) * base.t.std(axis=1, keepdims=True) * sigma_rel
    return Dataset(u, t, base.washout, base.name + "-val")
