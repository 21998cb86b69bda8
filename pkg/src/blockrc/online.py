"""Online readout adaptation and its convergence monitors.

The readout weights are nudged toward consistency with each new observation
by the least-change (projection) rule; the reservoir itself never changes.
Two monitors report whether the classical sufficient conditions for
parameter convergence held over a run: a persistent-excitation window check
on the regressor energy, and a per-step gain condition on the change of the
inverse normalization.
"""

import csv
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError
from .reservoir import run_trajectory

__all__ = [
    "OnlineState",
    "PEWindowReport",
    "OnlineLog",
    "projection_step",
    "pe_window_check",
    "gain_condition_check",
    "run_online",
]


@dataclass
class OnlineState:
    w_current: np.ndarray  # (L, D)
    gamma: float
    c: float
    step: int = 0

    def __post_init__(self):
        self.w_current = np.atleast_2d(np.asarray(self.w_current, dtype=float))
        if self.gamma <= 0:
            raise InvalidArgumentError("gamma must be positive")
        if self.c < 0:
            raise InvalidArgumentError("c must be non-negative")


@dataclass
class PEWindowReport:
    window_length: int
    windowed_sum: float
    pointwise_min: float
    pointwise_max: float
    eta1: float
    eta2: float
    pe_satisfied: bool
    gain_ok: bool = False
    window_end: int = 0


def projection_step(state, g, y):
    """One least-change update: W += gamma * (y - W g) g' / (c + g'g).

    Pure function of its inputs; returns a new state with the step counter
    advanced. Observations the current weights already explain leave the
    weights untouched.
    """
    g = np.asarray(g, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    w = state.w_current
    if g.size != w.shape[1] or y.size != w.shape[0]:
        raise InvalidArgumentError(
            f"regressor/target sizes {g.size}/{y.size} do not match weights {w.shape}"
        )
    den = state.c + float(g @ g)
    if den == 0.0:
        raise InvalidArgumentError("c and the regressor are both zero; update undefined")
    innovation = y - w @ g
    w_next = w + (state.gamma / den) * np.outer(innovation, g)
    return replace(state, w_current=w_next, step=state.step + 1)


def pe_window_check(g_history, eta1, eta2):
    """Excitation report over one full window of regressors.

    g_history holds the window's regressors, one per row. The windowed sum
    must land in [eta2, eta1]; the proof additionally uses the pointwise
    bounds, so the report requires pointwise energy at most eta1 and at
    least eta2 / window_length (the windowed average reading of the lower
    bound).
    """
    g = np.atleast_2d(np.asarray(g_history, dtype=float))
    energy = np.sum(g * g, axis=1)
    n_w = len(energy)
    total = float(energy.sum())
    pmin = float(energy.min())
    pmax = float(energy.max())
    satisfied = (
        eta1 >= total >= eta2 and eta1 >= pmax and pmin >= eta2 / n_w
    )
    return PEWindowReport(
        window_length=n_w,
        windowed_sum=total,
        pointwise_min=pmin,
        pointwise_max=pmax,
        eta1=float(eta1),
        eta2=float(eta2),
        pe_satisfied=bool(satisfied),
    )


def gain_condition_check(delta_p_inverse, gamma, eta1, eta2):
    """Per-step gain condition: delta P^-1 <= 2 gamma eta2 - gamma^2 eta1^2."""
    return bool(delta_p_inverse <= 2.0 * gamma * eta2 - gamma**2 * eta1**2)


_ONLINE_HEADER = "n,prediction,target,weight_error_fro,v_lyapunov,delta_v,p_inverse"
_PE_HEADER = "window_end,windowed_sum,pointwise_min,pointwise_max,pe_satisfied,gain_ok"


@dataclass
class OnlineLog:
    n: np.ndarray
    predictions: np.ndarray  # (L, n)
    targets: np.ndarray  # (L, n)
    weight_error_fro: np.ndarray
    v_lyapunov: np.ndarray
    delta_v: np.ndarray
    p_inverse: np.ndarray
    pe_reports: list
    final_weights: np.ndarray

    def __len__(self):
        return len(self.n)

    def write_csv(self, path):
        if self.predictions.shape[0] != 1:
            raise InvalidArgumentError(
                "the step log stores scalar prediction/target columns; "
                f"this run has {self.predictions.shape[0]} outputs"
            )
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(_ONLINE_HEADER.split(","))
            for i in range(len(self.n)):
                writer.writerow(
                    [
                        int(self.n[i]),
                        repr(float(self.predictions[0, i])),
                        repr(float(self.targets[0, i])),
                        repr(float(self.weight_error_fro[i])),
                        repr(float(self.v_lyapunov[i])),
                        repr(float(self.delta_v[i])),
                        repr(float(self.p_inverse[i])),
                    ]
                )

    def write_pe_csv(self, path):
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(_PE_HEADER.split(","))
            for rep in self.pe_reports:
                writer.writerow(
                    [
                        rep.window_end,
                        repr(rep.windowed_sum),
                        repr(rep.pointwise_min),
                        repr(rep.pointwise_max),
                        int(rep.pe_satisfied),
                        int(rep.gain_ok),
                    ]
                )


def run_online(model, stream, gamma=1.0, c=1e-4, n_w=50, eta1=None, eta2=None, w_reference=None):
    """Adapt the readout over a stream, logging prequential predictions.

    The reservoir runs from a zero state over the whole stream. At each step
    the prediction is logged before the target is observed, then the
    projection update is applied. Excitation reports are emitted once per
    full non-overlapping window; the gain flag aggregates the per-step
    condition over the window (the first stream step has no defined
    delta P^-1 and is skipped). When w_reference is given, the weight error
    and the Lyapunov candidate V(n) = p_inverse * ||W_ref - W(n)||_F^2 are
    tracked, with per-output contributions summed.
    """
    if (stream.k, stream.l) != (model.k, model.l):
        raise InvalidArgumentError(
            f"stream dims {(stream.k, stream.l)} do not match model {(model.k, model.l)}"
        )
    if eta1 is None or eta2 is None:
        raise InvalidArgumentError("eta1 and eta2 must be provided for the monitors")
    if n_w < 1:
        raise InvalidArgumentError("n_w must be at least 1")
    n = stream.n
    d = model.readout_dim
    if n == 0:
        return OnlineLog(
            n=np.zeros(0, dtype=int),
            predictions=np.zeros((model.l, 0)),
            targets=np.zeros((model.l, 0)),
            weight_error_fro=np.zeros(0),
            v_lyapunov=np.zeros(0),
            delta_v=np.zeros(0),
            p_inverse=np.zeros(0),
            pe_reports=[],
            final_weights=model.w_out.copy(),
        )

    regressors = run_trajectory(model.blocks, stream.u, model.activation)
    if model.readout_includes_input:
        regressors = np.vstack([regressors, stream.u])

    state = OnlineState(w_current=model.w_out.copy(), gamma=gamma, c=c)
    w_ref = None if w_reference is None else np.atleast_2d(np.asarray(w_reference, dtype=float))
    if w_ref is not None and w_ref.shape != state.w_current.shape:
        raise InvalidArgumentError(
            f"reference weights {w_ref.shape} do not match readout {state.w_current.shape}"
        )

    preds = np.empty((model.l, n))
    weight_err = np.full(n, np.nan)
    v_lyap = np.full(n, np.nan)
    delta_v = np.full(n, np.nan)
    p_inv = np.empty(n)
    pe_reports = []
    for i in range(n):
        g = regressors[:, i]
        preds[:, i] = state.w_current @ g
        state = projection_step(state, g, stream.t[:, i])
        p_inv[i] = c + float(g @ g)
        if w_ref is not None:
            err = w_ref - state.w_current
            weight_err[i] = np.linalg.norm(err)
            v_lyap[i] = p_inv[i] * weight_err[i] ** 2
            if i > 0:
                delta_v[i] = v_lyap[i] - v_lyap[i - 1]
        if (i + 1) % n_w == 0:
            rep = pe_window_check(regressors[:, i + 1 - n_w : i + 1].T, eta1, eta2)
            first = max(i + 1 - n_w, 1)  # step 1 has no delta P^-1
            gain_ok = all(
                gain_condition_check(p_inv[t] - p_inv[t - 1], gamma, eta1, eta2)
                for t in range(first, i + 1)
            )
            pe_reports.append(replace(rep, gain_ok=bool(gain_ok), window_end=i + 1))

    return OnlineLog(
        n=np.arange(1, n + 1),
        predictions=preds,
        targets=stream.t.copy(),
        weight_error_fro=weight_err,
        v_lyapunov=v_lyap,
        delta_v=delta_v,
        p_inverse=p_inv,
        pe_reports=pe_reports,
        final_weights=state.w_current,
    )
