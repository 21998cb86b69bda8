"""Subreservoir sampling, stability scaling, and block-diagonal state dynamics.

A model is an ordered list of independently generated blocks. Blocks never
connect to each other: the assembled recurrent matrix is block-diagonal, so
each block's trajectory depends only on the shared input drive and its own
past. Readout weights act on the stacked block states, optionally with the
raw inputs appended below.
"""

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError
from .numeric import max_singular_value, nrmse, seeded_uniform, spectral_radius

__all__ = [
    "SubReservoir",
    "BlockModel",
    "StateMatrix",
    "sample_subreservoir",
    "esp_scale_matrix",
    "scale_for_esp",
    "step_block",
    "harvest_states",
    "run_trajectory",
    "predict",
    "evaluate",
    "save_model",
    "load_model",
    "model_to_dict",
    "model_from_dict",
]

_RHO_FLOOR = 1e-12


def _logistic(x):
    # numerically stable logistic; equals 1/(1+exp(-x))
    return 0.5 * (1.0 + np.tanh(0.5 * x))


ACTIVATIONS = {"tanh": np.tanh, "logistic": _logistic}


@dataclass
class SubReservoir:
    """One block: input weights (N,K), recurrent weights (N,N), bias (N,1)."""

    w_in: np.ndarray
    w_r: np.ndarray
    bias: np.ndarray
    lambda_used: float
    alpha_effective: float | None = None
    scaled: bool = False

    @property
    def size(self):
        return self.w_r.shape[0]


@dataclass
class BlockModel:
    blocks: list
    w_out: np.ndarray  # (L, D) with D = state_dim (+ K when inputs are read out)
    readout_includes_input: bool
    activation: str
    washout: int
    k: int
    l: int

    @property
    def state_dim(self):
        return sum(b.size for b in self.blocks)

    @property
    def readout_dim(self):
        return self.state_dim + (self.k if self.readout_includes_input else 0)

    def assembled_input_weights(self):
        return np.vstack([b.w_in for b in self.blocks])

    def assembled_recurrent(self):
        n = self.state_dim
        w = np.zeros((n, n))
        at = 0
        for b in self.blocks:
            w[at : at + b.size, at : at + b.size] = b.w_r
            at += b.size
        return w

    def assembled_bias(self):
        return np.vstack([b.bias for b in self.blocks])


@dataclass
class StateMatrix:
    """Harvested regressor matrix with the leading transient removed."""

    values: np.ndarray  # (D, n - washout)
    washout_dropped: int


def sample_subreservoir(rng, n_sub, k, lam, density):
    """Draw an unscaled block.

    w_in and bias are dense with entries uniform on [-lam, lam]. w_r gets
    exactly max(1, round(density * n_sub^2)) uniformly placed nonzero
    entries, so even the sparsest setting keeps some recurrence.
    """
    n_sub, k = int(n_sub), int(k)
    if n_sub < 1 or k < 1:
        raise InvalidArgumentError("n_sub and k must be at least 1")
    if not 0.0 < density <= 1.0:
        raise InvalidArgumentError(f"density must lie in (0, 1], got {density}")
    w_in = seeded_uniform(rng, n_sub, k, lam)
    n_entries = max(1, int(round(density * n_sub * n_sub)))
    flat = rng.choice(n_sub * n_sub, size=n_entries, replace=False)
    w_r = np.zeros((n_sub, n_sub))
    w_r.flat[np.sort(flat)] = rng.uniform(-lam, lam, size=n_entries)
    bias = seeded_uniform(rng, n_sub, 1, lam)
    return SubReservoir(w_in=w_in, w_r=w_r, bias=bias, lambda_used=float(lam))


def esp_scale_matrix(w_r, alpha, rho=None, sigma=None):
    """Contraction-scaled copy of a recurrent matrix, plus the alpha applied.

    The matrix is normalized to spectral radius alpha, with alpha clamped to
    0.99 * rho/sigma whenever the requested value would push the singular
    values to 1 or beyond. A (numerically) nilpotent matrix has no spectral
    radius to normalize, so it is scaled by sigma directly; an all-zero
    matrix is returned unchanged. Precomputed rho/sigma may be passed in.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    sigma = max_singular_value(w_r) if sigma is None else sigma
    if sigma == 0.0:
        return w_r, float(alpha)
    rho = spectral_radius(w_r) if rho is None else rho
    if rho > _RHO_FLOOR:
        alpha_eff = min(alpha, 0.99 * rho / sigma)
        factor = alpha_eff / rho
    else:
        alpha_eff = 0.99 * alpha
        factor = alpha_eff / sigma
    return w_r * factor, float(alpha_eff)


def scale_for_esp(sub, alpha):
    """Rescale a block's recurrent weights so its largest singular value < 1."""
    if sub.scaled:
        raise InvalidArgumentError("block is already scaled")
    w_r, alpha_eff = esp_scale_matrix(sub.w_r, alpha)
    return replace(sub, w_r=w_r, alpha_effective=alpha_eff, scaled=True)


def step_block(model, x_prev, u):
    """Advance the stacked state one step; blocks update independently."""
    x_prev = np.asarray(x_prev, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if x_prev.size != model.state_dim:
        raise InvalidArgumentError(
            f"state has {x_prev.size} entries, model expects {model.state_dim}"
        )
    if u.size != model.k:
        raise InvalidArgumentError(f"input has {u.size} entries, model expects {model.k}")
    g = ACTIVATIONS[model.activation]
    out = np.empty(model.state_dim)
    at = 0
    for b in model.blocks:
        sl = slice(at, at + b.size)
        out[sl] = g(b.w_in @ u + b.w_r @ x_prev[sl] + b.bias[:, 0])
        at += b.size
    return out


def run_trajectory(blocks, u_seq, activation="tanh", x0=None):
    """Full state trajectory (sum N, n) from x(0) (zero unless given)."""
    u_seq = np.atleast_2d(np.asarray(u_seq, dtype=float))
    n = u_seq.shape[1]
    g = ACTIVATIONS[activation]
    w_in = np.vstack([b.w_in for b in blocks])
    dim = w_in.shape[0]
    w_r = np.zeros((dim, dim))
    at = 0
    for b in blocks:
        w_r[at : at + b.size, at : at + b.size] = b.w_r
        at += b.size
    bias = np.vstack([b.bias for b in blocks])[:, 0]
    drive = w_in @ u_seq
    states = np.empty((dim, n))
    x = np.zeros(dim) if x0 is None else np.asarray(x0, dtype=float).reshape(-1)
    for i in range(n):
        x = g(drive[:, i] + w_r @ x + bias)
        states[:, i] = x
    return states


def harvest_states(blocks, u_seq, washout, include_input, activation="tanh"):
    """Drive the blocks from a zero state and collect post-washout regressors.

    With include_input the raw input rows are appended below the state rows,
    matching the readout layout that feeds both training and prediction.
    """
    u_seq = np.atleast_2d(np.asarray(u_seq, dtype=float))
    n = u_seq.shape[1]
    washout = int(washout)
    if washout < 0 or washout >= n:
        raise InvalidArgumentError(f"washout {washout} must lie in [0, {n})")
    states = run_trajectory(blocks, u_seq, activation=activation)[:, washout:]
    if include_input:
        states = np.vstack([states, u_seq[:, washout:]])
    return StateMatrix(values=states, washout_dropped=washout)


def predict(model, u_seq, washout=None):
    """Model output (L, n - washout) over an input sequence."""
    washout = model.washout if washout is None else int(washout)
    sm = harvest_states(
        model.blocks, u_seq, washout, model.readout_includes_input, model.activation
    )
    return model.w_out @ sm.values


def evaluate(model, dataset):
    """NRMSE of the model on a dataset, past the dataset's washout."""
    y = predict(model, dataset.u, washout=dataset.washout)
    t = np.atleast_2d(np.asarray(dataset.t, dtype=float))[:, dataset.washout :]
    return nrmse(y, t)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _mat_to_json(m):
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return {"rows": m.shape[0], "cols": m.shape[1], "data": [float(v) for v in m.ravel()]}


def _mat_from_json(obj):
    m = np.asarray(obj["data"], dtype=float).reshape(obj["rows"], obj["cols"])
    return m


def model_to_dict(model):
    return {
        "blocks": [
            {
                "w_in": _mat_to_json(b.w_in),
                "w_r": _mat_to_json(b.w_r),
                "bias": _mat_to_json(b.bias),
                "lambda_used": float(b.lambda_used),
                "alpha_effective": None if b.alpha_effective is None else float(b.alpha_effective),
            }
            for b in model.blocks
        ],
        "w_out": _mat_to_json(model.w_out),
        "readout_includes_input": bool(model.readout_includes_input),
        "activation": model.activation,
        "washout": int(model.washout),
        "K": int(model.k),
        "L": int(model.l),
    }


def model_from_dict(obj):
    blocks = [
        SubReservoir(
            w_in=_mat_from_json(b["w_in"]),
            w_r=_mat_from_json(b["w_r"]),
            bias=_mat_from_json(b["bias"]),
            lambda_used=float(b["lambda_used"]),
            alpha_effective=b["alpha_effective"],
            scaled=True,
        )
        for b in obj["blocks"]
    ]
    if obj["activation"] not in ACTIVATIONS:
        raise InvalidArgumentError(f"unknown activation {obj['activation']!r}")
    return BlockModel(
        blocks=blocks,
        w_out=_mat_from_json(obj["w_out"]),
        readout_includes_input=bool(obj["readout_includes_input"]),
        activation=obj["activation"],
        washout=int(obj["washout"]),
        k=int(obj["K"]),
        l=int(obj["L"]),
    )


def save_model(model, path):
    with open(path, "w") as f:
        json.dump(model_to_dict(model), f)


def load_model(path):
    with open(path) as f:
        return model_from_dict(json.load(f))
