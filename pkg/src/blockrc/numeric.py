"""Seeded randomness and the dense linear-algebra kernels used everywhere else.

All routines operate on plain 2-D numpy arrays. Matrices are small here
(reservoir blocks are tens of nodes), so dense methods are used throughout.
"""

import numpy as np

from .errors import DegenerateTargetError, InvalidArgumentError, NumericFailure

__all__ = [
    "substream",
    "seeded_uniform",
    "spectral_radius",
    "max_singular_value",
    "least_squares_readout",
    "nrmse",
]

_U64 = (1 << 64) - 1


def substream(base_seed, *path):
    """Independent generator for (base_seed, path).

    The same (base_seed, path) always yields the same stream, and distinct
    paths give streams that are independent for all practical purposes.
    This is what lets candidate k of block j be a pure function of
    (base_seed, j, k) and therefore evaluable in any order.
    """
    entropy = int(base_seed) & _U64
    key = tuple(int(p) & _U64 for p in path)
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=key))


def seeded_uniform(rng, rows, cols, lam):
    """Draw a (rows, cols) matrix with entries uniform on [-lam, lam]."""
    if not np.isfinite(lam) or lam <= 0:
        raise InvalidArgumentError(f"lam must be a positive real, got {lam}")
    return rng.uniform(-lam, lam, size=(int(rows), int(cols)))


def _as_finite_2d(m, name):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise InvalidArgumentError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.size and not np.isfinite(m).all():
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return m


def spectral_radius(m, tol=1e-10, max_squarings=90):
    """Largest eigenvalue magnitude of a square matrix.

    Uses normalized repeated squaring: rho(A) = lim ||A^k||_F^(1/k) along
    k = 2^t. Each squaring halves the remaining error, so convergence does
    not depend on eigenvalue gaps and complex-dominant pairs need no special
    casing. Nilpotent matrices hit an exactly zero power and return 0.
    The geometric error decay makes one Richardson step essentially exact.
    """
    m = _as_finite_2d(m, "m")
    if m.shape[0] != m.shape[1]:
        raise InvalidArgumentError(f"m must be square, got shape {m.shape}")
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    if m.size == 0:
        return 0.0

    f = float(np.linalg.norm(m))
    if f == 0.0:
        return 0.0
    b = m / f
    log_scale = np.log(f)
    est = f
    for t in range(1, max_squarings + 1):
        b = b @ b
        g = float(np.linalg.norm(b))
        if g == 0.0:
            return 0.0
        b /= g
        log_scale = 2.0 * log_scale + np.log(g)
        new_est = float(np.exp(log_scale / (1 << t)))
        if abs(new_est - est) <= 0.125 * tol * max(1.0, new_est):
            # error is ~c/2^t, so extrapolating removes the leading term
            return max(2.0 * new_est - est, 0.0)
        est = new_est
    raise NumericFailure(
        f"spectral radius did not converge within {max_squarings} squarings",
        best_estimate=est,
    )


def _spectral_radius_stack(ms, tol=1e-10, max_squarings=90):
    """spectral_radius applied across a (C, N, N) stack.

    Same normalized-squaring iteration as the scalar routine; each slice's
    estimate freezes at its own convergence step, so results agree with
    per-matrix calls up to BLAS kernel noise. Exists because candidate
    generation scales hundreds of small blocks at a time.
    """
    ms = np.asarray(ms, dtype=float)
    c = ms.shape[0]
    out = np.zeros(c)
    f = np.linalg.norm(ms, axis=(1, 2))
    done = f == 0.0
    safe = np.where(f == 0.0, 1.0, f)
    b = ms / safe[:, None, None]
    log_scale = np.log(safe)
    est = f.copy()
    for t in range(1, max_squarings + 1):
        if done.all():
            break
        b = b @ b
        g = np.linalg.norm(b, axis=(1, 2))
        went_nil = ~done & (g == 0.0)
        out[went_nil] = 0.0
        done |= went_nil
        safe = np.where(g == 0.0, 1.0, g)
        b /= safe[:, None, None]
        log_scale = 2.0 * log_scale + np.log(safe)
        new_est = np.exp(log_scale / (1 << t))
        conv = ~done & (np.abs(new_est - est) <= 0.125 * tol * np.maximum(1.0, new_est))
        out[conv] = np.maximum(2.0 * new_est[conv] - est[conv], 0.0)
        done |= conv
        est = new_est
    if not done.all():
        raise NumericFailure(
            "stacked spectral radius did not converge",
            best_estimate=np.where(done, out, est),
        )
    return out


def max_singular_value(m, tol=1e-10):
    """Largest singular value, via the spectral radius of the Gram matrix."""
    m = _as_finite_2d(m, "m")
    if m.size == 0:
        return 0.0
    gram = m @ m.T if m.shape[0] <= m.shape[1] else m.T @ m
    try:
        rho = spectral_radius(gram, tol=tol)
    except NumericFailure as err:
        raise NumericFailure(
            "max singular value did not converge",
            best_estimate=float(np.sqrt(max(err.best_estimate, 0.0))),
        ) from err
    return float(np.sqrt(max(rho, 0.0)))


def least_squares_readout(x, t, ridge=0.0):
    """Solve min_W ||t - W x||_F for W of shape (L, D).

    x has shape (D, n) with one regressor column per sample, t has shape
    (L, n). With ridge=0 a rank-deficient x yields the minimum-norm
    minimizer; with ridge>0 the Tikhonov-regularized solution is returned.
    """
    x = _as_finite_2d(x, "x")
    t = _as_finite_2d(t, "t")
    if x.shape[1] != t.shape[1]:
        raise InvalidArgumentError(
            f"x and t must share column counts, got {x.shape[1]} vs {t.shape[1]}"
        )
    if x.shape[1] < 1:
        raise InvalidArgumentError("at least one sample column is required")
    if ridge < 0:
        raise InvalidArgumentError("ridge must be non-negative")
    if ridge == 0.0:
        w, *_ = np.linalg.lstsq(x.T, t.T, rcond=None)
        return w.T
    gram = x @ x.T + ridge * np.eye(x.shape[0])
    return np.linalg.solve(gram, x @ t.T).T


def nrmse(y, t):
    """Root-mean-square error normalized by target variance.

    Returns sqrt( sum_n ||y(n)-t(n)||^2 / (n * var(t)) ) with var(t) the
    population variance pooled over every entry of t.
    """
    y = _as_finite_2d(y, "y")
    t = _as_finite_2d(t, "t")
    if y.shape != t.shape:
        raise InvalidArgumentError(f"shape mismatch: y {y.shape} vs t {t.shape}")
    if t.shape[1] == 0:
        raise InvalidArgumentError("t has no sample columns")
    var = float(t.var())
    scale = max(1.0, float(np.abs(t).max()) ** 2)
    if var <= np.finfo(float).eps ** 2 * scale:
        raise DegenerateTargetError("target variance is zero; NRMSE undefined")
    n = t.shape[1]
    return float(np.sqrt(np.sum((y - t) ** 2) / (n * var)))
