"""Gaussian RBF compensation network: evaluation, batch training and I/O."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cartpole import CartPoleParams
from .errors import InsufficientDataError, ShapeError, TrainingDataError
from .numerics import central_difference, pseudo_inverse_solve, residual_norm
from .smc import Reference, SurfaceParams, cartpole_terms

FORMAT_TAG = "underact-smc-rbf"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class RbfNetwork:
    """``d_hat(x) = sum_i w_i exp(-|x/scale - t_i|^2 / (2 sigma_i^2))``.

    Centers live in scaled input coordinates; ``input_scale`` divides raw inputs
    component-wise before the distance is taken (all ones means raw units).
    """

    centers: np.ndarray
    sigma: np.ndarray
    weights: np.ndarray
    input_scale: np.ndarray | None = None

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        M, dim = c.shape
        sig = np.broadcast_to(np.asarray(self.sigma, dtype=float), (M,)).copy()
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        scale = (np.ones(dim) if self.input_scale is None
                 else np.asarray(self.input_scale, dtype=float).reshape(-1))
        if M < 1:
            raise ShapeError("network needs at least one center")
        if w.size != M:
            raise ShapeError(f"{M} centers but {w.size} weights")
        if scale.size != dim:
            raise ShapeError(f"input_scale has {scale.size} entries, inputs have {dim}")
        if not np.all(sig > 0):
            raise ValueError("sigma must be positive")
        if not np.all(scale > 0):
            raise ValueError("input_scale must be positive")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(w)) and np.all(np.isfinite(sig))):
            raise ValueError("network parameters must be finite")
        if M > 1 and len(np.unique(c, axis=0)) != M:
            raise ValueError("centers must be pairwise distinct")
        for name, v in (("centers", c), ("sigma", sig), ("weights", w), ("input_scale", scale)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    @property
    def size(self) -> int:
        return self.centers.shape[0]


@dataclass(frozen=True)
class TrainingSet:
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        d = np.asarray(self.targets, dtype=float).reshape(-1)
        if d.size < 1:
            raise InsufficientDataError("training set is empty")
        if X.shape[0] != d.size:
            raise ShapeError(f"{X.shape[0]} inputs but {d.size} targets")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(d))):
            raise TrainingDataError("training data contains non-finite values")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "targets", d)

    def __len__(self):
        return self.targets.size


def design_matrix(centers, sigma, X, input_scale=None) -> np.ndarray:
    """The ``p x M`` kernel matrix of inputs ``X`` against ``centers``."""
    C = np.atleast_2d(np.asarray(centers, dtype=float))
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != C.shape[1]:
        raise ShapeError(f"inputs have dimension {X.shape[1]}, centers {C.shape[1]}")
    if input_scale is not None:
        X = X / np.asarray(input_scale, dtype=float)
    sig = np.broadcast_to(np.asarray(sigma, dtype=float), (C.shape[0],))
    r2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return np.exp(-r2 / (2.0 * sig * sig))


def rbf_eval(net: RbfNetwork, x) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != net.dim:
        raise ShapeError(f"input has dimension {x.size}, network expects {net.dim}")
    r2 = ((x / net.input_scale - net.centers) ** 2).sum(axis=1)
    return float(net.weights @ np.exp(-r2 / (2.0 * net.sigma * net.sigma)))


def rbf_train(centers, sigma, ts: TrainingSet, rcond: float = 1e-12,
              input_scale=None) -> tuple[RbfNetwork, float]:
    """Least-squares output weights through the pseudo-inverse.

    Returns the trained network and ``E = |d - Phi w|``.
    """
    Phi = design_matrix(centers, sigma, ts.inputs, input_scale)
    if not np.all(np.isfinite(Phi)):
        raise TrainingDataError("design matrix has non-finite entries")
    w = pseudo_inverse_solve(Phi, ts.targets, rcond=rcond)
    net = RbfNetwork(centers, sigma, w, input_scale)
    return net, residual_norm(Phi, w, ts.targets)


def fit_scale(X) -> np.ndarray:
    """Per-component standard deviation, with degenerate components left at 1."""
    sd = np.atleast_2d(np.asarray(X, dtype=float)).std(axis=0)
    return np.where(sd > 1e-12, sd, 1.0)


def grid_centers(X, per_dim: int = 3, pad: float = 0.1, width_factor: float = 1.0):
    """Uniform grid over the padded bounding box of ``X``.

    Returns ``(centers, sigma)`` where sigma is the grid spacing averaged over
    dimensions, times ``width_factor``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if per_dim < 2:
        raise ValueError("need at least two grid points per dimension")
    lo, hi = X.min(axis=0), X.max(axis=0)
    span = hi - lo
    span = np.where(span > 1e-12, span, 1.0)
    lo, hi = lo - pad * span, hi + pad * span
    axes = [np.linspace(a, b, per_dim) for a, b in zip(lo, hi)]
    centers = np.array(list(itertools.product(*axes)))
    sigma = float(np.mean((hi - lo) / (per_dim - 1))) * width_factor
    return centers, sigma


# -- training data from a closed-loop window --------------------------------

def error_features(params_nominal: CartPoleParams, states, ref: Reference) -> np.ndarray:
    """Tracking-error inputs ``(x~, x~dot, l*theta~, l*theta~dot)`` per state row."""
    Y = np.atleast_2d(np.asarray(states, dtype=float))
    l = params_nominal.pole_length
    return np.column_stack([
        Y[:, 0] - ref.q_act[0], Y[:, 1] - ref.qdot_act[0],
        l * (Y[:, 2] - ref.q_unact[0]), l * (Y[:, 3] - ref.qdot_unact[0]),
    ])


def residual_targets(params_nominal: CartPoleParams, sp: SurfaceParams, ref: Reference,
                     states, s, nu, step: float) -> np.ndarray:
    """Empirical residual ``sdot_meas - (f_s + sdot_r + M_s nu)`` per controller sample.

    ``nu`` is held between samples, so ``sdot`` jumps at every control
    instant. The central difference straddles two hold intervals, hence the
    action paired with it is the mean of the two held values; the one-sided
    endpoints pair with the single interval they span.
    """
    s = np.asarray(s, dtype=float)
    nu = np.asarray(nu, dtype=float).reshape(-1)
    if nu.size != s.size:
        raise ShapeError(f"{s.size} sliding samples but {nu.size} actions")
    sdot = central_difference(s, step)
    nu_eff = nu.copy()
    nu_eff[1:-1] = 0.5 * (nu[:-2] + nu[1:-1])
    nu_eff[-1] = nu[-2]
    Y = np.atleast_2d(np.asarray(states, dtype=float))
    out = np.empty(s.size)
    for k in range(s.size):
        _, Ms, fs, sr_dot, _ = cartpole_terms(params_nominal, sp, *Y[k], ref)
        out[k] = sdot[k] - (fs + sr_dot + Ms * nu_eff[k])
    return out


def collect_training_pair(params_nominal: CartPoleParams, sp: SurfaceParams, ref: Reference,
                          states, s, nu, step: float, layer: float | None = None) -> TrainingSet:
    """Training set from a window of controller samples.

    ``states`` rows are ``(x, xdot, theta, thetadot)`` at each control instant,
    ``s`` the sliding variable and ``nu`` the commanded action. The two end
    samples (one-sided differences) are dropped; with ``layer`` set, only
    samples with ``|s| <= layer`` are kept.
    """
    s = np.asarray(s, dtype=float)
    if s.size < 3:
        raise InsufficientDataError(f"need at least 3 controller samples, got {s.size}")
    d = residual_targets(params_nominal, sp, ref, states, s, nu, step)
    X = error_features(params_nominal, states, ref)
    keep = np.ones(s.size, dtype=bool)
    keep[0] = keep[-1] = False
    if layer is not None:
        keep &= np.abs(s) <= layer
    if not keep.any():
        raise InsufficientDataError("no samples left after filtering the window")
    return TrainingSet(X[keep], d[keep])


# -- flat text serialization -------------------------------------------------

def _fmt(v) -> str:
    return " ".join(repr(float(x)) for x in np.atleast_1d(v))


def save_network(net: RbfNetwork, path) -> None:
    lines = [f"{FORMAT_TAG} {FORMAT_VERSION}",
             f"dim {net.dim}",
             f"centers {net.size}",
             f"scale {_fmt(net.input_scale)}",
             "# center..., sigma, weight"]
    for c, s, w in zip(net.centers, net.sigma, net.weights):
        lines.append(f"{_fmt(c)} {_fmt(s)} {_fmt(w)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_network(path) -> RbfNetwork:
    rows = [ln for ln in Path(path).read_text().splitlines()
            if ln.strip() and not ln.startswith("#")]
    try:
        tag, version = rows[0].split()
        if tag != FORMAT_TAG:
            raise ValueError(f"not an RBF network file (header {tag!r})")
        if int(version) != FORMAT_VERSION:
            raise ValueError(f"unsupported network format version {version}")
        dim = int(rows[1].split()[1])
        M = int(rows[2].split()[1])
        scale = np.array([float(v) for v in rows[3].split()[1:]])
        body = np.array([[float(v) for v in r.split()] for r in rows[4:4 + M]])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed network file: {exc}") from None
    if body.shape != (M, dim + 2):
        raise ValueError(f"{path}: expected {M} rows of {dim + 2} values")
    if not math.isfinite(body.sum()):
        raise ValueError(f"{path}: non-finite values")
    return RbfNetwork(body[:, :dim], body[:, dim], body[:, dim + 1], scale)
