"""Fixed-step integration, dense least squares and finite differences."""
from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import InsufficientDataError, IntegrationDivergedError, ShapeError

#: singular values below ``RCOND * s_max`` are treated as zero
RCOND = 1e-12

VectorField = Callable[[float, np.ndarray], np.ndarray]


def rk4_step(f: VectorField, t: float, y: np.ndarray, h: float) -> np.ndarray:
    """Advance ``y' = f(t, y)`` by one classical Runge-Kutta step of size ``h``."""
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    y = np.asarray(y, dtype=float)
    half = 0.5 * h
    k1 = f(t, y)
    k2 = f(t + half, y + half * k1)
    k3 = f(t + half, y + half * k2)
    k4 = f(t + h, y + h * k3)
    y_next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(y_next)):
        raise IntegrationDivergedError(t)
    return y_next


def integrate(f: VectorField, t0: float, y0, h: float, n_steps: int) -> np.ndarray:
    """Run ``n_steps`` RK4 steps; returns the ``(n_steps + 1, dim)`` trajectory."""
    y = np.asarray(y0, dtype=float)
    out = np.empty((n_steps + 1, y.size))
    out[0] = y
    for k in range(n_steps):
        y = rk4_step(f, t0 + k * h, y, h)
        out[k + 1] = y
    return out


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    return A


def pseudo_inverse(A, rcond: float = RCOND) -> np.ndarray:
    """Moore-Penrose pseudo-inverse through a truncated SVD."""
    A = _as_matrix(A)
    U, sv, Vt = np.linalg.svd(A, full_matrices=False)
    keep = sv > rcond * sv[0] if sv.size and sv[0] > 0 else np.zeros(sv.shape, bool)
    inv = np.zeros_like(sv)
    inv[keep] = 1.0 / sv[keep]
    return (Vt.T * inv) @ U.T


def pseudo_inverse_solve(A, d, rcond: float = RCOND) -> np.ndarray:
    """Minimum-norm least-squares solution of ``A w = d``.

    Singular values under ``rcond`` times the largest are dropped, so
    rank-deficient systems return the minimum-norm minimiser.
    """
    A = _as_matrix(A)
    d = np.asarray(d, dtype=float).reshape(-1)
    if d.size != A.shape[0]:
        raise ShapeError(f"rhs has length {d.size}, matrix has {A.shape[0]} rows")
    U, sv, Vt = np.linalg.svd(A, full_matrices=False)
    if sv[0] == 0.0:
        return np.zeros(A.shape[1])
    keep = sv > rcond * sv[0]
    coeff = (U[:, keep].T @ d) / sv[keep]
    return Vt[keep].T @ coeff


def residual_norm(A, w, d) -> float:
    """Euclidean norm of ``d - A w``."""
    A = _as_matrix(A)
    w = np.asarray(w, dtype=float).reshape(-1)
    d = np.asarray(d, dtype=float).reshape(-1)
    if w.size != A.shape[1] or d.size != A.shape[0]:
        raise ShapeError(
            f"incompatible shapes: A {A.shape}, w ({w.size},), d ({d.size},)"
        )
    return float(np.linalg.norm(d - A @ w))


def central_difference(samples, step: float) -> np.ndarray:
    """Derivative of a uniformly sampled series.

    Interior points use the central quotient; the two endpoints fall back
    to first-order one-sided differences.
    """
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size < 3:
        raise InsufficientDataError(f"need at least 3 samples, got {x.size}")
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    out = np.empty_like(x)
    out[1:-1] = (x[2:] - x[:-2]) / (2.0 * step)
    out[0] = (x[1] - x[0]) / step
    out[-1] = (x[-1] - x[-2]) / step
    return out
