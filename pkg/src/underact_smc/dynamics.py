"""Partitioned equations of motion for underactuated mechanical systems.

The model is written in the actuated/unactuated block form

    [M_aa   M_au] [qdd_a]   [f_a + u]
    [M_au^T M_uu] [qdd_u] = [f_u    ]

with the input matrix fixed to ``[I 0]^T``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ShapeError, SingularInertiaError

MassBlocks = Callable[[np.ndarray], tuple]
ForceBlocks = Callable[[np.ndarray, np.ndarray], tuple]


@dataclass(frozen=True)
class GeneralizedState:
    q_act: np.ndarray
    q_unact: np.ndarray
    qdot_act: np.ndarray
    qdot_unact: np.ndarray

    @classmethod
    def from_parts(cls, q_act, q_unact, qdot_act, qdot_unact) -> "GeneralizedState":
        parts = [np.atleast_1d(np.asarray(p, dtype=float)) for p in
                 (q_act, q_unact, qdot_act, qdot_unact)]
        if parts[0].shape != parts[2].shape or parts[1].shape != parts[3].shape:
            raise ShapeError("position and rate partitions differ in size")
        if not all(np.all(np.isfinite(p)) for p in parts):
            raise ValueError("state contains non-finite entries")
        return cls(*parts)

    @property
    def q(self) -> np.ndarray:
        return np.concatenate([self.q_act, self.q_unact])

    @property
    def qdot(self) -> np.ndarray:
        return np.concatenate([self.qdot_act, self.qdot_unact])


@dataclass(frozen=True)
class PartitionedModel:
    """An n-DOF, m-input model given by its inertia and force blocks.

    ``mass_blocks(q)`` returns ``(M_aa, M_au, M_uu)``; ``force_blocks(q, qdot)``
    returns ``(f_a, f_u)``, where ``f = g - k`` collects applied, Coriolis and
    centrifugal terms.
    """

    n_act: int
    n_unact: int
    mass_blocks: MassBlocks
    force_blocks: ForceBlocks

    def __post_init__(self):
        if self.n_act < 1 or self.n_unact < 1:
            raise ValueError("an underactuated model needs n_act >= 1 and n_unact >= 1")

    @property
    def n(self) -> int:
        return self.n_act + self.n_unact

    def blocks(self, state: GeneralizedState):
        m, r = self.n_act, self.n_unact
        q = state.q
        Maa, Mau, Muu = self.mass_blocks(q)
        Maa = np.asarray(Maa, dtype=float).reshape(m, m)
        Mau = np.asarray(Mau, dtype=float).reshape(m, r)
        Muu = np.asarray(Muu, dtype=float).reshape(r, r)
        fa, fu = self.force_blocks(q, state.qdot)
        fa = np.asarray(fa, dtype=float).reshape(m)
        fu = np.asarray(fu, dtype=float).reshape(r)
        return Maa, Mau, Muu, fa, fu

    def inertia(self, state: GeneralizedState) -> np.ndarray:
        Maa, Mau, Muu, _, _ = self.blocks(state)
        return np.block([[Maa, Mau], [Mau.T, Muu]])

    def check(self, state: GeneralizedState) -> None:
        """Raise if the assembled inertia matrix is not symmetric positive definite."""
        M = self.inertia(state)
        if not np.array_equal(M, M.T):
            raise ValueError("assembled inertia matrix is not symmetric")
        try:
            np.linalg.cholesky(M)
        except np.linalg.LinAlgError:
            raise SingularInertiaError(state.q, "inertia matrix is not positive definite") from None


class ReducedBlocks(NamedTuple):
    Maa_r: np.ndarray
    Muu_r: np.ndarray
    fa_r: np.ndarray
    fu_r: np.ndarray


def _solve(A, B, q):
    try:
        return np.linalg.solve(A, B)
    except np.linalg.LinAlgError:
        raise SingularInertiaError(q) from None


def reduced_blocks(model: PartitionedModel, state: GeneralizedState) -> ReducedBlocks:
    """Schur-complement blocks M'_aa, M'_uu and reduced forces f'_a, f'_u."""
    Maa, Mau, Muu, fa, fu = model.blocks(state)
    q = state.q
    Muu_inv_MauT = _solve(Muu, Mau.T, q)
    Muu_inv_fu = _solve(Muu, fu, q)
    Maa_inv_Mau = _solve(Maa, Mau, q)
    Maa_inv_fa = _solve(Maa, fa, q)
    return ReducedBlocks(
        Maa - Mau @ Muu_inv_MauT,
        Muu - Mau.T @ Maa_inv_Mau,
        fa - Mau @ Muu_inv_fu,
        fu - Mau.T @ Maa_inv_fa,
    )


def accelerations(model: PartitionedModel, state: GeneralizedState, u):
    """Actuated and unactuated accelerations for the input ``u`` (length m)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (model.n_act,):
        raise ShapeError(f"input has shape {u.shape}, expected ({model.n_act},)")
    Maa, Mau, _, _, _ = model.blocks(state)
    red = reduced_blocks(model, state)
    q = state.q
    qdd_a = _solve(red.Maa_r, red.fa_r + u, q)
    qdd_u = _solve(red.Muu_r, red.fu_r - Mau.T @ _solve(Maa, u, q), q)
    return qdd_a, qdd_u


def direct_accelerations(model: PartitionedModel, state: GeneralizedState, u):
    """Accelerations by a dense solve of the assembled system (reference path)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    Maa, Mau, Muu, fa, fu = model.blocks(state)
    M = np.block([[Maa, Mau], [Mau.T, Muu]])
    qdd = _solve(M, np.concatenate([fa + u, fu]), state.q)
    return qdd[: model.n_act], qdd[model.n_act:]
