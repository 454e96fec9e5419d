"""Sliding surfaces and the sliding-mode control laws.

The sliding variable is a linear combination of actuated and unactuated
tracking errors,

    s = a_a*de_a + l_a*e_a + L*(a_u*de_u + l_u*e_u),      e = q - q_des

where ``L`` is ``SurfaceParams.length_scale`` (the pole length for the
cart-pole, 1 for a generic model). Differentiating along the partitioned
dynamics gives ``sdot = f_s + sdot_r + M_s u``; the laws below invert that
relation with the controller's nominal model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .cartpole import CartPoleParams
from .dynamics import GeneralizedState, PartitionedModel, reduced_blocks
from .errors import ControllerSingularityError, ShapeError

#: |det M_s| below this aborts the generic law
GENERIC_SINGULAR_TOL = 1e-12
#: |alpha_a*l - beta*cos(theta)| below this aborts the cart-pole law
CARTPOLE_SINGULAR_TOL = 1e-9


class Mode(str, Enum):
    DISCONTINUOUS = "discontinuous"
    SMOOTH = "smooth"
    INTELLIGENT = "intelligent"


@dataclass(frozen=True)
class SurfaceParams:
    alpha_act: float = 0.02
    alpha_unact: float = 1.0
    lambda_act: float = 0.005
    lambda_unact: float = 2.5
    length_scale: float = 1.0

    def __post_init__(self):
        gains = [np.asarray(g, dtype=float) for g in
                 (self.alpha_act, self.alpha_unact, self.lambda_act, self.lambda_unact)]
        if not all(np.all(np.isfinite(g)) for g in gains):
            raise ValueError("surface gains must be finite")
        if not np.any(gains[0]) and not np.any(gains[1]):
            raise ValueError("alpha_act and alpha_unact cannot both be zero")
        if not (math.isfinite(self.length_scale) and self.length_scale > 0):
            raise ValueError("length_scale must be positive")

    def scaled(self, c: float) -> "SurfaceParams":
        return SurfaceParams(c * np.asarray(self.alpha_act), c * np.asarray(self.alpha_unact),
                             c * np.asarray(self.lambda_act), c * np.asarray(self.lambda_unact),
                             self.length_scale)

    def matrices(self, m: int, r: int):
        """Gain matrices ``(A_a, A_u, Lam_a, Lam_u)`` with the length scale folded in."""
        def act(g):
            g = np.asarray(g, dtype=float)
            return g * np.eye(m) if g.ndim == 0 else g.reshape(m, m)

        def unact(g):
            g = np.asarray(g, dtype=float)
            if g.ndim == 0:
                if m != r:
                    raise ShapeError("scalar unactuated gain needs n_act == n_unact")
                return g * np.eye(m)
            return g.reshape(m, r)

        L = self.length_scale
        return (act(self.alpha_act), L * unact(self.alpha_unact),
                act(self.lambda_act), L * unact(self.lambda_unact))


@dataclass(frozen=True)
class ControllerConfig:
    kappa: float = 5.0
    phi: float = 0.2
    mode: Mode = Mode.SMOOTH

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not np.all(np.asarray(self.kappa) > 0):
            raise ValueError("kappa must be positive")
        if self.mode is not Mode.DISCONTINUOUS and not np.all(np.asarray(self.phi) > 0):
            raise ValueError("phi must be positive for boundary-layer modes")


@dataclass(frozen=True)
class Reference:
    """Desired trajectory sample (positions, rates, accelerations)."""

    q_act: np.ndarray = field(default_factory=lambda: np.zeros(1))
    q_unact: np.ndarray = field(default_factory=lambda: np.zeros(1))
    qdot_act: np.ndarray = field(default_factory=lambda: np.zeros(1))
    qdot_unact: np.ndarray = field(default_factory=lambda: np.zeros(1))
    qddot_act: np.ndarray = field(default_factory=lambda: np.zeros(1))
    qddot_unact: np.ndarray = field(default_factory=lambda: np.zeros(1))

    @classmethod
    def setpoint(cls, q_act, q_unact) -> "Reference":
        qa = np.atleast_1d(np.asarray(q_act, dtype=float))
        qu = np.atleast_1d(np.asarray(q_unact, dtype=float))
        za, zu = np.zeros_like(qa), np.zeros_like(qu)
        return cls(qa, qu, za, zu, za.copy(), zu.copy())


def sgn(v):
    return np.sign(v)


def saturation(s, phi):
    """``sat(s/phi)``: linear inside the layer, ``sgn(s)`` outside."""
    return np.clip(np.asarray(s, dtype=float) / phi, -1.0, 1.0)


def boundary_distance(s, phi):
    """Distance ``s_phi = s - phi*sat(s/phi)`` from ``s`` to its boundary layer."""
    s = np.asarray(s, dtype=float)
    # exact zero inside the layer; s - phi*(s/phi) would leave rounding residue
    return np.where(np.abs(s) <= phi, 0.0, s - phi * np.sign(s))


def _errors(state: GeneralizedState, ref: Reference):
    return (state.q_act - ref.q_act, state.q_unact - ref.q_unact,
            state.qdot_act - ref.qdot_act, state.qdot_unact - ref.qdot_unact)


def sliding_variable(sp: SurfaceParams, state: GeneralizedState, ref: Reference) -> np.ndarray:
    m, r = state.q_act.size, state.q_unact.size
    Aa, Au, La, Lu = sp.matrices(m, r)
    e_a, e_u, de_a, de_u = _errors(state, ref)
    return Aa @ de_a + La @ e_a + Au @ de_u + Lu @ e_u


class SlidingTerms(NamedTuple):
    """Pieces of ``sdot = f_s + sdot_r + M_s u`` at one state."""
    Ms: np.ndarray
    fs: np.ndarray
    sr_dot: np.ndarray


def sliding_terms(model: PartitionedModel, sp: SurfaceParams, state: GeneralizedState,
                  ref: Reference) -> SlidingTerms:
    m, r = model.n_act, model.n_unact
    Aa, Au, La, Lu = sp.matrices(m, r)
    Maa, Mau, _, _, _ = model.blocks(state)
    red = reduced_blocks(model, state)
    Maa_r_inv = np.linalg.inv(red.Maa_r)
    Muu_r_inv = np.linalg.inv(red.Muu_r)
    Ms = Aa @ Maa_r_inv - Au @ Muu_r_inv @ Mau.T @ np.linalg.inv(Maa)
    fs = Aa @ Maa_r_inv @ red.fa_r + Au @ Muu_r_inv @ red.fu_r
    _, _, de_a, de_u = _errors(state, ref)
    sr_dot = -Aa @ ref.qddot_act - Au @ ref.qddot_unact + La @ de_a + Lu @ de_u
    return SlidingTerms(Ms, fs, sr_dot)


def _switching(cfg: ControllerConfig, s):
    if cfg.mode is Mode.DISCONTINUOUS:
        return sgn(s)
    return saturation(s, cfg.phi)


def _effective_dhat(cfg: ControllerConfig, d_hat):
    return d_hat if cfg.mode is Mode.INTELLIGENT else 0.0


def control_generic(model: PartitionedModel, sp: SurfaceParams, cfg: ControllerConfig,
                    state: GeneralizedState, ref: Reference, d_hat=0.0) -> np.ndarray:
    """Commanded action from the partitioned nominal model.

    Discontinuous mode uses ``kappa*sgn(s)`` and ignores ``d_hat``; smooth
    mode uses ``kappa*sat(s/phi)`` with ``d_hat = 0``; intelligent mode adds
    the supplied compensation ``d_hat``.
    """
    terms = sliding_terms(model, sp, state, ref)
    if abs(np.linalg.det(terms.Ms)) < GENERIC_SINGULAR_TOL:
        raise ControllerSingularityError(state.q)
    s = sliding_variable(sp, state, ref)
    bracket = (terms.fs + _effective_dhat(cfg, d_hat) + terms.sr_dot
               + cfg.kappa * _switching(cfg, s))
    return -np.linalg.solve(terms.Ms, bracket)


# -- closed form for the cart-pole ------------------------------------------

def cartpole_terms(params: CartPoleParams, sp: SurfaceParams, x, xdot, theta, thetadot,
                   ref: Reference):
    """Scalar ``(s, M_s, f_s, sdot_r)`` for the cart-pole, without array overhead."""
    m_c, m, l, g = params.cart_mass, params.bob_mass, params.pole_length, params.gravity
    L = sp.length_scale
    a_a, l_a = float(sp.alpha_act), float(sp.lambda_act)
    beta, l_u = float(sp.alpha_unact) * L, float(sp.lambda_unact) * L
    ex, eth = x - ref.q_act[0], theta - ref.q_unact[0]
    dex, deth = xdot - ref.qdot_act[0], thetadot - ref.qdot_unact[0]
    s = a_a * dex + l_a * ex + beta * deth + l_u * eth
    sn, cs = math.sin(theta), math.cos(theta)
    D = a_a * l - beta * cs
    den = (m_c + m * sn * sn) * l
    Ms = D / den
    fs = (D * m * l * thetadot * thetadot * sn - (a_a * l * m * cs - beta * (m_c + m)) * g * sn) / den
    sr_dot = -a_a * ref.qddot_act[0] - beta * ref.qddot_unact[0] + l_a * dex + l_u * deth
    return s, Ms, fs, sr_dot, D


def cartpole_control_law(params_nominal: CartPoleParams, sp: SurfaceParams,
                         cfg: ControllerConfig, state: GeneralizedState, ref: Reference,
                         d_hat: float = 0.0) -> float:
    """Closed-form cart-pole law (the partitioned law specialised by hand).

    With ``beta = alpha_unact * length_scale``:

        nu = -(m_c + m sin^2)l / (a_a l - beta cos)
             * [ ((a_a l - beta cos) m l thd^2 sin - (a_a l m cos - beta (m_c+m)) g sin)
                 / ((m_c + m sin^2) l)  + sdot_r + d_hat + kappa*sw(s) ]
    """
    return cartpole_control_law_scalar(
        params_nominal, sp, cfg, float(state.q_act[0]), float(state.qdot_act[0]),
        float(state.q_unact[0]), float(state.qdot_unact[0]), ref, d_hat)


def cartpole_control_law_scalar(params_nominal, sp, cfg, x, xdot, theta, thetadot, ref,
                                d_hat=0.0) -> float:
    s, Ms, fs, sr_dot, D = cartpole_terms(params_nominal, sp, x, xdot, theta, thetadot, ref)
    if abs(D) < CARTPOLE_SINGULAR_TOL:
        raise ControllerSingularityError(np.array([x, theta]))
    if cfg.mode is Mode.DISCONTINUOUS:
        sw = float(np.sign(s))
    else:
        sw = min(1.0, max(-1.0, s / cfg.phi))
    dh = d_hat if cfg.mode is Mode.INTELLIGENT else 0.0
    return -(fs + sr_dot + dh + cfg.kappa * sw) / Ms
