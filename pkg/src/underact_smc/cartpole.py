"""Cart-pole benchmark plant with a dead-zone actuator.

Coordinates: cart position ``x`` (actuated) and pole angle ``theta``
measured from the upright position (unactuated). Plant state vectors are
ordered ``(x, xdot, theta, thetadot)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import GeneralizedState, PartitionedModel

GRAVITY = 9.81


@dataclass(frozen=True)
class CartPoleParams:
    cart_mass: float = 0.4
    bob_mass: float = 0.14
    pole_length: float = 0.215
    gravity: float = GRAVITY

    def __post_init__(self):
        for name in ("cart_mass", "bob_mass", "pole_length", "gravity"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v}")

    def scaled(self, cart_factor: float = 1.0, bob_factor: float = 1.0) -> "CartPoleParams":
        """Copy with both masses multiplied, e.g. to build an uncertain plant."""
        return replace(self, cart_mass=self.cart_mass * cart_factor,
                       bob_mass=self.bob_mass * bob_factor)


#: controller-side values used throughout the benchmark
NOMINAL = CartPoleParams()


@dataclass(frozen=True)
class DeadZone:
    half_width: float = 0.01

    def __post_init__(self):
        if not self.half_width >= 0:
            raise ValueError(f"half_width must be >= 0, got {self.half_width}")


def apply_dead_zone(dz: DeadZone, nu: float) -> float:
    """Actuator output for the commanded action ``nu``."""
    w = dz.half_width
    if nu >= w and nu != 0.0:
        return nu - w
    if nu <= -w and nu != 0.0:
        return nu + w
    return 0.0


def cartpole_model(params: CartPoleParams) -> PartitionedModel:
    m_c, m, l, g = params.cart_mass, params.bob_mass, params.pole_length, params.gravity

    def mass_blocks(q):
        c = math.cos(q[1])
        return (np.array([[m_c + m]]), np.array([[m * l * c]]), np.array([[m * l * l]]))

    def force_blocks(q, qdot):
        s = math.sin(q[1])
        return (np.array([m * l * qdot[1] ** 2 * s]), np.array([m * g * l * s]))

    return PartitionedModel(1, 1, mass_blocks, force_blocks)


def state_from_vector(y) -> GeneralizedState:
    x, xdot, theta, thetadot = (float(v) for v in y)
    return GeneralizedState.from_parts([x], [theta], [xdot], [thetadot])


def state_to_vector(state: GeneralizedState) -> np.ndarray:
    return np.array([state.q_act[0], state.qdot_act[0], state.q_unact[0], state.qdot_unact[0]])


def accelerations_closed_form(params: CartPoleParams, theta: float, thetadot: float,
                              force: float, pole_torque: float = 0.0):
    """Explicit 2x2 solve of the cart-pole equations; returns ``(xdd, thetadd)``.

    ``force`` acts on the cart; ``pole_torque`` is an extra generalized
    force on the pole coordinate (zero for the benchmark).
    """
    m_c, m, l, g = params.cart_mass, params.bob_mass, params.pole_length, params.gravity
    s, c = math.sin(theta), math.cos(theta)
    a11, a12, a22 = m_c + m, m * l * c, m * l * l
    b1 = m * l * thetadot * thetadot * s + force
    b2 = m * g * l * s + pole_torque
    det = a11 * a22 - a12 * a12
    return (a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det


def plant_rhs(params: CartPoleParams, force: float, pole_torque: float = 0.0):
    """Vector field ``f(t, y)`` for a constant cart force."""
    def f(t, y):
        xdd, tdd = accelerations_closed_form(params, y[2], y[3], force, pole_torque)
        return np.array([y[1], xdd, y[3], tdd])
    return f


def energy(params: CartPoleParams, y) -> float:
    """Total mechanical energy; the potential is zero at the pivot height."""
    m_c, m, l, g = params.cart_mass, params.bob_mass, params.pole_length, params.gravity
    _, xdot, theta, thetadot = y
    return (0.5 * (m_c + m) * xdot ** 2 + 0.5 * m * l * l * thetadot ** 2
            + m * l * xdot * thetadot * math.cos(theta) + m * g * l * math.cos(theta))
