"""Multi-rate closed-loop simulation of the cart-pole under sliding-mode control."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .cartpole import (NOMINAL, CartPoleParams, DeadZone, accelerations_closed_form,
                       apply_dead_zone, state_to_vector)
from .dynamics import GeneralizedState
from .errors import InsufficientDataError, ShapeError, SimulationAborted, UnderactError
from .numerics import central_difference, rk4_step
from .rbf import (RbfNetwork, collect_training_pair, error_features, fit_scale, grid_centers,
                  rbf_eval, rbf_train)
from .smc import (ControllerConfig, Mode, Reference, SurfaceParams, boundary_distance,
                  cartpole_control_law_scalar, cartpole_terms)

CSV_COLUMNS = ("t", "x", "xdot", "theta", "thetadot", "s", "s_phi", "nu", "u", "d_hat", "V")
#: |u| at or below this is treated as "off" when counting sign reversals
REVERSAL_DEADBAND = 1e-6
LYAPUNOV_TOL = 1e-6


@dataclass(frozen=True)
class RbfSettings:
    per_dim: int = 3
    pad: float = 0.1
    width_factor: float = 1.0
    rcond: float = 1e-4
    in_layer_only: bool = True

    def __post_init__(self):
        if self.per_dim < 2:
            raise ValueError("per_dim must be at least 2")
        if not (self.pad >= 0 and self.width_factor > 0 and 0 < self.rcond < 1):
            raise ValueError("invalid RBF settings")


def _default_initial():
    return GeneralizedState.from_parts([0.0], [math.radians(-40.0)], [0.0], [0.0])


@dataclass(frozen=True)
class SimConfig:
    plant_rate: int = 1000
    control_rate: int = 200
    duration: float = 30.0
    training_horizon: float = 10.0
    plant_params: CartPoleParams = field(default_factory=lambda: NOMINAL.scaled(1.3, 1.3))
    controller_params: CartPoleParams = NOMINAL
    dead_zone: DeadZone = DeadZone()
    surface: SurfaceParams = field(
        default_factory=lambda: SurfaceParams(length_scale=NOMINAL.pole_length))
    controller: ControllerConfig = ControllerConfig()
    initial_state: GeneralizedState = field(default_factory=_default_initial)
    reference: Reference = field(default_factory=Reference)
    seed: int = 0
    # constant force added to the cart input (not seen by the controller)
    cart_force: float = 0.0
    # constant term added to sdot through a state-dependent cart force
    sliding_disturbance: float = 0.0
    rbf: RbfSettings = RbfSettings()
    pretrained: RbfNetwork | None = None

    def __post_init__(self):
        if not (self.plant_rate > 0 and self.control_rate > 0):
            raise ValueError("rates must be positive")
        if int(self.plant_rate) != self.plant_rate or int(self.control_rate) != self.control_rate:
            raise ValueError("rates must be integers")
        if self.plant_rate % self.control_rate:
            raise ValueError("plant_rate must be an integer multiple of control_rate")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError("duration must be positive")
        if not self.training_horizon >= 0:
            raise ValueError("training_horizon must be non-negative")
        if not (math.isfinite(self.cart_force) and math.isfinite(self.sliding_disturbance)):
            raise ValueError("disturbances must be finite")

    @property
    def n_control(self) -> int:
        return int(round(self.duration * self.control_rate))

    @property
    def substeps(self) -> int:
        return self.plant_rate // self.control_rate

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class TrainingInfo:
    t: float
    n_samples: int
    error: float
    target_rms: float
    network: RbfNetwork


@dataclass
class SimTrace:
    """Recorded run. Control-rate rows hold the state at the sampling instant."""

    t_plant: np.ndarray
    y_plant: np.ndarray
    t: np.ndarray
    y: np.ndarray
    s: np.ndarray
    s_phi: np.ndarray
    nu: np.ndarray
    u: np.ndarray
    d_hat: np.ndarray
    V: np.ndarray
    phi: float
    training: TrainingInfo | None = None
    complete: bool = True

    x = property(lambda self: self.y[:, 0])
    xdot = property(lambda self: self.y[:, 1])
    theta = property(lambda self: self.y[:, 2])
    thetadot = property(lambda self: self.y[:, 3])

    @property
    def control_step(self) -> float:
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else float("nan")

    def columns(self) -> dict[str, np.ndarray]:
        return {name: np.asarray(getattr(self, name)) for name in CSV_COLUMNS}

    def truncated(self, n: int, n_plant: int) -> "SimTrace":
        cut = lambda a, m: a[:m].copy()
        return replace(self, t_plant=cut(self.t_plant, n_plant), y_plant=cut(self.y_plant, n_plant),
                       t=cut(self.t, n), y=cut(self.y, n), s=cut(self.s, n),
                       s_phi=cut(self.s_phi, n), nu=cut(self.nu, n), u=cut(self.u, n),
                       d_hat=cut(self.d_hat, n), V=cut(self.V, n), complete=False)


def _plant_field(cfg: SimConfig, u: float):
    p, dz_force = cfg.plant_params, u + cfg.cart_force
    delta = cfg.sliding_disturbance
    if delta == 0.0:
        def f(t, y):
            xdd, tdd = accelerations_closed_form(p, y[2], y[3], dz_force)
            return np.array([y[1], xdd, y[3], tdd])
        return f

    def f(t, y):
        _, Ms, _, _, _ = cartpole_terms(p, cfg.surface, y[0], y[1], y[2], y[3], cfg.reference)
        xdd, tdd = accelerations_closed_form(p, y[2], y[3], dz_force + delta / Ms)
        return np.array([y[1], xdd, y[3], tdd])
    return f


def _train(cfg: SimConfig, Y, s, nu, k: int) -> TrainingInfo:
    settings = cfg.rbf
    layer = cfg.controller.phi if settings.in_layer_only else None
    ts = collect_training_pair(cfg.controller_params, cfg.surface, cfg.reference,
                               Y[:k], s[:k], nu[:k], 1.0 / cfg.control_rate, layer=layer)
    scale = fit_scale(ts.inputs)
    centers, sigma = grid_centers(ts.inputs / scale, settings.per_dim, settings.pad,
                                  settings.width_factor)
    net, E = rbf_train(centers, sigma, ts, rcond=settings.rcond, input_scale=scale)
    return TrainingInfo(k / cfg.control_rate, len(ts), E,
                        float(np.sqrt(np.mean(ts.targets ** 2))), net)


def run(cfg: SimConfig) -> SimTrace:
    """Simulate ``cfg``; raises ``SimulationAborted`` carrying the partial trace."""
    n, sub = cfg.n_control, cfg.substeps
    h = 1.0 / cfg.plant_rate
    nom, sp, ctl, ref = cfg.controller_params, cfg.surface, cfg.controller, cfg.reference
    phi = float(ctl.phi)
    intelligent = ctl.mode is Mode.INTELLIGENT

    t_plant = np.arange(n * sub + 1) / cfg.plant_rate
    y_plant = np.empty((n * sub + 1, 4))
    Y = np.empty((n, 4))
    s = np.empty(n)
    nu = np.empty(n)
    u = np.empty(n)
    d_hat = np.zeros(n)
    trace = SimTrace(t_plant, y_plant, np.arange(n) / cfg.control_rate, Y, s, np.empty(n),
                     nu, u, d_hat, np.empty(n), phi)

    y = state_to_vector(cfg.initial_state)
    y_plant[0] = y
    net = None
    k = 0
    try:
        for k in range(n):
            t = k / cfg.control_rate
            if intelligent and net is None and t >= cfg.training_horizon:
                if cfg.pretrained is not None:
                    net = cfg.pretrained
                else:
                    trace.training = _train(cfg, Y, s, nu, k)
                    net = trace.training.network
            Y[k] = y
            s[k] = cartpole_terms(nom, sp, y[0], y[1], y[2], y[3], ref)[0]
            if net is not None:
                d_hat[k] = rbf_eval(net, error_features(nom, y, ref)[0])
            nu[k] = cartpole_control_law_scalar(nom, sp, ctl, y[0], y[1], y[2], y[3], ref,
                                                d_hat[k])
            u[k] = apply_dead_zone(cfg.dead_zone, nu[k])
            f = _plant_field(cfg, u[k])
            base = k * sub
            for j in range(sub):
                y = rk4_step(f, t_plant[base + j], y, h)
                y_plant[base + j + 1] = y
    except UnderactError as exc:
        # rows up to k-1 are complete; row k may be half written
        partial = trace.truncated(k, k * sub + 1)
        _finish(partial)
        raise SimulationAborted(exc, partial) from exc
    _finish(trace)
    return trace


def _finish(trace: SimTrace) -> None:
    trace.s_phi = boundary_distance(trace.s, trace.phi) if trace.s.size else trace.s.copy()
    trace.V = 0.5 * trace.s_phi ** 2


# -- metrics -----------------------------------------------------------------

@dataclass(frozen=True)
class Metrics:
    window: float
    samples: int
    rms_s: float
    rms_theta: float
    peak_theta: float
    peak_x: float
    reversal_rate: float
    max_V: float
    lyapunov_violations: int
    lyapunov_violation_fraction: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def reversal_count(u) -> int:
    u = np.asarray(u, dtype=float)
    sg = np.sign(u[np.abs(u) > REVERSAL_DEADBAND])
    return int(np.count_nonzero(sg[1:] != sg[:-1]))


def metrics(trace, window: float, ref: Reference | None = None,
            tol: float = LYAPUNOV_TOL) -> Metrics:
    """Summary statistics over the last ``window`` seconds of controller samples.

    ``trace`` is a ``SimTrace`` or a ``TraceTable`` read back from CSV.
    """
    ref = ref or Reference()
    t = np.asarray(trace.t, dtype=float)
    if t.size < 3:
        raise InsufficientDataError("trace too short for metrics")
    dt = float(np.median(np.diff(t)))
    count = int(round(window / dt))
    if count < 1 or not math.isfinite(window):
        raise InsufficientDataError(f"window {window} s holds no samples")
    if count > t.size:
        raise ValueError(f"window {window} s exceeds the trace length")
    sl = slice(t.size - count, t.size)
    s = np.asarray(trace.s, dtype=float)
    s_phi = np.asarray(trace.s_phi, dtype=float)
    th = np.asarray(trace.theta, dtype=float)[sl] - ref.q_unact[0]
    x = np.asarray(trace.x, dtype=float)[sl] - ref.q_act[0]
    sdot = central_difference(s, dt)
    viol = (s_phi[sl] != 0.0) & (s_phi[sl] * sdot[sl] > tol)
    nviol = int(np.count_nonzero(viol))
    return Metrics(
        window=count * dt,
        samples=count,
        rms_s=float(np.sqrt(np.mean(s[sl] ** 2))),
        rms_theta=float(np.sqrt(np.mean(th ** 2))),
        peak_theta=float(np.max(np.abs(th))),
        peak_x=float(np.max(np.abs(x))),
        reversal_rate=reversal_count(np.asarray(trace.u)[sl]) / (count * dt),
        max_V=float(np.max(np.asarray(trace.V, dtype=float)[sl])),
        lyapunov_violations=nviol,
        lyapunov_violation_fraction=nviol / count,
    )


# -- CSV ---------------------------------------------------------------------

class TraceTable:
    """Column view of a trace CSV; columns are attributes."""

    def __init__(self, columns: dict[str, np.ndarray]):
        self._cols = columns

    def __getattr__(self, name):
        try:
            return self.__dict__["_cols"][name]
        except KeyError:
            raise AttributeError(name) from None

    def columns(self) -> dict[str, np.ndarray]:
        return dict(self._cols)

    def __len__(self):
        return len(self._cols["t"])


def format_csv(trace) -> str:
    cols = trace.columns()
    lines = [",".join(CSV_COLUMNS)]
    data = np.column_stack([cols[c] for c in CSV_COLUMNS]) if len(cols["t"]) else []
    for row in data:
        lines.append(",".join(f"{v:.9g}" for v in row))
    return "\n".join(lines) + "\n"


def write_csv(trace, path) -> None:
    Path(path).write_text(format_csv(trace))


def read_csv(path) -> TraceTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ShapeError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        for i, name in enumerate(CSV_COLUMNS):
            if i >= len(header):
                raise ShapeError(f"{path}: missing column '{name}'")
            if header[i] != name:
                raise ShapeError(f"{path}: column {i + 1} is '{header[i]}', expected '{name}'")
        if len(header) > len(CSV_COLUMNS):
            raise ShapeError(f"{path}: unexpected column '{header[len(CSV_COLUMNS)]}'")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(CSV_COLUMNS):
                raise ShapeError(f"{path}:{lineno}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ShapeError(f"{path}:{lineno}: non-numeric field") from None
    arr = np.array(rows, dtype=float).reshape(-1, len(CSV_COLUMNS))
    return TraceTable({name: arr[:, i] for i, name in enumerate(CSV_COLUMNS)})
