"""Acceptance criteria, one test per criterion.

Run under pytest, or directly (``python3 tests/test_acceptance.py``) for one
PASS/FAIL line per criterion.
"""
from __future__ import annotations

import math
import sys
import time

import numpy as np
import pytest

from underact_smc.cartpole import (NOMINAL, DeadZone, cartpole_model, energy, plant_rhs,
                                   state_from_vector)
from underact_smc.cli import bundled_config
from underact_smc.config import load_config
from underact_smc.dynamics import accelerations, direct_accelerations
from underact_smc.numerics import integrate, pseudo_inverse_solve
from underact_smc.rbf import (TrainingSet, collect_training_pair, grid_centers,
                              rbf_eval, rbf_train)
from underact_smc.sim import SimConfig, format_csv, metrics, run
from underact_smc.smc import ControllerConfig, Mode, Reference, SurfaceParams
from underact_smc.smc import cartpole_control_law, control_generic

_cache: dict = {}


def _scenarios():
    if "sc" not in _cache:
        _cache["sc"] = load_config(bundled_config())
    return _cache["sc"]


def _trace(name):
    key = ("trace", name)
    if key not in _cache:
        t0 = time.perf_counter()
        tr = run(_scenarios()[name].sim)
        _cache[key] = (tr, time.perf_counter() - t0)
    return _cache[key]


def _fmt(checks):
    return "; ".join(f"{'ok' if ok else 'FAIL'} {text}" for ok, text in checks)


def c1_numerics():
    t0 = time.perf_counter()
    hs = (1e-2, 5e-3, 2.5e-3)
    errs = [abs(integrate(lambda t, y: y, 0.0, [1.0], h, int(round(1 / h)))[-1, 0] - math.e)
            for h in hs]
    order = min(math.log2(a / b) for a, b in zip(errs, errs[1:]))
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        p, m = rng.integers(1, 21, size=2)
        A = rng.normal(size=(p, m))
        if rng.random() < 0.3 and min(p, m) > 1:
            A = rng.normal(size=(p, 1)) @ rng.normal(size=(1, m))
        P = np.column_stack([pseudo_inverse_solve(A, e) for e in np.eye(p)])
        nA, nP = np.linalg.norm(A), np.linalg.norm(P)
        worst = max(worst,
                    np.linalg.norm(A @ P @ A - A) / nA,
                    np.linalg.norm(P @ A @ P - P) / nP,
                    np.linalg.norm(A @ P - (A @ P).T) / max(nA * nP, 1.0),
                    np.linalg.norm(P @ A - (P @ A).T) / max(nA * nP, 1.0))
    dt = time.perf_counter() - t0
    return [(order >= 3.9, f"RK4 observed order {order:.3f} >= 3.9"),
            (worst <= 1e-9, f"Moore-Penrose worst relative defect {worst:.2e} <= 1e-9"),
            (dt < 5, f"runtime {dt:.2f} s < 5 s")]


def c2_dynamics():
    t0 = time.perf_counter()
    model = cartpole_model(NOMINAL)
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(1000):
        st = state_from_vector(rng.uniform([-5, -5, -math.pi, -10], [5, 5, math.pi, 10]))
        u = rng.normal(scale=5.0, size=1)
        a = np.concatenate(accelerations(model, st, u))
        b = np.concatenate(direct_accelerations(model, st, u))
        worst = max(worst, float(np.max(np.abs(a - b))))
    y0 = np.array([0.0, 0.3, math.radians(-40), 0.5])
    traj = integrate(plant_rhs(NOMINAL, 0.0), 0.0, y0, 1e-3, 10_000)
    e = np.array([energy(NOMINAL, y) for y in traj])
    drift = float(np.max(np.abs(e - e[0])))
    dt = time.perf_counter() - t0
    return [(worst <= 1e-10, f"block vs dense solve max diff {worst:.2e} <= 1e-10"),
            (drift <= 1e-6, f"open-loop energy drift {drift:.2e} <= 1e-6"),
            (dt < 10, f"runtime {dt:.2f} s < 10 s")]


def c3_equivalence():
    t0 = time.perf_counter()
    sp = SurfaceParams(0.02, 1.0, 0.005, 2.5, length_scale=NOMINAL.pole_length)
    cfg = ControllerConfig(5.0, 0.2, Mode.SMOOTH)
    model, ref = cartpole_model(NOMINAL), Reference()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        y = [rng.uniform(-2, 2), rng.uniform(-2, 2), math.radians(rng.uniform(-80, 80)),
             rng.uniform(-5, 5)]
        st = state_from_vector(y)
        worst = max(worst, abs(control_generic(model, sp, cfg, st, ref)[0]
                               - cartpole_control_law(NOMINAL, sp, cfg, st, ref)))
    dt = time.perf_counter() - t0
    return [(worst <= 1e-9, f"closed form vs generic law max diff {worst:.2e} <= 1e-9"),
            (dt < 5, f"runtime {dt:.2f} s < 5 s")]


def c4_discontinuous():
    tr, dt = _trace("discontinuous")
    late = tr.t_plant >= 15.0
    th = math.degrees(float(np.max(np.abs(tr.y_plant[late, 2]))))
    x = float(np.max(np.abs(tr.y_plant[late, 0])))
    rev = metrics(tr, 5.0).reversal_rate
    return [(th < 2.0, f"max |theta| for t>=15 s {th:.3f} deg < 2 deg"),
            (x < 0.05, f"max |x| for t>=15 s {x:.3f} m < 0.05 m"),
            (rev >= 50, f"sign reversals over final 5 s {rev:.1f}/s >= 50/s"),
            (dt < 5, f"runtime {dt:.2f} s < 5 s")]


def c5_smooth():
    tr, _ = _trace("smooth")
    phi = _scenarios()["smooth"].sim.controller.phi
    rev = metrics(tr, tr.t.size / 200 - 15.0).reversal_rate
    smax = float(np.max(np.abs(tr.s[tr.t >= 15.0])))
    rms_th = math.degrees(metrics(tr, 10.0).rms_theta)
    return [(rev <= 2, f"sign reversals after 15 s {rev:.2f}/s <= 2/s"),
            (smax <= phi, f"max |s| for t>=15 s {smax:.2e} <= phi={phi}"),
            (rms_th > 0.1, f"RMS(theta) over final 10 s {rms_th:.3f} deg > 0.1 deg")]


def c6_intelligent():
    b, _ = _trace("smooth")
    c, _ = _trace("intelligent")
    rb, rc = metrics(b, 10.0).rms_s, metrics(c, 10.0).rms_s
    rev = metrics(c, c.t.size / 200 - 15.0).reversal_rate
    return [(c.training is not None, "network trained once at the training horizon"),
            (rc <= 0.5 * rb, f"RMS(s) C/B = {rc:.3e}/{rb:.3e} = {rc / rb:.3f} <= 0.5"),
            (rev <= 2, f"sign reversals after 15 s {rev:.2f}/s <= 2/s")]


def c7_lyapunov():
    checks = []
    for kappa, phi in ((0.1, 0.05), (5.0, 0.2)):
        for mode in (Mode.SMOOTH, Mode.INTELLIGENT):
            cfg = SimConfig(plant_params=NOMINAL, dead_zone=DeadZone(0.0),
                            controller=ControllerConfig(kappa, phi, mode))
            tr = run(cfg)
            m = metrics(tr, cfg.duration)
            outside = int(np.count_nonzero(tr.s_phi))
            checks.append((m.lyapunov_violations == 0 and outside > 0,
                           f"{mode.value} kappa={kappa} phi={phi}: {m.lyapunov_violations} "
                           f"violations in {outside} samples outside the layer"))
    return checks


def c8_rbf():
    rng = np.random.default_rng(8)
    C, sigma = grid_centers(rng.uniform(-1, 1, size=(200, 4)), 3)
    _, E = rbf_train(C, sigma, TrainingSet(C, rng.normal(size=C.shape[0])))
    checks = [(E <= 1e-8, f"interpolation at {C.shape[0]} centers E = {E:.2e} <= 1e-8")]
    for delta in (0.5, -0.2):
        cfg = SimConfig(plant_params=NOMINAL, dead_zone=DeadZone(0.0), sliding_disturbance=delta,
                        controller=ControllerConfig(5.0, 0.2, Mode.INTELLIGENT))
        tr = run(cfg)
        k = int(cfg.training_horizon * cfg.control_rate)
        ts = collect_training_pair(cfg.controller_params, cfg.surface, cfg.reference, tr.y[:k],
                                   tr.s[:k], tr.nu[:k], 1.0 / cfg.control_rate,
                                   layer=cfg.controller.phi)
        t_err = float(np.max(np.abs(ts.targets - delta))) / abs(delta)
        pred = np.array([rbf_eval(tr.training.network, x) for x in ts.inputs])
        n_err = float(np.max(np.abs(pred - delta))) / abs(delta)
        checks.append((t_err <= 0.05, f"delta={delta}: worst target error {100 * t_err:.2f}% <= 5%"))
        checks.append((n_err <= 0.05,
                       f"delta={delta}: worst trained-network error {100 * n_err:.2f}% <= 5%"))
    return checks


def c9_determinism():
    checks = []
    for name, sc in _scenarios().items():
        first, _ = _trace(name)
        same = format_csv(first) == format_csv(run(sc.sim))
        checks.append((same, f"{name}: repeated CSV byte-identical"))
    return checks


CRITERIA = [
    (1, "numerics suite", c1_numerics),
    (2, "dynamics oracle", c2_dynamics),
    (3, "controller equivalence", c3_equivalence),
    (4, "scenario A, discontinuous", c4_discontinuous),
    (5, "scenario B, smooth", c5_smooth),
    (6, "scenario C, intelligent", c6_intelligent),
    (7, "Lyapunov decrease", c7_lyapunov),
    (8, "RBF suite", c8_rbf),
    (9, "determinism", c9_determinism),
]


def evaluate(number, title, fn):
    checks = fn()
    ok = all(c for c, _ in checks)
    line = f"criterion {number} ({title}): {'PASS' if ok else 'FAIL'} | {_fmt(checks)}"
    return ok, line


@pytest.mark.parametrize("number, title, fn", CRITERIA, ids=[f"c{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, fn):
    ok, line = evaluate(number, title, fn)
    print(line)
    assert ok, line


def main() -> int:
    failed = 0
    for number, title, fn in CRITERIA:
        ok, line = evaluate(number, title, fn)
        failed += not ok
        print(line, flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
