"""Scenario files: TOML with a ``[defaults]`` table and one ``[scenario.NAME]`` per run.

Every key a scenario may carry is listed in ``SCHEMA``; anything else is
rejected with the line it appears on.
"""
from __future__ import annotations

import copy
import math
import re
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .cartpole import CartPoleParams, DeadZone
from .dynamics import GeneralizedState
from .errors import ConfigError
from .rbf import load_network
from .sim import RbfSettings, SimConfig
from .smc import ControllerConfig, Mode, Reference, SurfaceParams

NUM, INT, BOOL, STR = "number", "integer", "boolean", "string"

SCHEMA: dict = {
    "mode": STR,
    "plant_rate": INT,
    "control_rate": INT,
    "duration": NUM,
    "training_horizon": NUM,
    "seed": INT,
    "cart_force": NUM,
    "sliding_disturbance": NUM,
    "report_window": NUM,
    "settle_time": NUM,
    "plots": BOOL,
    "plant": {"cart_mass": NUM, "bob_mass": NUM, "pole_length": NUM, "gravity": NUM,
              "cart_mass_factor": NUM, "bob_mass_factor": NUM},
    "dead_zone": {"half_width": NUM},
    "surface": {"alpha_act": NUM, "alpha_unact": NUM, "lambda_act": NUM,
                "lambda_unact": NUM, "length_scale": NUM},
    "controller": {"kappa": NUM, "phi": NUM},
    "initial": {"x": NUM, "xdot": NUM, "theta_deg": NUM, "thetadot_deg": NUM},
    "reference": {"x": NUM, "theta_deg": NUM},
    "rbf": {"per_dim": INT, "pad": NUM, "width_factor": NUM, "rcond": NUM,
            "in_layer_only": BOOL, "network": STR},
}

_HEADER = re.compile(r"^\s*\[\s*([^\[\]]+?)\s*\]\s*(#.*)?$")
_KEY = re.compile(r"^\s*([A-Za-z0-9_\-\.\"' ]+?)\s*=")


@dataclass(frozen=True)
class Scenario:
    name: str
    sim: SimConfig
    report_window: float
    settle_time: float
    plots: bool


def _split_key(raw: str) -> list[str]:
    return [p.strip().strip('"').strip("'") for p in raw.split(".")]


def _line_index(text: str) -> dict[tuple, int]:
    """Map dotted key paths (and table headers) to 1-based line numbers."""
    where: dict[tuple, int] = {}
    table: tuple = ()
    for no, line in enumerate(text.splitlines(), start=1):
        m = _HEADER.match(line)
        if m:
            table = tuple(_split_key(m.group(1)))
            where.setdefault(table, no)
            continue
        m = _KEY.match(line)
        if m:
            where.setdefault(table + tuple(_split_key(m.group(1))), no)
    return where


class _Ctx:
    def __init__(self, path, text):
        self.path = path
        self.lines = _line_index(text)

    def line(self, key: tuple):
        while key:
            if key in self.lines:
                return self.lines[key]
            # implicit tables such as [a] in [a.b] only appear as prefixes
            below = [no for k, no in self.lines.items() if k[:len(key)] == key]
            if below:
                return min(below)
            key = key[:-1]
        return None

    def error(self, msg, key: tuple):
        return ConfigError(msg, line=self.line(key), path=self.path)


def _type_ok(v, kind) -> bool:
    if kind == NUM:
        return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
    if kind == INT:
        return isinstance(v, int) and not isinstance(v, bool)
    if kind == BOOL:
        return isinstance(v, bool)
    return isinstance(v, str)


def _check(ctx: _Ctx, data: dict, schema: dict, prefix: tuple, origin: dict):
    for key, value in data.items():
        at = origin.get(prefix + (key,), prefix + (key,))
        if key not in schema:
            where = ".".join(prefix[2:] if prefix[:1] == ("scenario",) else prefix[1:])
            scope = f" in [{where}]" if where else ""
            raise ctx.error(f"unknown key '{key}'{scope}", at)
        kind = schema[key]
        if isinstance(kind, dict):
            if not isinstance(value, dict):
                raise ctx.error(f"'{key}' must be a table", at)
            _check(ctx, value, kind, prefix + (key,), origin)
        elif not _type_ok(value, kind):
            raise ctx.error(f"'{key}' must be a finite {kind}, got {value!r}", at)


def _merge(base: dict, over: dict, base_path: tuple, over_path: tuple, origin: dict) -> dict:
    """Deep merge; ``origin`` records which file location each merged key came from."""
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value, base_path + (key,), over_path + (key,), origin)
        else:
            out[key] = copy.deepcopy(value)
        origin[base_path + (key,)] = over_path + (key,)
    return out


def _build(ctx: _Ctx, name: str, d: dict, origin: dict, base_dir: Path) -> Scenario:
    here = ("scenario", name)

    def where(*key):
        return origin.get(here + key, here + key)

    def section(key, fn):
        try:
            return fn(d.get(key, {}))
        except (ValueError, TypeError) as exc:
            named = [k for k in SCHEMA[key] if k in str(exc) and k in d.get(key, {})]
            at = where(key, named[0]) if named else where(key)
            raise ctx.error(f"[{key}]: {exc}", at) from None

    if "mode" not in d:
        raise ctx.error(f"scenario '{name}' has no 'mode'", here)
    try:
        mode = Mode(d["mode"])
    except ValueError:
        choices = ", ".join(m.value for m in Mode)
        raise ctx.error(f"mode must be one of {choices}, got {d['mode']!r}", where("mode")) from None

    def plants(p):
        nominal = CartPoleParams(p.get("cart_mass", 0.4), p.get("bob_mass", 0.14),
                                 p.get("pole_length", 0.215), p.get("gravity", 9.81))
        fc, fb = p.get("cart_mass_factor", 1.3), p.get("bob_mass_factor", 1.3)
        return nominal, nominal.scaled(fc, fb)

    nominal, plant = section("plant", plants)
    dz = section("dead_zone", lambda t: DeadZone(t.get("half_width", 0.01)))
    surface = section("surface", lambda t: SurfaceParams(
        t.get("alpha_act", 0.02), t.get("alpha_unact", 1.0), t.get("lambda_act", 0.005),
        t.get("lambda_unact", 2.5), t.get("length_scale", nominal.pole_length)))
    ctl = section("controller", lambda t: ControllerConfig(
        t.get("kappa", 5.0), t.get("phi", 0.2), mode))
    init = section("initial", lambda t: GeneralizedState.from_parts(
        [t.get("x", 0.0)], [math.radians(t.get("theta_deg", -40.0))],
        [t.get("xdot", 0.0)], [math.radians(t.get("thetadot_deg", 0.0))]))
    ref = section("reference", lambda t: Reference.setpoint(
        t.get("x", 0.0), math.radians(t.get("theta_deg", 0.0))))

    def rbf(t):
        return RbfSettings(t.get("per_dim", 3), t.get("pad", 0.1), t.get("width_factor", 1.0),
                           t.get("rcond", 1e-4), t.get("in_layer_only", True))
    rbf_settings = section("rbf", rbf)
    pretrained = None
    net_path = d.get("rbf", {}).get("network")
    if net_path is not None:
        full = (base_dir / net_path)
        try:
            pretrained = load_network(full)
        except (OSError, ValueError) as exc:
            raise ctx.error(f"cannot load network: {exc}", where("rbf", "network")) from None

    try:
        sim = SimConfig(
            plant_rate=d.get("plant_rate", 1000), control_rate=d.get("control_rate", 200),
            duration=float(d.get("duration", 30.0)),
            training_horizon=float(d.get("training_horizon", 10.0)),
            plant_params=plant, controller_params=nominal, dead_zone=dz, surface=surface,
            controller=ctl, initial_state=init, reference=ref, seed=d.get("seed", 0),
            cart_force=float(d.get("cart_force", 0.0)),
            sliding_disturbance=float(d.get("sliding_disturbance", 0.0)),
            rbf=rbf_settings, pretrained=pretrained)
    except ValueError as exc:
        raise ctx.error(str(exc), here) from None

    report_window = float(d.get("report_window", 10.0))
    settle_time = float(d.get("settle_time", 15.0))
    if not 0 < report_window <= sim.duration:
        raise ctx.error("report_window must lie in (0, duration]", where("report_window"))
    if not 0 <= settle_time < sim.duration:
        raise ctx.error("settle_time must lie in [0, duration)", where("settle_time"))
    return Scenario(name, sim, report_window, settle_time, bool(d.get("plots", True)))


def parse_config(text: str, path="<config>", base_dir: Path | None = None) -> dict[str, Scenario]:
    ctx = _Ctx(path, text)
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"TOML syntax error: {exc}", line=int(m.group(1)) if m else None,
                          path=path) from None
    for key in doc:
        if key not in ("defaults", "scenario"):
            raise ctx.error(f"unknown top-level key '{key}' (expected [defaults] or [scenario.NAME])",
                            (key,))
    defaults = doc.get("defaults", {})
    if not isinstance(defaults, dict):
        raise ctx.error("'defaults' must be a table", ("defaults",))
    _check(ctx, defaults, SCHEMA, ("defaults",), {})
    scenarios = doc.get("scenario", {})
    if not isinstance(scenarios, dict) or not scenarios:
        raise ctx.error("no [scenario.NAME] tables found", ("scenario",))
    out = {}
    for name, body in scenarios.items():
        if not isinstance(body, dict):
            raise ctx.error(f"scenario '{name}' must be a table", ("scenario", name))
        if not re.fullmatch(r"[A-Za-z0-9_\-]+", name):
            raise ctx.error(f"scenario name '{name}' may only use letters, digits, '_' and '-'",
                            ("scenario", name))
        _check(ctx, body, SCHEMA, ("scenario", name), {})
        origin: dict = {}
        merged = _merge({}, defaults, ("scenario", name), ("defaults",), origin)
        merged = _merge(merged, body, ("scenario", name), ("scenario", name), origin)
        out[name] = _build(ctx, name, merged, origin, base_dir or Path("."))
    return out


def load_config(path) -> dict[str, Scenario]:
    p = Path(path)
    try:
        text = p.read_text()
    except FileNotFoundError:
        raise ConfigError("file not found", path=str(path)) from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read file: {exc}", path=str(path)) from None
    return parse_config(text, str(path), p.parent)
