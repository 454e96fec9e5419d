"""Command-line front end: ``run``, ``compare`` and ``validate``."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path


from .config import Scenario, load_config
from .errors import ConfigError, ShapeError, SimulationAborted, UnderactError
from .rbf import save_network
from .sim import Metrics, format_csv, metrics, read_csv, run
from .svg import trace_plots

EXIT_OK, EXIT_SIM, EXIT_USAGE = 0, 1, 2
THREADS_ENV = "UNDERACT_SMC_THREADS"


def bundled_config() -> Path:
    return Path(str(resources.files("underact_smc") / "data" / "paper.toml"))


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return max(1, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _fmt_metrics(m: Metrics) -> list[str]:
    return [
        f"  RMS(s)                 {m.rms_s:.6g}",
        f"  RMS(theta)             {math.degrees(m.rms_theta):.6g} deg",
        f"  peak |theta|           {math.degrees(m.peak_theta):.6g} deg",
        f"  peak |x|               {m.peak_x:.6g} m",
        f"  sign reversals of u    {m.reversal_rate:.6g} /s",
        f"  max V                  {m.max_V:.6g}",
        f"  Lyapunov violations    {m.lyapunov_violations} ({m.lyapunov_violation_fraction:.3g})",
    ]


def scenario_report(sc: Scenario, trace) -> tuple[str, dict]:
    cfg = sc.sim
    data: dict = {"scenario": sc.name, "mode": cfg.controller.mode.value,
                  "complete": trace.complete, "samples": int(trace.t.size)}
    lines = [f"scenario {sc.name} ({cfg.controller.mode.value})",
             f"kappa {cfg.controller.kappa}, phi {cfg.controller.phi}, "
             f"{trace.t.size} control samples"]
    if not trace.complete:
        lines.append("run ABORTED, metrics cover the partial trace")
    duration = trace.t.size / cfg.control_rate
    windows = [("final", min(sc.report_window, duration)),
               ("settled", duration - sc.settle_time)]
    if trace.training is not None:
        windows.append(("post_training", duration - trace.training.t))
    for label, w in windows:
        if w * cfg.control_rate < 3:
            continue
        m = metrics(trace, w, cfg.reference)
        data[label] = m.as_dict()
        lines.append(f"{label} window ({m.window:.4g} s):")
        lines.extend(_fmt_metrics(m))
    if trace.training is not None:
        tr = trace.training
        data["training"] = {"t": tr.t, "samples": tr.n_samples, "E": tr.error,
                            "target_rms": tr.target_rms, "centers": tr.network.size}
        lines.append(f"training at t={tr.t:.4g} s: {tr.n_samples} samples, "
                     f"{tr.network.size} centers, E = {tr.error:.6g}, "
                     f"target RMS {tr.target_rms:.6g}")
        if "post_training" in data:
            lines.append(f"post-training RMS(s) = {data['post_training']['rms_s']:.6g}")
    return "\n".join(lines) + "\n", data


def _run_one(sc: Scenario, out_dir: Path) -> tuple[int, str]:
    status, err = EXIT_OK, ""
    try:
        trace = run(sc.sim)
    except SimulationAborted as exc:
        trace, status = exc.trace, EXIT_SIM
        err = f"{sc.name}: {exc}\n"
    stem = out_dir / sc.name
    _atomic_write(stem.with_suffix(".csv"), format_csv(trace))
    if trace.t.size >= 3:
        text, data = scenario_report(sc, trace)
        _atomic_write(Path(f"{stem}.metrics.txt"), text)
        _atomic_write(Path(f"{stem}.metrics.json"), json.dumps(data, indent=2, sort_keys=True) + "\n")
        if sc.plots:
            for key, svg in trace_plots(trace).items():
                _atomic_write(Path(f"{stem}_{key}.svg"), svg)
    else:
        text = f"scenario {sc.name}: too few samples for metrics\n"
    if trace.training is not None:
        tmp = Path(f"{stem}.rbf.txt.tmp")
        save_network(trace.training.network, tmp)
        os.replace(tmp, f"{stem}.rbf.txt")
    return status, err + text


def cmd_run(args) -> int:
    scenarios = load_config(args.config)
    if args.scenario:
        missing = [n for n in args.scenario if n not in scenarios]
        if missing:
            raise ConfigError(f"no scenario named {', '.join(map(repr, missing))} "
                              f"(available: {', '.join(scenarios)})", path=args.config)
        chosen = [scenarios[n] for n in args.scenario]
    else:
        chosen = list(scenarios.values())
    workers = min(thread_cap(), len(chosen))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda sc: _run_one(sc, out_dir), chosen))
    status = EXIT_OK
    for code, text in results:
        sys.stdout.write(text)
        status = max(status, code)
    return status


def rms_ratio(a: float, b: float) -> str:
    if a == 0 and b == 0:
        return "undefined (0/0)"
    if b == 0:
        return "inf"
    return f"{a / b:.6g}"


def cmd_compare(args) -> int:
    tables = [read_csv(p) for p in args.csv]
    ms = [metrics(t, args.window) for t in tables]
    names = [Path(p).name for p in args.csv]
    width = max(12, *(len(n) for n in names))
    rows = [("RMS(s)", lambda m: f"{m.rms_s:.6g}"),
            ("RMS(theta) deg", lambda m: f"{math.degrees(m.rms_theta):.6g}"),
            ("peak|theta| deg", lambda m: f"{math.degrees(m.peak_theta):.6g}"),
            ("peak|x| m", lambda m: f"{m.peak_x:.6g}"),
            ("reversals /s", lambda m: f"{m.reversal_rate:.6g}"),
            ("max V", lambda m: f"{m.max_V:.6g}")]
    print(f"final {args.window:g} s window")
    print(f"{'':16}" + "".join(f"{n:>{width + 2}}" for n in names))
    for label, fn in rows:
        print(f"{label:16}" + "".join(f"{fn(m):>{width + 2}}" for m in ms))
    for name, m in zip(names[1:], ms[1:]):
        print(f"RMS(s) ratio {names[0]} / {name}: {rms_ratio(ms[0].rms_s, m.rms_s)}")
    return EXIT_OK


def cmd_validate(args) -> int:
    scenarios = load_config(args.config)
    for sc in scenarios.values():
        c = sc.sim
        print(f"{sc.name}: {c.controller.mode.value}, {c.duration:g} s, "
              f"kappa {c.controller.kappa}, phi {c.controller.phi}")
    print(f"ok: {len(scenarios)} scenario(s)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="underact-smc",
                                 description="Sliding-mode control of an uncertain cart-pole.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run scenarios from a config file")
    r.add_argument("config", help="scenario TOML ('paper' for the bundled file)")
    r.add_argument("--scenario", action="append", metavar="NAME",
                   help="scenario to run (repeatable; default: all)")
    r.add_argument("--out", default="out", help="output directory (default: out)")
    r.set_defaults(func=cmd_run)
    c = sub.add_parser("compare", help="compare trace CSVs")
    c.add_argument("csv", nargs="+")
    c.add_argument("--window", type=float, default=10.0, help="final window in seconds")
    c.set_defaults(func=cmd_compare)
    v = sub.add_parser("validate", help="check a config file")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "config", None) == "paper":
        args.config = str(bundled_config())
    if args.command == "compare" and len(args.csv) < 2:
        ap.error("compare needs at least two CSV files")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ShapeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnderactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIM
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
