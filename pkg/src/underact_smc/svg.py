"""Dependency-free SVG line plots for trace inspection."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 360
MARGIN = dict(left=70, right=20, top=36, bottom=50)
MAX_POINTS = 4000


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def _bounds(v: np.ndarray) -> tuple[float, float]:
    lo, hi = float(np.min(v)), float(np.max(v))
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def line_plot(x, y, title: str, xlabel: str, ylabel: str) -> str:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size > MAX_POINTS:
        idx = np.linspace(0, x.size - 1, MAX_POINTS).astype(int)
        x, y = x[idx], y[idx]
    x0, x1 = _bounds(x) if x.size else (0.0, 1.0)
    y0, y1 = _bounds(y) if y.size else (0.0, 1.0)
    L, R, T, B = MARGIN["left"], MARGIN["right"], MARGIN["top"], MARGIN["bottom"]
    pw, ph = WIDTH - L - R, HEIGHT - T - B
    sx = lambda v: L + (v - x0) / (x1 - x0) * pw
    sy = lambda v: T + (y1 - v) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<rect x="{L}" y="{T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for v in _ticks(x0, x1):
        px = sx(v)
        out.append(f'<line x1="{px:.1f}" y1="{T + ph}" x2="{px:.1f}" y2="{T + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.1f}" y="{T + ph + 18}" text-anchor="middle">{v:.4g}</text>')
    for v in _ticks(y0, y1):
        py = sy(v)
        out.append(f'<line x1="{L - 5}" y1="{py:.1f}" x2="{L}" y2="{py:.1f}" stroke="black"/>')
        out.append(f'<line x1="{L}" y1="{py:.1f}" x2="{L + pw}" y2="{py:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{L - 8}" y="{py + 4:.1f}" text-anchor="end">{v:.4g}</text>')
    out.append(f'<text x="{L + pw / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{T + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {T + ph / 2})">{escape(ylabel)}</text>')
    if x.size:
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="#1f4e9c" stroke-width="1" points="{pts}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def trace_plots(trace) -> dict[str, str]:
    """Time series of x, theta, u and the two phase portraits, keyed by file stem."""
    t = trace.t
    th = np.degrees(trace.theta)
    return {
        "x": line_plot(t, trace.x, "Cart position", "t [s]", "x [m]"),
        "theta": line_plot(t, th, "Pole angle", "t [s]", "theta [deg]"),
        "u": line_plot(t, trace.u, "Control action", "t [s]", "u"),
        "phase_x": line_plot(trace.x, trace.xdot, "Cart phase portrait", "x [m]", "xdot [m/s]"),
        "phase_theta": line_plot(th, np.degrees(trace.thetadot), "Pole phase portrait",
                                 "theta [deg]", "thetadot [deg/s]"),
    }
