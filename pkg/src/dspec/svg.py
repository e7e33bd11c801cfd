# svg.py
"""Minimal polyline SVG writer for norm traces and scan curves.

One fixed 800 x 600 canvas, one polyline per series, optional log axes.
The first line of every emitted file is a comment carrying the config
hash, per the artifact contract.  Coordinates are formatted with %.12g so
identical inputs yield identical bytes.
"""

from __future__ import annotations

import numpy as np

WIDTH, HEIGHT = 800, 600
MARGIN = 60
PALETTE = ("#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#d68910", "#16a085")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _axis_ticks(lo: float, hi: float, log: bool):
    if log:
        lo_e, hi_e = int(np.floor(lo)), int(np.ceil(hi))
        return [float(e) for e in range(lo_e, hi_e + 1)]
    span = hi - lo or 1.0
    step = 10.0 ** np.floor(np.log10(span / 4))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mult) <= 6:
            step *= mult
            break
    first = np.ceil(lo / step) * step
    return list(np.arange(first, hi + 0.5 * step, step))


def polyline_svg(series, title: str, config_hash: str,
                 log_x: bool = False, log_y: bool = False,
                 x_label: str = "", y_label: str = "") -> str:
    """Render ``series = [(label, xs, ys), ...]`` to an SVG string."""
    pts = []
    for _, xs, ys in series:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        good = np.isfinite(xs) & np.isfinite(ys)
        if log_x:
            good &= xs > 0
        if log_y:
            good &= ys > 0
        xs, ys = xs[good], ys[good]
        if log_x:
            xs = np.log10(xs)
        if log_y:
            ys = np.log10(ys)
        pts.append((xs, ys))
    all_x = np.concatenate([p[0] for p in pts]) if pts else np.array([0.0, 1.0])
    all_y = np.concatenate([p[1] for p in pts]) if pts else np.array([0.0, 1.0])
    if all_x.size == 0:
        all_x = np.array([0.0, 1.0])
    if all_y.size == 0:
        all_y = np.array([0.0, 1.0])
    x_lo, x_hi = float(np.min(all_x)), float(np.max(all_x))
    y_lo, y_hi = float(np.min(all_y)), float(np.max(all_y))
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def px(x):
        return MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2 * MARGIN)

    def py(y):
        return HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2 * MARGIN)

    out = [f"<!-- config {config_hash} -->"]
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">'
    )
    out.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    out.append(
        f'<text x="{WIDTH // 2}" y="28" text-anchor="middle" '
        f'font-family="monospace" font-size="16">{title}</text>'
    )
    ax = (f'M {_fmt(MARGIN)} {_fmt(MARGIN)} L {_fmt(MARGIN)} {_fmt(HEIGHT - MARGIN)} '
          f'L {_fmt(WIDTH - MARGIN)} {_fmt(HEIGHT - MARGIN)}')
    out.append(f'<path d="{ax}" stroke="black" fill="none"/>')
    for t in _axis_ticks(x_lo, x_hi, log_x):
        if not x_lo <= t <= x_hi:
            continue
        lab = f"1e{int(t)}" if log_x else _fmt(round(t, 10))
        out.append(
            f'<text x="{_fmt(px(t))}" y="{HEIGHT - MARGIN + 18}" text-anchor="middle" '
            f'font-family="monospace" font-size="11">{lab}</text>'
        )
    for t in _axis_ticks(y_lo, y_hi, log_y):
        if not y_lo <= t <= y_hi:
            continue
        lab = f"1e{int(t)}" if log_y else _fmt(round(t, 10))
        out.append(
            f'<text x="{MARGIN - 6}" y="{_fmt(py(t) + 4)}" text-anchor="end" '
            f'font-family="monospace" font-size="11">{lab}</text>'
        )
    if x_label:
        out.append(
            f'<text x="{WIDTH // 2}" y="{HEIGHT - 12}" text-anchor="middle" '
            f'font-family="monospace" font-size="12">{x_label}</text>'
        )
    if y_label:
        out.append(
            f'<text x="16" y="{HEIGHT // 2}" font-family="monospace" font-size="12" '
            f'transform="rotate(-90 16 {HEIGHT // 2})" text-anchor="middle">{y_label}</text>'
        )
    for i, ((label, _, _), (xs, ys)) in enumerate(zip(series, pts)):
        color = PALETTE[i % len(PALETTE)]
        if xs.size:
            coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))
            out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                       f'stroke-width="1.5"/>')
        out.append(
            f'<text x="{WIDTH - MARGIN + 4}" y="{MARGIN + 16 * i + 12}" '
            f'font-family="monospace" font-size="11" fill="{color}">{label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, series, title, config_hash, **kw) -> None:
    with open(path, "w") as f:
        f.write(polyline_svg(series, title, config_hash, **kw))
