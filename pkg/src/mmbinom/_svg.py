"""Minimal SVG line plots.

Hand-rolled so the plotting path has zero heavy dependencies; output is
deliberately plain (one axes box, ticks, polylines, optional shaded band,
legend).  SVG generation never feeds back into numeric outputs.
"""

from __future__ import annotations

import math

__all__ = ["svg_plot"]

_W, _H = 800.0, 600.0
_ML, _MR, _MT, _MB = 72.0, 24.0, 44.0, 56.0

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#ff7f0e")


def _ticks(lo: float, hi: float, n: int = 6):
    """Round tick locations covering [lo, hi]."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * mag
        if step >= raw:
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def svg_plot(path, title, xlabel, ylabel, series, band=None):
    """Write a line plot as an SVG file.

    series: iterable of (x, y, label) with equal-length sequences.
    band:   optional (x, lo, hi, label) shaded region drawn underneath.
    """
    series = [(list(map(float, x)), list(map(float, y)), lab) for x, y, lab in series]
    xs, ys = [], []
    for x, y, _ in series:
        xs.extend(x)
        ys.extend(v for v in y if math.isfinite(v))
    if band is not None:
        bx, blo, bhi, _ = band
        xs.extend(map(float, bx))
        ys.extend(map(float, blo))
        ys.extend(map(float, bhi))
    if not xs or not ys:
        raise ValueError("svg_plot needs at least one finite point")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0
    pad = 0.04 * (y1 - y0)
    y0 -= pad
    y1 += pad

    iw = _W - _ML - _MR
    ih = _H - _MT - _MB

    def px(x):
        return _ML + (x - x0) / (x1 - x0) * iw

    def py(y):
        return _MT + (y1 - y) / (y1 - y0) * ih

    e = []
    e.append(f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_W:g} {_H:g}" '
             f'font-family="sans-serif" font-size="13">')
    e.append(f'<rect width="{_W:g}" height="{_H:g}" fill="white"/>')
    e.append(f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" font-size="16">{title}</text>')

    for t in _ticks(x0, x1):
        X = px(t)
        e.append(f'<line x1="{X:.2f}" y1="{_MT:.2f}" x2="{X:.2f}" y2="{_MT + ih:.2f}" '
                 f'stroke="#dddddd" stroke-width="1"/>')
        e.append(f'<text x="{X:.2f}" y="{_MT + ih + 18:.2f}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(y0, y1):
        Y = py(t)
        e.append(f'<line x1="{_ML:.2f}" y1="{Y:.2f}" x2="{_ML + iw:.2f}" y2="{Y:.2f}" '
                 f'stroke="#dddddd" stroke-width="1"/>')
        e.append(f'<text x="{_ML - 6:.2f}" y="{Y + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')

    if band is not None:
        bx, blo, bhi, blab = band
        pts = [f"{px(float(x)):.2f},{py(float(v)):.2f}" for x, v in zip(bx, bhi)]
        pts += [f"{px(float(x)):.2f},{py(float(v)):.2f}" for x, v in zip(reversed(list(bx)), reversed(list(blo)))]
        e.append(f'<polygon points="{" ".join(pts)}" fill="#1f77b4" fill-opacity="0.18" stroke="none"/>')

    for i, (x, y, _) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{px(u):.2f},{py(v):.2f}" for u, v in zip(x, y) if math.isfinite(v))
        e.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')

    e.append(f'<rect x="{_ML:.2f}" y="{_MT:.2f}" width="{iw:.2f}" height="{ih:.2f}" '
             f'fill="none" stroke="black" stroke-width="1"/>')
    e.append(f'<text x="{_ML + iw / 2:.1f}" y="{_H - 14:.1f}" text-anchor="middle">{xlabel}</text>')
    e.append(f'<text x="20" y="{_MT + ih / 2:.1f}" text-anchor="middle" '
             f'transform="rotate(-90 20 {_MT + ih / 2:.1f})">{ylabel}</text>')

    ly = _MT + 14.0
    entries = [(lab, _COLORS[i % len(_COLORS)]) for i, (_, _, lab) in enumerate(series) if lab]
    if band is not None and band[3]:
        entries.append((band[3], "#1f77b4"))
    for lab, color in entries:
        e.append(f'<line x1="{_ML + iw - 150:.1f}" y1="{ly:.1f}" x2="{_ML + iw - 126:.1f}" '
                 f'y2="{ly:.1f}" stroke="{color}" stroke-width="2"/>')
        e.append(f'<text x="{_ML + iw - 120:.1f}" y="{ly + 4:.1f}">{lab}</text>')
        ly += 18.0

    e.append("</svg>")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(e) + "\n")
