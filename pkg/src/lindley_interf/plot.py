"""Bare-bones SVG line plots of z_bar0 against the outcome axis."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .paradox import OUTCOME_AXES, ScanTable

_W, _H, _M = 640, 420, 56
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _ticks(lo: float, hi: float, n: int = 6) -> np.ndarray:
    return np.linspace(lo, hi, n)


def render_svg(table: ScanTable, title: str = "") -> str:
    """One polyline per combination of the non-outcome axes."""
    rows = table.rows()
    xname = next(n for n in table.axes if n in OUTCOME_AXES)
    others = [n for n in table.axes if n != xname]
    xs = np.array([r[xname] for r in rows], dtype=float)
    x0, x1 = float(xs.min()), float(xs.max())
    if x1 == x0:
        x1 = x0 + 1.0

    def sx(x):
        return _M + (x - x0) / (x1 - x0) * (_W - 2 * _M)

    def sy(y):
        return _H - _M - y * (_H - 2 * _M)

    series: dict = {}
    for r in rows:
        key = tuple(r[n] for n in others)
        series.setdefault(key, []).append((r[xname], r["z_bar0"]))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_M}" y1="{_H - _M}" x2="{_W - _M}" y2="{_H - _M}" stroke="black"/>',
        f'<line x1="{_M}" y1="{_M}" x2="{_M}" y2="{_H - _M}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        x = sx(t)
        parts.append(f'<line x1="{x:.2f}" y1="{_H - _M}" x2="{x:.2f}" y2="{_H - _M + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.2f}" y="{_H - _M + 18}" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(0.0, 1.0):
        y = sy(t)
        parts.append(f'<line x1="{_M - 5}" y1="{y:.2f}" x2="{_M}" y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{_M - 8}" y="{y + 4:.2f}" text-anchor="end">{t:.1f}</text>')
    parts.append(f'<text x="{_W / 2}" y="{_H - 14}" text-anchor="middle">{escape(xname)}</text>')
    parts.append(f'<text x="16" y="{_H / 2}" transform="rotate(-90 16 {_H / 2})" text-anchor="middle">z_bar0</text>')
    if title:
        parts.append(f'<text x="{_W / 2}" y="20" text-anchor="middle">{escape(title)}</text>')

    for i, (key, pts) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        pts = sorted(pts)
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        label = ", ".join(f"{n}={v:g}" for n, v in zip(others, key)) or "z_bar0"
        ly = _M + 14 * i
        parts.append(f'<text x="{_W - _M + 4}" y="{ly}" fill="{color}" font-size="9">{escape(label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
