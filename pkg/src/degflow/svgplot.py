"""Minimal static SVG line plots, written directly without a plotting dependency.

Each data series becomes one polyline whose vertex count equals the number of
data points; single-point series get a visible dot.  Output is deterministic
for identical inputs.
"""

from __future__ import annotations

import numpy as np

__all__ = ["line_plot"]

_W, _H = 800, 500
_ML, _MR, _MT, _MB = 70, 20, 40, 50
_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _range(vals: np.ndarray) -> tuple[float, float]:
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if not np.isfinite(lo) or not np.isfinite(hi):
        lo, hi = 0.0, 1.0
    if hi - lo < 1e-300:
        pad = max(abs(hi), 1.0) * 0.05
        return lo - pad, hi + pad
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


def line_plot(path, series, title: str = "", xlabel: str = "", ylabel: str = "") -> None:
    """Write an SVG with one polyline per (x, y, label) triple in `series`."""
    series = [(np.asarray(x, dtype=float), np.asarray(y, dtype=float), str(lab)) for x, y, lab in series]
    if not series:
        raise ValueError("line_plot needs at least one series")
    x_lo, x_hi = _range(np.concatenate([s[0] for s in series]))
    y_lo, y_hi = _range(np.concatenate([s[1] for s in series]))

    def sx(v):
        return _ML + (v - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def sy(v):
        return _H - _MB - (v - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" height="{_H - _MT - _MB}" '
        'fill="none" stroke="#888" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_W / 2:.1f}" y="{_MT - 14}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{title}</text>'
        )
    for frac in np.linspace(0.0, 1.0, 5):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        px, py = sx(xv), sy(yv)
        parts.append(
            f'<line x1="{px:.1f}" y1="{_H - _MB}" x2="{px:.1f}" y2="{_H - _MB + 5}" stroke="#444"/>'
            f'<text x="{px:.1f}" y="{_H - _MB + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt(xv)}</text>'
        )
        parts.append(
            f'<line x1="{_ML - 5}" y1="{py:.1f}" x2="{_ML}" y2="{py:.1f}" stroke="#444"/>'
            f'<text x="{_ML - 8}" y="{py + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(yv)}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{xlabel}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="16" y="{_H / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="13" transform="rotate(-90 16 {_H / 2:.1f})">{ylabel}</text>'
        )
    for i, (x, y, label) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        if x.size == 1:
            parts.append(f'<circle cx="{sx(x[0]):.2f}" cy="{sy(y[0]):.2f}" r="3" fill="{color}"/>')
        if label:
            ly = _MT + 16 + 15 * i
            parts.append(
                f'<line x1="{_W - _MR - 120}" y1="{ly - 4}" x2="{_W - _MR - 95}" y2="{ly - 4}" '
                f'stroke="{color}" stroke-width="2"/>'
                f'<text x="{_W - _MR - 90}" y="{ly}" font-family="sans-serif" '
                f'font-size="11">{label}</text>'
            )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
