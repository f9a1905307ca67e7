"""Minimal deterministic SVG line plots, emitted as raw path elements.

No plotting dependency: artifacts must be reproducible byte-for-byte per
seed, so every coordinate is formatted with fixed precision and nothing
depends on library versions or font metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_WIDTH, _HEIGHT = 800, 500
_ML, _MR, _MT, _MB = 78, 24, 46, 60
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
_MAX_POINTS = 1500


@dataclass(frozen=True)
class Series:
    """One labelled curve; dashed=True renders a dash pattern (overlays)."""

    label: str
    x: np.ndarray
    y: np.ndarray
    dashed: bool = False
    markers: bool = False

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.size != y.size or x.size == 0:
            raise DomainError("series needs matching non-empty x and y")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


def _nice_step(span: float, target: int) -> float:
    if span <= 0.0 or not math.isfinite(span):
        return 1.0
    raw = span / max(target, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if mag * mult >= raw:
            return mag * mult
    return mag * 10.0


def _ticks(lo: float, hi: float, target: int = 5):
    if hi <= lo:
        pad = 1.0 if lo == 0.0 else abs(lo) * 0.5
        lo, hi = lo - pad, hi + pad
    step = _nice_step(hi - lo, target)
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + step * 1e-9:
        out.append(0.0 if abs(v) < step * 1e-9 else v)
        v += step
    return out or [lo, hi]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _decimate(arr: np.ndarray) -> np.ndarray:
    if arr.size <= _MAX_POINTS:
        return arr
    idx = np.linspace(0, arr.size - 1, _MAX_POINTS).round().astype(int)
    return arr[idx]


def line_plot(series, title: str, xlabel: str, ylabel: str,
              comment: str = "") -> str:
    """Render labelled curves into a standalone SVG document string.

    Args:
        series: iterable of Series.
        title, xlabel, ylabel: text annotations.
        comment: machine-readable provenance line embedded as an XML
            comment (config hash etc.).
    """
    series = list(series)
    if not series:
        raise DomainError("line_plot needs at least one series")
    finite = [(s.x[np.isfinite(s.x) & np.isfinite(s.y)],
               s.y[np.isfinite(s.x) & np.isfinite(s.y)]) for s in series]
    xs = np.concatenate([f[0] for f in finite])
    ys = np.concatenate([f[1] for f in finite])
    if xs.size == 0:
        raise DomainError("line_plot got no finite points")
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        pad = 0.5 if y_lo == 0.0 else abs(y_lo) * 0.1
        y_lo, y_hi = y_lo - pad, y_hi + pad
    y_pad = 0.04 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    pw = _WIDTH - _ML - _MR
    ph = _HEIGHT - _MT - _MB

    def px(v):
        return _ML + (v - x_lo) / (x_hi - x_lo) * pw

    def py(v):
        return _MT + ph - (v - y_lo) / (y_hi - y_lo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
    ]
    if comment:
        out.append(f"<!-- {comment} -->")
    out.append(f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>')
    out.append(
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" '
        'stroke="#333333" stroke-width="1"/>')

    for tx in _ticks(x_lo, x_hi):
        x = px(tx)
        out.append(f'<line x1="{x:.2f}" y1="{_MT + ph}" x2="{x:.2f}" '
                   f'y2="{_MT + ph + 6}" stroke="#333333" stroke-width="1"/>')
        out.append(f'<line x1="{x:.2f}" y1="{_MT}" x2="{x:.2f}" y2="{_MT + ph}" '
                   'stroke="#dddddd" stroke-width="0.5"/>')
        out.append(f'<text x="{x:.2f}" y="{_MT + ph + 22}" font-size="13" '
                   f'text-anchor="middle" font-family="sans-serif">{_fmt(tx)}</text>')
    for ty in _ticks(y_lo, y_hi):
        y = py(ty)
        out.append(f'<line x1="{_ML - 6}" y1="{y:.2f}" x2="{_ML}" y2="{y:.2f}" '
                   'stroke="#333333" stroke-width="1"/>')
        out.append(f'<line x1="{_ML}" y1="{y:.2f}" x2="{_ML + pw}" y2="{y:.2f}" '
                   'stroke="#dddddd" stroke-width="0.5"/>')
        out.append(f'<text x="{_ML - 10}" y="{y + 4:.2f}" font-size="13" '
                   f'text-anchor="end" font-family="sans-serif">{_fmt(ty)}</text>')

    for k, s in enumerate(series):
        fx, fy = finite[k]
        fx, fy = _decimate(fx), _decimate(fy)
        color = _COLORS[k % len(_COLORS)]
        dash = ' stroke-dasharray="7,5"' if s.dashed else ""
        if fx.size >= 2:
            pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(fx, fy))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                       f'stroke-width="1.6"{dash}/>')
        if s.markers or fx.size < 2:
            for a, b in zip(fx, fy):
                out.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" '
                           f'fill="{color}"/>')

    lx, ly = _ML + pw - 12, _MT + 14
    for k, s in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        y = ly + 19 * k
        dash = ' stroke-dasharray="7,5"' if s.dashed else ""
        out.append(f'<line x1="{lx - 150}" y1="{y}" x2="{lx - 118}" y2="{y}" '
                   f'stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx - 110}" y="{y + 4}" font-size="13" '
                   f'font-family="sans-serif">{s.label}</text>')

    out.append(f'<text x="{_WIDTH / 2:.0f}" y="26" font-size="17" text-anchor="middle" '
               f'font-family="sans-serif">{title}</text>')
    out.append(f'<text x="{_ML + pw / 2:.0f}" y="{_HEIGHT - 14}" font-size="14" '
               f'text-anchor="middle" font-family="sans-serif">{xlabel}</text>')
    out.append(f'<text x="22" y="{_MT + ph / 2:.0f}" font-size="14" text-anchor="middle" '
               f'font-family="sans-serif" transform="rotate(-90 22 {_MT + ph / 2:.0f})">'
               f'{ylabel}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
