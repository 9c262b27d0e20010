"""
Minimal standalone SVG 1.1 plots with byte-deterministic output.

Coordinates are written with two decimals and the canvas size, fonts and
palette are fixed, so equal inputs always give equal files.
"""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["polar_svg", "line_plot_svg", "write_svg", "PALETTE"]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

_FONT = 'font-family="DejaVu Sans, Arial, sans-serif" font-size="12"'


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _header(width: int, height: int) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]


def _text(x, y, s, anchor="middle", extra=""):
    return f'<text x="{_f(x)}" y="{_f(y)}" text-anchor="{anchor}" {_FONT}{extra}>{escape(str(s))}</text>'


def _path(points, color, closed=False, width=1.5, dash=None):
    if not points:
        return None
    d = "M" + " L".join(f"{_f(x)} {_f(y)}" for x, y in points) + (" Z" if closed else "")
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return f'<path d="{d}" fill="none" stroke="{color}" stroke-width="{width}"{dash_attr}/>'


def _nice_ticks(lo: float, hi: float, count: int = 5) -> np.ndarray:
    if not hi > lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = np.arange(start, hi + step * 1e-6, step)
    return np.round(ticks, 12)


def _tick_label(v: float) -> str:
    return f"{v:.4g}"


def polar_svg(angles_deg, curves, labels, title: str = "", size: int = 520,
              r_min: float | None = None, r_max: float | None = None) -> str:
    """
    Closed polar curves of values over ``[0, 180)`` degrees, mirrored to
    ``[180, 360)``.

    Angle 0 points up and angles grow clockwise, matching profile angles
    measured from the vertical image axis toward the horizontal one. The
    radius is a linear map of the value from ``r_min`` (centre) to ``r_max``
    (outer ring); non-finite values are skipped.
    """
    angles = np.asarray(angles_deg, dtype=np.float64)
    curves = [np.asarray(c, dtype=np.float64) for c in curves]
    finite = np.concatenate([c[np.isfinite(c)] for c in curves]) if curves else np.empty(0)
    if r_min is None:
        r_min = min(0.0, math.floor(finite.min() * 10) / 10) if len(finite) else 0.0
    if r_max is None:
        r_max = max(1.0, math.ceil(finite.max() * 10) / 10) if len(finite) else 1.0
    legend_h = 18 * len(curves)
    width, height = size, size + 40 + legend_h
    cx, cy = size / 2, size / 2 + 30
    radius = size / 2 - 40

    def scale(v):
        return radius * (v - r_min) / (r_max - r_min)

    out = _header(width, height)
    if title:
        out.append(_text(cx, 20, title))
    for t in _nice_ticks(r_min, r_max, 4):
        r = scale(t)
        if r <= 0:
            continue
        out.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(r)}" fill="none" stroke="#cccccc" stroke-width="0.8"/>')
        out.append(_text(cx + 3, cy - r - 2, _tick_label(t), anchor="start", extra=' fill="#666666"'))
    for a in range(0, 360, 30):
        ra = math.radians(a)
        x, y = cx + radius * math.sin(ra), cy - radius * math.cos(ra)
        out.append(f'<line x1="{_f(cx)}" y1="{_f(cy)}" x2="{_f(x)}" y2="{_f(y)}" stroke="#dddddd" stroke-width="0.8"/>')
        lx, ly = cx + (radius + 16) * math.sin(ra), cy - (radius + 16) * math.cos(ra) + 4
        out.append(_text(lx, ly, f"{a}°"))
    for i, c in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        pts = []
        for half in (0.0, 180.0):
            for a, v in zip(angles, c):
                if not np.isfinite(v):
                    continue
                r = scale(v)
                ra = math.radians(a + half)
                pts.append((cx + r * math.sin(ra), cy - r * math.cos(ra)))
        p = _path(pts, color, closed=True)
        if p:
            out.append(p)
    for i, lab in enumerate(labels):
        color = PALETTE[i % len(PALETTE)]
        y = size + 40 + 18 * i
        out.append(f'<line x1="20" y1="{_f(y - 4)}" x2="44" y2="{_f(y - 4)}" stroke="{color}" stroke-width="2"/>')
        out.append(_text(50, y, lab, anchor="start"))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def line_plot_svg(series, xlabel: str, ylabel: str, title: str = "", logx: bool = False,
                  logy: bool = False, hline: float | None = None, bands=None,
                  width: int = 640, height: int = 420) -> str:
    """
    Polylines for ``series = [(label, xs, ys), ...]``.

    Non-finite points (and non-positive ones on log axes) break a line.
    ``hline`` draws a dashed reference level; ``bands`` is an optional list of
    ``(xs, lo, hi)`` error bars drawn in the colour of the matching series.
    """
    def tr(v, log):
        v = np.asarray(v, dtype=np.float64)
        if not log:
            return v
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v > 0, np.log10(np.where(v > 0, v, 1.0)), np.nan)

    prepared = [(lab, tr(xs, logx), tr(ys, logy)) for lab, xs, ys in series]
    xs_all = np.concatenate([x[np.isfinite(x)] for _, x, _ in prepared] or [np.empty(0)])
    ys_all = [y[np.isfinite(y)] for _, _, y in prepared]
    if bands:
        ys_all += [tr(lo, logy) for _, lo, _ in bands] + [tr(hi, logy) for _, _, hi in bands]
    if hline is not None:
        ys_all.append(tr([hline], logy))
    ys_all = np.concatenate(ys_all or [np.empty(0)])
    ys_all = ys_all[np.isfinite(ys_all)]
    x0, x1 = (xs_all.min(), xs_all.max()) if len(xs_all) else (0.0, 1.0)
    y0, y1 = (ys_all.min(), ys_all.max()) if len(ys_all) else (0.0, 1.0)
    if x1 <= x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 <= y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    left, right, top = 70, 160, 40
    bottom = 50
    height = max(height, top + bottom + 16 * len(prepared) + 12)
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + pw * (x - x0) / (x1 - x0)

    def sy(y):
        return top + ph * (1 - (y - y0) / (y1 - y0))

    out = _header(width, height)
    if title:
        out.append(_text(left + pw / 2, 22, title))
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>')
    for t in _nice_ticks(x0, x1):
        if x0 <= t <= x1:
            out.append(f'<line x1="{_f(sx(t))}" y1="{_f(top + ph)}" x2="{_f(sx(t))}" y2="{_f(top + ph + 5)}" stroke="black"/>')
            out.append(_text(sx(t), top + ph + 18, _tick_label(10 ** t if logx else t)))
    for t in _nice_ticks(y0, y1):
        if y0 <= t <= y1:
            out.append(f'<line x1="{left - 5}" y1="{_f(sy(t))}" x2="{left}" y2="{_f(sy(t))}" stroke="black"/>')
            out.append(_text(left - 8, sy(t) + 4, _tick_label(10 ** t if logy else t), anchor="end"))
    out.append(_text(left + pw / 2, height - 10, xlabel))
    out.append(_text(16, top + ph / 2, ylabel, extra=f' transform="rotate(-90 16 {_f(top + ph / 2)})"'))
    if hline is not None:
        hv = tr([hline], logy)[0]
        if np.isfinite(hv):
            out.append(_path([(left, sy(hv)), (left + pw, sy(hv))], "#d62728", width=1.2, dash="6 4"))
    for i, (xs, lo, hi) in enumerate(bands or []):
        color = PALETTE[i % len(PALETTE)]
        for x, a, b in zip(tr(xs, logx), tr(lo, logy), tr(hi, logy)):
            if np.isfinite(x) and np.isfinite(a) and np.isfinite(b):
                out.append(f'<line x1="{_f(sx(x))}" y1="{_f(sy(a))}" x2="{_f(sx(x))}" y2="{_f(sy(b))}" '
                           f'stroke="{color}" stroke-width="1" opacity="0.6"/>')
    for i, (lab, xs, ys) in enumerate(prepared):
        color = PALETTE[i % len(PALETTE)]
        run = []
        for x, y in zip(xs, ys):
            if np.isfinite(x) and np.isfinite(y):
                run.append((sx(x), sy(y)))
            else:
                if len(run) > 1:
                    out.append(_path(run, color))
                run = []
        if len(run) > 1:
            out.append(_path(run, color))
        elif len(run) == 1:
            out.append(f'<circle cx="{_f(run[0][0])}" cy="{_f(run[0][1])}" r="2" fill="{color}"/>')
        ly = top + 12 + 16 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{_f(ly - 4)}" x2="{left + pw + 32}" y2="{_f(ly - 4)}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(_text(left + pw + 38, ly, lab, anchor="start"))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(text: str, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
