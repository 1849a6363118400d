"""Minimal SVG charts: labelled heatmaps and line charts with error bars."""

from __future__ import annotations

import math
from typing import Mapping, Optional, Sequence
from xml.sax.saxutils import escape

PALETTE = ("#1b6ca8", "#d1495b", "#2e933c", "#edae49", "#6a4c93", "#00798c")


def _color(t: float) -> str:
    """Light yellow (0) to dark blue (1)."""
    t = 0.0 if math.isnan(t) else min(max(t, 0.0), 1.0)
    lo, hi = (255, 247, 188), (8, 48, 107)
    r, g, b = (round(a + (c - a) * t) for a, c in zip(lo, hi))
    return f"#{r:02x}{g:02x}{b:02x}"


def _text(x, y, s, size=11, anchor="middle", extra="") -> str:
    return f'<text x="{x:.1f}" y="{y:.1f}" font-size="{size}" text-anchor="{anchor}" {extra}>{escape(str(s))}</text>'


def _document(width: int, height: int, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">'
    )
    return "\n".join([head, f'<rect width="{width}" height="{height}" fill="white"/>', *body, "</svg>"]) + "\n"


def heatmap(
    values: Sequence[Sequence[float]],
    row_labels: Sequence[str],
    col_labels: Sequence[str],
    title: str = "",
    vmin: Optional[float] = None,
    vmax: Optional[float] = None,
    cell: int = 46,
) -> str:
    """Heatmap with the value printed in each cell; NaN cells are grey."""
    flat = [v for row in values for v in row if not math.isnan(v)]
    lo = min(flat) if vmin is None and flat else (vmin or 0.0)
    hi = max(flat) if vmax is None and flat else (vmax if vmax is not None else 1.0)
    span = hi - lo or 1.0
    left, top = 90, 40 if title else 16
    width = left + cell * len(col_labels) + 16
    height = top + cell * len(row_labels) + 40
    body = [_text(width / 2, 22, title, 14)] if title else []
    for i, row in enumerate(values):
        y = top + i * cell
        body.append(_text(left - 6, y + cell / 2 + 4, row_labels[i], anchor="end"))
        for j, v in enumerate(row):
            x = left + j * cell
            fill = "#cccccc" if math.isnan(v) else _color((v - lo) / span)
            body.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" stroke="white"/>')
            if not math.isnan(v):
                dark = (v - lo) / span > 0.55
                body.append(_text(x + cell / 2, y + cell / 2 + 4, f"{v:.2f}", 10, extra=f'fill="{"white" if dark else "black"}"'))
    for j, label in enumerate(col_labels):
        body.append(_text(left + j * cell + cell / 2, top + cell * len(row_labels) + 16, label, 10))
    return _document(width, height, body)


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out, t = [], start
    while t <= hi + 1e-9:
        out.append(round(t, 10))
        t += step
    return out


def line_chart(
    series: Mapping[str, Sequence[tuple[float, float, float]]],
    x_label: str = "",
    y_label: str = "",
    title: str = "",
    reference: Optional[float] = None,
    width: int = 560,
    height: int = 360,
) -> str:
    """Lines from ``name -> [(x, y, sd), ...]``; ``sd`` draws an error bar.

    ``reference`` draws a dashed horizontal line.
    """
    pts = [(x, y, s) for data in series.values() for x, y, s in data if not math.isnan(y)]
    xs = [p[0] for p in pts] or [0.0, 1.0]
    ys = [p[1] - (p[2] or 0) for p in pts] + [p[1] + (p[2] or 0) for p in pts]
    if reference is not None:
        ys.append(reference)
    ys = ys or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    pad = 0.05 * (y1 - y0 or 1.0)
    y0, y1 = y0 - pad, y1 + pad
    left, right, top, bottom = 60, 130, 36, 46
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + (1 - (y - y0) / (y1 - y0)) * ph

    body = [_text(width / 2, 20, title, 14)] if title else []
    body.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>')
    for t in _ticks(x0, x1):
        body.append(_text(sx(t), top + ph + 16, f"{t:g}", 10))
    for t in _ticks(y0, y1):
        body.append(_text(left - 6, sy(t) + 4, f"{t:g}", 10, anchor="end"))
        body.append(f'<line x1="{left}" x2="{left + pw}" y1="{sy(t):.1f}" y2="{sy(t):.1f}" stroke="#eee"/>')
    if reference is not None:
        body.append(
            f'<line x1="{left}" x2="{left + pw}" y1="{sy(reference):.1f}" y2="{sy(reference):.1f}" '
            'stroke="#888" stroke-dasharray="4 3"/>'
        )
    body.append(_text(left + pw / 2, height - 8, x_label, 11))
    body.append(_text(14, top + ph / 2, y_label, 11, extra=f'transform="rotate(-90 14 {top + ph / 2:.1f})"'))
    for k, (name, data) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        good = [(x, y, s) for x, y, s in data if not math.isnan(y)]
        if len(good) > 1:
            d = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y, _ in good)
            body.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y, s in good:
            body.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" fill="{color}"/>')
            if s:
                body.append(
                    f'<line x1="{sx(x):.1f}" x2="{sx(x):.1f}" y1="{sy(y - s):.1f}" y2="{sy(y + s):.1f}" stroke="{color}"/>'
                )
        ly = top + 14 + 18 * k
        body.append(f'<line x1="{left + pw + 10}" x2="{left + pw + 28}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        body.append(_text(left + pw + 32, ly + 4, name, 10, anchor="start"))
    return _document(width, height, body)
