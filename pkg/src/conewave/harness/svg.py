"""Self-contained SVG line charts.

Output is plain text with fixed number formatting, so identical data give
byte-identical files.  NaN values break a line into separate pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b")
WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=72, right=20, top=36, bottom=52)


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    markers: bool = True
    dashed: bool = False
    color: str | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape:
            raise ValueError("series x and y must have the same shape")


@dataclass
class Chart:
    title: str
    xlabel: str
    ylabel: str
    series: list[Series] = field(default_factory=list)
    logy: bool = False
    hlines: list[tuple[float, str]] = field(default_factory=list)
    vlines: list[tuple[float, str]] = field(default_factory=list)


def _num(v: float) -> str:
    return f"{v:.2f}"


def nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    """Round tick positions covering ``[lo, hi]``."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi <= lo:
        hi = lo + (abs(lo) if lo else 1.0)
    raw = (hi - lo) / max(count - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 0.5 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


def _label(v: float) -> str:
    if v == 0:
        return "0"
    a = abs(v)
    if a >= 1e4 or a < 1e-3:
        return f"{v:.0e}"
    return f"{v:.6g}"


def render(chart: Chart) -> str:
    """SVG document for ``chart``."""
    xs = [s.x[np.isfinite(s.x) & np.isfinite(s.y)] for s in chart.series]
    ys = [s.y[np.isfinite(s.x) & np.isfinite(s.y)] for s in chart.series]
    if chart.logy:
        ys = [y[y > 0] for y in ys]
    allx = np.concatenate(xs + [np.array([v for v, _ in chart.vlines])]) if xs else np.array([])
    ally = np.concatenate(ys + [np.array([v for v, _ in chart.hlines])]) if ys else np.array([])
    if chart.logy:
        ally = np.log10(ally[ally > 0])
    x0, x1 = (float(allx.min()), float(allx.max())) if allx.size else (0.0, 1.0)
    y0, y1 = (float(ally.min()), float(ally.max())) if ally.size else (0.0, 1.0)
    if chart.logy:
        y0, y1 = math.floor(y0), math.ceil(y1)
    xt = nice_ticks(x0, x1)
    yt = list(range(int(y0), int(y1) + 1)) if chart.logy else nice_ticks(y0, y1)
    if xt:
        x0, x1 = min(x0, xt[0]), max(x1, xt[-1])
    if yt:
        y0, y1 = min(y0, yt[0]), max(y1, yt[-1])
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    left, right, top, bottom = MARGIN["left"], WIDTH - MARGIN["right"], MARGIN["top"], HEIGHT - MARGIN["bottom"]

    def px(x):
        return left + (x - x0) / (x1 - x0) * (right - left)

    def py(y):
        v = math.log10(y) if chart.logy else y
        return bottom - (v - y0) / (y1 - y0) * (bottom - top)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(chart.title)}</text>',
        f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" fill="none" stroke="#444"/>',
    ]
    for v in xt:
        X = px(v)
        out.append(f'<line x1="{_num(X)}" y1="{bottom}" x2="{_num(X)}" y2="{top}" stroke="#ddd"/>')
        out.append(f'<text x="{_num(X)}" y="{bottom + 16}" text-anchor="middle">{_label(v)}</text>')
    for v in yt:
        Y = bottom - (v - y0) / (y1 - y0) * (bottom - top)
        text = f"1e{v}" if chart.logy else _label(v)
        out.append(f'<line x1="{left}" y1="{_num(Y)}" x2="{right}" y2="{_num(Y)}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{_num(Y + 4)}" text-anchor="end">{text}</text>')
    out.append(f'<text x="{(left + right) / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(chart.xlabel)}</text>')
    out.append(
        f'<text x="16" y="{(top + bottom) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(top + bottom) / 2:.1f})">{escape(chart.ylabel)}</text>'
    )
    for v, label in chart.hlines:
        if chart.logy and v <= 0:
            continue
        Y = py(v)
        out.append(f'<line x1="{left}" y1="{_num(Y)}" x2="{right}" y2="{_num(Y)}" stroke="#888" stroke-dasharray="4 3"/>')
        out.append(f'<text x="{right - 4}" y="{_num(Y - 4)}" text-anchor="end" fill="#555">{escape(label)}</text>')
    for v, label in chart.vlines:
        X = px(v)
        out.append(f'<line x1="{_num(X)}" y1="{top}" x2="{_num(X)}" y2="{bottom}" stroke="#888" stroke-dasharray="4 3"/>')
        out.append(f'<text x="{_num(X + 4)}" y="{top + 14}" fill="#555">{escape(label)}</text>')

    for idx, s in enumerate(chart.series):
        color = s.color or PALETTE[idx % len(PALETTE)]
        ok = np.isfinite(s.x) & np.isfinite(s.y)
        if chart.logy:
            ok &= s.y > 0
        dash = ' stroke-dasharray="6 4"' if s.dashed else ""
        # contiguous runs of valid points become separate polylines
        run: list[str] = []
        pieces = []
        for good, x, y in zip(ok, s.x, s.y):
            if good:
                run.append(f"{_num(px(x))},{_num(py(y))}")
            elif run:
                pieces.append(run)
                run = []
        if run:
            pieces.append(run)
        for piece in pieces:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{" ".join(piece)}"/>')
        if s.markers:
            for good, x, y in zip(ok, s.x, s.y):
                if good:
                    out.append(f'<circle cx="{_num(px(x))}" cy="{_num(py(y))}" r="2.5" fill="{color}"/>')
        if s.label:
            ly = top + 16 + 16 * idx
            out.append(f'<line x1="{left + 10}" y1="{ly - 4}" x2="{left + 30}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{left + 36}" y="{ly}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def line_chart(series, title: str, xlabel: str, ylabel: str, **kw) -> str:
    """Shorthand for ``render(Chart(...))``."""
    return render(Chart(title, xlabel, ylabel, list(series), **kw))
