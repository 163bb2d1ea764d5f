"""CSV and SVG emission for expectation-vs-K curves.

Values are quantized to 10 significant digits before they are written or
drawn, so an SVG re-rendered from a CSV written here is byte-identical to
the one rendered directly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

from .bias import BiasPoint


@dataclass(frozen=True)
class FigureSeries:
    x: tuple[int, ...]
    y: tuple[float, ...]
    reference_line: float | None = None

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("x and y differ in length")
        if any(b <= a for a, b in zip(self.x, self.x[1:])):
            raise ValueError("x must be strictly increasing")


def fmt(v: float) -> str:
    return f"{v:.10g}"


def quantize(v: float) -> float:
    return float(fmt(v))


def _ref(v: float) -> float:
    # coarser than the CSV columns so expectation - bias recovers it exactly
    return float(f"{v:.8g}")


def series_from_points(points: Sequence[BiasPoint]) -> FigureSeries:
    i2 = points[0].query.i2_true
    return FigureSeries(
        x=tuple(p.query.k for p in points),
        y=tuple(quantize(p.expectation) for p in points),
        reference_line=_ref(i2),
    )


def curve_csv(curves: Sequence[Sequence[BiasPoint]]) -> str:
    """CSV text: ``k,expectation,bias`` for one curve, long format with ``i2_true`` for several."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    grid = len(curves) > 1
    w.writerow((["i2_true"] if grid else []) + ["k", "expectation", "bias"])
    for points in curves:
        for p in points:
            row = [p.query.k, fmt(p.expectation), fmt(p.bias)]
            w.writerow(([fmt(p.query.i2_true)] if grid else []) + row)
    return buf.getvalue()


def read_curve_csv(text: str) -> list[FigureSeries]:
    rows = list(csv.DictReader(io.StringIO(text)))
    groups: dict[str, list[dict]] = {}
    for row in rows:
        groups.setdefault(row.get("i2_true", ""), []).append(row)
    out = []
    for key, grp in groups.items():
        e = [float(r["expectation"]) for r in grp]
        if key:
            ref = _ref(float(key))
        else:
            ref = _ref(e[0] - float(grp[0]["bias"]))
        out.append(FigureSeries(tuple(int(r["k"]) for r in grp), tuple(e), ref))
    return out


# -- SVG --------------------------------------------------------------------

PANEL_W, PANEL_H = 360, 260
MARGIN = dict(left=52, right=14, top=30, bottom=40)


def _nice_step(span, target=5):
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if raw <= m * mag:
            return m * mag
    return 10 * mag


def _ticks(lo, hi, target=5):
    step = _nice_step(hi - lo, target)
    start = math.ceil(lo / step - 1e-9)
    ticks = []
    i = start
    while i * step <= hi + 1e-9 * step:
        ticks.append(i * step)
        i += 1
    return ticks


def _label(v):
    return f"{v:.6g}"


def _panel(s: FigureSeries, ox: float, oy: float, title: str) -> list[str]:
    pw = PANEL_W - MARGIN["left"] - MARGIN["right"]
    ph = PANEL_H - MARGIN["top"] - MARGIN["bottom"]
    x0, x1 = s.x[0], s.x[-1]
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    top = max(list(s.y) + [s.reference_line or 0.0])
    y_step = _nice_step(top if top > 0 else 1.0)
    y1 = math.ceil(top / y_step) * y_step if top > 0 else 1.0
    if y1 <= top:
        y1 += y_step

    def px(x):
        return ox + MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def py(y):
        return oy + MARGIN["top"] + (1.0 - y / y1) * ph

    left, right = ox + MARGIN["left"], ox + MARGIN["left"] + pw
    base = oy + MARGIN["top"] + ph
    out = [f'<g class="panel">',
           f'<text x="{ox + PANEL_W / 2:.2f}" y="{oy + 18:.2f}" text-anchor="middle" '
           f'font-size="13">{title}</text>',
           f'<line x1="{left:.2f}" y1="{base:.2f}" x2="{right:.2f}" y2="{base:.2f}" stroke="black"/>',
           f'<line x1="{left:.2f}" y1="{oy + MARGIN["top"]:.2f}" x2="{left:.2f}" y2="{base:.2f}" '
           f'stroke="black"/>']
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{base:.2f}" x2="{px(t):.2f}" y2="{base + 4:.2f}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{base + 16:.2f}" text-anchor="middle" '
                   f'font-size="10">{_label(t)}</text>')
    for t in _ticks(0.0, y1):
        out.append(f'<line x1="{left - 4:.2f}" y1="{py(t):.2f}" x2="{left:.2f}" y2="{py(t):.2f}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{left - 6:.2f}" y="{py(t) + 3:.2f}" text-anchor="end" '
                   f'font-size="10">{_label(t)}</text>')
    out.append(f'<text x="{ox + MARGIN["left"] + pw / 2:.2f}" y="{base + 32:.2f}" '
               f'text-anchor="middle" font-size="11">K</text>')
    if s.reference_line is not None:
        r = py(s.reference_line)
        out.append(f'<line class="reference" x1="{left:.2f}" y1="{r:.2f}" x2="{right:.2f}" '
                   f'y2="{r:.2f}" stroke="gray" stroke-dasharray="2,3"/>')
    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(s.x, s.y))
    if len(s.x) == 1:
        out.append(f'<circle class="curve" cx="{px(s.x[0]):.2f}" cy="{py(s.y[0]):.2f}" r="2.5" '
                   f'fill="steelblue"/>')
    else:
        out.append(f'<polyline class="curve" points="{pts}" fill="none" stroke="steelblue" '
                   f'stroke-width="1.5"/>')
    out.append("</g>")
    return out


def render_svg(series: Sequence[FigureSeries]) -> str:
    """One panel per series, laid out in a near-square grid (3x3 for nine)."""
    n = len(series)
    cols = math.ceil(math.sqrt(n))
    rows = math.ceil(n / cols)
    width, height = cols * PANEL_W, rows * PANEL_H
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    for i, s in enumerate(series):
        title = f"E(Î₀²) when I² = {_label(s.reference_line or 0.0)}"
        lines.extend(_panel(s, (i % cols) * PANEL_W, (i // cols) * PANEL_H, title))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
