"""Minimal self-contained SVG line/marker plotter for parameter-plane diagrams.

No third-party plotting dependency: the functions here emit SVG 1.1 text
directly.  Output is deterministic — same input, byte-identical file.

Curve-kind styling (the documented legend):

=====================  ============  =======  ==========  ===================
kind                   short label   color    line style  marker (point sets)
=====================  ============  =======  ==========  ===================
FOLD                   T             #1f77b4  solid       —
HOPF                   H             #d62728  solid       —
NEUTRAL_SADDLE         NS            #7f7f7f  dash 6,4    —
DOUBLE_CYCLE           C             #2ca02c  solid       —
SADDLE_LOOP            L             #9467bd  dash 2,3    —
CUSP                   TT            #000000  —           diamond
DOUBLE_ZERO            HT            #ff7f0e  —           square
DEGENERATE_HOPF        GH            #d62728  —           circle
CUSP_HOPF              HTT           #000000  —           cross
DEGENERATE_DOUBLE_ZERO DTT           #ff7f0e  —           cross
=====================  ============  =======  ==========  ===================
"""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

from .bifcurves import BifCurve, BifKind

__all__ = ["KIND_STYLE", "SvgCanvas", "render_curves"]


# (color, dash-pattern-or-None, marker-shape-or-None, legend text)
KIND_STYLE = {
    BifKind.FOLD: ("#1f77b4", None, None, "fold of equilibria"),
    BifKind.HOPF: ("#d62728", None, None, "Hopf"),
    BifKind.NEUTRAL_SADDLE: ("#7f7f7f", "6,4", None, "neutral saddle"),
    BifKind.DOUBLE_CYCLE: ("#2ca02c", None, None, "fold of cycles"),
    BifKind.SADDLE_LOOP: ("#9467bd", "2,3", None, "saddle loop"),
    BifKind.CUSP: ("#000000", None, "diamond", "cusp of folds"),
    BifKind.DOUBLE_ZERO: ("#ff7f0e", None, "square", "double-zero point"),
    BifKind.DEGENERATE_HOPF: ("#d62728", None, "circle", "degenerate Hopf"),
    BifKind.CUSP_HOPF: ("#000000", None, "cross", "cusp-Hopf point"),
    BifKind.DEGENERATE_DOUBLE_ZERO: (
        "#ff7f0e", None, "cross", "degenerate double-zero"),
}


def _fmt(v: float) -> str:
    """Fixed two-decimal pixel coordinates (deterministic output)."""
    return f"{v:.2f}"


def _tick_values(lo: float, hi: float, n: int = 5) -> list[float]:
    """Round tick positions covering [lo, hi]."""
    if not (hi > lo):
        return [lo]
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * mag
        if step >= raw * 0.999:
            break
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + step * 1e-6:
        ticks.append(0.0 if abs(t) < step * 1e-6 else t)
        t += step
    return ticks


class SvgCanvas:
    """Accumulates SVG elements over a data-coordinate viewport."""

    def __init__(
        self,
        xlim: tuple[float, float],
        ylim: tuple[float, float],
        width: int = 720,
        height: int = 540,
        margin: tuple[int, int, int, int] = (50, 20, 62, 46),
    ):
        if not (xlim[1] > xlim[0]) or not (ylim[1] > ylim[0]):
            raise ValueError("degenerate axis limits")
        self.xlim = (float(xlim[0]), float(xlim[1]))
        self.ylim = (float(ylim[0]), float(ylim[1]))
        self.width = width
        self.height = height
        # left, right, bottom, top page margins around the plot box
        self.ml, self.mr, self.mb, self.mt = margin
        self._body: list[str] = []

    # -- coordinate mapping -------------------------------------------
    def px(self, x: float) -> float:
        x0, x1 = self.xlim
        return self.ml + (x - x0) / (x1 - x0) * (self.width - self.ml - self.mr)

    def py(self, y: float) -> float:
        y0, y1 = self.ylim
        return (self.height - self.mb
                - (y - y0) / (y1 - y0) * (self.height - self.mb - self.mt))

    def _inside(self, x: float, y: float) -> bool:
        return (self.xlim[0] <= x <= self.xlim[1]
                and self.ylim[0] <= y <= self.ylim[1])

    # -- elements -----------------------------------------------------
    def polyline(
        self,
        points: Sequence[tuple[float, float]],
        color: str,
        stroke_width: float = 1.6,
        dash: Optional[str] = None,
    ) -> None:
        """A data-coordinate polyline, split where it leaves the viewport."""
        runs: list[list[tuple[float, float]]] = [[]]
        for x, y in points:
            if self._inside(x, y) and math.isfinite(x) and math.isfinite(y):
                runs[-1].append((x, y))
            elif runs[-1]:
                runs.append([])
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        for run in runs:
            if len(run) < 2:
                continue
            coords = " ".join(
                f"{_fmt(self.px(x))},{_fmt(self.py(y))}" for x, y in run)
            self._body.append(
                f'<polyline fill="none" stroke="{color}"'
                f' stroke-width="{stroke_width}"{dash_attr}'
                f' points="{coords}"/>')

    def marker(self, x: float, y: float, shape: str, color: str,
               size: float = 5.0) -> None:
        if not self._inside(x, y):
            return
        cx, cy, r = self.px(x), self.py(y), size
        if shape == "circle":
            self._body.append(
                f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r * 0.8)}"'
                f' fill="{color}" stroke="#000000" stroke-width="0.8"/>')
        elif shape == "square":
            self._body.append(
                f'<rect x="{_fmt(cx - r * 0.7)}" y="{_fmt(cy - r * 0.7)}"'
                f' width="{_fmt(r * 1.4)}" height="{_fmt(r * 1.4)}"'
                f' fill="{color}" stroke="#000000" stroke-width="0.8"/>')
        elif shape == "diamond":
            pts = " ".join(
                f"{_fmt(cx + dx * r)},{_fmt(cy + dy * r)}"
                for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0)))
            self._body.append(
                f'<polygon points="{pts}" fill="{color}"'
                f' stroke="#000000" stroke-width="0.8"/>')
        elif shape == "cross":
            for dx1, dy1, dx2, dy2 in ((-1, -1, 1, 1), (-1, 1, 1, -1)):
                self._body.append(
                    f'<line x1="{_fmt(cx + dx1 * r * 0.8)}"'
                    f' y1="{_fmt(cy + dy1 * r * 0.8)}"'
                    f' x2="{_fmt(cx + dx2 * r * 0.8)}"'
                    f' y2="{_fmt(cy + dy2 * r * 0.8)}"'
                    f' stroke="{color}" stroke-width="2.0"/>')
        else:
            raise ValueError(f"unknown marker shape: {shape}")

    def text(self, px: float, py: float, s: str, size: int = 12,
             anchor: str = "start", color: str = "#000000") -> None:
        self._body.append(
            f'<text x="{_fmt(px)}" y="{_fmt(py)}" font-family="sans-serif"'
            f' font-size="{size}" text-anchor="{anchor}"'
            f' fill="{color}">{s}</text>')

    # -- chrome -------------------------------------------------------
    def axes(self, xlabel: str = "a", ylabel: str = "beta") -> None:
        x0, x1 = self.ml, self.width - self.mr
        y0, y1 = self.height - self.mb, self.mt
        self._body.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y1)}" width="{_fmt(x1 - x0)}"'
            f' height="{_fmt(y0 - y1)}" fill="none" stroke="#333333"'
            f' stroke-width="1"/>')
        for t in _tick_values(*self.xlim):
            tx = self.px(t)
            self._body.append(
                f'<line x1="{_fmt(tx)}" y1="{_fmt(y0)}" x2="{_fmt(tx)}"'
                f' y2="{_fmt(y0 + 5)}" stroke="#333333" stroke-width="1"/>')
            self.text(tx, y0 + 18, f"{t:g}", size=11, anchor="middle")
        for t in _tick_values(*self.ylim):
            ty = self.py(t)
            self._body.append(
                f'<line x1="{_fmt(x0 - 5)}" y1="{_fmt(ty)}" x2="{_fmt(x0)}"'
                f' y2="{_fmt(ty)}" stroke="#333333" stroke-width="1"/>')
            self.text(x0 - 8, ty + 4, f"{t:g}", size=11, anchor="end")
        self.text((x0 + x1) / 2, self.height - 8, xlabel,
                  size=13, anchor="middle")
        self._body.append(
            f'<text x="14" y="{_fmt((y0 + y1) / 2)}" font-family="sans-serif"'
            f' font-size="13" text-anchor="middle" fill="#000000"'
            f' transform="rotate(-90 14 {_fmt((y0 + y1) / 2)})">'
            f'{ylabel}</text>')

    def legend(self, entries: Sequence[tuple[str, str, Optional[str],
                                             Optional[str], str]]) -> None:
        """entries: (color, dash, marker, short label, long label)."""
        if not entries:
            return
        lh = 18
        w = 210
        h = lh * len(entries) + 10
        x = self.width - self.mr - w - 8
        y = self.mt + 8
        self._body.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{w}" height="{h}"'
            f' fill="#ffffff" fill-opacity="0.85" stroke="#999999"'
            f' stroke-width="0.8"/>')
        for i, (color, dash, marker, short, long_name) in enumerate(entries):
            cy = y + 8 + lh * i + lh / 2
            if marker is None:
                dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
                self._body.append(
                    f'<line x1="{_fmt(x + 8)}" y1="{_fmt(cy)}"'
                    f' x2="{_fmt(x + 36)}" y2="{_fmt(cy)}" stroke="{color}"'
                    f' stroke-width="2"{dash_attr}/>')
            else:
                save = self._body
                self._body = []
                # draw the marker glyph at an arbitrary data point, then
                # re-anchor its pixel coordinates into the legend box
                self.marker(
                    self.xlim[0] + 1e-9 * (self.xlim[1] - self.xlim[0]),
                    self.ylim[0] + 1e-9 * (self.ylim[1] - self.ylim[0]),
                    marker, color, size=5.0)
                glyph = self._body
                self._body = save
                dx = (x + 22) - self.px(self.xlim[0])
                dy = cy - self.py(self.ylim[0])
                self._body.append(
                    f'<g transform="translate({_fmt(dx)} {_fmt(dy)})">'
                    + "".join(glyph) + "</g>")
            self.text(x + 44, cy + 4, f"{short} — {long_name}", size=11)

    def render(self, title: Optional[str] = None) -> str:
        head = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}"'
            f' height="{self.height}"'
            f' viewBox="0 0 {self.width} {self.height}">',
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}"'
            f' fill="#ffffff"/>',
        ]
        parts = head + self._body
        if title:
            parts.append(
                f'<text x="{_fmt(self.width / 2)}" y="18"'
                f' font-family="sans-serif" font-size="14"'
                f' text-anchor="middle" fill="#000000">{title}</text>')
        parts.append("</svg>")
        return "\n".join(parts) + "\n"


def render_curves(
    curves: Iterable[BifCurve],
    window: tuple[tuple[float, float], tuple[float, float]],
    title: Optional[str] = None,
    xlabel: str = "a",
    ylabel: str = "beta",
) -> str:
    """A complete SVG document showing bifurcation curves in one window.

    Multi-point curves draw as styled polylines; single-point (codimension
    >= 2) curves draw as markers.  A legend lists every kind present.
    """
    canvas = SvgCanvas(window[0], window[1])
    canvas.axes(xlabel=xlabel, ylabel=ylabel)
    present: list[BifKind] = []
    curve_list = list(curves)
    # polylines under markers
    for curve in curve_list:
        color, dash, marker, _ = KIND_STYLE[curve.kind]
        if len(curve.points) >= 2 and marker is None:
            canvas.polyline(curve.ab_polyline(), color, dash=dash)
            if curve.kind not in present:
                present.append(curve.kind)
    for curve in curve_list:
        color, dash, marker, _ = KIND_STYLE[curve.kind]
        if marker is not None:
            for q in curve.points:
                canvas.marker(q.params.a, q.params.beta, marker, color)
            if curve.points and curve.kind not in present:
                present.append(curve.kind)
    canvas.legend([
        (KIND_STYLE[k][0], KIND_STYLE[k][1], KIND_STYLE[k][2],
         k.value, KIND_STYLE[k][3])
        for k in present
    ])
    return canvas.render(title=title)
