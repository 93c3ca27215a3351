"""Minimal hand-written SVG: line plots for 1-D runs, heatmaps for 2-D runs."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _header(width: int, height: int) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]


def _text(x: float, y: float, s: str, anchor: str = "middle", extra: str = "") -> str:
    return f'<text x="{x:.1f}" y="{y:.1f}" text-anchor="{anchor}"{extra}>{escape(s)}</text>'


def _span(lo: float, hi: float) -> tuple[float, float]:
    if hi - lo < 1e-12:
        return lo - 0.5, hi + 0.5
    return lo, hi


def line_plot(x, series: dict[str, np.ndarray], title: str = "", width: int = 640, height: int = 420) -> str:
    """One polyline per named series over shared x values."""
    x = np.asarray(x, dtype=float)
    left, right, top, bottom = 70, 20, 40, 50
    pw, ph = width - left - right, height - top - bottom
    ys = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    x0, x1 = _span(float(x.min()), float(x.max()))
    y0, y1 = _span(float(ys.min()), float(ys.max()))
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = _header(width, height)
    out.append(_text(width / 2, 22, title))
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in np.linspace(x0, x1, 5):
        out.append(_text(sx(t), top + ph + 18, f"{t:.3g}"))
    for t in np.linspace(y0, y1, 5):
        out.append(_text(left - 6, sy(t) + 4, f"{t:.3g}", anchor="end"))
    for k, (name, v) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, np.asarray(v, dtype=float)))
        dash = ' stroke-dasharray="6,4"' if k else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"{dash}/>')
        ly = top + 16 + 16 * k
        out.append(f'<line x1="{left + 10}" y1="{ly - 4}" x2="{left + 34}" y2="{ly - 4}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(_text(left + 40, ly, name, anchor="start"))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _color(t: float) -> str:
    # blue -> white -> red
    t = min(max(t, 0.0), 1.0)
    if t < 0.5:
        s = t / 0.5
        r, g, b = int(59 + s * 196), int(76 + s * 179), 255
    else:
        s = (t - 0.5) / 0.5
        r, g, b = 255, int(255 - s * 179), int(255 - s * 196)
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmaps(xs, ys, panels: dict[str, np.ndarray], title: str = "", cell: int = 8) -> str:
    """Side-by-side heatmaps on a shared color scale; panels are (nx, ny) arrays."""
    xs, ys = np.asarray(xs), np.asarray(ys)
    nx, ny = len(xs), len(ys)
    lo = min(float(np.min(v)) for v in panels.values())
    hi = max(float(np.max(v)) for v in panels.values())
    lo, hi = _span(lo, hi)
    gap, top, left = 30, 50, 20
    pw, ph = nx * cell, ny * cell
    width = left + len(panels) * (pw + gap) + 60
    height = top + ph + 40
    out = _header(width, height)
    out.append(_text(width / 2, 20, title))
    for p, (name, U) in enumerate(panels.items()):
        U = np.asarray(U, dtype=float).reshape(nx, ny)
        ox = left + p * (pw + gap)
        out.append(_text(ox + pw / 2, top - 8, name))
        for i in range(nx):
            for j in range(ny):
                # y increases upward
                y = top + (ny - 1 - j) * cell
                c = _color((U[i, j] - lo) / (hi - lo))
                out.append(f'<rect x="{ox + i * cell}" y="{y}" width="{cell}" height="{cell}" fill="{c}"/>')
        out.append(_text(ox + pw / 2, top + ph + 16, f"x in [{xs[0]:.3g}, {xs[-1]:.3g}]"))
    bx = left + len(panels) * (pw + gap)
    for k in range(20):
        y = top + ph - (k + 1) * ph / 20
        out.append(f'<rect x="{bx}" y="{y:.2f}" width="14" height="{ph / 20 + 0.5:.2f}" fill="{_color((k + 0.5) / 20)}"/>')
    out.append(_text(bx + 18, top + 4, f"{hi:.3g}", anchor="start"))
    out.append(_text(bx + 18, top + ph, f"{lo:.3g}", anchor="start"))
    out.append("</svg>")
    return "\n".join(out) + "\n"
