"""Minimal deterministic SVG log-log plots."""

from __future__ import annotations

import math
from html import escape

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 30, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _f(x: float) -> str:
    return f"{x:.2f}"


def loglog_svg(title: str, series: list[dict], notes: list[str] | None = None) -> str:
    """Plot series of (h, value) points on log-log axes.

    Each series is {'label', 'points': [(h, v), ...], 'dashed': bool}. Points
    with non-positive coordinates are skipped. An empty plot carries a
    'no data' marker.
    """
    pts = [(h, v) for s in series for h, v in s["points"] if h > 0 and v > 0]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
           f'<text x="{W // 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>']
    x0, x1, y0, y1 = LEFT, W - RIGHT, H - BOTTOM, TOP
    out.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
               'fill="none" stroke="black"/>')
    if not pts:
        out.append(f'<text x="{W // 2}" y="{H // 2}" text-anchor="middle" font-size="16">no data</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    lx = [math.log10(h) for h, _ in pts]
    ly = [math.log10(v) for _, v in pts]
    ax0, ax1 = math.floor(min(lx)), math.ceil(max(lx))
    ay0, ay1 = math.floor(min(ly)), math.ceil(max(ly))
    ax1 = max(ax1, ax0 + 1)
    ay1 = max(ay1, ay0 + 1)

    def px(h):
        return x0 + (math.log10(h) - ax0) / (ax1 - ax0) * (x1 - x0)

    def py(v):
        return y0 - (math.log10(v) - ay0) / (ay1 - ay0) * (y0 - y1)

    for k in range(ax0, ax1 + 1):
        out.append(f'<text x="{_f(px(10.0**k))}" y="{y0 + 18}" text-anchor="middle" '
                   f'font-size="11">1e{k}</text>')
    for k in range(ay0, ay1 + 1):
        out.append(f'<text x="{x0 - 6}" y="{_f(py(10.0**k) + 4)}" text-anchor="end" '
                   f'font-size="11">1e{k}</text>')
    out.append(f'<text x="{(x0 + x1) // 2}" y="{H - 10}" text-anchor="middle" font-size="12">h</text>')

    for idx, s in enumerate(series):
        color = COLORS[idx % len(COLORS)]
        good = [(h, v) for h, v in s["points"] if h > 0 and v > 0]
        if not good:
            continue
        path = " ".join(("M" if i == 0 else "L") + f"{_f(px(h))},{_f(py(v))}"
                        for i, (h, v) in enumerate(good))
        dash = ' stroke-dasharray="6,4"' if s.get("dashed") else ""
        out.append(f'<path d="{path}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        if not s.get("dashed"):
            for h, v in good:
                out.append(f'<circle cx="{_f(px(h))}" cy="{_f(py(v))}" r="3" fill="{color}"/>')
        out.append(f'<text x="{x0 + 8}" y="{y1 + 16 + 14 * idx}" font-size="11" '
                   f'fill="{color}">{escape(s["label"])}</text>')
    for j, note in enumerate(notes or []):
        out.append(f'<text x="{x1 - 8}" y="{y0 - 10 - 14 * j}" text-anchor="end" '
                   f'font-size="11">{escape(note)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
