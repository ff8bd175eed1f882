"""Minimal deterministic SVG bar and line charts for the analysis reports.

Hand-rolled on purpose: identical inputs must yield byte-identical files, so
no plotting library metadata or generated ids are acceptable.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

WIDTH = 760
HEIGHT = 380
MARGIN_LEFT = 70
MARGIN_RIGHT = 20
MARGIN_TOP = 40
MARGIN_BOTTOM = 90

PALETTE = ("#4878a8", "#e0884a", "#6aa66a", "#c8586c", "#8064a2", "#937860")


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
    ]


def _axes(max_value: float) -> tuple[list[str], float, float]:
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    top = max_value if max_value > 0 else 1.0
    parts = [
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" '
        f'y2="{MARGIN_TOP + plot_h}" stroke="#444"/>',
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP + plot_h}" x2="{MARGIN_LEFT + plot_w}" '
        f'y2="{MARGIN_TOP + plot_h}" stroke="#444"/>',
    ]
    for i in range(5):
        frac = i / 4
        y = MARGIN_TOP + plot_h * (1 - frac)
        parts.append(
            f'<text x="{MARGIN_LEFT - 6}" y="{_fmt(y + 4)}" text-anchor="end" font-size="10">'
            f"{top * frac:.3g}</text>"
        )
        if i:
            parts.append(
                f'<line x1="{MARGIN_LEFT}" y1="{_fmt(y)}" x2="{MARGIN_LEFT + plot_w}" '
                f'y2="{_fmt(y)}" stroke="#ddd" stroke-dasharray="3,3"/>'
            )
    return parts, plot_w, plot_h


def _legend(names: Sequence[str]) -> list[str]:
    parts = []
    x = MARGIN_LEFT
    for i, name in enumerate(names):
        color = PALETTE[i % len(PALETTE)]
        parts.append(f'<rect x="{x}" y="{HEIGHT - 16}" width="10" height="10" fill="{color}"/>')
        parts.append(
            f'<text x="{x + 14}" y="{HEIGHT - 7}" font-size="10">{escape(name)}</text>'
        )
        x += 14 + 7 * len(name) + 16
    return parts


def bar_chart(
    categories: Sequence[str],
    series: Mapping[str, Sequence[float]],
    title: str,
) -> str:
    """Grouped vertical bars; one group per category, one bar per series."""
    names = list(series)
    values = [v for row in series.values() for v in row]
    max_value = max(values, default=1.0)
    parts = _header(title)
    axis, plot_w, plot_h = _axes(max_value)
    parts.extend(axis)
    top = max_value if max_value > 0 else 1.0
    group_w = plot_w / max(1, len(categories))
    bar_w = group_w * 0.8 / max(1, len(names))
    for ci, category in enumerate(categories):
        gx = MARGIN_LEFT + group_w * ci + group_w * 0.1
        for si, name in enumerate(names):
            value = series[name][ci]
            h = plot_h * (value / top) if top else 0
            x = gx + bar_w * si
            y = MARGIN_TOP + plot_h - h
            parts.append(
                f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(bar_w)}" height="{_fmt(h)}" '
                f'fill="{PALETTE[si % len(PALETTE)]}"/>'
            )
        lx = gx + group_w * 0.4
        ly = MARGIN_TOP + plot_h + 12
        parts.append(
            f'<text x="{_fmt(lx)}" y="{ly}" font-size="10" text-anchor="end" '
            f'transform="rotate(-35 {_fmt(lx)} {ly})">{escape(str(category))}</text>'
        )
    if len(names) > 1:
        parts.extend(_legend(names))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def line_chart(
    x_labels: Sequence[str],
    series: Mapping[str, Sequence[float]],
    title: str,
) -> str:
    """One polyline per series over shared categorical x positions."""
    names = list(series)
    values = [v for row in series.values() for v in row]
    max_value = max(values, default=1.0)
    parts = _header(title)
    axis, plot_w, plot_h = _axes(max_value)
    parts.extend(axis)
    top = max_value if max_value > 0 else 1.0
    step = plot_w / max(1, len(x_labels) - 1) if len(x_labels) > 1 else 0
    for si, name in enumerate(names):
        points = []
        for xi, value in enumerate(series[name]):
            x = MARGIN_LEFT + (step * xi if len(x_labels) > 1 else plot_w / 2)
            y = MARGIN_TOP + plot_h * (1 - value / top)
            points.append(f"{_fmt(x)},{_fmt(y)}")
        parts.append(
            f'<polyline fill="none" stroke="{PALETTE[si % len(PALETTE)]}" stroke-width="2" '
            f'points="{" ".join(points)}"/>'
        )
    for xi, label in enumerate(x_labels):
        x = MARGIN_LEFT + (step * xi if len(x_labels) > 1 else plot_w / 2)
        y = MARGIN_TOP + plot_h + 12
        parts.append(
            f'<text x="{_fmt(x)}" y="{y}" font-size="10" text-anchor="end" '
            f'transform="rotate(-35 {_fmt(x)} {y})">{escape(str(label))}</text>'
        )
    parts.extend(_legend(names))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path: str | Path, svg: str) -> None:
    Path(path).write_text(svg, encoding="utf-8", newline="\n")
