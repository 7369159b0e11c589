"""Self-contained SVG radar chart of per-category correctness fractions.

The chart is emitted as a fixed-precision string so the same report always
produces a byte-identical file.  One axis per category, one closed polygon per
pipeline; a fraction of zero places the vertex at the chart center.
"""

from __future__ import annotations

import math
from pathlib import Path

from .benchmark import BenchReport
from .errors import InputError
from .repair_loop import PIPELINES

WIDTH = 640
HEIGHT = 560
CENTER_X = 320.0
CENTER_Y = 260.0
RADIUS = 170.0

PIPELINE_COLORS = {"rails": "#1f77b4", "baseline": "#d62728"}
PIPELINE_LABELS = {"rails": "RAILS", "baseline": "Baseline"}
GRID_LEVELS = (0.25, 0.5, 0.75, 1.0)


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def axis_angle(i: int, n: int) -> float:
    return -math.pi / 2 + 2 * math.pi * i / n


def vertex(fraction: float, i: int, n: int) -> tuple[float, float]:
    angle = axis_angle(i, n)
    return (
        CENTER_X + RADIUS * fraction * math.cos(angle),
        CENTER_Y + RADIUS * fraction * math.sin(angle),
    )


def render_radar_svg(report: BenchReport) -> str:
    categories = list(report.category_fractions)
    if len(categories) < 3:
        raise InputError(
            f"radar chart needs at least 3 categories, got {len(categories)}"
        )
    n = len(categories)
    pipelines = [
        p
        for p in PIPELINES
        if any(p in report.category_fractions[c] for c in categories)
    ]
    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">'
    )
    parts.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    parts.append(
        f'<text x="{_fmt(CENTER_X)}" y="28" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">'
        f"Semantic correctness by case category</text>"
    )
    for level in GRID_LEVELS:
        points = " ".join(
            f"{_fmt(x)},{_fmt(y)}"
            for x, y in (vertex(level, i, n) for i in range(n))
        )
        parts.append(
            f'<polygon points="{points}" fill="none" stroke="#cccccc" stroke-width="1"/>'
        )
    for i, category in enumerate(categories):
        x, y = vertex(1.0, i, n)
        parts.append(
            f'<line x1="{_fmt(CENTER_X)}" y1="{_fmt(CENTER_Y)}" x2="{_fmt(x)}" '
            f'y2="{_fmt(y)}" stroke="#999999" stroke-width="1"/>'
        )
        lx, ly = vertex(1.12, i, n)
        cos = math.cos(axis_angle(i, n))
        anchor = "middle" if abs(cos) < 0.3 else ("start" if cos > 0 else "end")
        parts.append(
            f'<text x="{_fmt(lx)}" y="{_fmt(ly + 4)}" text-anchor="{anchor}" '
            f'font-family="sans-serif" font-size="12">{category}</text>'
        )
    for pipeline in pipelines:
        color = PIPELINE_COLORS.get(pipeline, "#333333")
        points = " ".join(
            f"{_fmt(x)},{_fmt(y)}"
            for x, y in (
                vertex(report.category_fractions[c].get(pipeline, 0.0), i, n)
                for i, c in enumerate(categories)
            )
        )
        parts.append(
            f'<polygon points="{points}" fill="{color}" fill-opacity="0.25" '
            f'stroke="{color}" stroke-width="2"/>'
        )
    legend_y = HEIGHT - 60
    for j, pipeline in enumerate(pipelines):
        color = PIPELINE_COLORS.get(pipeline, "#333333")
        x = 40 + j * 140
        parts.append(
            f'<rect x="{x}" y="{legend_y}" width="16" height="16" fill="{color}" '
            f'fill-opacity="0.5" stroke="{color}"/>'
        )
        parts.append(
            f'<text x="{x + 24}" y="{legend_y + 13}" font-family="sans-serif" '
            f'font-size="13">{PIPELINE_LABELS.get(pipeline, pipeline)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_radar_svg(report: BenchReport, path: str | Path) -> None:
    Path(path).write_text(render_radar_svg(report), encoding="utf-8")
