"""Dependency-free SVG rendering of polygons and adjacency matrices.

Vertices are colored along the boundary order with a deep-purple-to-yellow
gradient (first vertex deep purple, last yellow); visible edges can be
overlaid in green. Adjacency matrices render as black/white cells, white
for visible pairs. Output is deterministic for fixed input.
"""
from __future__ import annotations

import numpy as np

from .geometry import Polygon
from .visibility import VisGraph

# viridis anchor colors, interpolated linearly in RGB
_VIRIDIS = [
    (68, 1, 84),
    (72, 40, 120),
    (62, 74, 137),
    (49, 104, 142),
    (38, 130, 142),
    (31, 158, 137),
    (53, 183, 121),
    (109, 205, 89),
    (180, 222, 44),
    (253, 231, 37),
]


def _gradient_color(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    pos = t * (len(_VIRIDIS) - 1)
    i = min(int(pos), len(_VIRIDIS) - 2)
    frac = pos - i
    r, g, b = (
        round(a + frac * (b_ - a)) for a, b_ in zip(_VIRIDIS[i], _VIRIDIS[i + 1])
    )
    return f"#{r:02x}{g:02x}{b:02x}"


def render_polygon_svg(
    poly: Polygon,
    graph: VisGraph | None = None,
    width: int = 480,
    height: int = 480,
    margin: int = 20,
) -> str:
    """Polygon outline with gradient-colored vertices; pass a graph to
    overlay its non-boundary edges in green."""
    pts = poly.pts
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = max(float(hi[0] - lo[0]), float(hi[1] - lo[1]), 1e-12)
    scale = (min(width, height) - 2 * margin) / span

    def sx(x):
        return margin + (x - lo[0]) * scale

    def sy(y):
        return height - margin - (y - lo[1]) * scale  # y up

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    n = poly.n
    if graph is not None:
        for i in range(n):
            for j in range(i + 1, n):
                if not graph.adj[i, j]:
                    continue
                parts.append(
                    f'<line x1="{sx(pts[i, 0]):.2f}" y1="{sy(pts[i, 1]):.2f}" '
                    f'x2="{sx(pts[j, 0]):.2f}" y2="{sy(pts[j, 1]):.2f}" '
                    f'stroke="#2ca02c" stroke-width="1" stroke-opacity="0.55"/>'
                )
    ring = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
    parts.append(f'<polygon points="{ring}" fill="none" stroke="black" stroke-width="2"/>')
    for i, (x, y) in enumerate(pts):
        color = _gradient_color(i / (n - 1) if n > 1 else 0.0)
        parts.append(
            f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="5" fill="{color}" '
            f'stroke="black" stroke-width="0.5"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_adjacency_svg(graph: VisGraph, cell: int = 12, margin: int = 2) -> str:
    """n x n matrix, white cells for visible pairs, black otherwise."""
    n = graph.n
    size = n * cell + 2 * margin
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="black"/>',
    ]
    for i in range(n):
        for j in range(n):
            if graph.adj[i, j]:
                parts.append(
                    f'<rect x="{margin + j * cell}" y="{margin + i * cell}" '
                    f'width="{cell}" height="{cell}" fill="white"/>'
                )
    parts.append(
        f'<rect x="{margin}" y="{margin}" width="{n * cell}" height="{n * cell}" '
        f'fill="none" stroke="#888" stroke-width="1"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
