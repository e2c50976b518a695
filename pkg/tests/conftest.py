"""Shared fixtures and independent test oracles.

The membership and visibility oracles here are deliberately self-contained
numpy implementations (crossing parity + boundary distance + dense segment
sampling) so library results are checked against an independent route.
"""
import numpy as np
import pytest

from polyvis.geometry import Polygon


@pytest.fixture
def unit_square():
    return Polygon([(0, 0), (1, 0), (1, 1), (0, 1)])


@pytest.fixture
def dart():
    # reflex quad: 5 of 6 vertex pairs are mutually visible
    return Polygon([(0, 0), (4, 0), (1, 1), (0, 4)])


@pytest.fixture
def bowtie_points():
    return [(0, 0), (1, 1), (1, 0), (0, 1)]


def closed_membership(points: np.ndarray, vertices: np.ndarray, eps: float = 1e-9) -> np.ndarray:
    """True where a point lies in the closed polygon (inside or within eps
    of the boundary). Independent of polyvis internals."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    a = np.asarray(vertices, dtype=float)
    b = np.roll(a, -1, axis=0)
    e = b - a
    w = pts[:, None, :] - a[None, :, :]
    len_sq = np.maximum((e * e).sum(axis=1), 1e-300)
    t = np.clip((w * e[None, :, :]).sum(axis=2) / len_sq[None, :], 0.0, 1.0)
    d = w - t[:, :, None] * e[None, :, :]
    on_boundary = (d * d).sum(axis=2).min(axis=1) <= eps * eps

    px, py = pts[:, 0][:, None], pts[:, 1][:, None]
    ay, by = a[:, 1][None, :], b[:, 1][None, :]
    ax, bx = a[:, 0][None, :], b[:, 0][None, :]
    straddle = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = ax + (py - ay) * (bx - ax) / (by - ay)
    crossings = np.sum(straddle & (px < np.where(straddle, xc, np.inf)), axis=1)
    return (crossings % 2 == 1) | on_boundary


def strict_interior(points: np.ndarray, vertices: np.ndarray, eps: float = 1e-9) -> np.ndarray:
    """True where a point is strictly inside (and not within eps of the boundary)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    a = np.asarray(vertices, dtype=float)
    b = np.roll(a, -1, axis=0)
    e = b - a
    w = pts[:, None, :] - a[None, :, :]
    len_sq = np.maximum((e * e).sum(axis=1), 1e-300)
    t = np.clip((w * e[None, :, :]).sum(axis=2) / len_sq[None, :], 0.0, 1.0)
    d = w - t[:, :, None] * e[None, :, :]
    near_boundary = (d * d).sum(axis=2).min(axis=1) <= eps * eps

    px, py = pts[:, 0][:, None], pts[:, 1][:, None]
    ay, by = a[:, 1][None, :], b[:, 1][None, :]
    ax, bx = a[:, 0][None, :], b[:, 0][None, :]
    straddle = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = ax + (py - ay) * (bx - ax) / (by - ay)
    crossings = np.sum(straddle & (px < np.where(straddle, xc, np.inf)), axis=1)
    return (crossings % 2 == 1) & ~near_boundary


def sampling_visible(vertices: np.ndarray, i: int, j: int, samples: int = 1000) -> bool:
    """Dense-sampling visibility oracle: every interior point of the segment
    between vertices i and j must lie in the closed polygon."""
    a, b = np.asarray(vertices[i], float), np.asarray(vertices[j], float)
    t = np.arange(1, samples + 1) / (samples + 1)
    pts = a[None, :] + t[:, None] * (b - a)[None, :]
    return bool(np.all(closed_membership(pts, vertices)))


def sampling_visible_with_hole(outer: np.ndarray, hole: np.ndarray, i: int, j: int,
                               samples: int = 1000) -> bool:
    """Hole-aware oracle: samples must stay in the closed outer polygon and
    out of the open hole."""
    a, b = np.asarray(outer[i], float), np.asarray(outer[j], float)
    t = np.arange(1, samples + 1) / (samples + 1)
    pts = a[None, :] + t[:, None] * (b - a)[None, :]
    if not np.all(closed_membership(pts, outer)):
        return False
    return not bool(np.any(strict_interior(pts, hole)))


def brute_force_segments_cross(p1, p2, p3, p4) -> bool:
    """Orientation-free segment intersection via dense parametric sampling;
    slow, used only to sanity-check tricky cases."""
    t = np.linspace(0, 1, 400)
    a = np.asarray(p1) + t[:, None] * (np.asarray(p2) - np.asarray(p1))
    b = np.asarray(p3) + t[:, None] * (np.asarray(p4) - np.asarray(p3))
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return bool(d.min() < 1e-3)
