"""Planar predicates and polygon primitives.

Coordinates are plain float64; the library convention is a canvas of
[-1, 1]^2 but nothing here depends on scale except the tolerances below,
which are sized for unit-scale data.

Conventions
-----------
* Polygons are ordered vertex lists, anticlockwise after `ensure_ccw`.
* Visibility uses the closed polygon: a sightline that grazes the boundary
  (passes through a vertex or runs along an edge) without entering the
  exterior counts as visible.
"""
from __future__ import annotations

import enum

import numpy as np

from .errors import InvalidPolygon

__all__ = [
    "EPS_ORIENT",
    "EPS_BOUNDARY",
    "PointLocation",
    "Polygon",
    "orient",
    "is_simple",
    "point_in_polygon",
    "segment_visible",
    "signed_area",
    "ensure_ccw",
]

# Tolerance on the raw cross product of unit-scale inputs; doubles leave
# ample headroom below this for coordinates in [-1, 1].
EPS_ORIENT = 1e-12
# Euclidean distance under which a query point is classified as Boundary.
EPS_BOUNDARY = 1e-9


class PointLocation(enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


class Polygon:
    """Ordered vertex list in the plane, at least a triangle.

    Construction rejects degenerate input (fewer than 3 vertices, non-finite
    coordinates, coincident consecutive vertices). Simplicity is a separate
    predicate (`is_simple`), not a construction invariant, so that candidate
    polygons from external sources can still be represented and tested.
    """

    __slots__ = ("pts", "_tuples")

    def __init__(self, vertices) -> None:
        pts = np.asarray(vertices, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidPolygon(f"expected (n, 2) vertex array, got shape {pts.shape}")
        if pts.shape[0] < 3:
            raise InvalidPolygon(f"polygon needs >= 3 vertices, got {pts.shape[0]}")
        if not np.all(np.isfinite(pts)):
            raise InvalidPolygon("vertex coordinates must be finite")
        nxt = np.roll(pts, -1, axis=0)
        if np.any(np.all(pts == nxt, axis=1)):
            raise InvalidPolygon("consecutive vertices coincide")
        pts = pts.copy()
        pts.setflags(write=False)
        self.pts = pts
        self._tuples: list[tuple[float, float]] | None = None

    @property
    def n(self) -> int:
        return self.pts.shape[0]

    def __len__(self) -> int:
        return self.pts.shape[0]

    def __getitem__(self, i):
        return self.pts[i]

    def __repr__(self) -> str:
        return f"Polygon(n={self.n})"

    def coords(self) -> list[tuple[float, float]]:
        """Vertices as plain float tuples (cached; used by scalar hot loops)."""
        if self._tuples is None:
            self._tuples = [(float(x), float(y)) for x, y in self.pts]
        return self._tuples


def orient(p, q, r, eps: float = EPS_ORIENT) -> int:
    """Orientation of r relative to the directed line p->q.

    Returns +1 if r is to the left, -1 to the right, 0 if collinear within
    `eps` on the raw cross product.
    """
    cross = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    if cross > eps:
        return 1
    if cross < -eps:
        return -1
    return 0


def _on_segment(a, b, p, eps: float = EPS_ORIENT) -> bool:
    # assumes p collinear with a-b; bounding-box containment
    return (
        min(a[0], b[0]) - eps <= p[0] <= max(a[0], b[0]) + eps
        and min(a[1], b[1]) - eps <= p[1] <= max(a[1], b[1]) + eps
    )


def _segments_intersect(a, b, c, d) -> bool:
    """True if closed segments [a,b] and [c,d] share any point."""
    o1 = orient(a, b, c)
    o2 = orient(a, b, d)
    o3 = orient(c, d, a)
    o4 = orient(c, d, b)
    if o1 != o2 and o3 != o4 and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return True
    if o1 == 0 and _on_segment(a, b, c):
        return True
    if o2 == 0 and _on_segment(a, b, d):
        return True
    if o3 == 0 and _on_segment(c, d, a):
        return True
    if o4 == 0 and _on_segment(c, d, b):
        return True
    # mixed case: proper crossing where one endpoint orientation is zero is
    # already covered by the on-segment branches above
    return False


def _segments_cross_properly(a, b, c, d) -> bool:
    """True if open segments (a,b) and (c,d) cross at a single interior point."""
    o1 = orient(a, b, c)
    o2 = orient(a, b, d)
    if o1 * o2 >= 0:
        return False
    o3 = orient(c, d, a)
    o4 = orient(c, d, b)
    return o3 * o4 < 0


def _is_simple_scalar(pts) -> bool:
    n = len(pts)
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n):
            c, d = pts[j], pts[(j + 1) % n]
            if j == i + 1 or (i == 0 and j == n - 1):
                # adjacent: shared vertex allowed, fold-back overlap is not
                shared, u, w = (b, a, d) if j == i + 1 else (a, b, c)
                if orient(u, shared, w) == 0:
                    du = (u[0] - shared[0], u[1] - shared[1])
                    dw = (w[0] - shared[0], w[1] - shared[1])
                    if du[0] * dw[0] + du[1] * dw[1] > 0:
                        return False
                continue
            if _segments_intersect(a, b, c, d):
                return False
    return True


def is_simple(poly: Polygon) -> bool:
    """No pair of non-adjacent edges intersects; adjacent edges meet only at
    their shared vertex (no fold-back overlap).

    Vectorized proper-crossing scan with a scalar fallback whenever any
    orientation lands inside the collinearity tolerance (potential touch or
    overlap), so the decision matches the pairwise predicate exactly.
    """
    pts = poly.pts
    n = len(pts)
    a = pts
    b = np.roll(pts, -1, axis=0)
    e = b - a
    eps = EPS_ORIENT

    def cross_to(p):
        return e[:, 0][:, None] * (p[:, 1][None, :] - a[:, 1][:, None]) - e[:, 1][:, None] * (
            p[:, 0][None, :] - a[:, 0][:, None]
        )

    o1 = cross_to(a)  # edge i vs start of edge j
    o2 = cross_to(b)  # edge i vs end of edge j
    s1 = np.where(o1 > eps, 1, np.where(o1 < -eps, -1, 0)).astype(np.int8)
    s2 = np.where(o2 > eps, 1, np.where(o2 < -eps, -1, 0)).astype(np.int8)
    straddle = s1 * s2 == -1
    idx = np.arange(n)
    adjacent = (
        (idx[:, None] == idx[None, :])
        | ((idx[:, None] + 1) % n == idx[None, :])
        | ((idx[None, :] + 1) % n == idx[:, None])
    )
    upper = idx[:, None] < idx[None, :]
    nonadj = upper & ~adjacent
    if np.any(straddle & straddle.T & nonadj):
        return False
    # any tolerance-zero orientation on a non-adjacent pair may hide a touch,
    # any collinear corner may hide a fold-back: decide those the slow way
    zero = (s1 == 0) | (s2 == 0)
    if np.any((zero | zero.T) & nonadj):
        return _is_simple_scalar(poly.coords())
    corner = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
    if np.any(np.abs(corner) <= eps):
        return _is_simple_scalar(poly.coords())
    return True


def _point_segment_dist_sq(px, py, ax, ay, bx, by) -> float:
    ex, ey = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    seg_len_sq = ex * ex + ey * ey
    if seg_len_sq <= 0.0:
        return wx * wx + wy * wy
    t = (wx * ex + wy * ey) / seg_len_sq
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    dx, dy = wx - t * ex, wy - t * ey
    return dx * dx + dy * dy


def _point_location(pts, px, py, eps_boundary: float = EPS_BOUNDARY) -> PointLocation:
    n = len(pts)
    eps_sq = eps_boundary * eps_boundary
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        if _point_segment_dist_sq(px, py, ax, ay, bx, by) <= eps_sq:
            return PointLocation.BOUNDARY
    inside = False
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        if (ay > py) != (by > py):
            x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
            if px < x_cross:
                inside = not inside
    return PointLocation.INSIDE if inside else PointLocation.OUTSIDE


def point_in_polygon(pt, poly: Polygon, eps_boundary: float = EPS_BOUNDARY) -> PointLocation:
    """Classify a point against a simple polygon.

    Boundary wins whenever the distance to the boundary is within
    `eps_boundary`; otherwise even-odd ray crossing decides inside/outside.
    """
    return _point_location(poly.coords(), float(pt[0]), float(pt[1]), eps_boundary)


def _segment_contained(pts, a, b, exclude=()) -> bool:
    """Closed segment [a, b] stays inside the closed polygon `pts`.

    `exclude` lists vertex indices coinciding with segment endpoints; edges
    incident to them are skipped in the crossing scan and they do not count
    as intermediate boundary contacts.
    """
    n = len(pts)
    for k in range(n):
        k1 = (k + 1) % n
        if k in exclude or k1 in exclude:
            continue
        if _segments_cross_properly(a, b, pts[k], pts[k1]):
            return False
    # parameters along a->b where the segment meets boundary vertices
    abx, aby = b[0] - a[0], b[1] - a[1]
    len_sq = abx * abx + aby * aby
    hits = [0.0, 1.0]
    for k in range(n):
        if k in exclude:
            continue
        p = pts[k]
        if orient(a, b, p) == 0:
            t = ((p[0] - a[0]) * abx + (p[1] - a[1]) * aby) / len_sq
            if 0.0 < t < 1.0:
                hits.append(t)
    hits.sort()
    for t0, t1 in zip(hits, hits[1:]):
        if t1 - t0 <= 1e-12:
            continue
        tm = 0.5 * (t0 + t1)
        mx, my = a[0] + tm * abx, a[1] + tm * aby
        if _point_location(pts, mx, my) is PointLocation.OUTSIDE:
            return False
    return True


def _segment_visible(pts, i: int, j: int) -> bool:
    n = len(pts)
    if i == j:
        raise ValueError("visibility is defined for distinct vertices")
    if (i + 1) % n == j or (j + 1) % n == i:
        return True
    return _segment_contained(pts, pts[i], pts[j], exclude=(i, j))


def segment_visible(i: int, j: int, poly: Polygon) -> bool:
    """True iff the closed segment between vertices i and j stays inside the
    closed polygon. Adjacent boundary vertices are always mutually visible.

    Rejects sightlines that properly cross a non-incident edge, then tests
    the midpoint of every sub-segment between consecutive boundary contacts;
    exact for simple polygons, O(n) per pair.
    """
    return _segment_visible(poly.coords(), i, j)


def signed_area(poly: Polygon) -> float:
    """Shoelace area: positive for anticlockwise vertex order."""
    pts = poly.pts
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def ensure_ccw(poly: Polygon) -> Polygon:
    """Return the polygon with anticlockwise orientation, keeping vertex 0
    first. Idempotent."""
    if signed_area(poly) < 0.0:
        pts = poly.pts
        return Polygon(np.vstack([pts[:1], pts[1:][::-1]]))
    return poly


def centroid(poly: Polygon) -> np.ndarray:
    """Area centroid of a simple polygon."""
    pts = poly.pts
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * float(np.sum(cross))
    if abs(area) < 1e-300:
        return pts.mean(axis=0)
    cx = float(np.sum((x + xn) * cross)) / (6.0 * area)
    cy = float(np.sum((y + yn) * cross)) / (6.0 * area)
    return np.array([cx, cy])


def _seg_dist_sq_batch(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared distance from each query point to the nearest of the given
    segments. points: (m,2); a, b: (k,2) segment endpoints. Returns (m,)."""
    e = b - a  # (k,2)
    w = points[:, None, :] - a[None, :, :]  # (m,k,2)
    len_sq = np.einsum("kd,kd->k", e, e)
    len_sq = np.where(len_sq > 0.0, len_sq, 1.0)
    t = np.clip(np.einsum("mkd,kd->mk", w, e) / len_sq, 0.0, 1.0)
    d = w - t[:, :, None] * e[None, :, :]
    return np.einsum("mkd,mkd->mk", d, d).min(axis=1)


def points_in_polygon(points: np.ndarray, poly: Polygon,
                      eps_boundary: float = EPS_BOUNDARY) -> np.ndarray:
    """Vectorized closed-polygon membership for a batch of points.

    Returns a boolean array: True where the point is inside or within
    `eps_boundary` of the boundary. Matches `point_in_polygon` semantics
    with INSIDE and BOUNDARY collapsed to True.
    """
    pts = np.asarray(points, dtype=np.float64)
    a = poly.pts
    b = np.roll(a, -1, axis=0)
    on_boundary = _seg_dist_sq_batch(pts, a, b) <= eps_boundary * eps_boundary

    px = pts[:, 0][:, None]
    py = pts[:, 1][:, None]
    ax, ay = a[:, 0][None, :], a[:, 1][None, :]
    bx, by = b[:, 0][None, :], b[:, 1][None, :]
    straddles = (ay > py) != (by > py)
    denom = np.where(by - ay != 0.0, by - ay, 1.0)
    x_cross = ax + (py - ay) * (bx - ax) / denom
    inside = (np.sum(straddles & (px < x_cross), axis=1) % 2) == 1
    return inside | on_boundary
