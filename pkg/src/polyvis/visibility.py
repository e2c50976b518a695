"""Vertex-to-vertex visibility graphs of simple polygons.

The graph of an n-gon is a symmetric boolean n x n adjacency matrix with a
zero diagonal; boundary edges (i, i+1 mod n) are always present, so every
graph produced here contains the Hamiltonian cycle 0 -> 1 -> ... -> n-1 -> 0.

The polygon-with-hole variant manufactures *invalid* visibility graphs: the
hole counts as exterior, so any sightline through it is cut, while grazing
the hole boundary does not block (the hole is treated as an open set).
"""
from __future__ import annotations

import base64

import numpy as np

from .errors import HoleNotInside, InvalidGraph, NonSimpleInput
from .geometry import (
    PointLocation,
    Polygon,
    _point_location,
    _segment_visible,
    _segments_cross_properly,
    _segments_intersect,
    ensure_ccw,
    is_simple,
    orient,
    point_in_polygon,
    points_in_polygon,
    signed_area,
)


class VisGraph:
    """Boolean adjacency matrix over polygon vertices.

    Symmetry and a zero diagonal are enforced; the boundary-cycle property
    holds for every graph computed from a polygon but is not a type
    invariant, so predicted/deserialized graphs of any shape can be scored.
    """

    __slots__ = ("adj",)

    def __init__(self, adj) -> None:
        a = np.asarray(adj, dtype=bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidGraph(f"adjacency must be square, got shape {a.shape}")
        if a.shape[0] < 3:
            raise InvalidGraph("graph needs >= 3 vertices")
        if np.any(a != a.T):
            raise InvalidGraph("adjacency must be symmetric")
        if np.any(np.diag(a)):
            raise InvalidGraph("diagonal must be zero")
        a = a.copy()
        a.setflags(write=False)
        self.adj = a

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, VisGraph):
            return NotImplemented
        return self.adj.shape == other.adj.shape and bool(np.all(self.adj == other.adj))

    def __hash__(self):
        return hash((self.n, self.adj.tobytes()))

    def __repr__(self) -> str:
        return f"VisGraph(n={self.n}, edges={self.edge_count()})"

    def edge_count(self) -> int:
        return int(np.triu(self.adj, k=1).sum())

    def has_boundary_cycle(self) -> bool:
        idx = np.arange(self.n)
        return bool(np.all(self.adj[idx, (idx + 1) % self.n]))

    def to_b64(self) -> str:
        """Strict lower triangle, row-major, packed MSB-first, base64."""
        n = self.n
        rows, cols = np.tril_indices(n, k=-1)
        bits = self.adj[rows, cols].astype(np.uint8)
        return base64.b64encode(np.packbits(bits).tobytes()).decode("ascii")

    @classmethod
    def from_b64(cls, n: int, data: str) -> "VisGraph":
        count = n * (n - 1) // 2
        raw = np.frombuffer(base64.b64decode(data), dtype=np.uint8)
        bits = np.unpackbits(raw, count=count).astype(bool)
        adj = np.zeros((n, n), dtype=bool)
        rows, cols = np.tril_indices(n, k=-1)
        adj[rows, cols] = bits
        adj[cols, rows] = bits
        return cls(adj)

    @classmethod
    def cycle(cls, n: int) -> "VisGraph":
        """Boundary cycle only (the sparsest graph any polygon can have)."""
        adj = np.zeros((n, n), dtype=bool)
        idx = np.arange(n)
        adj[idx, (idx + 1) % n] = True
        adj[(idx + 1) % n, idx] = True
        return cls(adj)

    @classmethod
    def complete(cls, n: int) -> "VisGraph":
        return cls(~np.eye(n, dtype=bool))


class HolePolygon:
    """Simple outer boundary plus one hole strictly inside it.

    The outer ring is stored anticlockwise and the hole clockwise. The hole
    must be simple, every hole vertex strictly interior to the outer
    polygon, and the two boundaries must not touch.
    """

    __slots__ = ("outer", "hole")

    def __init__(self, outer: Polygon, hole: Polygon) -> None:
        if not is_simple(outer):
            raise NonSimpleInput("outer boundary is not simple")
        if not is_simple(hole):
            raise NonSimpleInput("hole boundary is not simple")
        outer = ensure_ccw(outer)
        if signed_area(hole) > 0.0:
            hole = Polygon(np.vstack([hole.pts[:1], hole.pts[1:][::-1]]))
        for v in hole.pts:
            if point_in_polygon(v, outer) is not PointLocation.INSIDE:
                raise HoleNotInside("hole vertex not strictly inside outer boundary")
        o = outer.coords()
        h = hole.coords()
        no, nh = len(o), len(h)
        for i in range(no):
            for j in range(nh):
                if _segments_intersect(o[i], o[(i + 1) % no], h[j], h[(j + 1) % nh]):
                    raise HoleNotInside("hole boundary touches outer boundary")
        self.outer = outer
        self.hole = hole


def _visibility_adj(poly: Polygon) -> np.ndarray:
    """Vectorized all-pairs visibility; decisions are identical to
    `segment_visible` (same formulas, same tolerances). Pairs whose
    sightline passes within tolerance of an intermediate vertex are handed
    to the scalar sub-segment logic."""
    pts_arr = poly.pts
    pts = poly.coords()
    n = len(pts)
    eps = 1e-12
    adj = np.zeros((n, n), dtype=bool)
    idx = np.arange(n)
    adj[idx, (idx + 1) % n] = adj[(idx + 1) % n, idx] = True
    if n < 4:
        return adj

    ii, jj = np.triu_indices(n, k=2)
    keep = ~((ii == 0) & (jj == n - 1))
    ii, jj = ii[keep], jj[keep]
    a = pts_arr[ii]  # (P,2)
    b = pts_arr[jj]
    c = pts_arr  # (n,2) edge starts
    d = np.roll(pts_arr, -1, axis=0)

    ab = b - a
    # orientation of each edge endpoint against each sightline, (P, n)
    o1 = ab[:, 0:1] * (c[None, :, 1] - a[:, 1:2]) - ab[:, 1:2] * (c[None, :, 0] - a[:, 0:1])
    o2 = ab[:, 0:1] * (d[None, :, 1] - a[:, 1:2]) - ab[:, 1:2] * (d[None, :, 0] - a[:, 0:1])
    cd = d - c
    o3 = cd[None, :, 0] * (a[:, 1:2] - c[None, :, 1]) - cd[None, :, 1] * (a[:, 0:1] - c[None, :, 0])
    o4 = cd[None, :, 0] * (b[:, 1:2] - c[None, :, 1]) - cd[None, :, 1] * (b[:, 0:1] - c[None, :, 0])

    def sgn(x):
        return np.where(x > eps, 1, np.where(x < -eps, -1, 0)).astype(np.int8)

    s1, s2, s3, s4 = sgn(o1), sgn(o2), sgn(o3), sgn(o4)
    proper = (s1 * s2 == -1) & (s3 * s4 == -1)
    edge_ids = idx[None, :]
    incident = (
        (edge_ids == ii[:, None])
        | (edge_ids == jj[:, None])
        | ((edge_ids + 1) % n == ii[:, None])
        | ((edge_ids + 1) % n == jj[:, None])
    )
    blocked = np.any(proper & ~incident, axis=1)

    # intermediate vertices within tolerance of the open sightline
    len_sq = np.einsum("pd,pd->p", ab, ab)
    t = ((c[None, :, 0] - a[:, 0:1]) * ab[:, 0:1] + (c[None, :, 1] - a[:, 1:2]) * ab[:, 1:2]) / len_sq[:, None]
    vertex_self = (edge_ids == ii[:, None]) | (edge_ids == jj[:, None])
    hit = (np.abs(o1) <= eps) & (t > 0.0) & (t < 1.0) & ~vertex_self
    degenerate = np.any(hit, axis=1) & ~blocked

    visible = np.zeros(len(ii), dtype=bool)
    clean = ~blocked & ~degenerate
    if np.any(clean):
        mid = a[clean] + 0.5 * ab[clean]
        visible[clean] = points_in_polygon(mid, poly)
    for p in np.flatnonzero(degenerate):
        visible[p] = _segment_visible(pts, int(ii[p]), int(jj[p]))

    adj[ii[visible], jj[visible]] = True
    adj[jj[visible], ii[visible]] = True
    return adj


def visibility_graph(poly: Polygon) -> VisGraph:
    """Adjacency over all vertex pairs: adj[i][j] = segment_visible(i, j)."""
    if not is_simple(poly):
        raise NonSimpleInput("visibility graph requires a simple polygon")
    return VisGraph(_visibility_adj(poly))


def _hole_blocks(outer_pts, hole_pts, a, b) -> bool:
    """Does segment [a, b] enter the open hole?

    Blocked iff it properly crosses a hole edge or the midpoint of any
    sub-segment between consecutive hole-boundary contacts lies strictly
    inside the hole; grazing the hole boundary alone does not block.
    """
    nh = len(hole_pts)
    for k in range(nh):
        if _segments_cross_properly(a, b, hole_pts[k], hole_pts[(k + 1) % nh]):
            return True
    abx, aby = b[0] - a[0], b[1] - a[1]
    len_sq = abx * abx + aby * aby
    hits = [0.0, 1.0]
    for k in range(nh):
        p = hole_pts[k]
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
        if _point_location(hole_pts, mx, my) is PointLocation.INSIDE:
            return True
    return False


def visibility_graph_with_hole(hp: HolePolygon) -> VisGraph:
    """Visibility over outer vertices with the hole treated as exterior."""
    outer_pts = hp.outer.coords()
    hole_pts = hp.hole.coords()
    n = len(outer_pts)
    adj = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            if not _segment_visible(outer_pts, i, j):
                continue
            if _hole_blocks(outer_pts, hole_pts, outer_pts[i], outer_pts[j]):
                continue
            adj[i, j] = adj[j, i] = True
    return VisGraph(adj)


def graph_density(g: VisGraph) -> float:
    """Fraction of unordered vertex pairs that are edges."""
    n = g.n
    return g.edge_count() / (n * (n - 1) / 2)


def link_diameter(g: VisGraph) -> int:
    """Maximum over vertex pairs of the BFS shortest-path edge count."""
    n = g.n
    neighbors = [np.flatnonzero(g.adj[i]) for i in range(n)]
    diameter = 0
    for src in range(n):
        dist = np.full(n, -1, dtype=np.int64)
        dist[src] = 0
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v in neighbors[u]:
                    if dist[v] < 0:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        if np.any(dist < 0):
            raise InvalidGraph("graph is disconnected")
        diameter = max(diameter, int(dist.max()))
    return diameter
