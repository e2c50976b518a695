"""Constrained Delaunay triangulation of simple polygons and flip paths.

A triangulation is stored combinatorially as its diagonal set over the
vertex cycle 0..n-1; boundary edges are implicit. Geometry enters in two
places only: `cdt` (ear clipping followed by Lawson flips with the
empty-circumcircle test) and the optional convexity check when flipping
with polygon coordinates. Flip paths between triangulations of *different*
polygons are combinatorial: every diagonal of an abstract convex n-gon is
flippable, and routing through the canonical fan at vertex 0 bounds the
path length by 2(n-3).

Co-circular Delaunay ties are broken toward the lexicographically smaller
diagonal, which makes the diagonal set unique and deterministic.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidTriangulation,
    NonSimpleInput,
    NotFlippable,
    SizeMismatch,
    UnknownDiagonal,
)
from .geometry import Polygon, is_simple, orient
from .visibility import VisGraph

# tolerance on the incircle determinant; unit-scale coordinates keep the
# determinant well above this except for genuinely co-circular points
EPS_INCIRCLE = 1e-12


def _incircle(a, b, c, d) -> float:
    """Positive iff d lies strictly inside the circumcircle of CCW (a,b,c)."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    return (
        alift * (bdx * cdy - cdx * bdy)
        + blift * (cdx * ady - adx * cdy)
        + clift * (adx * bdy - bdx * ady)
    )


class Triangulation:
    """Diagonal set of a polygon triangulation (n-2 triangles).

    Diagonals are index pairs (i, j), i < j, non-crossing in the cyclic
    order; `triangles` is derived. The representation is purely
    combinatorial so it applies equally to a geometric polygon
    triangulation and to the abstract convex n-gon used for flip paths.
    """

    __slots__ = ("n", "diagonals", "_triangles")

    def __init__(self, n: int, diagonals) -> None:
        if n < 3:
            raise InvalidTriangulation("triangulation needs n >= 3")
        diags = frozenset((min(i, j), max(i, j)) for i, j in diagonals)
        if len(diags) != n - 3:
            raise InvalidTriangulation(f"expected {n - 3} diagonals, got {len(diags)}")
        for i, j in diags:
            if not (0 <= i < j < n):
                raise InvalidTriangulation(f"diagonal ({i}, {j}) out of range")
            if j - i < 2 or (i == 0 and j == n - 1):
                raise InvalidTriangulation(f"({i}, {j}) is a boundary edge, not a diagonal")
        dl = sorted(diags)
        for x in range(len(dl)):
            a, b = dl[x]
            for y in range(x + 1, len(dl)):
                c, d = dl[y]
                if a < c < b < d or c < a < d < b:
                    raise InvalidTriangulation(f"diagonals {dl[x]} and {dl[y]} cross")
        self.n = n
        self.diagonals = diags
        self._triangles: tuple[tuple[int, int, int], ...] | None = None

    @property
    def triangles(self) -> tuple[tuple[int, int, int], ...]:
        if self._triangles is None:
            self._triangles = self._derive_triangles()
        return self._triangles

    def _derive_triangles(self):
        edges = set(self.diagonals)
        n = self.n
        for i in range(n):
            edges.add((min(i, (i + 1) % n), max(i, (i + 1) % n)))
        out = []

        def split(a, b):
            if b - a < 2:
                return
            for c in range(a + 1, b):
                if (a, c) in edges and (c, b) in edges:
                    out.append((a, c, b))
                    split(a, c)
                    split(c, b)
                    return
            raise InvalidTriangulation(f"no triangle apex between {a} and {b}")

        split(0, n - 1)
        if len(out) != n - 2:
            raise InvalidTriangulation(f"derived {len(out)} triangles, expected {n - 2}")
        return tuple(sorted(out))

    def __eq__(self, other):
        if not isinstance(other, Triangulation):
            return NotImplemented
        return self.n == other.n and self.diagonals == other.diagonals

    def __hash__(self):
        return hash((self.n, self.diagonals))

    def __repr__(self):
        return f"Triangulation(n={self.n}, diagonals={sorted(self.diagonals)})"

    def sorted_diagonals(self) -> list[tuple[int, int]]:
        return sorted(self.diagonals)

    @classmethod
    def fan(cls, n: int, apex: int = 0) -> "Triangulation":
        """All diagonals from one vertex."""
        if apex != 0:
            diags = [(min(apex, k), max(apex, k)) for k in range(n) if
                     k != apex and (k + 1) % n != apex and (apex + 1) % n != k]
            return cls(n, diags)
        return cls(n, [(0, k) for k in range(2, n - 1)])


def triangulation_graph(t: Triangulation) -> VisGraph:
    """Boundary cycle plus diagonals as an adjacency matrix."""
    n = t.n
    adj = np.zeros((n, n), dtype=bool)
    idx = np.arange(n)
    adj[idx, (idx + 1) % n] = adj[(idx + 1) % n, idx] = True
    for i, j in t.diagonals:
        adj[i, j] = adj[j, i] = True
    return VisGraph(adj)


def _make_ccw(tri, pts):
    a, b, c = tri
    if orient(pts[a], pts[b], pts[c]) < 0:
        return (a, c, b)
    return (a, b, c)


def _ear_clip(pts) -> list[tuple[int, int, int]]:
    """Triangulate a simple CCW polygon by clipping ears."""
    n = len(pts)
    ring = list(range(n))
    tris = []
    guard = 0
    while len(ring) > 3:
        guard += 1
        if guard > 2 * n * n:
            raise InvalidTriangulation("ear clipping stalled")
        clipped = False
        for pos in range(len(ring)):
            i = ring[pos - 1]
            j = ring[pos]
            k = ring[(pos + 1) % len(ring)]
            if orient(pts[i], pts[j], pts[k]) <= 0:
                continue  # reflex or flat corner
            blocked = False
            for q in ring:
                if q in (i, j, k):
                    continue
                p = pts[q]
                if (
                    orient(pts[i], pts[j], p) >= 0
                    and orient(pts[j], pts[k], p) >= 0
                    and orient(pts[k], pts[i], p) >= 0
                ):
                    blocked = True
                    break
            if blocked:
                continue
            tris.append((i, j, k))
            del ring[pos]
            clipped = True
            break
        if not clipped:
            raise InvalidTriangulation("no ear found; polygon may be degenerate")
    tris.append(tuple(ring))
    return tris


def cdt(poly: Polygon) -> Triangulation:
    """Constrained Delaunay triangulation: ear clipping followed by Lawson
    flips until every interior diagonal passes the (tie-broken)
    empty-circumcircle test. Deterministic; exactly n-2 triangles."""
    if not is_simple(poly):
        raise NonSimpleInput("triangulation requires a simple polygon")
    from .geometry import ensure_ccw

    poly = ensure_ccw(poly)
    pts = poly.coords()
    n = len(pts)
    tris = [_make_ccw(t, pts) for t in _ear_clip(pts)]

    edge_map: dict[tuple[int, int], set[int]] = {}

    def edges_of(tri):
        a, b, c = tri
        return (
            (min(a, b), max(a, b)),
            (min(b, c), max(b, c)),
            (min(a, c), max(a, c)),
        )

    for idx, tri in enumerate(tris):
        for e in edges_of(tri):
            edge_map.setdefault(e, set()).add(idx)

    queue = deque(sorted(e for e, ts in edge_map.items() if len(ts) == 2))
    in_queue = set(queue)
    guard = 0
    while queue:
        guard += 1
        if guard > 100 * n * n:
            raise InvalidTriangulation("Delaunay flipping did not converge")
        e = queue.popleft()
        in_queue.discard(e)
        owners = edge_map.get(e)
        if owners is None or len(owners) != 2:
            continue
        t1, t2 = sorted(owners)
        u, v = e
        r = next(x for x in tris[t1] if x not in e)
        s = next(x for x in tris[t2] if x not in e)
        tri1 = _make_ccw((u, v, r), pts)
        det = _incircle(pts[tri1[0]], pts[tri1[1]], pts[tri1[2]], pts[s])
        if det > EPS_INCIRCLE:
            do_flip = True
        elif abs(det) <= EPS_INCIRCLE:
            # co-circular: prefer the lexicographically smaller diagonal
            do_flip = tuple(sorted((r, s))) < (u, v) and _quad_convex(pts, u, r, v, s)
        else:
            do_flip = False
        if not do_flip:
            continue
        new1 = _make_ccw((u, r, s), pts)
        new2 = _make_ccw((v, r, s), pts)
        for idx, old in ((t1, tris[t1]), (t2, tris[t2])):
            for oe in edges_of(old):
                edge_map[oe].discard(idx)
        tris[t1], tris[t2] = new1, new2
        for idx in (t1, t2):
            for ne in edges_of(tris[idx]):
                edge_map.setdefault(ne, set()).add(idx)
        edge_map.pop(e, None)
        for ne in (
            (min(u, r), max(u, r)),
            (min(r, v), max(r, v)),
            (min(v, s), max(v, s)),
            (min(s, u), max(s, u)),
        ):
            if ne not in in_queue and len(edge_map.get(ne, ())) == 2:
                queue.append(ne)
                in_queue.add(ne)

    diagonals = [e for e, ts in edge_map.items() if len(ts) == 2]
    return Triangulation(n, diagonals)


def _quad_convex(pts, u, r, v, s) -> bool:
    """Strict convexity of the quadrilateral u-r-v-s (cyclic order)."""
    ring = (pts[u], pts[r], pts[v], pts[s])
    signs = [orient(ring[i], ring[(i + 1) % 4], ring[(i + 2) % 4]) for i in range(4)]
    return all(x > 0 for x in signs) or all(x < 0 for x in signs)


def flip(t: Triangulation, d: tuple[int, int], poly: Polygon | None = None) -> Triangulation:
    """Replace diagonal d with the opposite diagonal of the quadrilateral
    formed by its two adjacent triangles.

    Combinatorial on the abstract convex n-gon by default (always legal);
    passing the polygon enforces geometric flippability (the quadrilateral
    must be strictly convex)."""
    d = (min(d), max(d))
    if d not in t.diagonals:
        raise UnknownDiagonal(f"{d} is not a diagonal of the triangulation")
    adjacent = [tri for tri in t.triangles if d[0] in tri and d[1] in tri]
    if len(adjacent) != 2:
        raise InvalidTriangulation(f"diagonal {d} does not border two triangles")
    quad = set(adjacent[0]) | set(adjacent[1])
    r, s = sorted(quad - set(d))
    if poly is not None:
        pts = poly.coords()
        i1, i2, i3, i4 = sorted(quad)
        if not _quad_convex(pts, i1, i2, i3, i4):
            raise NotFlippable(f"quadrilateral around {d} is not convex")
    return Triangulation(t.n, (t.diagonals - {d}) | {(r, s)})


@dataclass
class FlipPath:
    """Sequence of triangulations, consecutive entries one flip apart."""

    steps: list[Triangulation] = field(default_factory=list)

    @property
    def length(self) -> int:
        return len(self.steps) - 1

    def __iter__(self):
        return iter(self.steps)

    def __len__(self):
        return len(self.steps)

    def validate(self) -> None:
        for a, b in zip(self.steps, self.steps[1:]):
            if a.n != b.n:
                raise SizeMismatch("flip path mixes vertex counts")
            delta = a.diagonals ^ b.diagonals
            if len(delta) != 2:
                raise InvalidTriangulation(
                    f"consecutive steps differ by {len(delta) // 2} flips, expected 1"
                )


def _fan_route(t: Triangulation) -> list[Triangulation]:
    """Flip sequence from t to the fan at vertex 0; every flip creates one
    new 0-incident diagonal, so the route has at most n-3 steps."""
    path = [t]
    cur = t
    fan = Triangulation.fan(cur.n)
    while cur != fan:
        candidates = []
        for tri in cur.triangles:
            if 0 not in tri:
                continue
            opp = tuple(sorted(x for x in tri if x != 0))
            if opp in cur.diagonals:
                candidates.append(opp)
        if not candidates:
            raise InvalidTriangulation("fan routing stalled")
        cur = flip(cur, min(candidates))
        path.append(cur)
    return path


def flip_path(a: Triangulation, b: Triangulation) -> FlipPath:
    """Combinatorial flip path a -> fan(0) -> b with the second half
    reversed; length at most 2(n-3) and every intermediate valid."""
    if a.n != b.n:
        raise SizeMismatch(f"vertex counts differ: {a.n} vs {b.n}")
    if a == b:
        return FlipPath([a])
    ra = _fan_route(a)
    rb = _fan_route(b)
    return FlipPath(ra + rb[-2::-1])


def aligned_euclidean_distance(p: Polygon, q: Polygon) -> float:
    """Mean per-vertex distance after anchoring each polygon at vertex 0 and
    rotating its first edge onto the +x axis (cancels rigid motion)."""
    if p.n != q.n:
        raise SizeMismatch(f"vertex counts differ: {p.n} vs {q.n}")

    def align(poly: Polygon) -> np.ndarray:
        pts = poly.pts - poly.pts[0]
        dx, dy = pts[1]
        ang = math.atan2(dy, dx)
        ca, sa = math.cos(-ang), math.sin(-ang)
        rot = np.array([[ca, -sa], [sa, ca]])
        return pts @ rot.T

    pa, qa = align(p), align(q)
    return float(np.mean(np.linalg.norm(pa - qa, axis=1)))
