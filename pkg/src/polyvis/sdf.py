"""Signed distance fields of polygons and the geometric inverse path.

A polygon is normalized into the unit square with a margin, sampled on a
fixed grid of cell centers, and stored as a signed distance field with the
*negative inside* convention. The inverse path extracts the zero level set
with marching squares (linear interpolation along cell edges) and simplifies
the contour to a fixed vertex budget by repeated minimum-triangle-area
removal.

Grid layout: ``values[iy, ix]`` samples the point
``((ix + 0.5) / res, (iy + 0.5) / res)``, i.e. row index runs along y from
the bottom. The binary file format is a 16-byte header (magic ``PVSD``,
uint32 resolution, uint32 sign-convention flag, 4 reserved bytes) followed
by row-major little-endian float32 values; a JSON sidecar carries the
normalization frame.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateExtent, InvalidPolygon, NoZeroCrossing, TooFewPoints
from .geometry import (
    Polygon,
    _seg_dist_sq_batch,
    _segments_intersect,
    ensure_ccw,
    is_simple,
    orient,
)

MAGIC = b"PVSD"
SIGN_NEGATIVE_INSIDE = 0
DEFAULT_RES = 40
DEFAULT_MARGIN = 0.05


@dataclass(frozen=True)
class Frame:
    """Similarity transform mapping source coordinates into the unit square."""

    scale: float
    offset: tuple[float, float]

    def to_unit(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(pts, dtype=np.float64) * self.scale + np.asarray(self.offset)

    def from_unit(self, pts: np.ndarray) -> np.ndarray:
        return (np.asarray(pts, dtype=np.float64) - np.asarray(self.offset)) / self.scale

    def to_dict(self) -> dict:
        return {"scale": self.scale, "offset": list(self.offset)}

    @classmethod
    def from_dict(cls, d: dict) -> "Frame":
        return cls(scale=float(d["scale"]), offset=(float(d["offset"][0]), float(d["offset"][1])))

    @classmethod
    def identity(cls) -> "Frame":
        return cls(1.0, (0.0, 0.0))


@dataclass
class SdfGrid:
    """Fixed-resolution signed distance samples plus the frame that produced
    them. Negative inside, positive outside, ~zero on the boundary."""

    res: int
    values: np.ndarray
    frame: Frame

    def cell_width(self) -> float:
        return 1.0 / self.res

    def save(self, path) -> None:
        path = Path(path)
        header = MAGIC + struct.pack("<II", self.res, SIGN_NEGATIVE_INSIDE) + b"\x00" * 4
        path.write_bytes(header + self.values.astype("<f4").tobytes())
        sidecar = {
            "res": self.res,
            "sign_convention": "negative-inside",
            "frame": self.frame.to_dict(),
        }
        Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "SdfGrid":
        path = Path(path)
        raw = path.read_bytes()
        if raw[:4] != MAGIC:
            raise ValueError(f"{path} is not an SDF grid file")
        res, sign_flag = struct.unpack("<II", raw[4:12])
        if sign_flag != SIGN_NEGATIVE_INSIDE:
            raise ValueError(f"unsupported sign convention flag {sign_flag}")
        values = np.frombuffer(raw[16:], dtype="<f4", count=res * res).astype(np.float64)
        sidecar_path = Path(str(path) + ".json")
        frame = Frame.identity()
        if sidecar_path.exists():
            frame = Frame.from_dict(json.loads(sidecar_path.read_text())["frame"])
        return cls(res=res, values=values.reshape(res, res), frame=frame)

    def to_pgm(self, path) -> None:
        """8-bit PGM for quick viewing (top row first)."""
        v = self.values
        lo, hi = float(v.min()), float(v.max())
        span = hi - lo if hi > lo else 1.0
        img = np.clip((v - lo) / span * 255.0, 0, 255).astype(np.uint8)[::-1]
        header = f"P5\n{self.res} {self.res}\n255\n".encode("ascii")
        Path(path).write_bytes(header + img.tobytes())


def normalize_unit(poly: Polygon, margin: float = DEFAULT_MARGIN) -> tuple[Polygon, Frame]:
    """Uniform scale + translation fitting the bounding box into
    [margin, 1-margin]^2; aspect ratio preserved, shorter side centered."""
    pts = poly.pts
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    w, h = float(hi[0] - lo[0]), float(hi[1] - lo[1])
    if w == 0.0 or h == 0.0:
        raise DegenerateExtent("polygon bounding box has zero width or height")
    inner = 1.0 - 2.0 * margin
    scale = inner / max(w, h)
    off = (
        margin + (inner - w * scale) / 2.0 - lo[0] * scale,
        margin + (inner - h * scale) / 2.0 - lo[1] * scale,
    )
    frame = Frame(scale, off)
    return Polygon(frame.to_unit(pts)), frame


def signed_distance(poly: Polygon, points) -> np.ndarray:
    """Distance to the nearest boundary point, negative inside the polygon."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    a = poly.pts
    b = np.roll(a, -1, axis=0)
    dist = np.sqrt(_seg_dist_sq_batch(pts, a, b))

    px = pts[:, 0][:, None]
    py = pts[:, 1][:, None]
    ax, ay = a[:, 0][None, :], a[:, 1][None, :]
    bx, by = b[:, 0][None, :], b[:, 1][None, :]
    straddles = (ay > py) != (by > py)
    denom = np.where(by - ay != 0.0, by - ay, 1.0)
    x_cross = ax + (py - ay) * (bx - ax) / denom
    inside = (np.sum(straddles & (px < x_cross), axis=1) % 2) == 1
    return np.where(inside, -dist, dist)


def grid_points(res: int) -> np.ndarray:
    """Cell centers of the unit square, ordered to match values.reshape."""
    c = (np.arange(res) + 0.5) / res
    xx, yy = np.meshgrid(c, c)  # yy varies along rows
    return np.column_stack([xx.ravel(), yy.ravel()])


def rasterize_sdf(poly: Polygon, res: int = DEFAULT_RES, frame: Frame | None = None) -> SdfGrid:
    """Sample the signed distance at every cell center of the unit square.

    The polygon is expected in unit-square coordinates (see
    `normalize_unit`); `frame` is carried along for provenance only.
    """
    values = signed_distance(poly, grid_points(res)).reshape(res, res)
    return SdfGrid(res=res, values=values, frame=frame or Frame.identity())


# marching-squares case table: corner bits (bl=1, br=2, tr=4, tl=8) ->
# segments as pairs of cell-edge names; saddles (5, 10) resolved separately
_EDGE_SEGMENTS = {
    1: [("left", "bottom")],
    2: [("bottom", "right")],
    3: [("left", "right")],
    4: [("right", "top")],
    6: [("bottom", "top")],
    7: [("left", "top")],
    8: [("top", "left")],
    9: [("bottom", "top")],
    11: [("right", "top")],
    12: [("right", "left")],
    13: [("bottom", "right")],
    14: [("left", "bottom")],
}


def extract_contour(grid: SdfGrid) -> np.ndarray:
    """Trace the zero level set with marching squares.

    Returns the largest closed loop as an (m, 2) array of unit-square
    points, anticlockwise, with linear interpolation along crossing cell
    edges. Saddle cells are disambiguated by the sign of the cell-center
    (mean) value. Raises NoZeroCrossing when the field has uniform sign.
    """
    v = grid.values
    res = grid.res
    inside = v < 0.0
    if bool(inside.all()) or not bool(inside.any()):
        raise NoZeroCrossing("signed distance field has uniform sign")

    segments: list[tuple[tuple, tuple]] = []
    for iy in range(res - 1):
        for ix in range(res - 1):
            bl = bool(inside[iy, ix])
            br = bool(inside[iy, ix + 1])
            tr = bool(inside[iy + 1, ix + 1])
            tl = bool(inside[iy + 1, ix])
            case = bl * 1 + br * 2 + tr * 4 + tl * 8
            if case in (0, 15):
                continue
            edges = {
                "bottom": ((iy, ix), (iy, ix + 1)),
                "right": ((iy, ix + 1), (iy + 1, ix + 1)),
                "top": ((iy + 1, ix), (iy + 1, ix + 1)),
                "left": ((iy, ix), (iy + 1, ix)),
            }
            if case in (5, 10):
                center_inside = (
                    v[iy, ix] + v[iy, ix + 1] + v[iy + 1, ix + 1] + v[iy + 1, ix]
                ) / 4.0 < 0.0
                if case == 5:
                    pairs = (
                        [("bottom", "right"), ("left", "top")]
                        if center_inside
                        else [("left", "bottom"), ("right", "top")]
                    )
                else:
                    pairs = (
                        [("left", "bottom"), ("right", "top")]
                        if center_inside
                        else [("bottom", "right"), ("top", "left")]
                    )
            else:
                pairs = _EDGE_SEGMENTS[case]
            for e1, e2 in pairs:
                segments.append((edges[e1], edges[e2]))

    adjacency: dict[tuple, list[int]] = {}
    for idx, (k1, k2) in enumerate(segments):
        adjacency.setdefault(k1, []).append(idx)
        adjacency.setdefault(k2, []).append(idx)

    used = [False] * len(segments)
    loops: list[list[tuple]] = []
    for start_idx in range(len(segments)):
        if used[start_idx]:
            continue
        k_start, k_cur = segments[start_idx]
        used[start_idx] = True
        loop = [k_start, k_cur]
        closed = False
        while True:
            nxt = [s for s in adjacency.get(k_cur, ()) if not used[s]]
            if not nxt:
                break
            s = nxt[0]
            used[s] = True
            a, b = segments[s]
            k_cur = b if a == k_cur else a
            if k_cur == k_start:
                closed = True
                break
            loop.append(k_cur)
        if closed and len(loop) >= 3:
            loops.append(loop)

    if not loops:
        raise NoZeroCrossing("no closed zero-level loop inside the grid")

    def key_point(key):
        (y1, x1), (y2, x2) = key
        v1, v2 = v[y1, x1], v[y2, x2]
        t = v1 / (v1 - v2)
        px = (x1 + 0.5) / res + t * (x2 - x1) / res
        py = (y1 + 0.5) / res + t * (y2 - y1) / res
        return (px, py)

    best, best_area = None, -1.0
    for loop in loops:
        pts = np.array([key_point(k) for k in loop])
        x, y = pts[:, 0], pts[:, 1]
        area = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
        if abs(area) > best_area:
            best, best_area = (pts, area), abs(area)

    pts, area = best
    if area < 0.0:
        pts = pts[::-1]
    # collapse coincident neighbors (contour passing exactly through a sample)
    keep = np.any(pts != np.roll(pts, -1, axis=0), axis=1)
    pts = pts[keep]
    if len(pts) < 3:
        raise NoZeroCrossing("contour degenerated to fewer than 3 points")
    return pts


def visvalingam_simplify(line, k: int) -> Polygon:
    """Simplify a closed polyline to exactly k vertices by repeatedly
    removing the vertex whose triangle with its neighbors has minimum area
    (ties broken toward the lowest index).

    A removal that would make the boundary self-intersect is deferred and
    the next-smallest vertex is removed instead, so the output is always
    simple. Order is preserved; the result is returned anticlockwise.
    """
    import heapq

    pts_arr = np.asarray(line, dtype=np.float64)
    keep = np.any(pts_arr != np.roll(pts_arr, -1, axis=0), axis=1)
    pts_arr = pts_arr[keep]
    m = len(pts_arr)
    if k < 3:
        raise ValueError("target vertex count must be >= 3")
    if m < k:
        raise TooFewPoints(f"polyline has {m} points, target is {k}")
    if m == k:
        return ensure_ccw(Polygon(pts_arr))

    pts = [(float(x), float(y)) for x, y in pts_arr]
    prv = [(i - 1) % m for i in range(m)]
    nxt = [(i + 1) % m for i in range(m)]
    alive = [True] * m
    version = [0] * m

    def tri_area(i):
        a, b, c = pts[prv[i]], pts[i], pts[nxt[i]]
        return abs((a[0] - c[0]) * (b[1] - a[1]) - (a[0] - b[0]) * (c[1] - a[1])) / 2.0

    heap = [(tri_area(i), i, 0) for i in range(m)]
    heapq.heapify(heap)

    def removal_crosses(i):
        u, w = prv[i], nxt[i]
        a, b = pts[u], pts[w]
        # fold-back against the edges adjacent to the new edge
        for shared, far in ((u, pts[prv[u]]), (w, pts[nxt[w]])):
            sp = pts[shared]
            other = b if shared == u else a
            if orient(far, sp, other) == 0:
                d1 = (far[0] - sp[0], far[1] - sp[1])
                d2 = (other[0] - sp[0], other[1] - sp[1])
                if d1[0] * d2[0] + d1[1] * d2[1] > 0:
                    return True
        q = nxt[w]
        while q != prv[u]:
            if q != u and nxt[q] != u:
                if _segments_intersect(a, b, pts[q], pts[nxt[q]]):
                    return True
            q = nxt[q]
        return False

    count = m
    deferred: list[tuple] = []
    while count > k:
        if not heap:
            if not deferred:
                raise InvalidPolygon("simplification stalled: every removal self-intersects")
            heap, deferred = deferred, []
            heapq.heapify(heap)
        entry = heapq.heappop(heap)
        area_i, i, ver = entry
        if not alive[i] or ver != version[i]:
            continue
        if removal_crosses(i):
            deferred.append(entry)
            continue
        u, w = prv[i], nxt[i]
        alive[i] = False
        nxt[u], prv[w] = w, u
        count -= 1
        for j in (u, w):
            version[j] += 1
            heapq.heappush(heap, (tri_area(j), j, version[j]))
        if deferred:
            for d in deferred:
                heapq.heappush(heap, d)
            deferred = []

    order = []
    start = next(i for i in range(m) if alive[i])
    cur = start
    while True:
        order.append(cur)
        cur = nxt[cur]
        if cur == start:
            break
    out = ensure_ccw(Polygon(pts_arr[order]))
    if not is_simple(out):
        raise InvalidPolygon("simplified contour is not simple")
    return out


def sdf_round_trip(
    poly: Polygon,
    res: int = DEFAULT_RES,
    k: int = 25,
    margin: float = DEFAULT_MARGIN,
    align: bool = True,
) -> Polygon:
    """normalize -> rasterize -> extract contour -> simplify to k vertices.

    The result lives in unit-square coordinates (compare against
    `normalize_unit(poly)[0]`). With `align`, and when k matches the input
    vertex count, the cyclic indexing of the output is shifted to minimize
    total distance to the input vertices so the polygons correspond
    index-by-index.
    """
    norm, frame = normalize_unit(ensure_ccw(poly), margin)
    grid = rasterize_sdf(norm, res, frame)
    contour = extract_contour(grid)
    out = visvalingam_simplify(contour, k)
    if align and k == norm.n:
        best_shift, best_cost = 0, np.inf
        for s in range(k):
            cost = float(np.sum((np.roll(out.pts, -s, axis=0) - norm.pts) ** 2))
            if cost < best_cost:
                best_shift, best_cost = s, cost
        out = Polygon(np.roll(out.pts, -best_shift, axis=0))
    return out


def boundary_hausdorff(p: Polygon, q: Polygon, samples_per_edge: int = 64) -> float:
    """Symmetric Hausdorff distance between polygon boundaries, estimated by
    densely sampling each boundary and measuring exact point-to-segment
    distances to the other."""

    def directed(src: Polygon, dst: Polygon) -> float:
        a = src.pts
        b = np.roll(a, -1, axis=0)
        t = np.linspace(0.0, 1.0, samples_per_edge, endpoint=False)
        samples = (a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]).reshape(-1, 2)
        da = dst.pts
        db = np.roll(da, -1, axis=0)
        return float(np.sqrt(_seg_dist_sq_batch(samples, da, db)).max())

    return max(directed(p, q), directed(q, p))
