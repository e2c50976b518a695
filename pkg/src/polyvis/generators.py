"""Random simple polygons, typed polygon families, and augmentations.

All generators take an explicit numpy Generator (or a seed via config) and
are deterministic under a fixed seed. The canvas is the square [-1, 1]^2;
generators either stay inside it by construction or renormalize into it
with a similarity transform, which leaves visibility graphs untouched.

Typed families ship with certificate checkers:

* star     -- a kernel point sees every vertex
* terrain  -- x-monotone boundary (vertical lines cross it at most twice)
* fan      -- vertex 0 (the apex) sees every vertex
* spiral   -- link diameter of the visibility graph above a floor
* anchor   -- two concave bays joined by a convex arc; certified simple only
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AugmentExhausted, ClassConstructionFailed, InvalidPolygon, IterationLimit
from .geometry import (
    Polygon,
    _segment_contained,
    centroid,
    ensure_ccw,
    is_simple,
    orient,
    signed_area,
)
from .visibility import VisGraph, link_diameter, visibility_graph

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GenConfig:
    """Knobs for the 2-opt random polygon generator."""

    n: int = 25
    seed: int | None = None
    max_2opt_iters: int | None = None  # None -> 100 * n^2
    canvas_halfwidth: float = 1.0

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("n must be >= 3")
        if self.max_2opt_iters is not None and self.max_2opt_iters < self.n * self.n:
            raise ValueError("max_2opt_iters must be >= n^2")
        if self.canvas_halfwidth <= 0:
            raise ValueError("canvas_halfwidth must be positive")

    @property
    def iter_budget(self) -> int:
        return self.max_2opt_iters if self.max_2opt_iters is not None else 100 * self.n * self.n

    @classmethod
    def from_dict(cls, d: dict) -> "GenConfig":
        return cls(**{k: d[k] for k in ("n", "seed", "max_2opt_iters", "canvas_halfwidth") if k in d})


@dataclass(frozen=True)
class AugmentConfig:
    """Knobs for graph-preserving shear + perturbation augmentation.

    Polygons with near-degenerate sightlines reject full-strength
    perturbations almost surely, so the rejection loop anneals sigma by
    `sigma_decay` every `decay_every` attempts (decay 1.0 disables this and
    keeps a flat sigma). Shear alone preserves the graph exactly, so the
    annealed loop practically always lands a copy.
    """

    shear_range: tuple[float, float] = (-0.5, 0.5)
    perturb_sigma: float = 0.01
    max_attempts: int = 200
    copies: int = 20
    sigma_decay: float = 0.5
    decay_every: int = 25

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.copies < 1:
            raise ValueError("copies must be >= 1")
        if self.shear_range[0] > self.shear_range[1]:
            raise ValueError("shear_range must be a (lo, hi) interval")
        if self.perturb_sigma < 0:
            raise ValueError("perturb_sigma must be >= 0")
        if not 0.0 < self.sigma_decay <= 1.0:
            raise ValueError("sigma_decay must lie in (0, 1]")
        if self.decay_every < 1:
            raise ValueError("decay_every must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "AugmentConfig":
        keys = ("perturb_sigma", "max_attempts", "copies", "sigma_decay", "decay_every")
        kw = {k: d[k] for k in keys if k in d}
        if "shear_range" in d:
            kw["shear_range"] = tuple(d["shear_range"])
        return cls(**kw)


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def fit_canvas(pts: np.ndarray, halfwidth: float = 1.0) -> np.ndarray:
    """Similarity transform placing the bounding box centered inside the
    canvas square, aspect ratio preserved."""
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1]))
    if span <= 0.0:
        raise InvalidPolygon("degenerate extent")
    scale = 2.0 * halfwidth / span
    center = (lo + hi) / 2.0
    return (pts - center) * scale


def _proper_crossing_pairs(pts: np.ndarray) -> tuple[int, int] | None:
    """First (row-major) pair of non-adjacent edges that properly cross."""
    n = len(pts)
    a = pts
    b = np.roll(pts, -1, axis=0)
    e = b - a
    # cr[i, j] = cross(b_i - a_i, p_j - a_i)
    def cross_to(p):
        return e[:, 0][:, None] * (p[:, 1][None, :] - a[:, 1][:, None]) - e[:, 1][:, None] * (
            p[:, 0][None, :] - a[:, 0][:, None]
        )

    eps = 1e-12
    o1 = cross_to(a)
    o2 = cross_to(b)
    s1 = np.where(o1 > eps, 1, np.where(o1 < -eps, -1, 0))
    s2 = np.where(o2 > eps, 1, np.where(o2 < -eps, -1, 0))
    straddle = s1 * s2 < 0
    proper = straddle & straddle.T
    idx = np.arange(n)
    adjacent = (
        (idx[:, None] == idx[None, :])
        | ((idx[:, None] + 1) % n == idx[None, :])
        | ((idx[None, :] + 1) % n == idx[:, None])
    )
    proper &= ~adjacent
    proper &= idx[:, None] < idx[None, :]
    if not proper.any():
        return None
    i, j = np.unravel_index(int(np.argmax(proper)), proper.shape)
    return int(i), int(j)


def two_opt_untangle(points: np.ndarray, max_iters: int) -> np.ndarray:
    """Remove edge crossings by reversing the sub-chain between crossing
    edges until none remain. Total tour length strictly decreases with each
    reversal, so this terminates on non-degenerate input."""
    pts = np.array(points, dtype=np.float64)
    for _ in range(max_iters):
        hit = _proper_crossing_pairs(pts)
        if hit is None:
            return pts
        i, j = hit
        pts[i + 1 : j + 1] = pts[i + 1 : j + 1][::-1]
    raise IterationLimit(f"2-opt did not untangle within {max_iters} reversals")


def random_simple_polygon(cfg: GenConfig, rng=None) -> Polygon:
    """Simple anticlockwise polygon on n points drawn uniformly from the
    canvas, untangled with 2-opt moves. The vertex multiset equals the
    initial draw; only the order changes."""
    rng = _as_rng(rng if rng is not None else cfg.seed)
    hw = cfg.canvas_halfwidth
    pts = rng.uniform(-hw, hw, size=(cfg.n, 2))
    pts = two_opt_untangle(pts, cfg.iter_budget)
    poly = ensure_ccw(Polygon(pts))
    if not is_simple(poly):
        # collinear/overlap degeneracies invisible to the proper-crossing scan
        raise IterationLimit("2-opt produced a degenerate non-simple polygon")
    return poly


# ---------------------------------------------------------------------------
# typed out-of-distribution families


def _spaced_sorted(rng, count: int, lo: float, hi: float, min_gap_frac: float = 0.2,
                   circular: bool | None = None) -> np.ndarray:
    """Sorted angles in [lo, hi) with guaranteed minimum spacing of
    min_gap_frac times the mean gap (including the wrap-around gap when the
    range is a full turn)."""
    span = hi - lo
    if circular is None:
        circular = abs(span - _TWO_PI) < 1e-9
    gaps = count if circular else count - 1
    min_gap = min_gap_frac * span / count
    slack = span - gaps * min_gap
    u = np.sort(rng.uniform(0.0, slack, size=count))
    return lo + u + min_gap * np.arange(count)


def star_kernel_certificate(poly: Polygon, kernel) -> bool:
    """True iff the kernel point sees every vertex of the polygon."""
    pts = poly.coords()
    k = (float(kernel[0]), float(kernel[1]))
    return all(_segment_contained(pts, k, pts[i], exclude=(i,)) for i in range(len(pts)))


def fan_apex_certificate(poly: Polygon, apex_index: int = 0) -> bool:
    """True iff the apex vertex sees every other vertex."""
    pts = poly.coords()
    n = len(pts)
    i = apex_index
    return all(
        _segment_contained(pts, pts[i], pts[j], exclude=(i, j)) for j in range(n) if j != i
    )


def is_x_monotone(poly: Polygon) -> bool:
    """Boundary meets every vertical line at most twice, i.e. the cyclic
    x-coordinate sequence reverses direction exactly twice."""
    x = poly.pts[:, 0]
    dx = np.roll(x, -1) - x
    signs = np.sign(dx)
    if np.any(signs == 0):
        return False  # vertical edge: strict monotonicity violated
    changes = int(np.sum(signs != np.roll(signs, -1)))
    return changes == 2


def gen_star(n: int, rng=None, return_kernel: bool = False):
    """Star polygon: all vertices are visible from a common kernel point."""
    if n < 5:
        raise ValueError("typed generators require n >= 5")
    rng = _as_rng(rng)
    for _ in range(50):
        kernel = rng.uniform(-0.12, 0.12, size=2)
        angles = _spaced_sorted(rng, n, 0.0, _TWO_PI)
        radii = rng.uniform(0.25, 0.82, size=n)
        pts = kernel + radii[:, None] * np.column_stack([np.cos(angles), np.sin(angles)])
        poly = ensure_ccw(Polygon(pts))
        if is_simple(poly) and star_kernel_certificate(poly, kernel):
            return (poly, kernel) if return_kernel else poly
    raise ClassConstructionFailed("star generator exhausted retries")


def gen_terrain(n: int, rng=None) -> Polygon:
    """X-monotone polygon: a strictly increasing height chain closed by a
    single base edge."""
    if n < 5:
        raise ValueError("typed generators require n >= 5")
    rng = _as_rng(rng)
    for _ in range(50):
        xs = _spaced_sorted(rng, n, -0.95, 0.95, circular=False)
        # alternate low/high ridges for a jagged skyline
        ys = np.where(
            np.arange(n) % 2 == 0,
            rng.uniform(0.06, 0.35, size=n),
            rng.uniform(0.55, 0.95, size=n),
        )
        ys[0] = ys[-1] = 0.0
        pts = np.column_stack([xs, ys - 0.45])
        poly = ensure_ccw(Polygon(pts))
        if is_simple(poly) and is_x_monotone(poly):
            return poly
    raise ClassConstructionFailed("terrain generator exhausted retries")


def gen_convex(n: int, rng=None) -> Polygon:
    """Strictly convex polygon: well-spaced random angles on a circle (the
    same convex chain the fan generator is built from, closed up)."""
    if n < 3:
        raise ValueError("n must be >= 3")
    rng = _as_rng(rng)
    angles = _spaced_sorted(rng, n, 0.0, _TWO_PI, min_gap_frac=0.25)
    pts = 0.85 * np.column_stack([np.cos(angles), np.sin(angles)])
    return ensure_ccw(Polygon(pts))


def gen_convex_fan(n: int, rng=None) -> Polygon:
    """Convex-fan polygon: a single convex apex (vertex 0) that sees every
    vertex; the chain sags toward the apex so its interior vertices are
    reflex and every triangulation fans out of the apex."""
    if n < 5:
        raise ValueError("typed generators require n >= 5")
    rng = _as_rng(rng)
    apex = np.array([0.0, -0.6])
    for _ in range(50):
        half = math.radians(rng.uniform(40.0, 55.0))
        psi = _spaced_sorted(rng, n - 1, math.pi / 2 - half, math.pi / 2 + half)
        s = (psi - psi[0]) / (psi[-1] - psi[0])
        sag = rng.uniform(0.10, 0.20)
        rho = 1.1 * (1.0 - sag * np.sin(math.pi * s)) * (1.0 + rng.uniform(-0.03, 0.03, n - 1))
        chain = apex + rho[:, None] * np.column_stack([np.cos(psi), np.sin(psi)])
        poly = ensure_ccw(Polygon(np.vstack([apex, chain])))
        if is_simple(poly) and fan_apex_certificate(poly, 0):
            return poly
    raise ClassConstructionFailed("fan generator exhausted retries")


def gen_spiral(n: int, rng=None, min_diameter: int = 6) -> Polygon:
    """Spiral polygon: a wound corridor with a long link diameter."""
    if n < 5:
        raise ValueError("typed generators require n >= 5")
    rng = _as_rng(rng)
    for windings in (2.25, 2.75, 3.25, 1.75, 2.5):
        for _ in range(20):
            poly = _spiral_attempt(n, rng, windings)
            if poly is None:
                continue
            if link_diameter(visibility_graph(poly)) >= min_diameter:
                return poly
    raise ClassConstructionFailed("spiral generator exhausted retries")


def _spiral_attempt(n: int, rng, windings: float) -> Polygon | None:
    m_out = (n + 1) // 2
    m_in = n - m_out
    total = windings * _TWO_PI
    r0 = 0.12
    c = (0.88 - r0) / total
    gap = rng.uniform(0.4, 0.55) * _TWO_PI * c

    theta_out = np.linspace(0.0, total, m_out)
    theta_out[1:-1] += rng.uniform(-0.15, 0.15, m_out - 2) * (total / m_out)
    r_out = r0 + c * theta_out
    outer = r_out[:, None] * np.column_stack([np.cos(theta_out), np.sin(theta_out)])

    mouth = 0.35 * _TWO_PI / max(windings, 1.0)
    theta_in = np.linspace(total, mouth, m_in)
    theta_in[1:-1] += rng.uniform(-0.15, 0.15, m_in - 2) * (total / max(m_in, 1))
    r_in = r0 + c * theta_in - gap
    if np.any(r_in <= 0.02):
        return None
    inner = r_in[:, None] * np.column_stack([np.cos(theta_in), np.sin(theta_in)])

    try:
        poly = ensure_ccw(Polygon(np.vstack([outer, inner])))
    except InvalidPolygon:
        return None
    return poly if is_simple(poly) else None


def _reflex_runs(poly: Polygon) -> int:
    """Number of maximal runs of reflex vertices around the boundary."""
    pts = poly.coords()
    n = len(pts)
    reflex = [orient(pts[i - 1], pts[i], pts[(i + 1) % n]) < 0 for i in range(n)]
    return sum(1 for i in range(n) if reflex[i] and not reflex[i - 1])


def gen_anchor(n: int, rng=None) -> Polygon:
    """Anchor polygon: a horseshoe corridor whose inner wall carries a convex
    pinch, giving two reflex chains (the flukes) joined through the convex
    outer arc."""
    if n < 5:
        raise ValueError("typed generators require n >= 5")
    rng = _as_rng(rng)
    for _ in range(50):
        mouth = math.radians(rng.uniform(30.0, 42.0))
        a0 = math.pi / 2 + mouth
        a1 = math.pi / 2 + _TWO_PI - mouth
        m_out = max(4, int(round(n * 0.55)))
        m_in = n - m_out
        theta_out = _spaced_sorted(rng, m_out, a0, a1, circular=False)
        theta_in = _spaced_sorted(rng, m_in, a0, a1, circular=False)[::-1]
        r_out = 0.82 * (1.0 + rng.uniform(-0.02, 0.02, m_out))
        mid = (a0 + a1) / 2.0
        pinch = rng.uniform(0.14, 0.2)
        shape = np.cos((theta_in - mid) / (a1 - a0) * math.pi) ** 2
        r_in = (0.45 + pinch * shape) * (1.0 + rng.uniform(-0.02, 0.02, m_in))
        outer = r_out[:, None] * np.column_stack([np.cos(theta_out), np.sin(theta_out)])
        inner = r_in[:, None] * np.column_stack([np.cos(theta_in), np.sin(theta_in)])
        poly = ensure_ccw(Polygon(np.vstack([outer, inner])))
        if is_simple(poly) and _reflex_runs(poly) >= 2:
            return poly
    raise ClassConstructionFailed("anchor generator exhausted retries")


# ---------------------------------------------------------------------------
# visibility-preserving augmentation


def augment(poly: Polygon, cfg: AugmentConfig, rng=None) -> list[Polygon]:
    """Shear + per-vertex Gaussian perturbation, rejection-sampled until each
    copy has a visibility graph bit-identical to the source polygon's.

    Output polygons are simple, anticlockwise, renormalized into the canvas,
    and keep 1:1 vertex index correspondence with the (CCW-normalized)
    input. Raises AugmentExhausted when a copy cannot be produced within
    `cfg.max_attempts`; reduce perturb_sigma in that case.
    """
    rng = _as_rng(rng)
    poly = ensure_ccw(poly)
    target = visibility_graph(poly)
    out: list[Polygon] = []
    for copy_idx in range(cfg.copies):
        ok = False
        for attempt in range(cfg.max_attempts):
            sigma = cfg.perturb_sigma * cfg.sigma_decay ** (attempt // cfg.decay_every)
            s = rng.uniform(cfg.shear_range[0], cfg.shear_range[1])
            pts = poly.pts.copy()
            pts[:, 0] += s * pts[:, 1]
            if sigma > 0.0:
                pts += rng.normal(0.0, sigma, size=pts.shape)
            try:
                cand = Polygon(fit_canvas(pts))
            except InvalidPolygon:
                continue
            if signed_area(cand) <= 0.0 or not is_simple(cand):
                continue
            if visibility_graph(cand) == target:
                out.append(cand)
                ok = True
                break
        if not ok:
            raise AugmentExhausted(
                f"no graph-preserving copy within {cfg.max_attempts} attempts "
                f"(copy {copy_idx + 1}/{cfg.copies})"
            )
    return out


def rotate_augment(poly: Polygon, angle: float) -> Polygon:
    """Rigid rotation about the centroid, renormalized into the canvas.

    A similarity transform, so both the visibility graph and the constrained
    Delaunay diagonal set are unchanged.
    """
    c = centroid(poly)
    ca, sa = math.cos(angle), math.sin(angle)
    rot = np.array([[ca, -sa], [sa, ca]])
    pts = (poly.pts - c) @ rot.T + c
    return Polygon(fit_canvas(pts))
