import numpy as np
import pytest

from polyvis.errors import DegenerateExtent, NoZeroCrossing, TooFewPoints
from polyvis.generators import GenConfig, gen_convex, random_simple_polygon
from polyvis.geometry import PointLocation, Polygon, is_simple, point_in_polygon, signed_area
from polyvis.metrics import edge_confusion
from polyvis.sdf import (
    Frame,
    SdfGrid,
    boundary_hausdorff,
    extract_contour,
    grid_points,
    normalize_unit,
    rasterize_sdf,
    sdf_round_trip,
    signed_distance,
    visvalingam_simplify,
)
from polyvis.visibility import visibility_graph

from conftest import closed_membership


class TestNormalizeUnit:
    def test_square_with_margin(self, unit_square):
        norm, frame = normalize_unit(unit_square, margin=0.05)
        assert np.allclose(norm.pts.min(axis=0), [0.05, 0.05])
        assert np.allclose(norm.pts.max(axis=0), [0.95, 0.95])

    def test_identity_up_to_margin(self):
        poly = Polygon([(0.05, 0.05), (0.95, 0.05), (0.95, 0.95), (0.05, 0.95)])
        norm, frame = normalize_unit(poly, margin=0.05)
        assert np.allclose(norm.pts, poly.pts)
        assert frame.scale == pytest.approx(1.0)

    def test_tall_thin_centered_in_x(self):
        poly = Polygon([(0, 0), (0.2, 0), (0.2, 2.0), (0, 2.0)])
        norm, _ = normalize_unit(poly)
        lo, hi = norm.pts.min(axis=0), norm.pts.max(axis=0)
        assert hi[1] == pytest.approx(0.95) and lo[1] == pytest.approx(0.05)
        assert (lo[0] + hi[0]) / 2 == pytest.approx(0.5)

    def test_degenerate_extent(self):
        with pytest.raises(DegenerateExtent):
            normalize_unit(Polygon([(0, 0), (0, 1), (0, 2)]))

    def test_frame_invertible(self):
        poly = random_simple_polygon(GenConfig(n=25, seed=1))
        norm, frame = normalize_unit(poly)
        assert np.allclose(frame.from_unit(norm.pts), poly.pts, atol=1e-12)


class TestSignedDistance:
    def test_square_center_value(self, unit_square):
        norm, _ = normalize_unit(unit_square, margin=0.05)
        val = signed_distance(norm, [(0.5, 0.5)])[0]
        assert val == pytest.approx(-0.45, abs=1e-9)

    def test_boundary_zero(self, unit_square):
        norm, _ = normalize_unit(unit_square, margin=0.05)
        assert signed_distance(norm, [(0.05, 0.5)])[0] == pytest.approx(0.0, abs=1e-12)

    def test_outside_positive_matches_dense_boundary_sampling(self):
        # DERIVED oracle: min distance to 200k points sampled on the boundary
        poly = random_simple_polygon(GenConfig(n=25, seed=5))
        norm, _ = normalize_unit(poly)
        query = np.array([(0.0125, 0.0125), (0.9875, 0.0125), (0.5, 0.9875)])
        a = norm.pts
        b = np.roll(a, -1, axis=0)
        t = np.linspace(0, 1, 8000, endpoint=False)
        dense = (a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]).reshape(-1, 2)
        for q in query:
            brute = np.linalg.norm(dense - q, axis=1).min()
            got = signed_distance(norm, [q])[0]
            assert got == pytest.approx(brute, abs=1e-4)
            inside = closed_membership(q[None, :], norm.pts)[0]
            assert (got < 0) == bool(inside)


class TestRasterize:
    def test_sign_agrees_with_point_in_polygon(self):
        for seed in range(5):
            poly = random_simple_polygon(GenConfig(n=25, seed=seed))
            norm, _ = normalize_unit(poly)
            grid = rasterize_sdf(norm, 40)
            values = grid.values.ravel()
            for p, v in zip(grid_points(40), values):
                loc = point_in_polygon(p, norm)
                if loc is PointLocation.BOUNDARY:
                    continue
                assert (v < 0) == (loc is PointLocation.INSIDE)

    def test_lipschitz(self):
        poly = random_simple_polygon(GenConfig(n=25, seed=9))
        norm, _ = normalize_unit(poly)
        v = rasterize_sdf(norm, 40).values
        cw = 1.0 / 40
        assert np.abs(np.diff(v, axis=0)).max() <= cw + 1e-12
        assert np.abs(np.diff(v, axis=1)).max() <= cw + 1e-12
        diag1 = np.abs(v[1:, 1:] - v[:-1, :-1]).max()
        diag2 = np.abs(v[1:, :-1] - v[:-1, 1:]).max()
        assert max(diag1, diag2) <= cw * np.sqrt(2) + 1e-12

    def test_negative_cells_present(self):
        poly = random_simple_polygon(GenConfig(n=25, seed=10))
        norm, _ = normalize_unit(poly)
        grid = rasterize_sdf(norm, 40)
        assert np.any(grid.values < 0)

    def test_values_bounded_by_grid_diagonal(self):
        for seed in (11, 12):
            poly = random_simple_polygon(GenConfig(n=25, seed=seed))
            norm, _ = normalize_unit(poly)
            grid = rasterize_sdf(norm, 40)
            assert np.abs(grid.values).max() <= np.sqrt(2.0)

    def test_grid_layout(self):
        # values[iy, ix] samples ((ix+.5)/res, (iy+.5)/res)
        tri = Polygon([(0.1, 0.1), (0.9, 0.1), (0.5, 0.3)])
        grid = rasterize_sdf(tri, 20)
        lowest_row_inside = np.any(grid.values[2:5] < 0)
        top_row_inside = np.any(grid.values[15:] < 0)
        assert lowest_row_inside and not top_row_inside


class TestStorage:
    def test_save_load_round_trip(self, tmp_path):
        poly = random_simple_polygon(GenConfig(n=25, seed=3))
        norm, frame = normalize_unit(poly)
        grid = rasterize_sdf(norm, 40, frame)
        path = tmp_path / "g.sdf"
        grid.save(path)
        loaded = SdfGrid.load(path)
        assert loaded.res == 40
        assert np.allclose(loaded.values, grid.values, atol=1e-6)  # float32 storage
        assert loaded.frame.scale == pytest.approx(frame.scale)

    def test_header(self, tmp_path):
        poly = gen_convex(10, np.random.default_rng(0))
        norm, frame = normalize_unit(poly)
        grid = rasterize_sdf(norm, 16, frame)
        path = tmp_path / "g.sdf"
        grid.save(path)
        raw = path.read_bytes()
        assert raw[:4] == b"PVSD"
        assert len(raw) == 16 + 16 * 16 * 4

    def test_pgm(self, tmp_path):
        poly = gen_convex(10, np.random.default_rng(0))
        norm, _ = normalize_unit(poly)
        grid = rasterize_sdf(norm, 16)
        grid.to_pgm(tmp_path / "g.pgm")
        head = (tmp_path / "g.pgm").read_bytes()[:20]
        assert head.startswith(b"P5\n16 16\n255\n")


class TestExtractContour:
    def test_convex_contour_closed_ccw(self):
        poly = gen_convex(25, np.random.default_rng(1))
        norm, _ = normalize_unit(poly)
        line = extract_contour(rasterize_sdf(norm, 40))
        assert len(line) >= 3
        x, y = line[:, 0], line[:, 1]
        area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        assert area > 0

    def test_square_contour_within_half_cell(self, unit_square):
        norm, _ = normalize_unit(unit_square)
        line = extract_contour(rasterize_sdf(norm, 40))
        h = boundary_hausdorff(Polygon(line), norm)
        assert h <= 0.5 / 40

    def test_uniform_sign_raises(self):
        grid = SdfGrid(res=8, values=np.full((8, 8), 0.3), frame=Frame.identity())
        with pytest.raises(NoZeroCrossing):
            extract_contour(grid)
        grid = SdfGrid(res=8, values=np.full((8, 8), -0.3), frame=Frame.identity())
        with pytest.raises(NoZeroCrossing):
            extract_contour(grid)

    def test_sliver_thinner_than_cell_raises(self):
        sliver = Polygon([(0.1, 0.49999), (0.9, 0.49999), (0.9, 0.50001), (0.1, 0.50001)])
        grid = rasterize_sdf(sliver, 40)
        with pytest.raises(NoZeroCrossing):
            extract_contour(grid)

    def test_largest_component_returned(self):
        # two blobs: a big square and a small one; contour follows the big one
        v = np.full((40, 40), 0.1)
        v[5:20, 5:20] = -0.1
        v[30:33, 30:33] = -0.1
        grid = SdfGrid(res=40, values=v, frame=Frame.identity())
        line = extract_contour(grid)
        assert line[:, 0].max() < 0.8


class TestVisvalingam:
    def test_identity_when_k_equals_len(self):
        poly = gen_convex(25, np.random.default_rng(2))
        out = visvalingam_simplify(poly.pts, 25)
        assert np.array_equal(out.pts, poly.pts)

    def test_too_few_points(self):
        with pytest.raises(TooFewPoints):
            visvalingam_simplify([(0, 0), (1, 0), (0, 1)], 4)

    def test_circle_simplification_even_spacing(self):
        # DERIVED: equal-area ties thin the ring near-uniformly
        ang = np.linspace(0, 2 * np.pi, 100, endpoint=False)
        circle = np.column_stack([np.cos(ang), np.sin(ang)])
        out = visvalingam_simplify(circle, 25)
        assert out.n == 25
        d = np.linalg.norm(out.pts - np.roll(out.pts, -1, axis=0), axis=1)
        assert d.max() / d.min() < 2.0

    def test_collinear_points_removed_first(self):
        # square traced with 4 corners + 24 collinear points per side
        corners = [(0, 0), (1, 0), (1, 1), (0, 1)]
        pts = []
        for a, b in zip(corners, corners[1:] + corners[:1]):
            for t in np.linspace(0, 1, 25, endpoint=False):
                pts.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
        out = visvalingam_simplify(pts, 4)
        got = sorted(map(tuple, out.pts))
        assert got == sorted(corners)

    def test_output_simple_and_exact_k(self):
        for seed in range(8):
            poly = random_simple_polygon(GenConfig(n=25, seed=40 + seed))
            norm, _ = normalize_unit(poly)
            line = extract_contour(rasterize_sdf(norm, 40))
            out = visvalingam_simplify(line, 25)
            assert out.n == 25
            assert is_simple(out)
            assert signed_area(out) > 0

    def test_never_increases_count(self):
        ang = np.linspace(0, 2 * np.pi, 60, endpoint=False)
        ring = np.column_stack([np.cos(ang), np.sin(ang)])
        for k in (59, 30, 10, 3):
            assert visvalingam_simplify(ring, k).n == k


class TestRoundTrip:
    def test_convex_f1(self):
        # DERIVED: features of a convex 25-gon are grid-resolvable
        poly = gen_convex(25, np.random.default_rng(4))
        norm, _ = normalize_unit(poly)
        out = sdf_round_trip(poly, 40, 25)
        f1 = edge_confusion(visibility_graph(out), visibility_graph(norm)).f1
        assert f1 >= 0.95

    def test_square_hausdorff(self, unit_square):
        norm, _ = normalize_unit(unit_square)
        out = sdf_round_trip(unit_square, 40, 25)
        assert out.n == 25
        assert boundary_hausdorff(out, norm) <= 2.0 / 40

    def test_output_contract(self):
        poly = random_simple_polygon(GenConfig(n=25, seed=55))
        out = sdf_round_trip(poly, 40, 25)
        assert out.n == 25 and is_simple(out) and signed_area(out) > 0

    def test_alignment_shift_reduces_distance(self):
        poly = gen_convex(25, np.random.default_rng(6))
        norm, _ = normalize_unit(poly)
        aligned = sdf_round_trip(poly, 40, 25, align=True)
        raw = sdf_round_trip(poly, 40, 25, align=False)
        cost = lambda q: float(np.sum((q.pts - norm.pts) ** 2))
        assert cost(aligned) <= cost(raw) + 1e-12


class TestHausdorff:
    def test_identical_zero(self, unit_square):
        assert boundary_hausdorff(unit_square, unit_square) == 0.0

    def test_concentric_squares(self):
        a = Polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
        b = Polygon([(0.1, 0.1), (0.9, 0.1), (0.9, 0.9), (0.1, 0.9)])
        assert boundary_hausdorff(a, b, samples_per_edge=256) == pytest.approx(
            np.sqrt(2) * 0.1, abs=2e-3
        )
