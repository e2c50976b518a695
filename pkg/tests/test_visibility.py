import numpy as np
import pytest

from polyvis.errors import HoleNotInside, InvalidGraph, NonSimpleInput
from polyvis.generators import GenConfig, gen_convex, random_simple_polygon
from polyvis.geometry import Polygon, segment_visible
from polyvis.visibility import (
    HolePolygon,
    VisGraph,
    graph_density,
    link_diameter,
    visibility_graph,
    visibility_graph_with_hole,
)

from conftest import sampling_visible, sampling_visible_with_hole


def random_poly(seed, n=25):
    return random_simple_polygon(GenConfig(n=n, seed=seed))


class TestVisGraphType:
    def test_rejects_asymmetric(self):
        adj = np.zeros((4, 4), dtype=bool)
        adj[0, 1] = True
        with pytest.raises(InvalidGraph):
            VisGraph(adj)

    def test_rejects_self_loop(self):
        adj = np.eye(4, dtype=bool)
        with pytest.raises(InvalidGraph):
            VisGraph(adj)

    def test_rejects_non_square(self):
        with pytest.raises(InvalidGraph):
            VisGraph(np.zeros((3, 4), dtype=bool))

    def test_equality(self):
        assert VisGraph.cycle(10) == VisGraph.cycle(10)
        assert VisGraph.cycle(10) != VisGraph.complete(10)

    def test_b64_round_trip(self):
        g = visibility_graph(random_poly(17))
        assert VisGraph.from_b64(g.n, g.to_b64()) == g

    def test_b64_layout_frozen(self):
        # strict lower triangle, row-major, MSB-first: the 4-cycle rows are
        # (1) (0,1) (1,0,1) -> bits 101101, padded to 0b10110100 = 0xB4
        g = VisGraph.cycle(4)
        assert g.to_b64() == "tA=="


class TestVisibilityGraph:
    def test_triangle_complete(self):
        g = visibility_graph(Polygon([(0, 0), (1, 0), (0, 1)]))
        assert g == VisGraph.complete(3)

    def test_convex_25gon_complete(self):
        g = visibility_graph(gen_convex(25, np.random.default_rng(1)))
        assert g.edge_count() == 300
        assert g == VisGraph.complete(25)

    def test_dart_five_of_six(self, dart):
        g = visibility_graph(dart)
        assert g.edge_count() == 5
        assert g.adj[0, 2] and not g.adj[1, 3]
        for i in range(4):
            for j in range(i + 1, 4):
                assert g.adj[i, j] == sampling_visible(dart.pts, i, j)

    def test_non_simple_rejected(self, bowtie_points):
        with pytest.raises(NonSimpleInput):
            visibility_graph(Polygon(bowtie_points))

    def test_matches_pairwise_predicate(self):
        for seed in (3, 4, 5):
            poly = random_poly(seed)
            g = visibility_graph(poly)
            for i in range(poly.n):
                for j in range(i + 1, poly.n):
                    assert g.adj[i, j] == segment_visible(i, j, poly)

    def test_boundary_cycle_and_symmetry(self):
        for seed in range(10):
            g = visibility_graph(random_poly(seed))
            assert g.has_boundary_cycle()
            assert np.array_equal(g.adj, g.adj.T)
            assert not np.any(np.diag(g.adj))

    def test_similarity_invariance(self):
        poly = random_poly(21)
        base = visibility_graph(poly)
        ang = 0.83
        rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
        assert visibility_graph(Polygon(poly.pts @ rot.T)) == base
        assert visibility_graph(Polygon(poly.pts * 3.7)) == base
        assert visibility_graph(Polygon(poly.pts + [10.0, -4.0])) == base

    def test_shear_invariance(self):
        from polyvis.geometry import is_simple

        poly = random_poly(22)
        base = visibility_graph(poly)
        for s in (-0.4, -0.1, 0.25, 0.5):
            pts = poly.pts.copy()
            pts[:, 0] += s * pts[:, 1]
            sheared = Polygon(pts)
            assert is_simple(sheared)
            assert visibility_graph(sheared) == base


class TestHolePolygon:
    def test_hole_outside_rejected(self, unit_square):
        with pytest.raises(HoleNotInside):
            HolePolygon(unit_square, Polygon([(2, 2), (3, 2), (3, 3)]))

    def test_hole_crossing_boundary_rejected(self, unit_square):
        with pytest.raises(HoleNotInside):
            HolePolygon(unit_square, Polygon([(0.5, 0.5), (1.5, 0.5), (1.5, 0.8)]))

    def test_non_simple_outer_rejected(self, bowtie_points):
        with pytest.raises(NonSimpleInput):
            HolePolygon(Polygon(bowtie_points), Polygon([(0.4, 0.4), (0.6, 0.4), (0.5, 0.6)]))

    def test_orientations_normalized(self, unit_square):
        hp = HolePolygon(unit_square, Polygon([(0.4, 0.4), (0.6, 0.4), (0.5, 0.6)]))
        from polyvis.geometry import signed_area

        assert signed_area(hp.outer) > 0
        assert signed_area(hp.hole) < 0


class TestVisibilityWithHole:
    def test_far_hole_keeps_diagonal(self, unit_square):
        hp = HolePolygon(unit_square, Polygon([(0.1, 0.6), (0.2, 0.6), (0.15, 0.7)]))
        g = visibility_graph_with_hole(hp)
        assert g.adj[0, 2]

    def test_centered_hole_blocks_both_diagonals(self, unit_square):
        hp = HolePolygon(
            unit_square, Polygon([(0.45, 0.45), (0.55, 0.45), (0.55, 0.55), (0.45, 0.55)])
        )
        g = visibility_graph_with_hole(hp)
        assert not g.adj[0, 2]
        assert not g.adj[1, 3]
        assert g.has_boundary_cycle()

    def test_blocked_subset_of_free(self):
        outer = random_poly(30)
        hole = _small_hole_inside(outer, seed=1)
        hp = HolePolygon(outer, hole)
        free = visibility_graph(outer)
        blocked = visibility_graph_with_hole(hp)
        assert np.all(~blocked.adj | free.adj)

    def test_against_sampling_oracle(self):
        outer = random_poly(31)
        hole = _small_hole_inside(outer, seed=2)
        hp = HolePolygon(outer, hole)
        g = visibility_graph_with_hole(hp)
        assert g.has_boundary_cycle()
        assert np.array_equal(g.adj, g.adj.T)
        for i in range(outer.n):
            for j in range(i + 1, outer.n):
                assert g.adj[i, j] == sampling_visible_with_hole(
                    outer.pts, hp.hole.pts, i, j
                ), (i, j)

    def test_vanishing_hole_recovers_free_graph(self):
        from polyvis.geometry import _seg_dist_sq_batch

        outer = random_poly(32)
        free = visibility_graph(outer)
        # place a tiny hole at the interior point farthest from every sightline
        segs_a, segs_b = [], []
        for i in range(outer.n):
            for j in range(i + 1, outer.n):
                if free.adj[i, j]:
                    segs_a.append(outer.pts[i])
                    segs_b.append(outer.pts[j])
        segs_a, segs_b = np.array(segs_a), np.array(segs_b)
        rng = np.random.default_rng(0)
        from polyvis.geometry import PointLocation, point_in_polygon

        best, best_d = None, -1.0
        for _ in range(500):
            c = rng.uniform(-1, 1, 2)
            if point_in_polygon(c, outer) is not PointLocation.INSIDE:
                continue
            d = float(np.sqrt(_seg_dist_sq_batch(c[None, :], segs_a, segs_b)).min())
            if d > best_d:
                best, best_d = c, d
        assert best_d > 1e-3
        r = min(best_d / 4, 1e-4)
        hole = Polygon(best + r * np.array([(1, 0), (-0.5, 0.87), (-0.5, -0.87)]))
        hp = HolePolygon(outer, hole)
        assert visibility_graph_with_hole(hp) == free


def _small_hole_inside(outer, seed) -> Polygon:
    from polyvis.geometry import PointLocation, point_in_polygon
    from polyvis.sdf import signed_distance

    rng = np.random.default_rng(seed)
    while True:
        c = rng.uniform(-0.7, 0.7, 2)
        r = 0.1
        if signed_distance(outer, [c])[0] < -(r + 0.02):
            ang = rng.uniform(0, 2 * np.pi)
            offsets = [
                (np.cos(ang + t), np.sin(ang + t)) for t in (0, 2 * np.pi / 3, 4 * np.pi / 3)
            ]
            return Polygon(c + r * np.array(offsets))


class TestGraphStats:
    def test_complete_density_and_diameter(self):
        g = VisGraph.complete(25)
        assert graph_density(g) == pytest.approx(1.0)
        assert link_diameter(g) == 1

    def test_cycle_density_and_diameter(self):
        g = VisGraph.cycle(25)
        assert graph_density(g) == pytest.approx(25 / 300)
        assert link_diameter(g) == 12

    def test_disconnected_raises(self):
        adj = np.zeros((6, 6), dtype=bool)
        adj[0, 1] = adj[1, 0] = True
        adj[2, 3] = adj[3, 2] = True
        with pytest.raises(InvalidGraph):
            link_diameter(VisGraph(adj))

    def test_diameter_one_iff_complete(self):
        for seed in range(5):
            g = visibility_graph(random_poly(seed, n=12))
            assert (link_diameter(g) == 1) == (g == VisGraph.complete(12))
