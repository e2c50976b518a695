"""polyvis: polygon visibility graphs, SDF round-trips, triangulation flip
paths, and the dataset pipeline that ties them together."""

from .errors import PolyvisError
from .geometry import Polygon, PointLocation, ensure_ccw, is_simple, orient, point_in_polygon, segment_visible, signed_area
from .visibility import HolePolygon, VisGraph, graph_density, link_diameter, visibility_graph, visibility_graph_with_hole
from .generators import AugmentConfig, GenConfig, augment, gen_anchor, gen_convex, gen_convex_fan, gen_spiral, gen_star, gen_terrain, random_simple_polygon, rotate_augment
from .sdf import Frame, SdfGrid, boundary_hausdorff, extract_contour, normalize_unit, rasterize_sdf, sdf_round_trip, signed_distance, visvalingam_simplify
from .triangulation import FlipPath, Triangulation, aligned_euclidean_distance, cdt, flip, flip_path, triangulation_graph
from .metrics import EdgeConfusion, RecognitionVerdict, best_of_k, dataset_score, edge_confusion, recognize, threshold_sweep

__version__ = "0.1.0"
