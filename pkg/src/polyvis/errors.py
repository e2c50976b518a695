"""Exception hierarchy shared by all polyvis modules."""


class PolyvisError(Exception):
    """Base class for all library errors."""


class InvalidPolygon(PolyvisError):
    """Vertex data cannot form a polygon (too few points, NaN, repeats)."""


class NonSimpleInput(PolyvisError):
    """Operation requires a simple polygon and the input self-intersects."""


class HoleNotInside(PolyvisError):
    """Hole boundary is not strictly interior to (or crosses) the outer polygon."""


class InvalidGraph(PolyvisError):
    """Adjacency matrix is not a valid undirected graph over polygon vertices."""


class IterationLimit(PolyvisError):
    """2-opt untangling did not reach a simple polygon within the iteration budget."""


class ClassConstructionFailed(PolyvisError):
    """A typed polygon generator exhausted its retries without a certified instance."""


class AugmentExhausted(PolyvisError):
    """No graph-preserving augmentation found within the attempt budget."""


class DegenerateExtent(PolyvisError):
    """Polygon bounding box has zero width or height."""


class NoZeroCrossing(PolyvisError):
    """Scalar field has uniform sign, no contour to extract."""


class TooFewPoints(PolyvisError):
    """Polyline is shorter than the requested simplification target."""


class InvalidTriangulation(PolyvisError):
    """Diagonal set does not describe a triangulation of the polygon."""


class NotFlippable(PolyvisError):
    """The two triangles adjacent to the diagonal form a non-convex quadrilateral."""


class UnknownDiagonal(PolyvisError):
    """Requested diagonal is not part of the triangulation."""


class SizeMismatch(PolyvisError):
    """Operands have different vertex counts."""


class EmptyInput(PolyvisError):
    """Operation requires at least one element."""


class InsufficientPool(PolyvisError):
    """A link-diameter bucket cannot supply the requested test reserve."""
