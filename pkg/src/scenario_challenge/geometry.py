"""Small 2-D convex polygon and rectangle kernel.

Polygons live in a (position, velocity) plane for one axis of the
point-mass model; rectangles live in the (s, t) position plane.
Degenerate polygons (a single point, a segment) are valid values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

EPS = 1e-9

Point = Tuple[float, float]


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with counter-clockwise vertices."""

    vertices: Tuple[Point, ...]

    def __post_init__(self) -> None:
        if not self.vertices:
            raise ValueError("polygon needs at least one vertex")

    @classmethod
    def point(cls, x: float, y: float) -> "ConvexPolygon":
        return cls(((float(x), float(y)),))

    @classmethod
    def box(cls, x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> "ConvexPolygon":
        return convex_hull([(x_lo, y_lo), (x_hi, y_lo), (x_hi, y_hi), (x_lo, y_hi)])

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def area(self) -> float:
        v = self.vertices
        if len(v) < 3:
            return 0.0
        total = 0.0
        for i in range(len(v)):
            x0, y0 = v[i]
            x1, y1 = v[(i + 1) % len(v)]
            total += x0 * y1 - x1 * y0
        return 0.5 * total

    def contains(self, p: Point, tol: float = 1e-7) -> bool:
        """Closed membership test with an absolute distance tolerance."""
        v = self.vertices
        if len(v) == 1:
            return abs(p[0] - v[0][0]) <= tol and abs(p[1] - v[0][1]) <= tol
        if len(v) == 2:
            return _point_segment_distance(p, v[0], v[1]) <= tol
        for i in range(len(v)):
            a = v[i]
            b = v[(i + 1) % len(v)]
            ex, ey = b[0] - a[0], b[1] - a[1]
            length = (ex * ex + ey * ey) ** 0.5
            # signed distance to the left of edge a->b
            if (ex * (p[1] - a[1]) - ey * (p[0] - a[0])) / length < -tol:
                return False
        return True


def _point_segment_distance(p: Point, a: Point, b: Point) -> float:
    ex, ey = b[0] - a[0], b[1] - a[1]
    denom = ex * ex + ey * ey
    u = 0.0 if denom == 0.0 else ((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / denom
    u = min(1.0, max(0.0, u))
    dx = p[0] - (a[0] + u * ex)
    dy = p[1] - (a[1] + u * ey)
    return (dx * dx + dy * dy) ** 0.5


def convex_hull(points: Iterable[Point]) -> ConvexPolygon:
    """Andrew's monotone chain; collinear and near-duplicate points dropped."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if not pts:
        raise ValueError("convex hull of an empty point set")
    # x-values within EPS share one sort key, so near-vertical point sets
    # are ordered along y and the collinearity tolerance cannot drop extremes
    keyed = []
    anchor = pts[0][0]
    for p in pts:
        if p[0] - anchor > EPS:
            anchor = p[0]
        keyed.append((anchor, p[1], p))
    pts = [p for _, _, p in sorted(keyed)]
    merged = [pts[0]]
    for p in pts[1:]:
        q = merged[-1]
        if abs(p[0] - q[0]) <= EPS and abs(p[1] - q[1]) <= EPS:
            continue
        merged.append(p)
    pts = merged
    if len(pts) == 1:
        return ConvexPolygon((pts[0],))

    def half(seq: Sequence[Point]) -> list:
        chain: list = []
        for p in seq:
            while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) <= EPS:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(list(reversed(pts)))
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        hull = hull[:1]
    return ConvexPolygon(tuple(hull))


def shear_time(poly: ConvexPolygon, dt: float) -> ConvexPolygon:
    """Apply the free-motion map (p, v) -> (p + v*dt, v)."""
    if dt == 0:
        return poly
    # unit-determinant linear map keeps orientation and convexity
    return ConvexPolygon(tuple((p + v * dt, v) for p, v in poly.vertices))


def minkowski_segment(poly: ConvexPolygon, e0: Point, e1: Point) -> ConvexPolygon:
    """Minkowski sum of ``poly`` with the segment from ``e0`` to ``e1``."""
    if abs(e0[0] - e1[0]) <= EPS and abs(e0[1] - e1[1]) <= EPS:
        if abs(e0[0]) <= EPS and abs(e0[1]) <= EPS:
            return poly
        return ConvexPolygon(tuple((x + e0[0], y + e0[1]) for x, y in poly.vertices))
    pts = [(x + e0[0], y + e0[1]) for x, y in poly.vertices]
    pts += [(x + e1[0], y + e1[1]) for x, y in poly.vertices]
    return convex_hull(pts)


def clip_halfplane(poly: ConvexPolygon, a: Point, b: float) -> Optional[ConvexPolygon]:
    """Intersect ``poly`` with {q : a . q <= b}; ``None`` when empty."""
    v = poly.vertices
    vals = [a[0] * x + a[1] * y - b for x, y in v]
    if all(d <= EPS for d in vals):
        return poly
    if all(d > EPS for d in vals):
        return None
    n = len(v)
    if n == 1:
        return poly if vals[0] <= EPS else None
    out = []
    # treat a segment as a closed 2-cycle; duplicates are removed by the hull
    for i in range(n):
        p, dp = v[i], vals[i]
        q, dq = v[(i + 1) % n], vals[(i + 1) % n]
        if dp <= EPS:
            out.append(p)
        if (dp < -EPS and dq > EPS) or (dp > EPS and dq < -EPS):
            u = dp / (dp - dq)
            out.append((p[0] + u * (q[0] - p[0]), p[1] + u * (q[1] - p[1])))
    if not out:
        return None
    return convex_hull(out)


def clip_axis(poly: ConvexPolygon, axis: int, lo: float, hi: float) -> Optional[ConvexPolygon]:
    """Clip to lo <= coordinate[axis] <= hi."""
    normal_hi = (1.0, 0.0) if axis == 0 else (0.0, 1.0)
    normal_lo = (-1.0, 0.0) if axis == 0 else (0.0, -1.0)
    out = clip_halfplane(poly, normal_hi, hi)
    if out is None:
        return None
    return clip_halfplane(out, normal_lo, -lo)


def project_interval(poly: Optional[ConvexPolygon], axis: str) -> Tuple[float, float]:
    if poly is None:
        raise ValueError("cannot project an empty polygon")
    i = {"x": 0, "y": 1}[axis]
    coords = [vtx[i] for vtx in poly.vertices]
    return min(coords), max(coords)


@dataclass(frozen=True, order=True)
class Rect:
    """Closed axis-aligned rectangle [x_lo, x_hi] x [y_lo, y_hi]."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self) -> None:
        if self.x_lo > self.x_hi or self.y_lo > self.y_hi:
            raise ValueError(f"inverted rectangle {self}")

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def height(self) -> float:
        return self.y_hi - self.y_lo

    @property
    def area(self) -> float:
        return self.width * self.height

    def intersection(self, other: "Rect") -> Optional["Rect"]:
        x_lo = max(self.x_lo, other.x_lo)
        x_hi = min(self.x_hi, other.x_hi)
        y_lo = max(self.y_lo, other.y_lo)
        y_hi = min(self.y_hi, other.y_hi)
        if x_lo > x_hi or y_lo > y_hi:
            return None
        return Rect(x_lo, x_hi, y_lo, y_hi)

    def overlap_area(self, other: "Rect") -> float:
        w = min(self.x_hi, other.x_hi) - max(self.x_lo, other.x_lo)
        h = min(self.y_hi, other.y_hi) - max(self.y_lo, other.y_lo)
        if w <= 0 or h <= 0:
            return 0.0
        return w * h

    def contains(self, x: float, y: float, tol: float = 0.0) -> bool:
        return (self.x_lo - tol <= x <= self.x_hi + tol
                and self.y_lo - tol <= y <= self.y_hi + tol)


def rect_subtract_split(cell: Rect, hole: Rect) -> list:
    """Guillotine decomposition of ``cell`` minus ``hole``.

    Pieces come out as left slab, right slab, then the bottom and top
    slabs of the overlap column. Pieces of zero width or height are dropped.
    """
    inter = cell.intersection(hole)
    if inter is None or inter.width <= 0 or inter.height <= 0:
        return [cell]
    pieces = []
    if inter.x_lo > cell.x_lo:
        pieces.append(Rect(cell.x_lo, inter.x_lo, cell.y_lo, cell.y_hi))
    if inter.x_hi < cell.x_hi:
        pieces.append(Rect(inter.x_hi, cell.x_hi, cell.y_lo, cell.y_hi))
    if inter.y_lo > cell.y_lo:
        pieces.append(Rect(inter.x_lo, inter.x_hi, cell.y_lo, inter.y_lo))
    if inter.y_hi < cell.y_hi:
        pieces.append(Rect(inter.x_lo, inter.x_hi, inter.y_hi, cell.y_hi))
    return pieces
