"""2D polygon/polyline kernel used by every downstream stage.

All coordinates are millimetres in a fixed page frame: origin at the page
bottom-left corner, y increasing upward.  Internally everything is snapped
to a 1 nm grid so that boolean results are bit-for-bit reproducible and
survive round-trips through 4.6-format Gerber coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import shapely
import shapely.affinity
from shapely.geometry import LineString, MultiPolygon, Point
from shapely.geometry import Polygon as ShapelyPolygon
from shapely.geometry.polygon import orient

from .errors import GeometryError

# Snap grid: 1 nm, matching Gerber 4.6 resolution.
GRID_MM = 1e-6
# Slivers below this area are fabrication noise from snap rounding.
SLIVER_AREA_MM2 = 1e-6
# Arc polygonization: segments per quarter circle; 32 keeps chord error
# under 0.02 mm for every radius used in the pipeline.
QUAD_SEGS = 32


@dataclass(frozen=True)
class Polygon:
    """Simple polygon ring with optional holes, exterior CCW / holes CW."""

    exterior: tuple[tuple[float, float], ...]
    holes: tuple[tuple[tuple[float, float], ...], ...] = ()

    def to_shapely(self) -> ShapelyPolygon:
        return ShapelyPolygon(self.exterior, [list(h) for h in self.holes])

    @property
    def area(self) -> float:
        return self.to_shapely().area

    def bounds(self) -> tuple[float, float, float, float]:
        return self.to_shapely().bounds

    def contains_point(self, x: float, y: float) -> bool:
        return self.to_shapely().covers(Point(x, y))


@dataclass(frozen=True)
class Polyline:
    """Open path with a stroke width (trace centreline + thickness)."""

    vertices: tuple[tuple[float, float], ...]
    width: float = 0.1

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise GeometryError("polyline needs at least 2 vertices")
        if not self.width > 0:
            raise GeometryError(f"polyline width must be positive, got {self.width}")

    def to_shapely(self) -> LineString:
        return LineString(self.vertices)

    @property
    def length(self) -> float:
        return self.to_shapely().length


def _snap(geom):
    """Snap a shapely geometry to the 1 nm grid."""
    return shapely.set_precision(geom, GRID_MM)


def _validate_ring(ring, name: str) -> None:
    if len(ring) < 3:
        raise GeometryError(f"{name} has fewer than 3 vertices")
    for x, y in ring:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise GeometryError(f"{name} has non-finite coordinate ({x}, {y})")


def validate_polygon(p: Polygon) -> None:
    """Raise GeometryError unless p satisfies the polygon invariants."""
    _validate_ring(p.exterior, "exterior ring")
    for i, h in enumerate(p.holes):
        _validate_ring(h, f"hole {i}")
    sp = p.to_shapely()
    if not sp.is_valid:
        raise GeometryError(f"invalid polygon: {shapely.is_valid_reason(sp)}")
    if sp.area <= 0:
        raise GeometryError("polygon has zero area")


def from_shapely(geom) -> list[Polygon]:
    """Convert a (Multi)Polygon / collection to normalized Polygon values.

    Exteriors come out CCW and holes CW; slivers are dropped; output is
    sorted by (min-x, min-y) of the bounds for determinism.
    """
    polys = []
    if geom.is_empty:
        return polys
    if isinstance(geom, ShapelyPolygon):
        parts = [geom]
    elif isinstance(geom, MultiPolygon):
        parts = list(geom.geoms)
    else:  # GeometryCollection from snapping: keep polygonal parts only
        parts = [g for g in getattr(geom, "geoms", []) if isinstance(g, ShapelyPolygon)]
    for part in parts:
        if part.is_empty or part.area < SLIVER_AREA_MM2:
            continue
        part = orient(part, sign=1.0)  # exterior CCW, holes CW
        ext = tuple((x, y) for x, y in part.exterior.coords[:-1])
        holes = []
        for ring in part.interiors:
            hole = tuple((x, y) for x, y in ring.coords[:-1])
            if abs(ShapelyPolygon(hole).area) >= SLIVER_AREA_MM2:
                holes.append(hole)
        polys.append(Polygon(ext, tuple(holes)))
    polys.sort(key=lambda p: p.bounds())
    return polys


def to_shapely_set(polys) -> shapely.Geometry:
    """Union a list of Polygon values into one shapely geometry."""
    if not polys:
        return ShapelyPolygon()
    return _snap(shapely.union_all([p.to_shapely() for p in polys]))


def offset_polygon(p: Polygon, delta: float) -> list[Polygon]:
    """Offset a polygon outward (delta > 0) or inward (delta < 0).

    Joins are round.  Inward offsets may split the polygon into several
    pieces or make it vanish entirely (empty list).
    """
    validate_polygon(p)
    if delta < 0:
        minx, miny, maxx, maxy = p.bounds()
        half = min(maxx - minx, maxy - miny) / 2.0
        if -delta >= half * 10:
            # Far beyond any possible inradius: still well defined (empty),
            # guard only against absurd magnitudes that suggest unit errors.
            raise GeometryError(f"inward offset {delta} out of range for bounds {p.bounds()}")
    out = p.to_shapely().buffer(delta, quad_segs=QUAD_SEGS, join_style="round")
    return from_shapely(_snap(out))


def boolean(a, b, kind: str) -> list[Polygon]:
    """Regularized boolean of two polygon sets: union|difference|intersection."""
    for p in list(a) + list(b):
        validate_polygon(p)
    ga = to_shapely_set(a)
    gb = to_shapely_set(b)
    if kind == "union":
        out = shapely.union(ga, gb)
    elif kind == "difference":
        out = shapely.difference(ga, gb)
    elif kind == "intersection":
        out = shapely.intersection(ga, gb)
    else:
        raise GeometryError(f"unknown boolean kind {kind!r}")
    return from_shapely(_snap(out))


def stroke_polyline(line: Polyline) -> Polygon:
    """Expand a polyline to its stroked polygon (round caps and joins)."""
    ls = line.to_shapely()
    if ls.length <= 0:
        raise GeometryError("cannot stroke a zero-length path")
    out = ls.buffer(line.width / 2.0, quad_segs=QUAD_SEGS,
                    cap_style="round", join_style="round")
    polys = from_shapely(_snap(out))
    if len(polys) != 1:
        raise GeometryError("stroking produced a non-simple result")
    return polys[0]


def convex_hull(points) -> Polygon:
    """Convex hull of a point list; error if <3 points or all collinear."""
    pts = list(points)
    if len(pts) < 3:
        raise GeometryError("convex hull needs at least 3 points")
    hull = shapely.MultiPoint(pts).convex_hull
    if not isinstance(hull, ShapelyPolygon):
        raise GeometryError("points are collinear, hull is degenerate")
    polys = from_shapely(_snap(hull))
    if not polys:
        raise GeometryError("degenerate hull")
    return polys[0]


def min_clearance(a, b) -> float:
    """Minimum Euclidean distance between two polygon sets (0 if they touch)."""
    ga = to_shapely_set(list(a))
    gb = to_shapely_set(list(b))
    if ga.is_empty or gb.is_empty:
        raise GeometryError("min_clearance requires non-empty operands")
    return float(ga.distance(gb))


def total_area(polys) -> float:
    return to_shapely_set(list(polys)).area


def mirror_x(polys, axis_x: float):
    """Reflect polygons about the vertical line x = axis_x."""
    out = []
    for p in polys:
        sp = shapely.affinity.scale(p.to_shapely(), xfact=-1, yfact=1,
                                    origin=(axis_x, 0))
        out.extend(from_shapely(_snap(sp)))
    return out
