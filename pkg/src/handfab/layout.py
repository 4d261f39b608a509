"""Sensing-region synthesis and electrode placement.

Builds the 15 regions (3 per finger, 2 for the thumb, 1 palm polygon) from
the hand skeleton, then populates each with orthogonal row/column electrode
traces at the configured resolution.  Taxels sit at the row/column
intersections.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import shapely
import shapely.ops
from shapely import LineString, Point

from .capture import HandModel
from .config import LayoutConfig
from .errors import SynthesisError
from .geometry import Polygon, Polyline, from_shapely, to_shapely_set

# landmark indices per digit: MCP, PIP, DIP, TIP
FINGERS = {
    "index": (5, 6, 7, 8),
    "middle": (9, 10, 11, 12),
    "ring": (13, 14, 15, 16),
    "little": (17, 18, 19, 20),
}
THUMB = (1, 2, 3, 4)   # CMC, MCP, IP, TIP
FINGER_ORDER = ("index", "middle", "ring", "little")


@dataclass(frozen=True)
class SensingRegion:
    id: str
    outline: Polygon
    grid: tuple[int, int]          # rows, cols
    axis: tuple[float, float]      # unit direction, proximal -> distal
    kind: str                      # "finger" | "thumb" | "palm"


@dataclass(frozen=True)
class Taxel:
    point: tuple[float, float]
    region: str
    row_net: str
    col_net: str


@dataclass(frozen=True)
class ElectrodeSet:
    horizontal: tuple[Polyline, ...]    # row traces
    vertical: tuple[Polyline, ...]      # column traces
    row_tags: tuple[str, ...]           # parallel to horizontal
    col_tags: tuple[str, ...]           # parallel to vertical
    taxels: tuple[Taxel, ...]


def _unit(v: np.ndarray) -> np.ndarray:
    n = float(np.hypot(*v))
    if n < 1e-12:
        raise SynthesisError("degenerate direction vector")
    return v / n


def _perp(u: np.ndarray) -> np.ndarray:
    return np.array([-u[1], u[0]])


def _rect(p_lo: np.ndarray, p_hi: np.ndarray, width: float) -> Polygon:
    """Axis-aligned-in-segment-frame rectangle over [p_lo, p_hi]."""
    u = _unit(p_hi - p_lo)
    v = _perp(u) * (width / 2.0)
    corners = [tuple(p_lo - v), tuple(p_hi - v), tuple(p_hi + v),
               tuple(p_lo + v)]
    return Polygon(exterior=tuple(corners))


def _clip(outline: Polygon, clip_region: shapely.Geometry,
          region_id: str) -> Polygon:
    """Clip a region outline to the allowed area, keeping the largest piece."""
    sp = shapely.intersection(to_shapely_set([outline]), clip_region)
    parts = from_shapely(sp)
    if not parts:
        raise SynthesisError(f"region {region_id} falls entirely outside "
                             "the hand contour")
    return max(parts, key=lambda p: shapely.Polygon(
        p.exterior, [h for h in p.holes]).area)


def interior_zone(hand: HandModel, inset: float) -> shapely.Geometry:
    """Hand contour inset by the routing corridor; regions are clipped to
    this so region copper can never reach the contour-following rings."""
    contour = to_shapely_set([hand.contour])
    zone = contour.buffer(-inset, quad_segs=16)
    if zone.is_empty:
        raise SynthesisError("contour too small for the routing corridor")
    return zone


def finger_regions(hand: HandModel, cfg: LayoutConfig,
                   zone: shapely.Geometry) -> list[SensingRegion]:
    """Three rectangular regions per finger along the skeleton segments."""
    regions = []
    lms = hand.landmarks
    for fi, name in enumerate(FINGER_ORDER):
        mcp, pip, dip, tip = (lms[i] for i in FINGERS[name])
        segments = {
            "tip": (dip, tip),
            "mid": (pip, dip),
        }
        # the proximal region covers only the distal fraction of the
        # PIP->MCP segment; the rest belongs to the palm webbing
        ratio = cfg.proximal_ratios[fi]
        segments["base"] = (pip + ratio * (mcp - pip), pip)
        for seg_name in ("tip", "mid", "base"):
            lo, hi = segments[seg_name]
            length = float(np.hypot(*(hi - lo)))
            if length < cfg.min_segment_length:
                raise SynthesisError(
                    f"{name} {seg_name} segment is {length:.1f} mm, too short")
            rid = f"{name}-{seg_name}"
            outline = _clip(_rect(lo, hi, length / 2.0), zone, rid)
            regions.append(SensingRegion(
                id=rid, outline=outline, grid=cfg.finger_pad_grid,
                axis=tuple(_unit(hi - lo)), kind="finger"))
    return regions


def thumb_regions(hand: HandModel, cfg: LayoutConfig,
                  zone: shapely.Geometry) -> list[SensingRegion]:
    """Two rectangular regions over the thumb's distal segments."""
    lms = hand.landmarks
    _, mcp, ip, tip = (lms[i] for i in THUMB)
    specs = [("thumb-top", ip, tip, cfg.thumb_top_grid),
             ("thumb-mid", mcp, ip, cfg.thumb_mid_grid)]
    regions = []
    for rid, lo, hi, grid in specs:
        length = float(np.hypot(*(hi - lo)))
        if length < cfg.min_segment_length:
            raise SynthesisError(f"{rid} segment is {length:.1f} mm, too short")
        outline = _clip(_rect(lo, hi, length / 2.0), zone, rid)
        regions.append(SensingRegion(
            id=rid, outline=outline, grid=grid, axis=tuple(_unit(hi - lo)),
            kind="thumb"))
    return regions


def _ray_distance(origin: np.ndarray, direction: np.ndarray,
                  boundary: LineString, span: float) -> float:
    """Distance from origin to the first boundary crossing along a ray."""
    ray = LineString([tuple(origin), tuple(origin + direction * span)])
    hit = shapely.intersection(ray, boundary)
    if hit.is_empty:
        raise SynthesisError("palm projection ray does not reach the contour")
    pts = []
    for geom in getattr(hit, "geoms", [hit]):
        if isinstance(geom, Point):
            pts.append(geom)
        else:
            pts.extend(Point(c) for c in geom.coords)
    return min(Point(tuple(origin)).distance(p) for p in pts)


def palm_anchors(hand: HandModel,
                 cfg: LayoutConfig) -> list[tuple[np.ndarray, np.ndarray]]:
    """The seven palm anchors and their pinned projection directions.

    Counter-clockwise from the thumb side: thumb MCP, the four finger MCPs,
    an interpolated ulnar point, and the wrist.  Finger MCPs project toward
    their nearest contour point; the wrist projects down the palm axis; the
    thumb MCP and ulnar point blend the downward axis with the outward
    normal of their wrist chord, which pushes them into the palm's lower
    corners.
    """
    lms = hand.landmarks
    wrist = lms[0]
    thumb_mcp = lms[2]
    mcps = [lms[FINGERS[f][0]] for f in FINGER_ORDER]
    axis = _unit(np.mean(mcps, axis=0) - wrist)
    ext = to_shapely_set([hand.contour])
    ext = ext.geoms[0] if hasattr(ext, "geoms") else ext
    boundary = LineString(ext.exterior.coords)

    def nearest_dir(p: np.ndarray) -> np.ndarray:
        q = shapely.ops.nearest_points(Point(tuple(p)), boundary)[1]
        return _unit(np.array([q.x, q.y]) - p)

    def corner_dir(p: np.ndarray, chord_from: np.ndarray) -> np.ndarray:
        chord = _unit(p - chord_from)
        n = _perp(chord)
        # pick the outward-facing normal (away from the palm centroid)
        centroid = np.mean([wrist, thumb_mcp] + mcps, axis=0)
        if np.dot(n, p - centroid) < 0:
            n = -n
        return _unit(n - 2.0 * axis)

    ulnar = 0.5 * (wrist + lms[FINGERS["little"][0]])
    anchors = [(thumb_mcp, corner_dir(thumb_mcp, wrist))]
    anchors += [(m, nearest_dir(m)) for m in mcps]
    anchors.append((ulnar, corner_dir(ulnar, wrist)))
    anchors.append((wrist, -axis))
    return anchors


def palm_region(hand: HandModel, cfg: LayoutConfig,
                zone: shapely.Geometry) -> SensingRegion:
    """Palm polygon from projected skeleton anchors plus a thenar dodge.

    The edge from the thumb-corner vertex up to the index vertex would
    otherwise cut under the thumb's proximal segment, so an extra vertex
    just past that segment's palm-side corner steers the outline around
    it.
    """
    ext = to_shapely_set([hand.contour])
    ext = ext.geoms[0] if hasattr(ext, "geoms") else ext
    boundary = LineString(ext.exterior.coords)
    span = 2.0 * max(np.ptp([c[0] for c in ext.exterior.coords]),
                     np.ptp([c[1] for c in ext.exterior.coords]))
    verts = []
    for anchor, direction in palm_anchors(hand, cfg):
        d = _ray_distance(anchor, direction, boundary, span)
        verts.append(tuple(anchor + cfg.palm_projection * d * direction))
    lms = hand.landmarks
    seg = lms[THUMB[2]] - lms[THUMB[1]]
    half_width = np.hypot(*seg) / 4.0
    p = _perp(_unit(seg))
    palm_side = np.mean([lms[FINGERS[f][0]] for f in FINGER_ORDER], axis=0)
    if np.dot(p, palm_side - lms[THUMB[1]]) < 0:
        p = -p
    dodge = lms[THUMB[1]] + p * (half_width + 0.85)

    # Lateral clamp: the column trace nearest the thumb runs 1/(cols+1)
    # of the lateral extent in from the thumb-side extreme; pull the
    # thumb-corner vertex palm-ward until that corridor clears the
    # thumb's proximal segment.
    wrist = lms[0]
    mcps = [lms[FINGERS[f][0]] for f in FINGER_ORDER]
    axis = _unit(np.mean(mcps, axis=0) - wrist)
    vperp = _perp(axis)
    if np.dot(vperp, np.array(verts[0]) - np.mean(verts, axis=0)) < 0:
        vperp = -vperp        # positive toward the thumb side
    w = [float(np.dot(v, vperp)) for v in verts]
    w_dodge = float(np.dot(dodge, vperp))
    n = cfg.palm_grid[1] + 1
    w_limit = (n * (w_dodge - 1.3) - min(w)) / (n - 1)
    if w[0] > w_limit:
        verts[0] = tuple(np.array(verts[0]) + (w_limit - w[0]) * vperp)
    verts.insert(1, tuple(dodge))
    poly = shapely.Polygon(verts)
    if not poly.is_valid:
        raise SynthesisError("palm polygon self-intersects after projection")
    outline = _clip(from_shapely(poly)[0], zone, "palm")

    lms = hand.landmarks
    wrist = lms[0]
    mcps = [lms[FINGERS[f][0]] for f in FINGER_ORDER]
    axis = _unit(np.mean(mcps, axis=0) - wrist)
    return SensingRegion(id="palm", outline=outline, grid=cfg.palm_grid,
                         axis=tuple(axis), kind="palm")


def synthesize_regions(hand: HandModel, cfg: LayoutConfig,
                       corridor_inset: float) -> list[SensingRegion]:
    """All 15 regions, ordered deterministically by id."""
    zone = interior_zone(hand, corridor_inset)
    digits = finger_regions(hand, cfg, zone) + thumb_regions(hand, cfg, zone)
    by_id = {r.id: r for r in digits}
    # The two thumb rectangles overlap in a wedge on the inner side of the
    # bent IP joint, and their column traces belong to different nets:
    # trim the distal segment clear of the proximal one.
    top, mid = by_id["thumb-top"], by_id["thumb-mid"]
    trimmed = shapely.difference(
        top.outline.to_shapely(),
        mid.outline.to_shapely().buffer(0.25, quad_segs=8))
    pieces = from_shapely(trimmed)
    if not pieces:
        raise SynthesisError("thumb-top region vanished when separated "
                             "from thumb-mid")
    outline = max(pieces, key=lambda p: p.area)
    digits = [r for r in digits if r.id != "thumb-top"]
    digits.append(SensingRegion(id=top.id, outline=outline, grid=top.grid,
                                axis=top.axis, kind=top.kind))
    palm = palm_region(hand, cfg, zone)
    # The palm polygon may run under the thumb segments near the thumb
    # MCP; carve those out (plus a margin wide enough for two trace
    # half-widths and the copper clearance) so nets never collide.
    blockers = to_shapely_set(
        [r.outline for r in digits]).buffer(0.25, quad_segs=8)
    carved = shapely.difference(palm.outline.to_shapely(), blockers)
    if carved.geom_type != "Polygon" or carved.area \
            < palm.outline.to_shapely().area - 1e-9:
        pieces = from_shapely(carved)
        if not pieces:
            raise SynthesisError("palm region vanished when separated "
                                 "from the thumb segments")
        outline = max(pieces, key=lambda p: p.area)
        palm = SensingRegion(id=palm.id, outline=outline, grid=palm.grid,
                             axis=palm.axis, kind=palm.kind)
    return sorted(digits + [palm], key=lambda r: r.id)


def _region_frame(region: SensingRegion):
    u = np.array(region.axis)
    v = _perp(u)
    pts = np.array(region.outline.exterior)
    us = pts @ u
    vs = pts @ v
    return u, v, (us.min(), us.max()), (vs.min(), vs.max())


def place_electrodes(regions: list[SensingRegion],
                     cfg: LayoutConfig) -> ElectrodeSet:
    """Evenly sample row traces across each region's axial extent and
    column traces across its lateral extent; taxels at the crossings."""
    horiz, vert, row_tags, col_tags, taxels = [], [], [], [], []
    for region in regions:
        rows, cols = region.grid
        u, v, (u0, u1), (v0, v1) = _region_frame(region)
        du, dv = u1 - u0, v1 - v0
        pitch = min(du / (rows + 1), dv / (cols + 1))
        if pitch < cfg.min_pitch:
            raise SynthesisError(
                f"region {region.id}: grid pitch {pitch:.2f} mm is below "
                f"the {cfg.min_pitch} mm minimum")
        outline = to_shapely_set([region.outline])
        u_pos = [u0 + du * (i + 1) / (rows + 1) for i in range(rows)]
        v_pos = [v0 + dv * (j + 1) / (cols + 1) for j in range(cols)]

        def clipped(a: np.ndarray, b: np.ndarray, label: str) -> Polyline:
            line = LineString([tuple(a), tuple(b)])
            cut = shapely.intersection(line, outline)
            if cut.is_empty:
                raise SynthesisError(f"trace {label} misses its region")
            if hasattr(cut, "geoms"):
                cut = max(cut.geoms, key=lambda g: g.length)
            return Polyline(vertices=tuple((x, y) for x, y in cut.coords),
                            width=cfg.trace_width)

        for i, up in enumerate(u_pos):
            a = u * up + v * (v0 - 1.0)
            b = u * up + v * (v1 + 1.0)
            tag = f"{region.id}:r{i}"
            horiz.append(clipped(a, b, tag))
            row_tags.append(tag)
        for j, vp in enumerate(v_pos):
            a = u * (u0 - 1.0) + v * vp
            b = u * (u1 + 1.0) + v * vp
            tag = f"{region.id}:c{j}"
            vert.append(clipped(a, b, tag))
            col_tags.append(tag)

        # taxels at every grid crossing; verify each sits on both traces
        for i, up in enumerate(u_pos):
            for j, vp in enumerate(v_pos):
                p = u * up + v * vp
                row_pl = horiz[len(horiz) - rows + i]
                col_pl = vert[len(vert) - cols + j]
                pt = Point(tuple(p))
                if (pt.distance(LineString(row_pl.vertices)) > 1e-3
                        or pt.distance(LineString(col_pl.vertices)) > 1e-3):
                    raise SynthesisError(
                        f"region {region.id}: taxel ({i},{j}) is not covered "
                        "by its traces after clipping")
                taxels.append(Taxel(point=tuple(p), region=region.id,
                                    row_net=f"{region.id}:r{i}",
                                    col_net=f"{region.id}:c{j}"))
    return ElectrodeSet(horizontal=tuple(horiz), vertical=tuple(vert),
                        row_tags=tuple(row_tags), col_tags=tuple(col_tags),
                        taxels=tuple(taxels))


def electrode_set_json(regions: list[SensingRegion],
                       electrodes: ElectrodeSet) -> str:
    """Deterministic JSON serialization for golden-file tests."""
    def rnd(p):
        return [round(float(p[0]), 6), round(float(p[1]), 6)]

    doc = {
        "regions": [
            {"id": r.id, "grid": list(r.grid), "kind": r.kind,
             "axis": rnd(r.axis),
             "outline": [rnd(p) for p in r.outline.exterior]}
            for r in regions
        ],
        "rows": [{"tag": t, "width": pl.width,
                  "vertices": [rnd(p) for p in pl.vertices]}
                 for t, pl in zip(electrodes.row_tags, electrodes.horizontal)],
        "cols": [{"tag": t, "width": pl.width,
                  "vertices": [rnd(p) for p in pl.vertices]}
                 for t, pl in zip(electrodes.col_tags, electrodes.vertical)],
        "taxels": [{"p": rnd(t.point), "region": t.region,
                    "row": t.row_net, "col": t.col_net}
                   for t in electrodes.taxels],
    }
    return json.dumps(doc, indent=1, sort_keys=True)
