"""Connecting-trace routing.

Every electrode trace must reach one of two 16-pin connectors at the wrist
(front carries the row nets, back the column nets).  Finger column traces
are first chained down into palm columns by direct links; everything else
is routed over contour-following rings: inward
offsets of the hand outline at 0.2 mm pitch, opened at a connector gap
near the wrist and trimmed to the arc each net actually uses.

Ring assignment is positional: net classes are arc-contiguous groups of
trace endpoints along the contour, anchored at the nearest gap end, with
shorter arcs taking more deeply inset rings.  Because group arcs are
disjoint and deeper rings terminate before shallower groups begin, a drop
from an electrode out to its ring never crosses another ring's kept arc.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import shapely
import shapely.ops
from shapely import LineString, Point

from .capture import HandModel
from .config import RoutingConfig
from .errors import RoutingError
from .geometry import Polygon, Polyline, stroke_polyline, to_shapely_set
from .layout import ElectrodeSet, FINGER_ORDER, FINGERS, SensingRegion


@dataclass(frozen=True)
class RoutedNet:
    net_id: str
    side: str                     # "front" | "back"
    kind: str                     # "ring" | "direct"
    ring_index: int | None        # 1 = outermost
    pin: int                      # 1..16
    polylines: tuple[Polyline, ...]
    pad: Polygon


@dataclass(frozen=True)
class SideRouting:
    side: str
    nets: tuple[RoutedNet, ...]
    anchor_pads: tuple[Polygon, ...]
    connector_center: tuple[float, float]


@dataclass(frozen=True)
class _Component:
    net_id: str
    polylines: tuple[Polyline, ...]
    entry: tuple[float, float]


def corridor_inset(cfg: RoutingConfig) -> float:
    """Contour inset reserved for the ring corridor; regions are clipped to
    this depth so their copper always clears the rings."""
    return (cfg.edge_clearance + cfg.ring_count * cfg.ring_pitch
            + cfg.trace_width + cfg.clearance + 0.05)


def _trace_map(tags, polylines):
    return dict(zip(tags, polylines))


def _ends(pl: Polyline) -> tuple[np.ndarray, np.ndarray]:
    return np.array(pl.vertices[0]), np.array(pl.vertices[-1])


def _endpoint(pl: Polyline, key) -> np.ndarray:
    a, b = _ends(pl)
    return a if key(a) >= key(b) else b


def _pline(points, width) -> Polyline:
    return Polyline(vertices=tuple((float(x), float(y)) for x, y in points),
                    width=width)


# ---------------------------------------------------------------------------
# direct links

def _monotone_match(finger_x: list[float], palm_x: list[float]) -> list[int]:
    """Order-preserving assignment of finger columns to distinct palm
    columns minimizing total displacement (small DP)."""
    n, m = len(finger_x), len(palm_x)
    inf = float("inf")
    cost = [[inf] * (m + 1) for _ in range(n + 1)]
    take = [[False] * (m + 1) for _ in range(n + 1)]
    cost[0] = [0.0] * (m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            skip = cost[i][j - 1]
            pair = cost[i - 1][j - 1] + abs(finger_x[i - 1] - palm_x[j - 1])
            if pair < skip:
                cost[i][j] = pair
                take[i][j] = True
            else:
                cost[i][j] = skip
    if cost[n][m] == inf:
        raise RoutingError("cannot match finger columns to palm columns")
    out = [0] * n
    i, j = n, m
    while i > 0:
        if take[i][j]:
            out[i - 1] = j - 1
            i -= 1
        j -= 1
    return out


def _axis_frame(hand: HandModel):
    lms = hand.landmarks
    mcps = [lms[FINGERS[f][0]] for f in FINGER_ORDER]
    axis = np.mean(mcps, axis=0) - lms[0]
    axis /= np.hypot(*axis)
    return axis, np.array([-axis[1], axis[0]])


def link_finger_columns(hand: HandModel, regions: list[SensingRegion],
                        electrodes: ElectrodeSet,
                        cfg: RoutingConfig) -> dict[str, list[Polyline]]:
    """Chain each finger's column traces tip->mid->base and join them to a
    distinct palm column; returns extra polylines per palm column net."""
    traces = _trace_map(electrodes.col_tags, electrodes.vertical)
    by_id = {r.id: r for r in regions}
    axis, _ = _axis_frame(hand)

    chains = []   # (lateral x of base column, [polylines], finger, col)
    for name in FINGER_ORDER:
        for j in range(by_id[f"{name}-tip"].grid[1]):
            parts = []
            prev_lo = None
            for seg in ("tip", "mid", "base"):
                rid = f"{name}-{seg}"
                pl = traces[f"{rid}:c{j}"]
                u = np.array(by_id[rid].axis)
                lo = _endpoint(pl, lambda p: -float(p @ u))
                hi = _endpoint(pl, lambda p: float(p @ u))
                parts.append(pl)
                if prev_lo is not None:
                    parts.append(_pline([prev_lo, hi], cfg.trace_width))
                prev_lo = lo
            chains.append((float(prev_lo[0]), prev_lo, parts, name, j))

    palm = by_id["palm"]
    palm_cols = [traces[f"palm:c{j}"] for j in range(palm.grid[1])]
    palm_u = np.array(palm.axis)
    tops = [_endpoint(pl, lambda p: float(p @ palm_u)) for pl in palm_cols]
    chains.sort(key=lambda c: c[0])
    by_x = sorted(range(len(tops)), key=lambda j: float(tops[j][0]))
    match = _monotone_match([c[0] for c in chains],
                            [float(tops[j][0]) for j in by_x])

    extras: dict[str, list[Polyline]] = {}
    for (x, lo, parts, name, j), mi in zip(chains, match):
        pj = by_x[mi]
        net = f"palm:c{pj}"
        extras.setdefault(net, [])
        extras[net].extend(parts)
        extras[net].append(_pline([lo, tops[pj]], cfg.trace_width))
    return extras


# ---------------------------------------------------------------------------
# components per side

def front_components(hand, regions, electrodes, cfg) -> list[_Component]:
    traces = _trace_map(electrodes.row_tags, electrodes.horizontal)
    by_id = {r.id: r for r in regions}
    centroid = np.mean(hand.landmarks, axis=0)
    comps = []
    for rid in sorted(by_id):
        if rid == "palm":
            continue
        for i in range(by_id[rid].grid[0]):
            pl = traces[f"{rid}:r{i}"]
            entry = _endpoint(pl,
                              lambda p: float(np.hypot(*(p - centroid))))
            comps.append(_Component(f"{rid}:r{i}", (pl,), tuple(entry)))
    thumb_mcp = hand.landmarks[2]
    for i in range(by_id["palm"].grid[0]):
        pl = traces[f"palm:r{i}"]
        entry = _endpoint(pl, lambda p: float(np.hypot(*(p - thumb_mcp))))
        comps.append(_Component(f"palm:r{i}", (pl,), tuple(entry)))
    return comps


def back_components(hand, regions, electrodes, cfg) -> list[_Component]:
    traces = _trace_map(electrodes.col_tags, electrodes.vertical)
    by_id = {r.id: r for r in regions}
    finger_extra = link_finger_columns(hand, regions, electrodes, cfg)
    palm_u = np.array(by_id["palm"].axis)
    comps = []
    for j in range(by_id["palm"].grid[1]):
        pl = traces[f"palm:c{j}"]
        entry = _endpoint(pl, lambda p: -float(p @ palm_u))
        extra = tuple(finger_extra.get(f"palm:c{j}", ()))
        comps.append(_Component(f"palm:c{j}", (pl,) + extra, tuple(entry)))
    # thumb columns exit away from the shared IP joint: the distal segment
    # toward the tip, the proximal segment toward the thumb base
    boundary = LineString(_contour_exterior(hand).exterior.coords)
    u_top = np.array(by_id["thumb-top"].axis)
    for j in range(by_id["thumb-top"].grid[1]):
        pl = traces[f"thumb-top:c{j}"]
        entry = _endpoint(pl, lambda p: float(p @ u_top))
        comps.append(_Component(f"thumb-top:c{j}", (pl,), tuple(entry)))
    # The proximal segment's columns all exit toward the same contour
    # stretch; inner columns first duck under the outer ones' drops with a
    # stub down the palm axis, which also orders them onto deeper rings.
    u_mid = np.array(by_id["thumb-mid"].axis)
    down = -np.array(by_id["palm"].axis)
    mids = []
    for j in range(by_id["thumb-mid"].grid[1]):
        pl = traces[f"thumb-mid:c{j}"]
        end = _endpoint(pl, lambda p: -float(p @ u_mid))
        mids.append((float(boundary.distance(Point(tuple(end)))), j, end, pl))
    mids.sort()
    for rank, (_, j, end, pl) in enumerate(mids):
        if rank == 0:
            comps.append(_Component(f"thumb-mid:c{j}", (pl,), tuple(end)))
        else:
            duck = end + down * (8.0 * rank)
            stub = _pline([end, duck], cfg.trace_width)
            comps.append(_Component(f"thumb-mid:c{j}", (pl, stub),
                                    tuple(duck)))
    return comps


# ---------------------------------------------------------------------------
# rings, grouping, drops

def _contour_exterior(hand: HandModel) -> shapely.Polygon:
    geo = to_shapely_set([hand.contour])
    return geo.geoms[0] if hasattr(geo, "geoms") else geo


def _window_box(contour: shapely.Polygon, center_x: float,
                cfg: RoutingConfig) -> tuple[shapely.Polygon, float]:
    """Opening in the rings near the wrist, plus the local bottom height."""
    xs_lo, ys_lo, xs_hi, ys_hi = contour.bounds
    coords = np.array(contour.exterior.coords)
    near = coords[(np.abs(coords[:, 0] - center_x) <= cfg.gap_half_width)
                  & (coords[:, 1] < ys_lo + 0.35 * (ys_hi - ys_lo))]
    if len(near) == 0:
        raise RoutingError("no contour bottom under the connector window")
    y_bot = float(near[:, 1].max())
    box = shapely.box(center_x - cfg.gap_half_width, ys_lo - 10.0,
                      center_x + cfg.gap_half_width,
                      y_bot + corridor_inset(cfg) - 0.1)
    return box, y_bot


def _open_arc(ring: LineString, box, center_x: float) -> LineString:
    cut = shapely.difference(ring, box)
    if cut.geom_type != "LineString":
        cut = shapely.ops.linemerge(cut)
    if cut.geom_type != "LineString":
        raise RoutingError("ring opening produced a fragmented arc")
    # normalize: parameter 0 at the window's left edge
    if cut.coords[0][0] > center_x:
        cut = cut.reverse()
    return cut


def build_rings(contour: shapely.Polygon, cfg: RoutingConfig,
                center_x: float | None = None) -> list[LineString]:
    """The 16 contour-following ring centerlines (closed if center_x is
    None, otherwise opened at the connector window)."""
    rings = []
    box = None
    if center_x is not None:
        box, _ = _window_box(contour, center_x, cfg)
    for k in range(1, cfg.ring_count + 1):
        inset = cfg.edge_clearance + cfg.ring_pitch * k
        off = contour.buffer(-inset, quad_segs=16)
        if off.is_empty:
            raise RoutingError(f"ring {k}: contour vanishes at {inset} mm")
        if off.geom_type != "Polygon":
            off = max(off.geoms, key=lambda g: g.area)
        ring = LineString(off.exterior.coords)
        if box is not None:
            ring = _open_arc(ring, box, center_x)
        rings.append(ring)
    return rings


def group_components(params: list[float], n_groups: int) -> list[list[int]]:
    """Split components (by arc parameter) into arc-contiguous groups at
    the largest parameter gaps.  Returns index groups in arc order."""
    order = sorted(range(len(params)), key=lambda i: (params[i], i))
    if n_groups >= len(order):
        return [[i] for i in order]
    gaps = []
    for pos in range(1, len(order)):
        gaps.append((params[order[pos]] - params[order[pos - 1]], pos))
    gaps.sort(key=lambda g: (-g[0], g[1]))
    cuts = sorted(pos for _, pos in gaps[:n_groups - 1])
    groups, start = [], 0
    for cut in cuts + [len(order)]:
        groups.append(order[start:cut])
        start = cut
    return groups


def _route_side(side: str, hand: HandModel, comps: list[_Component],
                cfg: RoutingConfig, center_x: float) -> SideRouting:
    contour = _contour_exterior(hand)
    box, y_bot = _window_box(contour, center_x, cfg)
    arc = _open_arc(LineString(contour.exterior.coords), box, center_x)
    arc_len = arc.length
    boundary = LineString(contour.exterior.coords)

    # nets whose natural drop would shadow the connector window connect
    # straight down to their pad instead of via a ring
    direct, ringable = [], []
    for comp in comps:
        near = shapely.ops.nearest_points(Point(comp.entry), boundary)[1]
        if box.intersects(near) or box.contains(near):
            direct.append(comp)
        else:
            ringable.append(comp)

    n_rings = 16 - len(direct)
    if n_rings > cfg.ring_count:
        n_rings = cfg.ring_count
    params = [arc.project(Point(c.entry)) for c in ringable]
    groups = group_components(params, n_rings)

    rings = build_rings(contour, cfg, center_x)

    # anchor at the nearest window end; coverage length orders the insets
    ginfo = []
    for gi, idx in enumerate(groups):
        ps = [params[i] for i in idx]
        left = (0.5 * (min(ps) + max(ps))) < 0.5 * arc_len
        coverage = max(ps) if left else arc_len - min(ps)
        ginfo.append({"members": idx, "left": left, "coverage": coverage,
                      "order": gi})
    by_cov = sorted(ginfo, key=lambda g: (-g["coverage"], g["order"]))
    for depth, g in enumerate(by_cov):
        g["ring"] = depth + 1    # 1 = outermost (largest coverage)

    trace_w = cfg.trace_width
    nets = []
    pad_of = _pad_positions(center_x, y_bot, cfg)
    left_rings = sorted((g for g in ginfo if g["left"]),
                        key=lambda g: -g["ring"])
    right_rings = sorted((g for g in ginfo if not g["left"]),
                         key=lambda g: -g["ring"])
    pins = {}
    next_pin = 1
    for g in left_rings:
        pins[id(g)] = next_pin
        next_pin += 1
    used_right = 16
    for g in right_rings:
        pins[id(g)] = used_right
        used_right -= 1
    free_pins = [p for p in range(1, 17)
                 if p not in pins.values()]
    direct_sorted = sorted(direct, key=lambda c: c.entry[0])
    direct_pins = dict(zip((c.net_id for c in direct_sorted), free_pins))

    for g in ginfo:
        ring_ls = rings[g["ring"] - 1]
        targets = [shapely.ops.nearest_points(
            Point(ringable[i].entry), ring_ls)[1] for i in g["members"]]
        t_params = [ring_ls.project(t) for t in targets]
        if g["left"]:
            kept = shapely.ops.substring(
                ring_ls, 0.0, min(max(t_params) + 0.5, ring_ls.length))
        else:
            kept = shapely.ops.substring(
                ring_ls, max(min(t_params) - 0.5, 0.0), ring_ls.length)
        plines = [_pline(kept.coords, trace_w)]
        members = [ringable[i] for i in g["members"]]
        for comp, tgt in zip(members, targets):
            plines.extend(comp.polylines)
            drop_tgt = shapely.ops.nearest_points(Point(comp.entry), kept)[1]
            plines.append(_pline([comp.entry, (drop_tgt.x, drop_tgt.y)],
                                 trace_w))
        pin = pins[id(g)]
        pad, pad_x = pad_of(pin)
        end = kept.coords[0] if g["left"] else kept.coords[-1]
        feed = [end, (pad_x, end[1]), (pad_x, y_bot + 4.2 + 0.2)]
        plines.append(_pline(feed, trace_w))
        net_id = min(m.net_id for m in members)
        nets.append(RoutedNet(
            net_id=net_id, side=side, kind="ring", ring_index=g["ring"],
            pin=pin, polylines=tuple(plines), pad=pad))

    jog_y = y_bot + 4.2 + 1.5 + 0.8
    for comp in direct_sorted:
        pin = direct_pins[comp.net_id]
        pad, pad_x = pad_of(pin)
        path = [comp.entry, (comp.entry[0], jog_y), (pad_x, jog_y),
                (pad_x, y_bot + 4.2 + 1.5 - 0.2)]
        if abs(comp.entry[0] - pad_x) < 1e-9:
            path = [comp.entry, (pad_x, y_bot + 4.2 + 1.5 - 0.2)]
        plines = list(comp.polylines) + [_pline(path, trace_w)]
        nets.append(RoutedNet(
            net_id=comp.net_id, side=side, kind="direct", ring_index=None,
            pin=pin, polylines=tuple(plines), pad=pad))

    anchors = _anchor_pads(center_x, y_bot, cfg)
    nets.sort(key=lambda n: n.pin)
    return SideRouting(side=side, nets=tuple(nets), anchor_pads=anchors,
                       connector_center=(center_x, y_bot + 4.95))


def _pad_positions(center_x: float, y_bot: float, cfg: RoutingConfig):
    y0 = y_bot + 4.2
    y1 = y0 + cfg.pad_length

    def pad_of(pin: int):
        x = center_x + (pin - 8.5) * cfg.pad_pitch
        hw = cfg.pad_width / 2.0
        pad = Polygon(exterior=((x - hw, y0), (x + hw, y0),
                                (x + hw, y1), (x - hw, y1)))
        return pad, x
    return pad_of


def _anchor_pads(center_x: float, y_bot: float,
                 cfg: RoutingConfig) -> tuple[Polygon, ...]:
    half_span = 8 * cfg.pad_pitch
    s = cfg.anchor_pad_size / 2.0
    cy = y_bot + 4.2 + cfg.pad_length / 2.0
    pads = []
    for sign in (-1, 1):
        cx = center_x + sign * (half_span + 0.4 + s)
        pads.append(Polygon(exterior=((cx - s, cy - s), (cx + s, cy - s),
                                      (cx + s, cy + s), (cx - s, cy + s))))
    return tuple(pads)


def route(hand: HandModel, regions: list[SensingRegion],
          electrodes: ElectrodeSet,
          cfg: RoutingConfig) -> tuple[SideRouting, SideRouting]:
    """Route both sides; front carries row nets, back carries columns."""
    back_cx = float(hand.landmarks[0][0])
    front_cx = back_cx + cfg.connector_offset
    front = _route_side("front", hand,
                        front_components(hand, regions, electrodes, cfg),
                        cfg, front_cx)
    back = _route_side("back", hand,
                       back_components(hand, regions, electrodes, cfg),
                       cfg, back_cx)
    return front, back


# ---------------------------------------------------------------------------
# independent clearance audit

def net_copper(net: RoutedNet) -> shapely.Geometry:
    parts = [to_shapely_set([stroke_polyline(pl)]) for pl in net.polylines]
    parts.append(to_shapely_set([net.pad]))
    return shapely.union_all(parts)


def verify_clearance(side: SideRouting, hand: HandModel,
                     cfg: RoutingConfig) -> dict:
    """Pairwise distance audit between distinct nets plus copper-to-edge;
    raises RoutingError on any violation."""
    shapes = {net.net_id: net_copper(net) for net in side.nets}
    for i, pad in enumerate(side.anchor_pads):
        shapes[f"anchor{i}"] = to_shapely_set([pad])
    boundary = LineString(_contour_exterior(hand).exterior.coords)

    names = sorted(shapes)
    worst = (float("inf"), None, None)
    tol = 1e-3
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            d = shapely.distance(shapes[a], shapes[b])
            if d < worst[0]:
                worst = (d, a, b)
            if d < cfg.clearance - tol:
                raise RoutingError(
                    f"{side.side}: clearance {d:.4f} mm between nets "
                    f"{a} and {b} (minimum {cfg.clearance})")
    worst_edge = (float("inf"), None)
    for name in names:
        d = shapely.distance(shapes[name], boundary)
        if d < worst_edge[0]:
            worst_edge = (d, name)
        if d < cfg.edge_clearance - tol:
            raise RoutingError(
                f"{side.side}: net {name} is {d:.4f} mm from the board "
                f"edge (minimum {cfg.edge_clearance})")
    lengths = {net.net_id: round(sum(
        LineString(pl.vertices).length for pl in net.polylines), 3)
        for net in side.nets}
    return {
        "side": side.side,
        "worst_pair": {"a": worst[1], "b": worst[2],
                       "clearance_mm": round(worst[0], 4)},
        "worst_edge": {"net": worst_edge[1],
                       "clearance_mm": round(worst_edge[0], 4)},
        "nets": [{"id": n.net_id, "kind": n.kind, "ring": n.ring_index,
                  "pin": n.pin, "copper_mm": lengths[n.net_id]}
                 for n in side.nets],
    }


def routing_report_text(reports: list[dict]) -> str:
    lines = []
    for rep in reports:
        lines.append(f"[{rep['side']}]")
        wp = rep["worst_pair"]
        lines.append(f"  worst net-to-net clearance: {wp['clearance_mm']} mm "
                     f"({wp['a']} vs {wp['b']})")
        we = rep["worst_edge"]
        lines.append(f"  worst copper-to-edge clearance: "
                     f"{we['clearance_mm']} mm ({we['net']})")
        for n in rep["nets"]:
            ring = f"ring {n['ring']}" if n["ring"] else "direct"
            lines.append(f"  pin {n['pin']:2d}  {n['id']:<14s} {ring:<8s} "
                         f"copper {n['copper_mm']} mm")
    return "\n".join(lines) + "\n"
