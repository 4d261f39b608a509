import math

import numpy as np
import pytest
import shapely
from shapely import LineString, Point

from handfab import routing
from handfab.config import RoutingConfig
from handfab.errors import RoutingError


def circle(radius, cx=0.0, cy=0.0, n=256):
    ang = np.linspace(0, 2 * math.pi, n, endpoint=False)
    return shapely.Polygon(np.c_[cx + radius * np.cos(ang),
                                 cy + radius * np.sin(ang)])


def test_corridor_inset_value():
    cfg = RoutingConfig()
    # edge clearance + ring band + one trace width + clearance + margin
    expected = 0.5 + 16 * 0.2 + 0.1 + 0.1 + 0.05
    assert routing.corridor_inset(cfg) == pytest.approx(expected)


def test_ring_radii_on_circle():
    cfg = RoutingConfig()
    rings = routing.build_rings(circle(50.0), cfg)
    assert len(rings) == 16
    for k, ring in enumerate(rings, start=1):
        expected = 50.0 - (cfg.edge_clearance + cfg.ring_pitch * k)
        radii = np.hypot(*np.array(ring.coords).T)
        assert radii == pytest.approx(expected, abs=0.02), k


def test_rings_open_at_window():
    cfg = RoutingConfig()
    rings = routing.build_rings(circle(50.0, cy=60.0), cfg, center_x=0.0)
    for ring in rings:
        assert not ring.is_closed
        # both cut ends sit near the window, i.e. at the bottom
        for end in (ring.coords[0], ring.coords[-1]):
            assert end[1] < 60.0 - 40.0
        # arc parameter starts at the left cut
        assert ring.coords[0][0] < ring.coords[-1][0]


def test_small_contour_rejected():
    cfg = RoutingConfig()
    with pytest.raises(RoutingError):
        routing.build_rings(circle(3.0), cfg)


def test_group_components_contiguous():
    params = [0.1, 0.2, 0.5, 0.6, 0.61]
    groups = routing.group_components(params, 2)
    assert groups == [[0, 1], [2, 3, 4]]
    # grouping keys on value, not position
    swapped = [0.5, 0.2, 0.1, 0.6, 0.61]
    groups = routing.group_components(swapped, 2)
    assert groups == [[2, 1], [0, 3, 4]]


def test_group_components_degenerate():
    assert routing.group_components([1.0, 2.0], 5) == [[0], [1]]
    assert routing.group_components([3.0, 1.0, 2.0], 1) == [[1, 2, 0]]


def test_monotone_match_is_order_preserving():
    match = routing._monotone_match([1.0, 5.0], [0.0, 2.0, 4.0, 6.0])
    assert match == sorted(match)
    assert match == [0, 2] or match == [1, 2]
    # a dense palm row absorbs fingers without crossings
    match = routing._monotone_match([10.0, 20.0, 30.0],
                                    [9.0, 11.0, 19.0, 21.0, 29.0])
    assert match == sorted(match)


@pytest.fixture(scope="module")
def routed(hand, design):
    return design.front.routing, design.back.routing


def test_net_counts_and_pins(routed):
    for side in routed:
        assert len(side.nets) == 16
        assert sorted(net.pin for net in side.nets) == list(range(1, 17))
        assert len(side.anchor_pads) == 2


def test_ring_indices_unique(routed):
    for side in routed:
        rings = [n.ring_index for n in side.nets if n.kind == "ring"]
        assert len(rings) == len(set(rings))
        assert all(1 <= k <= 16 for k in rings)


def test_trace_widths_uniform(routed, cfg):
    for side in routed:
        for net in side.nets:
            for pl in net.polylines:
                assert pl.width == cfg.routing.trace_width


def test_clearance_audit_passes(routed, hand, cfg):
    for side in routed:
        report = routing.verify_clearance(side, hand, cfg.routing)
        assert report["worst_pair"]["clearance_mm"] >= cfg.routing.clearance - 1e-3
        assert report["worst_edge"]["clearance_mm"] >= cfg.routing.edge_clearance - 1e-3


def test_net_connected_with_pad(routed):
    for side in routed:
        for net in side.nets:
            copper = routing.net_copper(net)
            assert copper.geom_type == "MultiPolygon" or \
                copper.geom_type == "Polygon"
            merged = shapely.union_all(copper)
            assert merged.geom_type == "Polygon", net.net_id


def _ring_arc(net, boundary):
    """A ring net's contour-following arc: the longest polyline that
    hugs the board edge over its whole length (electrode traces and
    drops reach into the interior)."""
    candidates = []
    for pl in net.polylines:
        pts = np.array(pl.vertices)
        sample = pts[:: max(1, len(pts) // 20)]
        if all(boundary.distance(Point(*p)) < 3.8 for p in sample):
            candidates.append(pl)
    return max(candidates, key=lambda pl: LineString(pl.vertices).length)


def test_drops_land_on_their_ring(routed, hand):
    """Every ring net has at least one drop segment ending exactly on
    the kept arc (the nearest-point construction)."""
    boundary = LineString(hand.contour.to_shapely().exterior.coords)
    for side in routed:
        for net in side.nets:
            if net.kind != "ring":
                continue
            arc = _ring_arc(net, boundary)
            arc_line = LineString(arc.vertices)
            touching = 0
            for pl in net.polylines:
                if pl is arc:
                    continue
                d = min(arc_line.distance(Point(*pl.vertices[0])),
                        arc_line.distance(Point(*pl.vertices[-1])))
                if d < 1e-6:
                    touching += 1
            assert touching >= 1, net.net_id


def test_ring_insets_match_pitch(routed, hand, cfg):
    """Ring k's centerline sits at edge_clearance + k * pitch from the
    contour, so consecutive rings are spaced by the 0.2 mm pitch."""
    boundary = LineString(hand.contour.to_shapely().exterior.coords)
    for side in routed:
        for net in side.nets:
            if net.kind != "ring":
                continue
            expected = (cfg.routing.edge_clearance
                        + cfg.routing.ring_pitch * net.ring_index)
            pts = np.array(_ring_arc(net, boundary).vertices)
            sample = pts[:: max(1, len(pts) // 50)]
            for p in sample:
                d = boundary.distance(Point(*p))
                assert d == pytest.approx(expected, abs=0.03), \
                    (side.side, net.ring_index, d)
