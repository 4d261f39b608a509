import math

import numpy as np
import pytest
import shapely
from shapely import Point

from handfab import layout
from handfab.geometry import Polygon, to_shapely_set
from handfab.routing import corridor_inset

EXPECTED_IDS = sorted(
    [f"{f}-{seg}" for f in ("index", "middle", "ring", "little")
     for seg in ("tip", "mid", "base")] + ["thumb-top", "thumb-mid", "palm"])


@pytest.fixture(scope="module")
def regions(hand, cfg):
    return layout.synthesize_regions(hand, cfg.layout,
                                     corridor_inset(cfg.routing))


@pytest.fixture(scope="module")
def electrodes(regions, cfg):
    return layout.place_electrodes(regions, cfg.layout)


def test_region_count_and_ids(regions):
    assert [r.id for r in regions] == EXPECTED_IDS


def test_regions_inside_corridor(hand, regions, cfg):
    zone = hand.contour.to_shapely().buffer(-corridor_inset(cfg.routing))
    for region in regions:
        escaped = shapely.difference(region.outline.to_shapely(), zone).area
        assert escaped < 1e-3, region.id


def test_regions_essentially_disjoint(regions):
    """Adjacent segments of a bent digit may share a small wedge at the
    joint (their electrode traces stay clear; the routing audit enforces
    copper clearance).  Any other pair must be strictly disjoint."""
    def digit(rid):
        return rid.rsplit("-", 1)[0] if "-" in rid else rid

    for i, a in enumerate(regions):
        for b in regions[i + 1:]:
            overlap = shapely.intersection(a.outline.to_shapely(),
                                           b.outline.to_shapely()).area
            limit = 0.5 if digit(a.id) == digit(b.id) else 1e-6
            assert overlap < limit, (a.id, b.id, overlap)


def test_taxel_totals(regions, electrodes):
    per_region = {}
    for taxel in electrodes.taxels:
        per_region[taxel.region] = per_region.get(taxel.region, 0) + 1
    for region in regions:
        rows, cols = region.grid
        assert per_region[region.id] == rows * cols, region.id
    assert len(electrodes.taxels) == 12 * 6 + 12 + 8 + 77  # == 169


def test_taxels_inside_their_region(regions, electrodes):
    outlines = {r.id: r.outline.to_shapely() for r in regions}
    for taxel in electrodes.taxels:
        assert outlines[taxel.region].buffer(1e-6).covers(Point(*taxel.point))


def test_trace_counts_match_grids(regions, electrodes):
    rows = sum(r.grid[0] for r in regions)
    cols = sum(r.grid[1] for r in regions)
    assert len(electrodes.horizontal) == rows
    assert len(electrodes.vertical) == cols
    assert len(electrodes.row_tags) == rows
    assert len(electrodes.col_tags) == cols


def test_trace_widths(electrodes, cfg):
    for pl in electrodes.horizontal + electrodes.vertical:
        assert pl.width == cfg.layout.trace_width


def test_rotated_rectangle_analytic():
    """Electrode placement on a 45-degree rectangle: taxels form the
    expected evenly spaced lattice in the rectangle's own frame."""
    # 20 x 10 rectangle rotated 45 degrees about the origin
    c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
    rot = np.array([[c, -s], [s, c]])
    corners = [rot @ p for p in ((0, 0), (20, 0), (20, 10), (0, 10))]
    region = layout.SensingRegion(
        id="probe", outline=Polygon([tuple(p) for p in corners]),
        grid=(3, 2), axis=(c, s), kind="finger")
    es = layout.place_electrodes([region], layout.LayoutConfig())
    assert len(es.taxels) == 6
    pts = np.array([t.point for t in es.taxels])
    local = pts @ rot  # back to the axis-aligned frame
    us = np.unique(np.round(local[:, 0], 6))
    vs = np.unique(np.round(local[:, 1], 6))
    assert len(us) == 3 and len(vs) == 2
    # evenly spaced, symmetric about the rectangle centre
    assert np.allclose(np.diff(us), us[1] - us[0], atol=1e-6)
    assert us.mean() == pytest.approx(10.0, abs=1e-6)
    assert vs.mean() == pytest.approx(5.0, abs=1e-6)


def test_row_traces_perpendicular_to_columns(electrodes):
    by_region = {}
    for pl, tag in zip(electrodes.horizontal, electrodes.row_tags):
        by_region.setdefault(tag.split(":")[0], [[], []])[0].append(pl)
    for pl, tag in zip(electrodes.vertical, electrodes.col_tags):
        by_region.setdefault(tag.split(":")[0], [[], []])[1].append(pl)
    for region, (rows, cols) in by_region.items():
        r = np.array(rows[0].vertices[-1]) - np.array(rows[0].vertices[0])
        c = np.array(cols[0].vertices[-1]) - np.array(cols[0].vertices[0])
        cosang = abs(np.dot(r, c) / (np.linalg.norm(r) * np.linalg.norm(c)))
        assert cosang < 1e-6, region


def test_determinism(hand, cfg, regions):
    again = layout.synthesize_regions(hand, cfg.layout,
                                      corridor_inset(cfg.routing))
    for a, b in zip(regions, again):
        assert a.id == b.id
        assert a.outline.exterior == b.outline.exterior


def test_palm_overlaps_nothing_after_carve(regions):
    palm = next(r for r in regions if r.id == "palm").outline.to_shapely()
    others = to_shapely_set([r.outline for r in regions if r.id != "palm"])
    assert shapely.intersection(palm, others).area < 1e-6
