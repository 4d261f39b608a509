import numpy as np
import pytest
import shapely
from shapely import Point

from handfab import pipeline
from handfab.geometry import min_clearance, to_shapely_set, total_area


def _shape(polys):
    return to_shapely_set(list(polys))


def test_coverlay_adhesive_partition_contour(design, hand):
    """Coverlay mask + adhesive tile the board area: disjoint, and their
    areas sum to the contour area (the mask is where copper stays
    exposed; adhesive bonds everywhere else)."""
    contour = hand.contour.to_shapely()
    for bd in (design.front, design.back):
        mask = _shape(bd.coverlay_mask)
        adhesive = _shape(bd.adhesive)
        assert shapely.intersection(mask, adhesive).area < 1e-6
        assert mask.area + adhesive.area == pytest.approx(contour.area,
                                                          abs=1e-3)


def test_taxels_exposed(design):
    for bd, traces in ((design.front, "horizontal"),
                       (design.back, "vertical")):
        mask = _shape(bd.coverlay_mask)
        for taxel in design.electrodes.taxels:
            assert mask.covers(Point(*taxel.point)), (bd.side, taxel)


def test_connector_pads_exposed(design):
    for bd in (design.front, design.back):
        mask = _shape(bd.coverlay_mask)
        for pad in bd.connector.pads + bd.connector.anchors:
            assert mask.buffer(1e-6).covers(pad.to_shapely())


def test_copper_inside_outline(design, cfg):
    for bd in (design.front, design.back):
        outline = bd.outer_cut.to_shapely()
        copper = _shape(bd.copper)
        inset = outline.buffer(-cfg.routing.edge_clearance + 1e-3)
        assert inset.covers(copper), bd.side


def test_inner_cuts_clear_of_copper(design, cfg):
    for bd in (design.front, design.back):
        assert len(bd.inner_cuts) > 0
        d = min_clearance(list(bd.copper), list(bd.inner_cuts))
        assert d >= cfg.layers.cut_copper_margin - 1e-3, bd.side


def test_inner_cuts_inside_mask(design):
    for bd in (design.front, design.back):
        mask = _shape(bd.coverlay_mask)
        for cut in bd.inner_cuts:
            assert mask.buffer(1e-6).covers(cut.to_shapely())


def test_no_cut_slivers(design, cfg):
    for bd in (design.front, design.back):
        for cut in bd.inner_cuts:
            assert cut.to_shapely().area >= cfg.layers.cut_min_area - 1e-9


def test_connector_pad_order(design, cfg):
    for bd in (design.front, design.back):
        assert len(bd.connector.pads) == 16
        xs = [pad.to_shapely().centroid.x for pad in bd.connector.pads]
        spacing = np.diff(sorted(xs))
        assert np.allclose(spacing, cfg.routing.pad_pitch, atol=1e-6)
        # pads are stored in pin order, which runs monotonically in x
        assert xs == sorted(xs) or xs == sorted(xs, reverse=True)


def _mirror_back(geom, axis):
    return shapely.transform(
        geom, lambda p: np.c_[2 * axis - p[:, 0], p[:, 1]])


def test_exact_mirror_hand_gives_mirror_design(hand, design, cfg):
    """Feeding the exact mirror image of the right hand through the
    pipeline yields the mirrored design to within 1 um."""
    import dataclasses

    axis = cfg.capture.sheet_width_mm / 2.0
    hand_l = dataclasses.replace(pipeline._mirror_hand(hand, axis),
                                 handedness="left")
    result_l = pipeline.design_from_hand(hand_l, cfg)
    for bd_r, bd_l in ((design.front, result_l.front),
                       (design.back, result_l.back)):
        a = _shape(bd_r.copper)
        b = _mirror_back(_shape(bd_l.copper), axis)
        assert a.hausdorff_distance(b) < 1e-3, bd_r.side


def test_captured_left_hand_close_to_mirrored_right(left_fixture_paths,
                                                    design, cfg):
    """A left capture of the mirrored page produces a near-mirror design
    (rasterized silhouettes differ by a fraction of a pixel)."""
    from handfab import capture as cap

    hand_l = cap.capture(left_fixture_paths["image"],
                         left_fixture_paths["landmarks"], cfg.capture)
    result_l = pipeline.design_from_hand(hand_l, cfg)
    axis = cfg.capture.sheet_width_mm / 2.0
    for bd_r, bd_l in ((design.front, result_l.front),
                       (design.back, result_l.back)):
        a = _shape(bd_r.copper)
        b = _mirror_back(_shape(bd_l.copper), axis)
        assert a.hausdorff_distance(b) < 1.0, bd_r.side
        assert b.area == pytest.approx(a.area, rel=0.02)


def test_area_identity(design, hand):
    """Copper area equals the sum of per-net stroked areas minus overlap
    (nets are disjoint, so the union preserves total area within tol)."""
    from handfab.routing import net_copper

    for bd in (design.front, design.back):
        union_area = _shape(bd.copper).area
        per_net = sum(net_copper(n).area for n in bd.routing.nets)
        anchors = sum(p.to_shapely().area for p in bd.connector.anchors)
        assert union_area == pytest.approx(per_net + anchors, rel=1e-3)
