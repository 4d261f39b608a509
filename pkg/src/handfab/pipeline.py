"""End-to-end design generation.

Chains capture -> region synthesis -> electrodes -> routing -> layers ->
file emission.  Left hands are designed by mirroring the captured model
about the page centerline, running the right-hand pipeline, and mirroring
every output geometry back.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import shapely
import shapely.affinity

from . import layout, routing as routing_mod
from .capture import HandModel, capture
from .config import DesignConfig
from .export import bom_csv, bom_text, emit_gerber, emit_svg
from .export.gerber import write_manifest
from .export._util import atomic_write
from .geometry import Polygon, Polyline, from_shapely
from .layers import BoardDesign, ConnectorFootprint, assemble
from .layout import ElectrodeSet, SensingRegion, electrode_set_json
from .routing import RoutedNet, SideRouting, corridor_inset, \
    routing_report_text, verify_clearance


@dataclass(frozen=True)
class DesignResult:
    hand: HandModel
    regions: list[SensingRegion]
    electrodes: ElectrodeSet
    front: BoardDesign
    back: BoardDesign
    reports: list[dict]


def _mirror_poly(p: Polygon, axis_x: float) -> Polygon:
    sp = shapely.affinity.scale(p.to_shapely(), xfact=-1, yfact=1,
                                origin=(axis_x, 0))
    out = from_shapely(sp)
    if len(out) != 1:
        raise ValueError("mirroring changed polygon count")
    return out[0]


def _mirror_polyline(pl: Polyline, axis_x: float) -> Polyline:
    return Polyline(vertices=tuple((2 * axis_x - x, y)
                                   for x, y in pl.vertices),
                    width=pl.width)


def _mirror_hand(hand: HandModel, axis_x: float) -> HandModel:
    lms = hand.landmarks.copy()
    lms[:, 0] = 2 * axis_x - lms[:, 0]
    return HandModel(px_per_mm=hand.px_per_mm, landmarks=lms,
                     mask=hand.mask[:, ::-1].copy(),
                     contour=_mirror_poly(hand.contour, axis_x),
                     handedness="right")


def _mirror_net(net: RoutedNet, axis_x: float) -> RoutedNet:
    return replace(
        net,
        polylines=tuple(_mirror_polyline(pl, axis_x)
                        for pl in net.polylines),
        pad=_mirror_poly(net.pad, axis_x))


def _mirror_side(side: SideRouting, axis_x: float) -> SideRouting:
    cx, cy = side.connector_center
    return SideRouting(
        side=side.side,
        nets=tuple(_mirror_net(n, axis_x) for n in side.nets),
        anchor_pads=tuple(_mirror_poly(p, axis_x)
                          for p in side.anchor_pads),
        connector_center=(2 * axis_x - cx, cy))


def _mirror_design(bd: BoardDesign, axis_x: float) -> BoardDesign:
    conn = bd.connector
    ccx, ccy = conn.center
    return BoardDesign(
        side=bd.side,
        copper=tuple(_mirror_poly(p, axis_x) for p in bd.copper),
        coverlay_mask=tuple(_mirror_poly(p, axis_x)
                            for p in bd.coverlay_mask),
        adhesive=tuple(_mirror_poly(p, axis_x) for p in bd.adhesive),
        outer_cut=_mirror_poly(bd.outer_cut, axis_x),
        inner_cuts=tuple(_mirror_poly(p, axis_x) for p in bd.inner_cuts),
        connector=ConnectorFootprint(
            center=(2 * axis_x - ccx, ccy),
            rotation_deg=conn.rotation_deg,
            pads=tuple(_mirror_poly(p, axis_x) for p in conn.pads),
            anchors=tuple(_mirror_poly(p, axis_x) for p in conn.anchors)),
        routing=_mirror_side(bd.routing, axis_x))


def _mirror_region(r: SensingRegion, axis_x: float) -> SensingRegion:
    ax, ay = r.axis
    return SensingRegion(id=r.id, outline=_mirror_poly(r.outline, axis_x),
                         grid=r.grid, axis=(-ax, ay), kind=r.kind)


def _mirror_electrodes(es: ElectrodeSet, axis_x: float) -> ElectrodeSet:
    taxels = tuple(
        replace(t, point=(2 * axis_x - t.point[0], t.point[1]))
        for t in es.taxels)
    return ElectrodeSet(
        horizontal=tuple(_mirror_polyline(pl, axis_x)
                         for pl in es.horizontal),
        vertical=tuple(_mirror_polyline(pl, axis_x)
                       for pl in es.vertical),
        row_tags=es.row_tags, col_tags=es.col_tags, taxels=taxels)


def design_from_hand(hand: HandModel, cfg: DesignConfig) -> DesignResult:
    """Run synthesis through layer assembly for a captured hand."""
    axis_x = cfg.capture.sheet_width_mm / 2.0
    mirrored = hand.handedness == "left"
    work = _mirror_hand(hand, axis_x) if mirrored else hand

    regions = layout.synthesize_regions(work, cfg.layout,
                                        corridor_inset(cfg.routing))
    electrodes = layout.place_electrodes(regions, cfg.layout)
    front, back = routing_mod.route(work, regions, electrodes, cfg.routing)
    reports = [verify_clearance(front, work, cfg.routing),
               verify_clearance(back, work, cfg.routing)]
    designs = [assemble(work, regions, electrodes, side, cfg)
               for side in (front, back)]

    if mirrored:
        regions = [_mirror_region(r, axis_x) for r in regions]
        electrodes = _mirror_electrodes(electrodes, axis_x)
        designs = [_mirror_design(bd, axis_x) for bd in designs]

    return DesignResult(hand=hand, regions=regions, electrodes=electrodes,
                        front=designs[0], back=designs[1], reports=reports)


def generate(image_path, landmarks_path, out_dir, cfg: DesignConfig,
             hand_id: str | None = None) -> DesignResult:
    """Capture a hand photo and write every fabrication output."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    hand = capture(image_path, landmarks_path, cfg.capture)
    result = design_from_hand(hand, cfg)
    if hand_id is None:
        hand_id = Path(image_path).stem

    page_w = cfg.capture.sheet_width_mm
    page_h = cfg.capture.sheet_height_mm
    sides = {}
    extra = {}
    for bd in (result.front, result.back):
        sides[bd.side] = emit_gerber(bd, out_dir, hand_id, page_w, page_h)
        svg_name = f"{hand_id}_{bd.side}.svg"
        emit_svg(bd, out_dir / svg_name, page_w, page_h)
        extra[f"svg_{bd.side}"] = svg_name

    for name, text in (
            (f"{hand_id}_bom.csv", bom_csv()),
            (f"{hand_id}_bom.txt", bom_text()),
            (f"{hand_id}_routing.txt", routing_report_text(result.reports)),
            (f"{hand_id}_routing.json",
             json.dumps(result.reports, indent=2, sort_keys=True) + "\n"),
            (f"{hand_id}_electrodes.json",
             electrode_set_json(result.regions, result.electrodes))):
        atomic_write(out_dir / name, text.encode())
        extra[name.split(f"{hand_id}_", 1)[1]] = name

    write_manifest(out_dir, hand_id, sides, extra)
    return result
