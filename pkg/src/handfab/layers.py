"""Per-side board layer assembly.

Stacks the routed copper with three outline-derived layers: a coverlay
mask (openings over the sensing regions, the palm window, and the
connector), an adhesive sheet filling everything the mask does not open,
and the edge-cut layer (outer hand contour plus inner flexibility cuts
between copper corridors).
"""
from __future__ import annotations

from dataclasses import dataclass

import shapely

from .capture import HandModel
from .config import DesignConfig, LayerConfig
from .errors import AssemblyError
from .geometry import Polygon, convex_hull, from_shapely, min_clearance, \
    stroke_polyline, to_shapely_set
from .layout import ElectrodeSet, SensingRegion
from .routing import SideRouting


@dataclass(frozen=True)
class ConnectorFootprint:
    center: tuple[float, float]
    rotation_deg: float
    pads: tuple[Polygon, ...]          # 16 signal pads in pin order
    anchors: tuple[Polygon, ...]       # 2 mechanical pads


@dataclass(frozen=True)
class BoardDesign:
    side: str
    copper: tuple[Polygon, ...]
    coverlay_mask: tuple[Polygon, ...]
    adhesive: tuple[Polygon, ...]
    outer_cut: Polygon
    inner_cuts: tuple[Polygon, ...]
    connector: ConnectorFootprint
    routing: SideRouting


def _contour_polygon(hand: HandModel) -> Polygon:
    return hand.contour


def coverlay_mask(regions: list[SensingRegion], contour: Polygon,
                  cfg: LayerConfig,
                  extra_openings: tuple[Polygon, ...] = ()) -> list[Polygon]:
    """Openings: hull of every digit region, the contour inset by the
    coverlay inset (palm window), and any extra openings (connector)."""
    openings = [convex_hull(r.outline.exterior)
                for r in regions if r.kind != "palm"]
    inner = contour.to_shapely().buffer(-cfg.coverlay_inset, quad_segs=32)
    if inner.is_empty:
        raise AssemblyError(
            f"coverlay inset {cfg.coverlay_inset} mm collapses the palm "
            "opening")
    openings.extend(from_shapely(inner))
    openings.extend(extra_openings)
    merged = to_shapely_set(openings)
    merged = shapely.intersection(merged, contour.to_shapely())
    return from_shapely(merged)


def adhesive_layer(contour: Polygon, mask: list[Polygon]) -> list[Polygon]:
    """Everything between the outer contour and the coverlay openings."""
    out = shapely.difference(contour.to_shapely(), to_shapely_set(mask))
    return from_shapely(out)


def edge_cuts(contour: Polygon, copper: list[Polygon],
              mask: list[Polygon], cfg: LayerConfig
              ) -> tuple[Polygon, list[Polygon]]:
    """Outer cut is the hand contour; inner flexibility cuts are the mask
    openings minus the copper inflated by the clearance margin, then
    sliver-filtered and inset for the laser kerf."""
    keep_out = to_shapely_set(copper).buffer(cfg.cut_copper_margin,
                                             quad_segs=16)
    raw = shapely.difference(to_shapely_set(mask), keep_out)
    cuts = []
    for piece in from_shapely(raw):
        if piece.area < cfg.cut_min_area:
            continue
        inset = piece.to_shapely().buffer(-cfg.kerf_inset, quad_segs=16)
        for cut in from_shapely(inset):
            if cut.area >= cfg.cut_min_area:
                cuts.append(cut)
    if copper and cuts:
        d = min_clearance(cuts, copper)
        if d < cfg.cut_copper_margin - 1e-6:
            raise AssemblyError(
                f"inner cut within {d:.4f} mm of copper "
                f"(minimum {cfg.cut_copper_margin})")
    return contour, cuts


def net_polygons(routing: SideRouting) -> list[Polygon]:
    """Flatten a side's routed nets (traces, pads, anchors) to polygons."""
    polys = []
    for net in routing.nets:
        polys.extend(stroke_polyline(pl) for pl in net.polylines)
        polys.append(net.pad)
    polys.extend(routing.anchor_pads)
    return from_shapely(to_shapely_set(polys))


def assemble(hand: HandModel, regions: list[SensingRegion],
             electrodes: ElectrodeSet, routing: SideRouting,
             cfg: DesignConfig) -> BoardDesign:
    """Build and audit one side's BoardDesign."""
    contour = _contour_polygon(hand)
    copper = net_polygons(routing)

    pads = tuple(net.pad for net in sorted(routing.nets,
                                           key=lambda n: n.pin))
    connector = ConnectorFootprint(center=routing.connector_center,
                                   rotation_deg=0.0, pads=pads,
                                   anchors=routing.anchor_pads)
    pad_zone = convex_hull(
        [v for p in pads + routing.anchor_pads for v in p.exterior])
    opening = from_shapely(pad_zone.to_shapely().buffer(0.5, quad_segs=16))

    mask = coverlay_mask(regions, contour, cfg.layers,
                         extra_openings=tuple(opening))
    mask_geo = to_shapely_set(mask)
    for taxel in electrodes.taxels:
        if not mask_geo.covers(shapely.Point(taxel.point)):
            raise AssemblyError(
                f"taxel {taxel.point} is covered by coverlay")

    adhesive = adhesive_layer(contour, mask)
    if shapely.intersection(to_shapely_set(adhesive), mask_geo).area > 1e-6:
        raise AssemblyError("adhesive overlaps coverlay openings")

    outer, inner = edge_cuts(contour, copper, mask, cfg.layers)

    inset = contour.to_shapely().buffer(-cfg.routing.edge_clearance,
                                        quad_segs=32)
    stray = shapely.difference(to_shapely_set(copper), inset)
    if stray.area > 1e-6:
        raise AssemblyError(
            "copper escapes the contour inset by the edge clearance")

    return BoardDesign(side=routing.side, copper=tuple(copper),
                       coverlay_mask=tuple(mask), adhesive=tuple(adhesive),
                       outer_cut=outer, inner_cuts=tuple(inner),
                       connector=connector, routing=routing)
