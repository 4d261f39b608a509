"""Rasterization of layer geometry, used by the export comparison oracle
and the preview renderer."""
from __future__ import annotations

import cv2
import numpy as np
import shapely

from .gerber import GerberImage


def _grid(bounds, mm_per_px: float):
    x0, y0, x1, y1 = bounds
    w = int(np.ceil((x1 - x0) / mm_per_px)) + 1
    h = int(np.ceil((y1 - y0) / mm_per_px)) + 1

    def to_px(pts):
        arr = np.asarray(pts, dtype=float)
        px = np.empty_like(arr)
        px[:, 0] = (arr[:, 0] - x0) / mm_per_px
        px[:, 1] = (y1 - arr[:, 1]) / mm_per_px
        return np.round(px).astype(np.int32)
    return (h, w), to_px


def raster_polygons(polys, bounds, mm_per_px: float) -> np.ndarray:
    """Binary raster of a Polygon set (holes cleared)."""
    shape, to_px = _grid(bounds, mm_per_px)
    img = np.zeros(shape, np.uint8)
    # widest container first (by exterior area, ignoring holes) so that
    # polygons nested inside another polygon's hole are drawn after that
    # hole is cleared
    def exterior_area(poly):
        pts = np.asarray(poly.exterior, dtype=float)
        x, y = pts[:, 0], pts[:, 1]
        return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    for poly in sorted(polys, key=exterior_area, reverse=True):
        cv2.fillPoly(img, [to_px(poly.exterior)], 1)
        for hole in poly.holes:
            cv2.fillPoly(img, [to_px(hole)], 0)
    return img


def raster_gerber(gerb: GerberImage, bounds, mm_per_px: float) -> np.ndarray:
    """Binary raster of a parsed Gerber image.

    Strokes are expanded to their exact round-capped outlines first so
    that both operands of the comparison oracle go through the same
    polygon scan-conversion.
    """
    shape, to_px = _grid(bounds, mm_per_px)
    img = np.zeros(shape, np.uint8)
    for region in gerb.regions:
        value = 1 if region.polarity == "dark" else 0
        cv2.fillPoly(img, [to_px(region.points)], value)
    for stroke in gerb.strokes:
        swept = shapely.LineString(stroke.points).buffer(
            stroke.width / 2.0, quad_segs=32, cap_style="round",
            join_style="round")
        parts = (swept.geoms if hasattr(swept, "geoms") else [swept])
        for part in parts:
            cv2.fillPoly(img, [to_px(part.exterior.coords)], 1)
            for hole in part.interiors:
                cv2.fillPoly(img, [to_px(hole.coords)], 0)
    return img


def iou(a: np.ndarray, b: np.ndarray) -> float:
    inter = np.logical_and(a, b).sum()
    union = np.logical_or(a, b).sum()
    return float(inter) / float(union) if union else 1.0
