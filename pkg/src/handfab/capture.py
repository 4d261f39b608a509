"""Hand capture: turn a photo + landmark file into a calibrated HandModel.

The reference sheet in the photo gives the px->mm scale; HSV thresholding
gives a binary hand mask; the mask boundary gives a dense outer contour.
All outputs live in the page frame: millimeters, origin at the page's
bottom-left corner, y increasing upward.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import cv2
import numpy as np
import shapely

from .config import CaptureConfig
from .errors import CalibrationError, SchemaError, SegmentationError
from .geometry import Polygon, from_shapely

LANDMARK_COUNT = 21
WRIST = 0


@dataclass(frozen=True)
class HandModel:
    """Calibrated observation of one hand on the reference sheet."""
    px_per_mm: float
    landmarks: np.ndarray          # (21, 2) mm, page frame
    mask: np.ndarray               # uint8 binary raster, page-cropped (y down)
    contour: Polygon               # mm, page frame
    handedness: str                # "left" | "right"

    def __post_init__(self):
        if self.landmarks.shape != (LANDMARK_COUNT, 2):
            raise SchemaError(f"expected {LANDMARK_COUNT} landmarks, got "
                              f"{self.landmarks.shape[0]}")
        xs = [p[0] for p in self.contour.exterior]
        ys = [p[1] for p in self.contour.exterior]
        lo = np.array([min(xs) - 5.0, min(ys) - 5.0])
        hi = np.array([max(xs) + 5.0, max(ys) + 5.0])
        if not (np.all(self.landmarks >= lo) and np.all(self.landmarks <= hi)):
            raise SchemaError("landmarks fall outside the hand contour "
                              "bounding box (+5 mm)")


def _order_quad(pts: np.ndarray) -> np.ndarray:
    """Order 4 image-space corners as TL, TR, BR, BL."""
    pts = pts.reshape(4, 2).astype(np.float64)
    s = pts.sum(axis=1)
    d = pts[:, 0] - pts[:, 1]
    return np.array([pts[np.argmin(s)], pts[np.argmax(d)],
                     pts[np.argmax(s)], pts[np.argmin(d)]])


def calibrate_scale(image: np.ndarray,
                    cfg: CaptureConfig) -> tuple[float, np.ndarray]:
    """Find the bright reference sheet and derive the px->mm scale.

    Returns (px_per_mm, page_quad) where page_quad is the sheet's corner
    quadrilateral in image pixels (TL, TR, BR, BL).
    """
    if image.ndim == 3:
        gray = cv2.cvtColor(image, cv2.COLOR_BGR2GRAY)
    else:
        gray = image
    thresh = np.percentile(gray, cfg.sheet_percentile)
    bright = (gray >= max(thresh, 1)).astype(np.uint8) * 255
    contours, _ = cv2.findContours(bright, cv2.RETR_EXTERNAL,
                                   cv2.CHAIN_APPROX_SIMPLE)
    if not contours:
        raise CalibrationError("no bright sheet region found")
    sheet = max(contours, key=cv2.contourArea)
    frame_area = gray.shape[0] * gray.shape[1]
    if cv2.contourArea(sheet) < 0.5 * frame_area:
        raise CalibrationError("bright region covers < 50% of the frame; "
                               "sheet not found")
    peri = cv2.arcLength(sheet, True)
    approx = cv2.approxPolyDP(sheet, 0.02 * peri, True)
    if len(approx) != 4:
        # fall back to the minimum-area rectangle of the blob
        approx = cv2.boxPoints(cv2.minAreaRect(sheet))
    quad = _order_quad(np.asarray(approx))

    top = np.linalg.norm(quad[1] - quad[0])
    bottom = np.linalg.norm(quad[2] - quad[3])
    left = np.linalg.norm(quad[3] - quad[0])
    right = np.linalg.norm(quad[2] - quad[1])
    w_px = (top + bottom) / 2.0
    h_px = (left + right) / 2.0
    # the sheet may be photographed in either orientation: match the longer
    # pixel span to the longer physical dimension
    dims = sorted([cfg.sheet_width_mm, cfg.sheet_height_mm])
    spans = sorted([w_px, h_px])
    scale_short = spans[0] / dims[0]
    scale_long = spans[1] / dims[1]
    if abs(scale_short - scale_long) > 0.02 * max(scale_short, scale_long):
        raise CalibrationError(
            f"width/height scale estimates disagree by more than 2% "
            f"({scale_short:.3f} vs {scale_long:.3f} px/mm); photo too skewed")
    return (scale_short + scale_long) / 2.0, quad


def rectify(image: np.ndarray, quad: np.ndarray, px_per_mm: float,
            cfg: CaptureConfig) -> np.ndarray:
    """Warp the sheet quad to an axis-aligned page raster (portrait)."""
    top = np.linalg.norm(quad[1] - quad[0])
    left = np.linalg.norm(quad[3] - quad[0])
    if top > left:
        # landscape photo of a portrait sheet: rotate corner order so the
        # sheet's long axis becomes vertical
        quad = quad[[1, 2, 3, 0]]
    w = int(round(cfg.sheet_width_mm * px_per_mm))
    h = int(round(cfg.sheet_height_mm * px_per_mm))
    dst = np.array([[0, 0], [w - 1, 0], [w - 1, h - 1], [0, h - 1]],
                   dtype=np.float32)
    m = cv2.getPerspectiveTransform(quad.astype(np.float32), dst)
    return cv2.warpPerspective(image, m, (w, h))


def segment_hand(page_image: np.ndarray, cfg: CaptureConfig,
                 px_per_mm: float) -> np.ndarray:
    """HSV-threshold the rectified page image into a binary hand mask."""
    hsv = cv2.cvtColor(page_image, cv2.COLOR_BGR2HSV)
    mask = cv2.inRange(hsv, np.array(cfg.hsv_lo, dtype=np.uint8),
                       np.array(cfg.hsv_hi, dtype=np.uint8))
    kernel = cv2.getStructuringElement(cv2.MORPH_ELLIPSE, (3, 3))
    mask = cv2.morphologyEx(mask, cv2.MORPH_CLOSE, kernel)
    # fill interior holes: flood the background from the border, then invert
    flood = mask.copy()
    fill_mask = np.zeros((mask.shape[0] + 2, mask.shape[1] + 2), np.uint8)
    cv2.floodFill(flood, fill_mask, (0, 0), 255)
    mask = mask | cv2.bitwise_not(flood)

    n, labels, stats, _ = cv2.connectedComponentsWithStats(mask)
    if n <= 1:
        raise SegmentationError("no pixels matched the skin HSV band")
    best = 1 + int(np.argmax(stats[1:, cv2.CC_STAT_AREA]))
    area_mm2 = stats[best, cv2.CC_STAT_AREA] / (px_per_mm ** 2)
    if area_mm2 < cfg.min_mask_area_mm2:
        raise SegmentationError(
            f"largest skin component is {area_mm2:.0f} mm^2, below the "
            f"{cfg.min_mask_area_mm2:.0f} mm^2 minimum")
    return (labels == best).astype(np.uint8) * 255


def extract_contour(mask: np.ndarray, px_per_mm: float,
                    cfg: CaptureConfig | None = None) -> Polygon:
    """Trace the mask's outer boundary into a dense mm-frame polygon."""
    cfg = cfg or CaptureConfig()
    if not np.any(mask):
        raise SegmentationError("empty mask")
    contours, _ = cv2.findContours(mask, cv2.RETR_EXTERNAL,
                                   cv2.CHAIN_APPROX_NONE)
    boundary = max(contours, key=cv2.contourArea).reshape(-1, 2)
    if len(boundary) < 3:
        raise SegmentationError("mask boundary degenerate")
    h = mask.shape[0]
    pts = np.empty_like(boundary, dtype=np.float64)
    pts[:, 0] = boundary[:, 0] / px_per_mm
    pts[:, 1] = (h - 1 - boundary[:, 1]) / px_per_mm   # flip to y-up
    poly = shapely.Polygon(pts)
    if not poly.is_valid:
        poly = poly.buffer(0)
    # the traced path runs through pixel centers; grow by half a pixel so
    # the polygon matches the pixel footprint
    poly = poly.buffer(0.5 / px_per_mm, quad_segs=8)
    poly = poly.simplify(cfg.contour_tolerance)
    poly = shapely.segmentize(poly, cfg.contour_max_spacing)
    parts = from_shapely(poly)
    if len(parts) != 1:
        raise SegmentationError("mask boundary produced multiple polygons")
    # keep only the outer ring; interior holes are segmentation noise
    outer = parts[0]
    if outer.holes:
        outer = Polygon(exterior=outer.exterior, holes=())
    return outer


def load_landmarks(path: str, cfg: CaptureConfig) -> tuple[np.ndarray, str]:
    """Read the landmark JSON and convert to mm in the page frame."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"landmarks: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"landmarks: malformed JSON: {exc}") from exc

    handedness = data.get("handedness")
    if handedness not in ("left", "right"):
        raise SchemaError(f"unknown handedness: {handedness!r}")
    entries = data.get("landmarks")
    if not isinstance(entries, list) or len(entries) != LANDMARK_COUNT:
        count = len(entries) if isinstance(entries, list) else "missing"
        raise SchemaError(f"expected {LANDMARK_COUNT} landmarks, got {count}")
    for key in ("image_width", "image_height"):
        if not isinstance(data.get(key), int) or data[key] <= 0:
            raise SchemaError(f"landmarks: bad {key}")

    pts = np.empty((LANDMARK_COUNT, 2))
    for i, entry in enumerate(entries):
        try:
            x, y = float(entry["x"]), float(entry["y"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"landmark {i}: missing x/y") from exc
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise SchemaError(f"landmark {i}: coords out of [0,1]")
        # normalized image coords are y-down; page frame is y-up
        pts[i] = (x * cfg.sheet_width_mm, (1.0 - y) * cfg.sheet_height_mm)
    return pts, handedness


def capture(image_path: str, landmarks_path: str,
            cfg: CaptureConfig | None = None) -> HandModel:
    """Full capture pipeline: calibrate, rectify, segment, trace, load."""
    cfg = cfg or CaptureConfig()
    image = cv2.imread(image_path, cv2.IMREAD_COLOR)
    if image is None:
        raise CalibrationError(f"cannot read image: {image_path}")
    px_per_mm, quad = calibrate_scale(image, cfg)
    page = rectify(image, quad, px_per_mm, cfg)
    mask = segment_hand(page, cfg, px_per_mm)
    contour = extract_contour(mask, px_per_mm, cfg)
    landmarks, handedness = load_landmarks(landmarks_path, cfg)
    return HandModel(px_per_mm=px_per_mm, landmarks=landmarks, mask=mask,
                     contour=contour, handedness=handedness)
