"""Synthetic hand fixture generator.

Draws a parametric right hand on a white reference sheet with known
landmark positions, for deterministic end-to-end testing of the pipeline.
The silhouette is a union of finger/thumb capsules, a palm blob, and a
wrist stub with a flat bottom (so the connector zone is well-behaved).

All coordinates are mm in the page frame (origin bottom-left, y up).
"""
from __future__ import annotations

import json
import os

import cv2
import numpy as np
import shapely
from shapely import LineString, MultiPoint

PAGE_W = 215.9   # 8.5 in
PAGE_H = 279.4   # 11 in

# 21-point hand skeleton for the default (right) fixture hand.
# 0 wrist; 1-4 thumb; 5-8 index; 9-12 middle; 13-16 ring; 17-20 little.
DEFAULT_LANDMARKS = {
    0: (105.0, 62.0),
    1: (75.0, 75.0), 2: (63.0, 85.0), 3: (47.0, 100.0), 4: (36.0, 112.0),
    5: (74.0, 150.0), 6: (72.0, 192.0), 7: (71.0, 215.0), 8: (70.0, 234.0),
    9: (96.0, 153.0), 10: (95.0, 198.0), 11: (94.0, 224.0), 12: (93.0, 245.0),
    13: (118.0, 151.0), 14: (119.0, 193.0), 15: (120.0, 217.0),
    16: (121.0, 236.0),
    17: (139.0, 146.0), 18: (141.0, 179.0), 19: (142.0, 196.0),
    20: (143.0, 210.0),
}

DEFAULT_SHAPE = {
    "finger_radius": {"index": 9.0, "middle": 9.0, "ring": 9.0, "little": 8.0},
    "thumb_radius": 11.0,
    "palm_buffer": 16.0,
    # extra hull points fattening the palm's lower corners (heels)
    "thenar_heel": (60.0, 40.0),
    "hypothenar_heel": (140.0, 38.0),
    # flat-bottomed wrist stub (x0, x1, y0, y1)
    "wrist_stub": (78.0, 132.0, 16.0, 70.0),
}

# skin tone drawn on the page, as an OpenCV HSV triple
SKIN_HSV = (12, 140, 210)


def landmarks_array(overrides: dict | None = None) -> np.ndarray:
    lms = dict(DEFAULT_LANDMARKS)
    if overrides:
        lms.update(overrides)
    return np.array([lms[i] for i in range(21)], dtype=float)


def silhouette(lms: np.ndarray,
               shape: dict | None = None) -> shapely.Polygon:
    """Analytic hand silhouette as a single shapely polygon."""
    shape = {**DEFAULT_SHAPE, **(shape or {})}
    parts = []
    digits = {"index": (5, 8), "middle": (9, 12), "ring": (13, 16),
              "little": (17, 20)}
    for name, (mcp, tip) in digits.items():
        path = LineString([tuple(lms[i]) for i in range(mcp, tip + 1)])
        parts.append(path.buffer(shape["finger_radius"][name], quad_segs=16))
    thumb = LineString([tuple(lms[i]) for i in range(1, 5)])
    parts.append(thumb.buffer(shape["thumb_radius"], quad_segs=16))

    hull_pts = [tuple(lms[i]) for i in (0, 2, 5, 9, 13, 17)]
    hull_pts += [shape["thenar_heel"], shape["hypothenar_heel"]]
    parts.append(MultiPoint(hull_pts).convex_hull.buffer(
        shape["palm_buffer"], quad_segs=16))

    x0, x1, y0, y1 = shape["wrist_stub"]
    parts.append(shapely.box(x0, y0, x1, y1))

    blob = shapely.union_all(parts)
    if blob.geom_type != "Polygon":
        raise ValueError("fixture silhouette is not a single blob")
    return shapely.Polygon(blob.exterior)


def render_page(lms: np.ndarray, shape: dict | None = None,
                px_per_mm: float = 2550.0 / PAGE_W) -> np.ndarray:
    """Render the full-page photo: white sheet with the skin silhouette."""
    w = int(round(PAGE_W * px_per_mm))
    h = int(round(PAGE_H * px_per_mm))
    img = np.full((h, w, 3), 255, dtype=np.uint8)
    skin = cv2.cvtColor(np.uint8([[SKIN_HSV]]), cv2.COLOR_HSV2BGR)[0, 0]
    poly = silhouette(lms, shape)
    pts = np.array(poly.exterior.coords)
    px = np.empty_like(pts)
    px[:, 0] = pts[:, 0] * px_per_mm
    px[:, 1] = (h - 1) - pts[:, 1] * px_per_mm
    cv2.fillPoly(img, [np.round(px).astype(np.int32)],
                 tuple(int(c) for c in skin))
    return img


def landmarks_json(lms: np.ndarray, handedness: str = "right",
                   image_size: tuple[int, int] = (2550, 3300)) -> dict:
    """Landmark file payload (normalized image coords, y down)."""
    return {
        "handedness": handedness,
        "image_width": image_size[0],
        "image_height": image_size[1],
        "landmarks": [
            {"x": round(float(x / PAGE_W), 6),
             "y": round(float(1.0 - y / PAGE_H), 6)}
            for x, y in lms
        ],
    }


def write_fixture(out_dir: str, handedness: str = "right",
                  lm_overrides: dict | None = None,
                  shape: dict | None = None) -> dict:
    """Write page image + landmark JSON + metadata; returns file paths."""
    os.makedirs(out_dir, exist_ok=True)
    lms = landmarks_array(lm_overrides)
    if handedness == "left":
        lms = lms.copy()
        lms[:, 0] = PAGE_W - lms[:, 0]
        shape = {**DEFAULT_SHAPE, **(shape or {})}
        for key in ("thenar_heel", "hypothenar_heel"):
            x, y = shape[key]
            shape[key] = (PAGE_W - x, y)
        x0, x1, y0, y1 = shape["wrist_stub"]
        shape["wrist_stub"] = (PAGE_W - x1, PAGE_W - x0, y0, y1)
    img = render_page(lms, shape)
    image_path = os.path.join(out_dir, f"hand_{handedness}.png")
    lm_path = os.path.join(out_dir, f"hand_{handedness}.landmarks.json")
    meta_path = os.path.join(out_dir, f"hand_{handedness}.meta.json")
    cv2.imwrite(image_path, img)
    with open(lm_path, "w") as fh:
        json.dump(landmarks_json(lms, handedness,
                                 (img.shape[1], img.shape[0])), fh, indent=1)
    middle_span = float(np.hypot(*(lms[12] - lms[0])))
    with open(meta_path, "w") as fh:
        json.dump({"middle_tip_to_wrist_mm": round(middle_span, 3),
                   "px_per_mm": round(img.shape[1] / PAGE_W, 6)}, fh, indent=1)
    return {"image": image_path, "landmarks": lm_path, "meta": meta_path}
