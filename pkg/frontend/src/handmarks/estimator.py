"""Silhouette-geometry landmark estimator.

The estimator thresholds the scan, keeps the largest dark connected
component, and walks its outer contour.  Fingertips show up as prominent
local maxima of the contour's distance from the silhouette centroid; the
forearm stub at the page edge anchors the frame.  Each of the 21 landmarks
is then placed as a fixed affine combination of the stub anchor and the
matching fingertip, with coefficients calibrated against a reference scan
with known landmark positions.

Landmark indexing follows the common 21-point convention: 0 wrist, 1-4
thumb (CMC..tip), 5-8 index, 9-12 middle, 13-16 ring, 17-20 little.
"""

from __future__ import annotations

import numpy as np

import cv2
from scipy.signal import find_peaks

# Threshold separating ink/skin from the white page background.
INK_THRESHOLD = 200
# A plausible hand covers at least this fraction of the page.
MIN_HAND_AREA_FRAC = 0.02

# Per-landmark (along, across) coefficients in the frame spanned by the
# vector from the forearm-stub anchor to the owning fingertip.  Calibrated
# once against a reference scan with known landmark positions.
COEFFS = {
    0: (0.192378, 0.010185),
    1: (0.519496, 0.121853),
    2: (0.643660, 0.099920),
    3: (0.819492, 0.079354),
    4: (0.950783, 0.074004),
    5: (0.597147, -0.038343),
    6: (0.778972, -0.017213),
    7: (0.878475, -0.005233),
    8: (0.960797, 0.003916),
    9: (0.575663, -0.007451),
    10: (0.764438, -0.001713),
    11: (0.873602, -0.000167),
    12: (0.961814, 0.000275),
    13: (0.590446, 0.012301),
    14: (0.773257, 0.002874),
    15: (0.877861, -0.000651),
    16: (0.960741, -0.002537),
    17: (0.652444, 0.035047),
    18: (0.811681, 0.012302),
    19: (0.893682, 0.000441),
    20: (0.961386, -0.008486),
}

# Landmark chains per digit and the fingertip (0=thumb..4=little) that
# anchors each chain.  The wrist borrows the middle fingertip.
CHAINS = {
    0: ([0], 2),
    1: ([1, 2, 3, 4], 0),
    2: ([5, 6, 7, 8], 1),
    3: ([9, 10, 11, 12], 2),
    4: ([13, 14, 15, 16], 3),
    5: ([17, 18, 19, 20], 4),
}


class EstimationError(Exception):
    """No hand could be located in the image."""


def _silhouette(gray: np.ndarray) -> np.ndarray:
    """Binary mask of the largest dark component, or raise."""
    mask = (gray < INK_THRESHOLD).astype(np.uint8)
    count, labels, stats, _ = cv2.connectedComponentsWithStats(mask)
    if count < 2:
        raise EstimationError("no hand detected: page is blank")
    big = 1 + int(np.argmax(stats[1:, cv2.CC_STAT_AREA]))
    if stats[big, cv2.CC_STAT_AREA] < MIN_HAND_AREA_FRAC * gray.size:
        raise EstimationError("no hand detected: no sufficiently large silhouette")
    return (labels == big).astype(np.uint8)


def _keypoints(hand: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Detect the forearm-stub anchor and the five fingertips.

    Returns (anchor, tips) in pixel coordinates with tips as a (5, 2)
    array.  Tip order is arbitrary at this stage.
    """
    contours, _ = cv2.findContours(hand, cv2.RETR_EXTERNAL, cv2.CHAIN_APPROX_NONE)
    contour = max(contours, key=cv2.contourArea)[:, 0, :].astype(float)
    if len(contour) < 100:
        raise EstimationError("no hand detected: silhouette outline too short")

    moments = cv2.moments(hand, True)
    centroid = np.array([moments["m10"], moments["m01"]]) / moments["m00"]
    dist = np.hypot(*(contour - centroid).T)

    # Smooth the radial profile so skin-edge noise does not create peaks.
    k = max(5, int(len(contour) * 0.004) | 1)
    padded = np.r_[dist[-k:], dist, dist[:k]]
    smooth = np.convolve(padded, np.ones(k) / k, "same")[k:-k]

    # Rotate the closed contour so it starts at the global radial minimum;
    # peak finding then never straddles the wrap point.
    roll = int(np.argmin(smooth))
    smooth = np.roll(smooth, -roll)
    contour = np.roll(contour, -roll, axis=0)

    peaks, props = find_peaks(
        smooth,
        prominence=0.05 * smooth.max(),
        distance=max(1, len(contour) // 60),
    )
    points = contour[peaks]
    prominences = props["prominences"]

    # The forearm stub meets the page edge at the silhouette's bottom; its
    # corners are radial maxima too, so drop peaks near the bottom edge.
    y_max = contour[:, 1].max()
    height = y_max - contour[:, 1].min()
    keep = points[:, 1] < y_max - 0.05 * height
    points, prominences = points[keep], prominences[keep]
    if len(points) < 5:
        raise EstimationError("no hand detected: fewer than five fingertips found")
    tips = points[np.argsort(prominences)[::-1][:5]]

    bottom = contour[contour[:, 1] >= y_max - 2.0]
    anchor = np.array([(bottom[:, 0].min() + bottom[:, 0].max()) / 2.0, y_max])
    return anchor, tips


def _order_tips(anchor: np.ndarray, tips: np.ndarray) -> tuple[list[np.ndarray], str]:
    """Order tips as thumb..little and infer handedness.

    On a flat scan the thumb tip sits far below the other four; fingers then
    run away from the thumb side.
    """
    thumb_i = int(np.argmax(tips[:, 1]))
    thumb = tips[thumb_i]
    fingers = np.delete(tips, thumb_i, axis=0)
    if thumb[0] < anchor[0]:
        handedness = "right"
        fingers = fingers[np.argsort(fingers[:, 0])]
    else:
        handedness = "left"
        fingers = fingers[np.argsort(fingers[:, 0])[::-1]]
    return [thumb, *fingers], handedness


def _place_landmarks(
    anchor: np.ndarray, tips: list[np.ndarray], mirror: bool
) -> np.ndarray:
    """Place all 21 landmarks from the anchor/tip frame.

    The across-axis coefficients are calibrated on a right hand; ``mirror``
    flips them for left hands.
    """
    landmarks = np.zeros((21, 2))
    sign = -1.0 if mirror else 1.0
    for indices, tip_i in CHAINS.values():
        along = tips[tip_i] - anchor
        across = np.array([-along[1], along[0]])
        for j in indices:
            a, b = COEFFS[j]
            landmarks[j] = anchor + a * along + sign * b * across
    return landmarks


def estimate(image_path: str) -> dict:
    """Estimate hand landmarks for a scanned hand photo.

    Returns a dict with ``handedness``, ``image_width``, ``image_height``
    and 21 ``landmarks`` normalized to [0, 1].  Raises
    :class:`EstimationError` when no hand can be located.
    """
    image = cv2.imread(str(image_path), cv2.IMREAD_GRAYSCALE)
    if image is None:
        raise EstimationError(f"cannot read image: {image_path}")
    height, width = image.shape[:2]

    hand = _silhouette(image)
    anchor, tips = _keypoints(hand)
    ordered, handedness = _order_tips(anchor, tips)
    landmarks = _place_landmarks(anchor, ordered, mirror=handedness == "left")

    normalized = landmarks / np.array([width, height])
    if normalized.min() < -0.02 or normalized.max() > 1.02:
        raise EstimationError("no hand detected: implausible landmark placement")
    normalized = np.clip(normalized, 0.0, 1.0)

    return {
        "handedness": handedness,
        "image_width": int(width),
        "image_height": int(height),
        "landmarks": [
            {"x": round(float(x), 6), "y": round(float(y), 6)} for x, y in normalized
        ],
    }
