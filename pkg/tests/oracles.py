"""Independent brute-force oracles shared by the test modules.

These deliberately avoid the library's own geometry paths: everything here
is rasterization, morphology, or dense linear algebra over numpy arrays.
"""

from __future__ import annotations

import numpy as np


def raster_polygon(rings, res=0.01, pad=1.0, bounds=None):
    """Rasterize a polygon (list of rings, first = exterior) by even-odd
    point-in-polygon over pixel centres.  Returns (mask, x0, y0, res)."""
    pts = np.concatenate([np.asarray(r, dtype=float) for r in rings])
    if bounds is None:
        x0, y0 = pts.min(axis=0) - pad
        x1, y1 = pts.max(axis=0) + pad
    else:
        x0, y0, x1, y1 = bounds
    nx = int(np.ceil((x1 - x0) / res))
    ny = int(np.ceil((y1 - y0) / res))
    xs = x0 + (np.arange(nx) + 0.5) * res
    ys = y0 + (np.arange(ny) + 0.5) * res
    X, Y = np.meshgrid(xs, ys)
    inside = np.zeros(X.shape, dtype=bool)
    for ring in rings:
        ring = np.asarray(ring, dtype=float)
        cross = np.zeros(X.shape, dtype=bool)
        n = len(ring)
        for i in range(n):
            xa, ya = ring[i]
            xb, yb = ring[(i + 1) % n]
            cond = (ya > Y) != (yb > Y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = xa + (Y - ya) * (xb - xa) / (yb - ya)
            cross ^= cond & (X < xint)
        inside ^= cross  # even-odd rule handles holes
    return inside, x0, y0, res


def raster_area(rings, res=0.01):
    mask, _, _, r = raster_polygon(rings, res=res)
    return mask.sum() * r * r


def erode_mask(mask, dist, res):
    """Morphological erosion by a disk of radius dist via distance check."""
    from scipy.ndimage import distance_transform_edt

    # distance of inside pixels to the nearest outside pixel
    d = distance_transform_edt(mask) * res
    return d > dist


def stroke_raster_area(vertices, width, res=0.01):
    """Area of a stroked path: pixels within width/2 of any segment."""
    vertices = np.asarray(vertices, dtype=float)
    pad = width
    x0, y0 = vertices.min(axis=0) - pad
    x1, y1 = vertices.max(axis=0) + pad
    nx = int(np.ceil((x1 - x0) / res))
    ny = int(np.ceil((y1 - y0) / res))
    xs = x0 + (np.arange(nx) + 0.5) * res
    ys = y0 + (np.arange(ny) + 0.5) * res
    X, Y = np.meshgrid(xs, ys)
    dmin = np.full(X.shape, np.inf)
    for a, b in zip(vertices[:-1], vertices[1:]):
        ab = b - a
        denom = ab @ ab
        t = ((X - a[0]) * ab[0] + (Y - a[1]) * ab[1]) / denom
        t = np.clip(t, 0.0, 1.0)
        px = a[0] + t * ab[0]
        py = a[1] + t * ab[1]
        dmin = np.minimum(dmin, np.hypot(X - px, Y - py))
    return (dmin <= width / 2.0).sum() * res * res


def crossbar_nodal_solve(R, v_drive, r_f, col):
    """Full nodal analysis of a zero-potential crossbar scan.

    Column `col` is driven at v_drive, every other column grounded, each
    row held at virtual ground by an ideal transimpedance amplifier with
    feedback r_f.  Unknowns: row voltages and amplifier outputs; ideal
    op-amp equations force the row voltages to zero.  Returns the vector
    of output magnitudes (volts, one per row).
    """
    rows, cols = R.shape
    vcol = np.zeros(cols)
    vcol[col] = v_drive
    # unknowns: [v_row_0..v_row_{rows-1}, o_0..o_{rows-1}]
    n = 2 * rows
    A = np.zeros((n, n))
    b = np.zeros(n)
    G = 1.0 / R
    for i in range(rows):
        # KCL at row node i: sum_j (vcol_j - v_i) G_ij + (o_i - v_i)/r_f = 0
        A[i, i] = -(G[i].sum() + 1.0 / r_f)
        A[i, rows + i] = 1.0 / r_f
        b[i] = -(vcol * G[i]).sum()
        # ideal op-amp: v_i = 0
        A[rows + i, i] = 1.0
        b[rows + i] = 0.0
    x = np.linalg.solve(A, b)
    return np.abs(x[rows:])
