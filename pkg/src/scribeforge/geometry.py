"""Bernstein polynomials, Bezier curve evaluation and polyline rasterization.

All curve math is done in float64; coordinates are only quantized to the
pixel grid at the final rasterization step.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class ControlPolygon:
    """Ordered control points of a Bezier curve (degree = len - 1)."""

    points: np.ndarray  # (m, 2) float64

    def __init__(self, points):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValueError("control polygon needs at least 2 (x, y) points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("control points must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def degree(self):
        return self.points.shape[0] - 1

    def bounding_box(self):
        """(xmin, ymin, xmax, ymax) of the control points."""
        lo = self.points.min(axis=0)
        hi = self.points.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


class CurveSample(NamedTuple):
    s: float
    position: Point2


@dataclass(frozen=True)
class CoverageMask:
    """Per-pixel stroke coverage in [0, 1] anchored at (x0, y0)."""

    values: np.ndarray  # (h, w) float64
    x0: int
    y0: int

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]


def bernstein(j, n, s):
    """Bernstein basis value C(n,j) * s**j * (1-s)**(n-j)."""
    if not 0 <= j <= n:
        raise ValueError(f"index j={j} outside 0..{n}")
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"parameter s={s} outside [0, 1]")
    return math.comb(n, j) * s**j * (1.0 - s) ** (n - j)


def bezier_point(poly, s):
    """Evaluate the Bezier curve of `poly` at parameter s in [0, 1]."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"parameter s={s} outside [0, 1]")
    n = poly.degree
    weights = np.array([bernstein(j, n, s) for j in range(n + 1)])
    x, y = weights @ poly.points
    return Point2(float(x), float(y))


def _basis_matrix(n, svals):
    """Bernstein basis evaluated at each s: shape (len(svals), n + 1)."""
    svals = np.asarray(svals, dtype=np.float64)
    j = np.arange(n + 1)
    comb = np.array([math.comb(n, k) for k in j], dtype=np.float64)
    s = svals[:, None]
    return comb * s**j * (1.0 - s) ** (n - j)


def sample_curve(poly, count):
    """Evaluate the curve at `count` evenly spaced parameters in [0, 1]."""
    if count < 2:
        raise ValueError("need at least 2 samples")
    svals = np.linspace(0.0, 1.0, count)
    pts = _basis_matrix(poly.degree, svals) @ poly.points
    return [CurveSample(float(s), Point2(float(p[0]), float(p[1])))
            for s, p in zip(svals, pts)]


def _pen_offsets(thickness):
    """Integer offsets of a round pen tip of the given stroke thickness.

    Effective pen radius is (thickness - 1) / 2; even thicknesses behave
    like the next odd value down so the tip stays grid-centered.
    """
    r = (thickness - 1) / 2.0
    ri = int(math.floor(r + 1e-9))
    dy, dx = np.mgrid[-ri:ri + 1, -ri:ri + 1]
    keep = dx * dx + dy * dy <= r * r + 1e-9
    return dx[keep].ravel(), dy[keep].ravel()


def _segment_pixels(a, b):
    """One pixel per major-axis step along segment a->b (classic DDA).

    Evaluating the minor coordinate only at integer major coordinates is
    what makes a straight thickness-1 stroke coincide with the Bresenham
    line between its endpoints.
    """
    ax, ay = a
    bx, by = b
    dx = bx - ax
    dy = by - ay
    pix = []
    if abs(dx) >= abs(dy):
        if dx == 0.0:
            return pix
        for c in range(math.ceil(min(ax, bx)), math.floor(max(ax, bx)) + 1):
            y = ay + (c - ax) / dx * dy
            pix.append((c, int(np.rint(y))))
    else:
        for r in range(math.ceil(min(ay, by)), math.floor(max(ay, by)) + 1):
            x = ax + (r - ay) / dy * dx
            pix.append((int(np.rint(x)), r))
    return pix


def rasterize_curve(poly, samples=None, thickness=1):
    """Rasterize the Bezier polyline of `poly` to a binary coverage mask.

    The curve is evaluated at `samples` evenly spaced parameters
    (default 10 per control point); each polyline segment is walked with
    a DDA and a round pen tip is stamped at every line pixel, giving
    round caps and joins.
    """
    if samples is None:
        samples = 10 * poly.points.shape[0]
    if samples < 2:
        raise ValueError("need at least 2 samples")
    if thickness < 1:
        raise ValueError("thickness must be >= 1")

    svals = np.linspace(0.0, 1.0, samples)
    pts = _basis_matrix(poly.degree, svals) @ poly.points

    line = [(int(np.rint(pts[0, 0])), int(np.rint(pts[0, 1]))),
            (int(np.rint(pts[-1, 0])), int(np.rint(pts[-1, 1])))]  # end caps
    for a, b in zip(pts[:-1], pts[1:]):
        line.extend(_segment_pixels(a, b))

    cx = np.array([p[0] for p in line], dtype=np.int64)
    cy = np.array([p[1] for p in line], dtype=np.int64)
    dx, dy = _pen_offsets(thickness)
    px = (cx[:, None] + dx[None, :]).ravel()
    py = (cy[:, None] + dy[None, :]).ravel()

    x0 = int(px.min())
    y0 = int(py.min())
    canvas = np.zeros((int(py.max()) - y0 + 1, int(px.max()) - x0 + 1))
    canvas[py - y0, px - x0] = 1.0
    return CoverageMask(values=canvas, x0=x0, y0=y0)
