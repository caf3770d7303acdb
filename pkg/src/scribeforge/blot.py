"""Strikethrough ("blot") augmentation for handwritten line images.

A blot is a thick Bezier stroke composited over the line: pick a
rectangular strikethrough area, scatter control points across vertical
bands of it, rasterize the curve and darken the covered pixels.  All
randomness comes from an explicit numpy Generator so the transform is a
pure function of (image, params, seed).
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import ControlPolygon, rasterize_curve


@dataclass
class BlotParams:
    """Knobs of the strikethrough generator.

    The defaults are the empirically chosen values used for training:
    region height 50..100 px and width 10..50 px, slope up to +-15 px,
    point emission probability 0.9, stroke opacity 0.95, 1..11 blots per
    image, applied to half of the images.
    """

    min_h: int = 50
    max_h: int = 100
    min_w: int = 10
    max_w: int = 50
    incline: float = 15.0
    intensity: float = 0.9
    transparency: float = 0.95
    count_min: int = 1
    count_max: int = 11
    proba: float = 0.5
    thickness: int = 3
    point_dup_proba: float = 0.2

    def __post_init__(self):
        if self.min_h > self.max_h or self.min_w > self.max_w:
            raise ValueError("min_h/min_w must not exceed max_h/max_w")
        if not 0 <= self.count_min <= self.count_max:
            raise ValueError("need 0 <= count_min <= count_max")
        for name in ("intensity", "transparency", "proba", "point_dup_proba"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.intensity <= 0.0:
            raise ValueError("intensity must be in (0, 1]")
        if self.min_w < 1 or self.min_h < 1 or self.thickness < 1:
            raise ValueError("sizes must be >= 1")


@dataclass(frozen=True)
class BlotRegion:
    """Pixel rectangle of one strikethrough area (half-open bounds)."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError("degenerate blot region")

    @property
    def width(self):
        return self.x1 - self.x0

    @property
    def height(self):
        return self.y1 - self.y0


def _check_image(img):
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8 or img.size == 0:
        raise ValueError("expected a non-empty 2-D uint8 line image")
    return img


def choose_region(img, params, rng):
    """Pick a strikethrough rectangle, or None if the image is too narrow.

    Width is uniform in [min_w, min(max_w, W)], height uniform in
    [min_h, max_h] clamped to the image height.  The region sits at a
    uniform x offset and is vertically centered on the image midline with
    a jitter of +- height/4.
    """
    img = _check_image(img)
    h_img, w_img = img.shape
    if w_img < params.min_w:
        return None

    w = int(rng.integers(params.min_w, min(params.max_w, w_img) + 1))
    h = int(rng.integers(params.min_h, params.max_h + 1))
    h = min(h, h_img)
    x0 = int(rng.integers(0, w_img - w + 1))
    jitter = rng.uniform(-h / 4.0, h / 4.0)
    cy = h_img / 2.0 + jitter
    y0 = int(round(cy - h / 2.0))
    y0 = max(0, min(y0, h_img - h))
    return BlotRegion(x0=x0, y0=y0, x1=x0 + w, y1=y0 + h)


def generate_blot_points(region, params, rng, bands=None):
    """Scatter Bezier control points over vertical bands of the region.

    The region is split into `bands` equal strips (default one per ~10 px
    of width, at least 2).  Each band emits one point with probability
    `intensity`; its y is uniform over the region height plus a per-curve
    linear slope whose end-to-end shift is uniform in [-incline, incline].
    A point may be repeated consecutively (probability `point_dup_proba`)
    which pulls the curve into a small loop around it.  At least two
    points are always returned.
    """
    if bands is None:
        bands = max(2, round(region.width / 10))
    slope = rng.uniform(-params.incline, params.incline)
    edges = np.linspace(region.x0, region.x1, bands + 1)

    def draw_point(i):
        x = rng.uniform(edges[i], edges[i + 1])
        frac = (x - region.x0) / region.width
        y = rng.uniform(region.y0, region.y1) + slope * (frac - 0.5)
        return x, min(max(y, region.y0), region.y1)

    pts = [draw_point(i) for i in range(bands)
           if rng.random() < params.intensity]
    if len(pts) < 2:
        # guarantee a drawable curve: anchor the outermost bands
        pts.extend(draw_point(i) for i in (0, bands - 1))
        pts.sort(key=lambda p: p[0])

    out = []
    for p in pts:
        out.append(p)
        if rng.random() < params.point_dup_proba:
            out.append(p)
    return ControlPolygon(out)


def composite_stroke(img, mask, opacity):
    """Darken `img` in place under `mask`: out = round((1 - t*c) * src).

    Pixels with zero coverage are left byte-identical; full coverage at
    opacity 1 drives the pixel to 0 (ink).
    """
    h_img, w_img = img.shape
    x_lo = max(mask.x0, 0)
    y_lo = max(mask.y0, 0)
    x_hi = min(mask.x0 + mask.width, w_img)
    y_hi = min(mask.y0 + mask.height, h_img)
    if x_lo >= x_hi or y_lo >= y_hi:
        return img
    sub = mask.values[y_lo - mask.y0:y_hi - mask.y0,
                      x_lo - mask.x0:x_hi - mask.x0]
    window = img[y_lo:y_hi, x_lo:x_hi]
    out = np.rint((1.0 - opacity * sub) * window)
    window[:] = out.astype(np.uint8)
    return img


def plan_blots(img, params, rng):
    """Draw the random plan for one image: list of (region, polygon).

    Replaying this with the same seed reproduces exactly the regions and
    curves that apply_blot composites, which is what determinism and
    locality checks rely on.
    """
    img = _check_image(img)
    if rng.random() >= params.proba:
        return []
    count = int(rng.integers(params.count_min, params.count_max + 1))
    plan = []
    for _ in range(count):
        region = choose_region(img, params, rng)
        if region is None:
            continue
        plan.append((region, generate_blot_points(region, params, rng)))
    return plan


def apply_blot(img, params, rng):
    """Return a copy of `img` with randomly planned strikethrough blots."""
    img = _check_image(img)
    out = img.copy()
    for _region, poly in plan_blots(img, params, rng):
        mask = rasterize_curve(poly, thickness=params.thickness)
        composite_stroke(out, mask, params.transparency)
    return out
