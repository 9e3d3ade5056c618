"""Grayscale conversion, smoothing, edge detection, and ROI masking.

Images are numpy arrays: grayscale frames are 2-D float or uint8 arrays
with intensities in [0, 255], edge maps are 2-D boolean arrays of the
same shape. All operations preserve dimensions.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import ndimage
from shapely.geometry import Polygon as _ShapelyPolygon

from trackstride.errors import OutOfBounds

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T


def check_gray_image(img: np.ndarray) -> np.ndarray:
    """Validate a grayscale frame: 2-D, nonempty, intensities in [0, 255]."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a nonempty 2-D grayscale image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        lo, hi = float(arr.min()), float(arr.max())
        if lo < 0.0 or hi > 255.0:
            raise ValueError(f"intensities outside [0, 255]: min={lo}, max={hi}")
    return arr


def check_edge_map(edges: np.ndarray) -> np.ndarray:
    arr = np.asarray(edges)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a nonempty 2-D edge map, got shape {arr.shape}")
    if arr.dtype != np.bool_:
        raise ValueError(f"edge map must be boolean, got {arr.dtype}")
    return arr


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """Convert an RGB raster to 8-bit luma.

    Uses the BT.601 weights 0.299 R + 0.587 G + 0.114 B, rounded half up
    to the nearest integer and clamped to [0, 255].
    """
    arr = np.asarray(rgb)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.size == 0:
        raise ValueError(f"expected an H x W x 3 RGB image, got shape {arr.shape}")
    luma = (
        0.299 * arr[..., 0].astype(np.float64)
        + 0.587 * arr[..., 1].astype(np.float64)
        + 0.114 * arr[..., 2].astype(np.float64)
    )
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Sampled 1-D Gaussian of radius ceil(3 sigma), normalized to sum 1."""
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValueError(f"sigma must be positive and finite, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian smoothing with replicated (edge-clamp) borders."""
    arr = check_gray_image(img).astype(np.float64)
    kernel = gaussian_kernel1d(sigma)
    out = ndimage.convolve1d(arr, kernel, axis=0, mode="nearest")
    out = ndimage.convolve1d(out, kernel, axis=1, mode="nearest")
    return out


def sobel_gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel responses (gx, gy) with replicated borders."""
    arr = check_gray_image(img).astype(np.float64)
    gx = ndimage.correlate(arr, SOBEL_X, mode="nearest")
    gy = ndimage.correlate(arr, SOBEL_Y, mode="nearest")
    return gx, gy


def canny(img: np.ndarray, low: float, high: float) -> np.ndarray:
    """Edge detection: Sobel gradient, 4-bin NMS, hysteresis threshold.

    Parameters
    ----------
    img : 2-D array
        Grayscale frame, typically pre-smoothed.
    low, high : float
        Hysteresis thresholds on the L2 gradient magnitude. Pixels at or
        above `high` are strong; pixels in [low, high) survive only when
        8-connected (transitively) to a strong pixel.

    Returns
    -------
    2-D bool array of the same shape.
    """
    if not (0 <= low < high):
        raise ValueError(f"thresholds must satisfy 0 <= low < high, got {low}, {high}")
    gx, gy = sobel_gradients(img)
    mag = np.hypot(gx, gy)

    # Quantize gradient direction to 4 bins: 0, 45, 90, 135 degrees.
    angle = np.degrees(np.arctan2(gy, gx)) % 180.0
    bins = np.zeros(angle.shape, dtype=np.uint8)
    bins[(angle >= 22.5) & (angle < 67.5)] = 1
    bins[(angle >= 67.5) & (angle < 112.5)] = 2
    bins[(angle >= 112.5) & (angle < 157.5)] = 3

    # Neighbor offsets along the gradient for each bin, on a zero-padded
    # magnitude so border pixels compare against 0.
    padded = np.pad(mag, 1, mode="constant")
    h, w = mag.shape
    core = (slice(1, h + 1), slice(1, w + 1))

    def shifted(dy: int, dx: int) -> np.ndarray:
        return padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]

    offsets = {0: (0, 1), 1: (-1, 1), 2: (-1, 0), 3: (-1, -1)}
    keep = np.zeros(mag.shape, dtype=bool)
    for b, (dy, dx) in offsets.items():
        sel = bins == b
        nxt = shifted(dy, dx)
        prv = shifted(-dy, -dx)
        # Plateau ties break toward the earlier pixel along the gradient:
        # strictly greater than the previous neighbor, at least equal to
        # the next. A perfect step edge then thins to one pixel.
        keep |= sel & (mag > prv) & (mag >= nxt)
    keep &= mag > 0

    strong = keep & (mag >= high)
    weak = keep & (mag >= low) & (mag < high)
    if not strong.any():
        return np.zeros(mag.shape, dtype=bool)
    labels, _ = ndimage.label(strong | weak, structure=np.ones((3, 3), dtype=int))
    kept_labels = np.unique(labels[strong])
    return np.isin(labels, kept_labels) & (labels > 0)


class RoiPolygon:
    """A simple polygon restricting detection to part of the frame.

    Vertices are (x, y) pixel pairs. The polygon must have at least three
    vertices, no self-intersections, and nonzero area.
    """

    def __init__(self, vertices: Sequence[tuple[float, float]]):
        verts = [(float(x), float(y)) for x, y in vertices]
        if len(verts) < 3:
            raise ValueError(f"polygon needs at least 3 vertices, got {len(verts)}")
        poly = _ShapelyPolygon(verts)
        if not poly.is_valid:
            raise ValueError("polygon is self-intersecting or otherwise invalid")
        if poly.area <= 0.0:
            raise ValueError("polygon has zero area")
        self.vertices = verts

    def mask(self, shape: tuple[int, int]) -> np.ndarray:
        """Boolean inside-mask for a raster of the given (height, width).

        Membership uses the even-odd rule on pixel centers; vertices are
        clamped to the raster bounds first.
        """
        h, w = shape
        verts = np.array(
            [(min(max(x, 0.0), w - 1.0), min(max(y, 0.0), h - 1.0)) for x, y in self.vertices]
        )
        px = np.arange(w, dtype=np.float64)[None, :]
        py = np.arange(h, dtype=np.float64)[:, None]
        inside = np.zeros((h, w), dtype=bool)
        n = len(verts)
        for i in range(n):
            x1, y1 = verts[i]
            x2, y2 = verts[(i + 1) % n]
            if y1 == y2:
                continue
            crosses = (y1 > py) != (y2 > py)
            xint = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            inside ^= crosses & (px < xint)
        return inside


def apply_roi(edges: np.ndarray, roi: RoiPolygon | None) -> np.ndarray:
    """Zero out edge pixels outside the ROI; None keeps the map unchanged."""
    arr = check_edge_map(edges)
    if roi is None:
        return arr.copy()
    return arr & roi.mask(arr.shape)


def write_pgm(path, img: np.ndarray) -> None:
    """Write an 8-bit binary (P5) PGM."""
    arr = check_gray_image(img)
    data = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read an 8-bit binary (P5) PGM into a uint8 array."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    # Header: magic, width, height, maxval; comments start with '#'.
    fields: list[int] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(raw[start:pos]))
    pos += 1  # single whitespace after maxval
    w, h, maxval = fields
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM supported, maxval={maxval}")
    expected = w * h
    data = np.frombuffer(raw, dtype=np.uint8, count=expected, offset=pos)
    if data.size != expected:
        raise ValueError(f"{path}: raster length {data.size} != {expected}")
    return data.reshape(h, w).copy()


def render_points(img: np.ndarray, points, intensity: int = 255) -> None:
    """Set single pixels in place; raises OutOfBounds for outside coordinates."""
    h, w = img.shape
    for x, y in points:
        xi, yi = int(round(x)), int(round(y))
        if not (0 <= xi < w and 0 <= yi < h):
            raise OutOfBounds(f"point ({x}, {y}) outside {w}x{h} raster")
        img[yi, xi] = intensity
