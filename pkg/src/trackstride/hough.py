"""Progressive probabilistic Hough transform for line segment detection.

Random edge pixels vote into a (rho, theta) accumulator one at a time;
when a pixel's best bin reaches the vote threshold, the corresponding
line is walked in both directions gathering edge pixels, tolerating
gaps. Segments long enough are emitted; their pixels leave the working
set and any votes those pixels cast are removed, keeping the
accumulator consistent for the remaining structures.

The walk direction is quantized by the accumulator, which over long
lines drifts off the true pixels. After the first walk the direction is
refit to the gathered pixels by total least squares and the walk is
repeated, so emitted endpoints land on the actual extreme edge pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from trackstride.errors import OutOfBounds
from trackstride.geometry import PixelPoint, Segment
from trackstride.imaging import check_edge_map

# Pixels this far (perpendicular, in pixels) from the walked trajectory
# still count as support; absorbs rasterization and jitter noise.
_CORRIDOR = 1
# Rewalks run along a fitted direction, already within a fraction of a
# pixel of the line, so a wider corridor spans the whole jitter band.
# A one-pixel corridor clips that band on one side wherever the fit is
# slightly tilted, and the fit of the clipped support keeps the tilt.
_REWALK_REACH = 2
_MAX_REFITS = 5


@dataclass(frozen=True)
class PhtParams:
    """Detector parameters.

    rho_resolution : accumulator distance bin width, pixels
    theta_resolution_deg : accumulator angle bin width, degrees
    vote_threshold : votes a bin needs before its line is walked
    min_line_length : shortest segment emitted, pixels
    max_line_gap : longest tolerated run of non-edge pixels on a walk
    seed : RNG seed; fixes the pixel sampling order
    """

    rho_resolution: float = 1.0
    theta_resolution_deg: float = 1.0
    vote_threshold: int = 30
    min_line_length: float = 40.0
    max_line_gap: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rho_resolution <= 0 or self.theta_resolution_deg <= 0:
            raise ValueError("accumulator resolutions must be positive")
        if self.vote_threshold < 1 or self.min_line_length <= 0 or self.max_line_gap < 0:
            raise ValueError("thresholds must be positive (gap may be zero)")


def bresenham(p1: tuple[int, int], p2: tuple[int, int]) -> list[tuple[int, int]]:
    """Integer raster positions from p1 to p2 inclusive.

    Classic integer midpoint walk: exactly max(|dx|, |dy|) + 1 pixels,
    endpoints included, 8-connected.
    """
    x1, y1 = int(p1[0]), int(p1[1])
    x2, y2 = int(p2[0]), int(p2[1])
    dx, dy = abs(x2 - x1), abs(y2 - y1)
    sx = 1 if x2 >= x1 else -1
    sy = 1 if y2 >= y1 else -1
    pixels: list[tuple[int, int]] = []
    if dx >= dy:
        err = 2 * dy - dx
        y = y1
        for x in range(x1, x2 + sx, sx):
            pixels.append((x, y))
            if err > 0:
                y += sy
                err -= 2 * dx
            err += 2 * dy
    else:
        err = 2 * dx - dy
        x = x1
        for y in range(y1, y2 + sy, sy):
            pixels.append((x, y))
            if err > 0:
                x += sx
                err -= 2 * dy
            err += 2 * dx
    return pixels


def render_test_line(edges: np.ndarray, p1: tuple[int, int], p2: tuple[int, int]) -> None:
    """Rasterize a segment into a boolean edge map in place."""
    arr = check_edge_map(edges)
    h, w = arr.shape
    for x, y in (p1, p2):
        if not (0 <= int(x) < w and 0 <= int(y) < h):
            raise OutOfBounds(f"endpoint ({x}, {y}) outside {w}x{h} raster")
    for x, y in bresenham(p1, p2):
        arr[y, x] = True


def _offsets(reach: int) -> tuple[int, ...]:
    return (0,) + tuple(o for k in range(1, reach + 1) for o in (-k, k))


def _walk(
    mask: np.ndarray,
    x0: int,
    y0: int,
    direction: tuple[float, float],
    max_gap: int,
    reach: int = _CORRIDOR,
) -> tuple[tuple[int, int], list[tuple[int, int]]]:
    """Walk from (x0, y0) along `direction`, gathering corridor pixels.

    Returns the farthest supporting pixel reached and all supporting
    pixels met on the way (the start pixel excluded). Stops when the run
    of empty steps exceeds max_gap or the raster edge is reached. `reach`
    is the corridor half-width perpendicular to the dominant axis.
    """
    h, w = mask.shape
    dx, dy = direction
    offsets = _offsets(reach)
    found: list[tuple[int, int]] = []
    end = (x0, y0)
    if abs(dx) >= abs(dy):
        step = 1 if dx > 0 else -1
        slope = dy / dx
        gap = 0
        t = 0
        while gap <= max_gap:
            t += 1
            xi = x0 + step * t
            yi = int(round(y0 + step * t * slope))
            if not (0 <= xi < w):
                break
            hit = None
            for off in offsets:
                yy = yi + off
                if 0 <= yy < h and mask[yy, xi]:
                    if hit is None:
                        hit = (xi, yy)
                    found.append((xi, yy))
            if hit is None:
                gap += 1
            else:
                gap = 0
                end = hit
    else:
        step = 1 if dy > 0 else -1
        slope = dx / dy
        gap = 0
        t = 0
        while gap <= max_gap:
            t += 1
            yi = y0 + step * t
            xi = int(round(x0 + step * t * slope))
            if not (0 <= yi < h):
                break
            hit = None
            for off in offsets:
                xx = xi + off
                if 0 <= xx < w and mask[yi, xx]:
                    if hit is None:
                        hit = (xi + off, yi)
                    found.append((xx, yi))
            if hit is None:
                gap += 1
            else:
                gap = 0
                end = hit
    return end, found


def _start_hits(
    mask: np.ndarray, sx: int, sy: int, direction: tuple[float, float], reach: int = _CORRIDOR
) -> list[tuple[int, int]]:
    """Corridor pixels at a walk's start cell, which the walk skips."""
    h, w = mask.shape
    hits: list[tuple[int, int]] = []
    if abs(direction[0]) >= abs(direction[1]):
        if 0 <= sx < w:
            for off in _offsets(reach):
                yy = sy + off
                if 0 <= yy < h and mask[yy, sx]:
                    hits.append((sx, yy))
    else:
        if 0 <= sy < h:
            for off in _offsets(reach):
                xx = sx + off
                if 0 <= xx < w and mask[sy, xx]:
                    hits.append((xx, sy))
    return hits


def _fit_direction(pixels: list[tuple[int, int]]) -> tuple[float, float] | None:
    """Total-least-squares direction of a pixel cloud, or None if tiny."""
    if len(pixels) < 2:
        return None
    arr = np.asarray(pixels, dtype=np.float64)
    centered = arr - arr.mean(axis=0)
    sxx, syy = (centered**2).sum(axis=0)
    sxy = float((centered[:, 0] * centered[:, 1]).sum())
    theta = 0.5 * math.atan2(2.0 * sxy, sxx - syy)
    return math.cos(theta), math.sin(theta)


def probabilistic_hough(edges: np.ndarray, params: PhtParams | None = None) -> list[Segment]:
    """Detect line segments in a boolean edge map.

    Returns segments in emission order. With a fixed seed the output is
    identical across runs.
    """
    params = params or PhtParams()
    mask = check_edge_map(edges).copy()
    h, w = mask.shape
    ys, xs = np.nonzero(mask)
    n = len(xs)
    if n == 0:
        return []

    rng = np.random.default_rng(params.seed)
    n_theta = max(1, int(round(180.0 / params.theta_resolution_deg)))
    thetas = np.deg2rad(np.arange(n_theta) * params.theta_resolution_deg)
    cos_t = np.cos(thetas)
    sin_t = np.sin(thetas)
    half = int(math.ceil(math.hypot(w, h) / params.rho_resolution))
    acc = np.zeros((n_theta, 2 * half + 1), dtype=np.int32)
    theta_idx = np.arange(n_theta)

    pool_x = xs.astype(np.int32)
    pool_y = ys.astype(np.int32)
    count = n
    voted = np.zeros((h, w), dtype=bool)
    segments: list[Segment] = []

    def rho_bins(x: int, y: int) -> np.ndarray:
        r = (x * cos_t + y * sin_t) / params.rho_resolution
        return np.rint(r).astype(np.int64) + half

    while count > 0:
        j = int(rng.integers(count))
        x, y = int(pool_x[j]), int(pool_y[j])
        count -= 1
        pool_x[j], pool_y[j] = pool_x[count], pool_y[count]
        if not mask[y, x]:
            continue  # consumed by an earlier segment

        bins = rho_bins(x, y)
        acc[theta_idx, bins] += 1
        voted[y, x] = True
        votes = acc[theta_idx, bins]
        best = int(np.argmax(votes))
        if votes[best] < params.vote_threshold:
            continue

        theta = float(thetas[best])
        direction = (-math.sin(theta), math.cos(theta))
        end_a, found_a = _walk(mask, x, y, (-direction[0], -direction[1]), params.max_line_gap)
        end_b, found_b = _walk(mask, x, y, direction, params.max_line_gap)
        support = [(x, y)] + found_a + found_b

        # The quantized angle drifts off long lines, fragmenting them
        # and tilting the captured support. Refit the direction and
        # rewalk from the support centroid until the captured set stops
        # changing; that fixed point is the fit of its own full capture.
        fit = _fit_direction(support)
        for _ in range(_MAX_REFITS):
            if fit is None:
                break
            arr = np.asarray(support, dtype=np.float64)
            sx = int(round(float(arr[:, 0].mean())))
            sy = int(round(float(arr[:, 1].mean())))
            back = (-fit[0], -fit[1])
            end_a, found_a = _walk(mask, sx, sy, back, params.max_line_gap, _REWALK_REACH)
            end_b, found_b = _walk(mask, sx, sy, fit, params.max_line_gap, _REWALK_REACH)
            rewalked = _start_hits(mask, sx, sy, fit, _REWALK_REACH) + found_a + found_b
            if not rewalked:
                break
            stable = set(rewalked) == set(support)
            support = rewalked
            new_fit = _fit_direction(support)
            if new_fit is None:
                break
            fit = new_fit
            if stable:
                break

        if end_a == end_b:
            continue
        # The farthest hits carry up to a pixel of raster noise each;
        # projecting them onto the fitted line keeps the span but makes
        # the emitted segment carry the fit, which downstream
        # intersections (and the vanishing point) depend on.
        fit = _fit_direction(support)
        if fit is None:
            continue
        arr = np.asarray(support, dtype=np.float64)
        cx, cy = arr.mean(axis=0)
        ta = (end_a[0] - cx) * fit[0] + (end_a[1] - cy) * fit[1]
        tb = (end_b[0] - cx) * fit[0] + (end_b[1] - cy) * fit[1]
        p_a = PixelPoint(cx + ta * fit[0], cy + ta * fit[1])
        p_b = PixelPoint(cx + tb * fit[0], cy + tb * fit[1])
        if abs(tb - ta) < params.min_line_length or p_a == p_b:
            continue

        segments.append(Segment(p_a, p_b))
        # Full progressive variant: consumed pixels leave the working set
        # and the votes they cast leave the accumulator.
        for px, py in support:
            if mask[py, px]:
                mask[py, px] = False
                if voted[py, px]:
                    acc[theta_idx, rho_bins(px, py)] -= 1
                    voted[py, px] = False

    return segments
