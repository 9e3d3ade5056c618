"""Image-to-track-plane homography estimation and robust aggregation.

A planar homography H (3x3, 8 degrees of freedom, defined up to scale)
maps pixel coordinates to meters on the track plane. Per frame, each
available pair of horizontal track lines combines with the two vertical
reference lines into four corner correspondences; the homographies from
all pairs of all frames are pooled and reduced by an element-wise
median, which tolerates outright bad frames as long as they stay in the
minority.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from trackstride.errors import (
    DegenerateConfiguration,
    NoValidPair,
    PointAtInfinity,
    RankDeficient,
)
from trackstride.geometry import PixelPoint, WorldPoint, intersect, line_through
from trackstride.lines import TrackLines

# A mapped point counts as being on the horizon when the homogeneous
# scale drops below this.
_INFINITY_EPS = 1e-12

# Three image points are degenerate when the triangle they span has an
# area at or below this (pixels^2).
_COLLINEAR_AREA_EPS = 1e-6

# Zero-based index pairs of horizontal lines used per frame: first and
# second, second and third, fourth and fifth (counting from the nearest).
LINE_PAIRS = ((0, 1), (1, 2), (3, 4))


@dataclass(frozen=True)
class WorldModel:
    """Metric layout of the painted lines.

    lane_width_m : world-x separation in meters between the left and
        right vertical reference lines.
    horizontal_spacing_m : world-y offset in meters of each horizontal
        line, nearest line first, starting at 0 and strictly increasing.
    """

    lane_width_m: float = 1.22
    horizontal_spacing_m: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0)

    def __post_init__(self) -> None:
        if not (self.lane_width_m > 0 and math.isfinite(self.lane_width_m)):
            raise ValueError(f"lane_width_m must be positive, got {self.lane_width_m}")
        sp = tuple(float(v) for v in self.horizontal_spacing_m)
        if len(sp) < 2:
            raise ValueError("at least two horizontal offsets are required")
        if sp[0] != 0.0:
            raise ValueError(f"nearest line offset must be 0, got {sp[0]}")
        if any(b <= a for a, b in zip(sp, sp[1:])):
            raise ValueError(f"offsets must be strictly increasing, got {sp}")
        object.__setattr__(self, "horizontal_spacing_m", sp)


class Homography:
    """A 3x3 projective map in canonical form.

    The stored matrix has unit Frobenius norm and a non-negative bottom
    right entry, so homographies equal up to scale compare equal.
    """

    def __init__(self, matrix: np.ndarray):
        m = np.asarray(matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
        if not np.isfinite(m).all():
            raise ValueError("matrix entries must be finite")
        norm = float(np.linalg.norm(m))
        if norm == 0.0:
            raise RankDeficient("zero matrix is not a homography")
        m = m / norm
        if abs(np.linalg.det(m)) < 1e-12:
            raise RankDeficient("matrix is numerically singular")
        flat = m.ravel()
        anchor = flat[8] if flat[8] != 0.0 else flat[np.nonzero(flat)[0][0]]
        if anchor < 0:
            m = -m
        self.matrix = m
        self.matrix.setflags(write=False)

    def __eq__(self, other: object) -> bool:
        # Canonical forms are unique up to rounding of the normalization,
        # so equality tolerates the last few ulps.
        return isinstance(other, Homography) and bool(
            np.allclose(self.matrix, other.matrix, rtol=0.0, atol=1e-12)
        )

    def __repr__(self) -> str:
        return f"Homography({self.matrix.tolist()})"

    def apply(self, p: PixelPoint) -> WorldPoint:
        """Map a pixel point to the track plane."""
        v = self.matrix @ np.array([p.x, p.y, 1.0])
        if abs(v[2]) < _INFINITY_EPS:
            raise PointAtInfinity(f"({p.x}, {p.y}) maps to the horizon")
        return WorldPoint(float(v[0] / v[2]), float(v[1] / v[2]))

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.matrix))


def _check_noncollinear(points: Sequence[PixelPoint]) -> None:
    for p, q, r in combinations(points, 3):
        area = 0.5 * abs((q.x - p.x) * (r.y - p.y) - (r.x - p.x) * (q.y - p.y))
        if area <= _COLLINEAR_AREA_EPS:
            raise DegenerateConfiguration(
                f"collinear control points: {(p.x, p.y)}, {(q.x, q.y)}, {(r.x, r.y)}"
            )


def _hartley_normalization(points: Sequence[PixelPoint]) -> np.ndarray:
    """Similarity T moving the centroid to the origin, mean distance to sqrt 2."""
    arr = np.array([[p.x, p.y] for p in points])
    centroid = arr.mean(axis=0)
    mean_dist = float(np.sqrt(((arr - centroid) ** 2).sum(axis=1)).mean())
    scale = math.sqrt(2.0) / mean_dist if mean_dist > 0 else 1.0
    return np.array(
        [
            [scale, 0.0, -scale * centroid[0]],
            [0.0, scale, -scale * centroid[1]],
            [0.0, 0.0, 1.0],
        ]
    )


def dlt_homography(correspondences: Sequence[tuple[PixelPoint, WorldPoint]]) -> Homography:
    """Fit the pixel-to-world homography by the direct linear transform.

    Parameters
    ----------
    correspondences : sequence of (PixelPoint, WorldPoint)
        At least four, with no three image points collinear.

    Returns
    -------
    Homography
        The least-squares solution of the stacked 2n x 9 system, taken
        from the smallest singular direction. Image coordinates are
        conditioned by Hartley normalization (centroid to the origin,
        mean distance sqrt 2) and the result is denormalized.
    """
    if len(correspondences) < 4:
        raise DegenerateConfiguration(
            f"need at least 4 correspondences, got {len(correspondences)}"
        )
    image_points = [c[0] for c in correspondences]
    _check_noncollinear(image_points)

    T = _hartley_normalization(image_points)
    rows = []
    for pix, world in correspondences:
        v = T @ np.array([pix.x, pix.y, 1.0])
        x, y = v[0] / v[2], v[1] / v[2]
        xp, yp = world.x, world.y
        rows.append([0.0, 0.0, 0.0, -x, -y, -1.0, yp * x, yp * y, yp])
        rows.append([x, y, 1.0, 0.0, 0.0, 0.0, -xp * x, -xp * y, -xp])
    A = np.asarray(rows)
    try:
        _, _, vt = np.linalg.svd(A)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient(f"SVD failed: {exc}") from exc
    h_norm = vt[-1].reshape(3, 3)
    return Homography(h_norm @ T)


def median_homography(homographies: Sequence[Homography]) -> Homography:
    """Element-wise median of homographies, robust to a minority of outliers.

    Matrices are sign-aligned to the first by Frobenius inner product
    before taking the per-entry median (the lower median for even
    counts), then renormalized.
    """
    if not homographies:
        raise ValueError("median of an empty homography set")
    stack = np.stack([h.matrix for h in homographies])
    first = stack[0]
    for i in range(1, len(stack)):
        if float((stack[i] * first).sum()) < 0:
            stack[i] = -stack[i]
    ordered = np.sort(stack, axis=0)
    lower_median = ordered[(len(stack) - 1) // 2]
    return Homography(lower_median)


def reprojection_error(
    h: Homography, correspondences: Sequence[tuple[PixelPoint, WorldPoint]]
) -> float:
    """Root-mean-square distance in meters between mapped and true points."""
    if not correspondences:
        raise ValueError("no correspondences to evaluate")
    total = 0.0
    for pix, world in correspondences:
        mapped = h.apply(pix)
        total += (mapped.x - world.x) ** 2 + (mapped.y - world.y) ** 2
    return math.sqrt(total / len(correspondences))


@dataclass(frozen=True)
class PairHomography:
    """A homography fitted from one horizontal line pair."""

    pair: tuple[int, int]  # zero-based indices into the ordered horizontals
    homography: Homography


def frame_homographies(lines: TrackLines, world: WorldModel) -> list[PairHomography]:
    """Fit one homography per available horizontal line pair.

    The pairs are (0,1), (1,2), (3,4) counting from the nearest line.
    Pairs whose lines are missing, whose corners cannot be intersected,
    or whose fit degenerates are skipped; if every pair fails,
    NoValidPair is raised.
    """
    verticals = (line_through(lines.vertical_left), line_through(lines.vertical_right))
    results: list[PairHomography] = []
    for i, j in LINE_PAIRS:
        if j >= len(lines.horizontals) or j >= len(world.horizontal_spacing_m):
            continue
        corrs: list[tuple[PixelPoint, WorldPoint]] = []
        ok = True
        for idx in (i, j):
            row = line_through(lines.horizontals[idx])
            for vert, wx in zip(verticals, (0.0, world.lane_width_m)):
                corner = intersect(row, vert)
                if corner is None:
                    ok = False
                    break
                corrs.append((corner, WorldPoint(wx, world.horizontal_spacing_m[idx])))
            if not ok:
                break
        if not ok:
            continue
        try:
            results.append(PairHomography((i, j), dlt_homography(corrs)))
        except (DegenerateConfiguration, RankDeficient):
            continue
    if not results:
        raise NoValidPair("no horizontal line pair produced a homography")
    return results
