"""Planar geometry primitives: points, segments, and homogeneous lines.

Angles are measured in degrees from the image x-axis and folded into
(-90, 90], so a segment and its reverse always report the same angle.
Pixel coordinates are x right, y down, origin at the top-left corner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Two normals are treated as parallel when their cross product is below
# this; 1e-9 keeps lines meeting at sub-pixel angles distinguishable
# while absorbing float noise from normalization.
PARALLEL_EPS = 1e-9


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} requires finite coordinates, got {values}")


@dataclass(frozen=True)
class PixelPoint:
    """A point in image coordinates (pixels)."""

    x: float
    y: float

    def __post_init__(self) -> None:
        _require_finite("PixelPoint", self.x, self.y)

    def distance_to(self, other: "PixelPoint") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class WorldPoint:
    """A point on the track plane in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        _require_finite("WorldPoint", self.x, self.y)

    def distance_to(self, other: "WorldPoint") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Segment:
    """A finite line segment with distinct endpoints."""

    p1: PixelPoint
    p2: PixelPoint

    def __post_init__(self) -> None:
        if self.p1 == self.p2:
            raise ValueError(f"degenerate segment at {self.p1}")

    @property
    def length(self) -> float:
        return self.p1.distance_to(self.p2)

    @property
    def midpoint(self) -> PixelPoint:
        return PixelPoint((self.p1.x + self.p2.x) / 2.0, (self.p1.y + self.p2.y) / 2.0)

    @property
    def angle(self) -> float:
        return segment_angle(self)


@dataclass(frozen=True)
class HomogeneousLine:
    """An infinite line ax + by + c = 0 with a unit normal.

    Canonical form: a^2 + b^2 = 1 and c <= 0, ties on c == 0 broken by
    a > 0 (then b > 0), so equal lines compare equal after construction.
    """

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        _require_finite("HomogeneousLine", self.a, self.b, self.c)
        norm = math.hypot(self.a, self.b)
        if norm == 0.0:
            raise ValueError("line normal must be nonzero")
        a, b, c = self.a / norm, self.b / norm, self.c / norm
        if c > 0 or (c == 0 and (a < 0 or (a == 0 and b < 0))):
            a, b, c = -a, -b, -c
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    def signed_distance(self, p: PixelPoint) -> float:
        return self.a * p.x + self.b * p.y + self.c

    def distance(self, p: PixelPoint) -> float:
        return abs(self.signed_distance(p))


def segment_angle(seg: Segment) -> float:
    """Angle of a segment in degrees from the x-axis, folded into (-90, 90].

    Folding makes the angle independent of endpoint order; a vertical
    segment reports exactly 90.
    """
    angle = math.degrees(math.atan2(seg.p2.y - seg.p1.y, seg.p2.x - seg.p1.x))
    while angle <= -90.0:
        angle += 180.0
    while angle > 90.0:
        angle -= 180.0
    return angle


def angle_between(a: float, b: float) -> float:
    """Smallest separation in degrees between two line angles in (-90, 90].

    Line directions are 180-periodic, so 89 and -89 are only 2 apart.
    """
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)


def line_through(seg: Segment) -> HomogeneousLine:
    """The infinite line carrying a segment, in canonical homogeneous form."""
    dx = seg.p2.x - seg.p1.x
    dy = seg.p2.y - seg.p1.y
    # Normal is the direction rotated 90 degrees; c from either endpoint.
    a, b = -dy, dx
    c = -(a * seg.p1.x + b * seg.p1.y)
    return HomogeneousLine(a, b, c)


def intersect(l1: HomogeneousLine, l2: HomogeneousLine) -> PixelPoint | None:
    """Intersection of two lines, or None when they are parallel.

    Parallelism is decided on the cross product of the unit normals, so
    the test is scale-free.
    """
    det = l1.a * l2.b - l2.a * l1.b
    if abs(det) < PARALLEL_EPS:
        return None
    x = (l1.b * l2.c - l2.b * l1.c) / det
    y = (l2.a * l1.c - l1.a * l2.c) / det
    return PixelPoint(x, y)


def endpoint_distance(s1: Segment, s2: Segment) -> float:
    """Smallest Euclidean distance between any endpoint pair of two segments."""
    return min(
        s1.p1.distance_to(s2.p1),
        s1.p1.distance_to(s2.p2),
        s1.p2.distance_to(s2.p1),
        s1.p2.distance_to(s2.p2),
    )
