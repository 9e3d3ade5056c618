"""Organizing raw segments into the painted line structure of a track.

Detected segments are classified by angle into near-horizontal track
lines and steep reference lines. Horizontal fragments are grouped and
merged area by area: the frame is split into three vertical strips so
the merge threshold can shrink where perspective packs the lines closer
together, then chained fragments are joined into one segment per
physical line. The two steep reference lines fix the vanishing point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from trackstride.errors import InsufficientVerticals, NoVanishingPoint
from trackstride.geometry import (
    PixelPoint,
    Segment,
    angle_between,
    endpoint_distance,
    intersect,
    line_through,
)

HORIZONTAL_TOLERANCE_DEG = 10.0
VERTICAL_MIN_ANGLE_DEG = 2.0
VERTICAL_BAND_DEG = 45.0
VERTICAL_GROUP_TOLERANCE_DEG = 15.0

# Reference raster height for the pixel thresholds below.
_BASE_HEIGHT = 720.0


@dataclass(frozen=True)
class AreaConfig:
    """Three-strip layout and per-strip merge thresholds.

    boundaries : the two x positions splitting the frame into strips
    merge_thresholds : perpendicular clustering distance per strip, in
        pixels, ordered so the threshold shrinks toward the strip where
        perspective compresses the lines
    join_threshold : endpoint distance below which merged fragments in
        adjacent strips chain into one line
    """

    boundaries: tuple[float, float]
    merge_thresholds: tuple[float, float, float] = (25.0, 15.0, 8.0)
    join_threshold: float = 30.0

    def __post_init__(self) -> None:
        b1, b2 = self.boundaries
        if not 0 < b1 < b2:
            raise ValueError(f"boundaries must satisfy 0 < b1 < b2, got {self.boundaries}")
        t = self.merge_thresholds
        if len(t) != 3 or any(v <= 0 for v in t):
            raise ValueError(f"three positive merge thresholds required, got {t}")
        if not (t[0] >= t[1] >= t[2] or t[0] <= t[1] <= t[2]):
            raise ValueError(f"merge thresholds must be monotone, got {t}")
        if self.join_threshold <= 0:
            raise ValueError("join_threshold must be positive")

    @classmethod
    def for_image(cls, width: int, height: int) -> "AreaConfig":
        """Default layout: strips at w/3 and 2w/3, thresholds scaled by height."""
        scale = height / _BASE_HEIGHT
        return cls(
            boundaries=(width / 3.0, 2.0 * width / 3.0),
            merge_thresholds=(25.0 * scale, 15.0 * scale, 8.0 * scale),
            join_threshold=30.0 * scale,
        )


@dataclass(frozen=True)
class ClassifiedSegments:
    horizontal: tuple[Segment, ...]
    vertical: tuple[Segment, ...]
    rejected: tuple[Segment, ...]


@dataclass(frozen=True)
class TrackLines:
    """The line structure of one frame.

    Horizontals are ordered nearest first (decreasing midpoint y in
    image coordinates, which grow downward).
    """

    horizontals: tuple[Segment, ...]
    vertical_left: Segment
    vertical_right: Segment

    def __post_init__(self) -> None:
        ordered = tuple(
            sorted(self.horizontals, key=lambda s: (-s.midpoint.y, s.midpoint.x))
        )
        object.__setattr__(self, "horizontals", ordered)


def _median(values: list[float]) -> float:
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    if n % 2:
        return ordered[mid]
    return 0.5 * (ordered[mid - 1] + ordered[mid])


def classify(
    segments: list[Segment],
    horizontal_tolerance: float = HORIZONTAL_TOLERANCE_DEG,
    vertical_min_angle: float = VERTICAL_MIN_ANGLE_DEG,
    vertical_band: float = VERTICAL_BAND_DEG,
) -> ClassifiedSegments:
    """Partition segments into horizontal, vertical, and rejected.

    Horizontal: |angle| within `horizontal_tolerance` of the x-axis.
    Vertical: within `vertical_band` of the y-axis and differing from
    the base angle (median horizontal angle, 0 when none) by more than
    `vertical_min_angle`. Everything else is rejected.
    """
    horizontal: list[Segment] = []
    rest: list[Segment] = []
    for seg in segments:
        if abs(seg.angle) <= horizontal_tolerance:
            horizontal.append(seg)
        else:
            rest.append(seg)

    base_angle = _median([s.angle for s in horizontal]) if horizontal else 0.0
    vertical: list[Segment] = []
    rejected: list[Segment] = []
    for seg in rest:
        steep = abs(seg.angle) >= 90.0 - vertical_band
        apart = angle_between(seg.angle, base_angle) > vertical_min_angle
        (vertical if steep and apart else rejected).append(seg)
    return ClassifiedSegments(tuple(horizontal), tuple(vertical), tuple(rejected))


def _sorted_by_x(seg: Segment) -> tuple[PixelPoint, PixelPoint]:
    if (seg.p1.x, seg.p1.y) <= (seg.p2.x, seg.p2.y):
        return seg.p1, seg.p2
    return seg.p2, seg.p1


def _split_at_boundaries(seg: Segment, boundaries: tuple[float, float]) -> list[Segment]:
    left, right = _sorted_by_x(seg)
    if left.x == right.x:
        return [seg]
    cuts = [b for b in boundaries if left.x < b < right.x]
    points = [left]
    for b in cuts:
        t = (b - left.x) / (right.x - left.x)
        points.append(PixelPoint(b, left.y + t * (right.y - left.y)))
    points.append(right)
    pieces = []
    for p, q in zip(points, points[1:]):
        if p != q:
            pieces.append(Segment(p, q))
    return pieces


def _area_of(seg: Segment, boundaries: tuple[float, float]) -> int:
    mx = seg.midpoint.x
    if mx < boundaries[0]:
        return 0
    if mx < boundaries[1]:
        return 1
    return 2


def _piece_order(seg: Segment) -> tuple:
    # Longest first; ties go to the piece nearer the camera (larger y is
    # nearer, but the reference choice asks for the smaller midpoint y).
    m = seg.midpoint
    return (-seg.length, m.y, m.x, seg.p1.x, seg.p1.y)


def _merge_cluster(members: list[Segment]) -> Segment:
    endpoints = [p for s in members for p in (s.p1, s.p2)]
    lo = min(endpoints, key=lambda p: (p.x, p.y))
    hi = max(endpoints, key=lambda p: (p.x, p.y))
    return Segment(lo, hi)


def group_horizontals(segments: list[Segment], areas: AreaConfig) -> list[Segment]:
    """Merge horizontal fragments into one segment per physical line.

    Five steps: split each segment at the strip boundaries, assign
    pieces to strips by midpoint, cluster pieces per strip around the
    longest piece by perpendicular midpoint distance, merge each cluster
    into its x-extent, then chain merged pieces of adjacent strips whose
    endpoints come within the join threshold. Each chain is returned as
    the segment from its smallest-x endpoint to its largest-x endpoint,
    ordered nearest line first.
    """
    per_area: dict[int, list[Segment]] = {0: [], 1: [], 2: []}
    for seg in segments:
        for piece in _split_at_boundaries(seg, areas.boundaries):
            per_area[_area_of(piece, areas.boundaries)].append(piece)

    merged: list[tuple[int, Segment]] = []
    for area, pieces in per_area.items():
        threshold = areas.merge_thresholds[area]
        pending = sorted(pieces, key=_piece_order)
        while pending:
            reference = line_through(pending[0])
            members = [s for s in pending if reference.distance(s.midpoint) < threshold]
            pending = [s for s in pending if reference.distance(s.midpoint) >= threshold]
            merged.append((area, _merge_cluster(members)))

    # Chain merged pieces across adjacent strips, nearest pairs first.
    parent = list(range(len(merged)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    links: list[tuple[float, int, int]] = []
    for i, (ai, si) in enumerate(merged):
        for j, (aj, sj) in enumerate(merged):
            if j <= i or abs(ai - aj) != 1:
                continue
            d = endpoint_distance(si, sj)
            if d < areas.join_threshold:
                links.append((d, i, j))
    taken: dict[tuple[int, int], int] = {}
    for d, i, j in sorted(links):
        lo_area = min(merged[i][0], merged[j][0])
        # One link per segment per adjacent-strip side keeps chains simple.
        if taken.get((i, lo_area)) is not None or taken.get((j, lo_area)) is not None:
            continue
        taken[(i, lo_area)] = j
        taken[(j, lo_area)] = i
        parent[find(i)] = find(j)

    chains: dict[int, list[Segment]] = {}
    for i, (_, seg) in enumerate(merged):
        chains.setdefault(find(i), []).append(seg)
    out = [_merge_cluster(members) for members in chains.values()]
    out.sort(key=lambda s: (-s.midpoint.y, s.midpoint.x))
    return out


def select_verticals(
    segments: list[Segment],
    group_tolerance: float = VERTICAL_GROUP_TOLERANCE_DEG,
) -> tuple[Segment, Segment]:
    """Pick the left and right reference lines from vertical candidates.

    Candidates cluster by angle (circular distance, so 89 and -89 are
    close); the longest segment represents each cluster. The survivors
    with the leftmost and rightmost midpoints are returned.
    """
    if not segments:
        raise InsufficientVerticals("no vertical segments detected")
    ordered = sorted(segments, key=_piece_order)  # longest first
    reps: list[Segment] = []
    for seg in ordered:
        if not any(angle_between(seg.angle, rep.angle) <= group_tolerance for rep in reps):
            reps.append(seg)
    if len(reps) < 2:
        raise InsufficientVerticals(f"only {len(reps)} vertical cluster(s) found")
    by_x = sorted(reps, key=lambda s: (s.midpoint.x, s.midpoint.y))
    return by_x[0], by_x[-1]


def vanishing_point(left: Segment, right: Segment) -> PixelPoint:
    """Intersection of the two reference lines extended to infinity."""
    p = intersect(line_through(left), line_through(right))
    if p is None:
        raise NoVanishingPoint("reference lines are parallel in the image")
    return p
