"""Synthetic track scenes and gait traces with exact ground truth.

Scenes place two converging transverse marks and a fan of lane lines
drawn on exact integer image rows, so a noiseless render is a
pixel-perfect rasterization of the ground-truth segments. The metric
offset of each lane line is derived back through the same projective
map that placed it, which keeps the sidecar calibration consistent
with the drawn image to float precision; the offsets come out slightly
non-uniform, as a surveyed calibration would.

Traces plant toe keypoints that advance a fixed stride along the
running direction and stand perfectly still for exactly two frames per
contact, with every other transition moving by more than the
stationarity threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from trackstride.gait import (
    LEFT_TOE,
    RIGHT_TOE,
    STATIONARITY_PX,
    Joint,
    KeypointFrame,
    KeypointStream,
)
from trackstride.geometry import (
    PixelPoint,
    Segment,
    WorldPoint,
    intersect,
    line_through,
)
from trackstride.hough import bresenham
from trackstride.lines import TrackLines
from trackstride.rectify import Homography, WorldModel

_BASE_W = 1280
_BASE_H = 720
_LANE_GAP_M = 1.22
_MIN_ROW_GAP = 32  # at 720p; keeps rows outside every grouping threshold
_CLUTTER_CLEARANCE = 20.0


@dataclass(frozen=True)
class SceneSpec:
    """Parameters of one synthetic scene.

    Geometry is sampled from the seed; the noise knobs degrade the
    rendered edge map without touching the ground truth.
    """

    width: int = 1280
    height: int = 720
    lane_span_m: float = 10.0
    n_rows: int = 5
    dropout_prob: float = 0.0
    jitter_px: float = 0.0
    clutter_segments: int = 0
    seed: int = 0
    # When set, dropout/jitter/clutter draw from this stream instead of
    # the geometry stream, so one scene can yield many noise realizations.
    noise_seed: int | None = None

    def __post_init__(self) -> None:
        if self.width < 320 or self.height < 180:
            raise ValueError(f"image must be at least 320x180, got {self.width}x{self.height}")
        if not (self.lane_span_m > 0 and math.isfinite(self.lane_span_m)):
            raise ValueError(f"lane_span_m must be positive, got {self.lane_span_m}")
        if self.n_rows < 2:
            raise ValueError(f"need at least 2 rows, got {self.n_rows}")
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise ValueError(f"dropout_prob must be in [0, 1], got {self.dropout_prob}")
        if not (self.jitter_px >= 0 and math.isfinite(self.jitter_px)):
            raise ValueError(f"jitter_px must be non-negative, got {self.jitter_px}")
        if self.clutter_segments < 0:
            raise ValueError(f"clutter_segments must be non-negative, got {self.clutter_segments}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.noise_seed is not None and self.noise_seed < 0:
            raise ValueError(f"noise_seed must be non-negative, got {self.noise_seed}")


@dataclass(frozen=True)
class SceneTruth:
    """Ground truth accompanying a rendered scene."""

    lines: TrackLines
    vanishing_point: PixelPoint
    world: WorldModel
    image_to_world: Homography
    world_to_image: Homography
    reference_y: float


@dataclass(frozen=True)
class SyntheticScene:
    edges: np.ndarray
    truth: SceneTruth
    spec: SceneSpec


def _pixel_of(world_to_image: Homography, u: float, v: float) -> PixelPoint:
    vec = world_to_image.matrix @ np.array([u, v, 1.0])
    return PixelPoint(float(vec[0] / vec[2]), float(vec[1] / vec[2]))


def _solve_homography(
    src: list[tuple[float, float]], dst: list[tuple[float, float]]
) -> np.ndarray:
    """Exact 4-point homography via an 8x8 linear solve, h33 pinned to 1."""
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for k, ((x, y), (u, v)) in enumerate(zip(src, dst)):
        a[2 * k] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]
        a[2 * k + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]
        b[2 * k] = u
        b[2 * k + 1] = v
    h = np.linalg.solve(a, b)
    return np.append(h, 1.0).reshape(3, 3)


def _sample_rows(rng: np.random.Generator, y_near: int, y_far: int, n: int, min_gap: int) -> list[int]:
    """n integer rows from y_near down to y_far, gaps shrinking toward far."""
    span = y_near - y_far
    if span < min_gap * (n - 1):
        raise ValueError(f"{n} rows do not fit in a span of {span} px")
    decay = rng.uniform(0.72, 0.9)
    weights = decay ** np.arange(n - 1)
    extra = (span - min_gap * (n - 1)) * weights / weights.sum()
    gaps = min_gap + extra
    rows = [y_near]
    acc = 0.0
    for g in gaps:
        acc += g
        rows.append(y_near - int(round(acc)))
    rows[-1] = y_far
    return rows


def _raster_segment(seg: Segment) -> list[tuple[int, int]]:
    """One pixel per dominant-axis step, rounded off the analytic line.

    Rounding the endpoints first and joining them would tilt the raster
    by up to atan(1 / length); a line fit recovers that tilt faithfully,
    so the drawn direction must come from the unrounded line.
    """
    x1, y1, x2, y2 = seg.p1.x, seg.p1.y, seg.p2.x, seg.p2.y
    dx, dy = x2 - x1, y2 - y1
    if abs(dx) >= abs(dy):
        a, b = int(round(x1)), int(round(x2))
        step = 1 if b >= a else -1
        slope = dy / dx if dx else 0.0
        return [(x, int(round(y1 + (x - x1) * slope))) for x in range(a, b + step, step)]
    a, b = int(round(y1)), int(round(y2))
    step = 1 if b >= a else -1
    slope = dx / dy
    return [(int(round(x1 + (y - y1) * slope)), y) for y in range(a, b + step, step)]


def _draw_segment(
    edges: np.ndarray, seg: Segment, rng: np.random.Generator, dropout: float, jitter: float
) -> None:
    pix = np.asarray(_raster_segment(seg), dtype=np.int64)
    if dropout > 0.0:
        pix = pix[rng.random(len(pix)) >= dropout]
    if jitter > 0.0 and len(pix):
        off = np.rint(rng.uniform(-jitter, jitter, size=len(pix))).astype(np.int64)
        # Displace across the segment, not along it.
        axis = 1 if abs(seg.p2.x - seg.p1.x) >= abs(seg.p2.y - seg.p1.y) else 0
        pix[:, axis] += off
    if not len(pix):
        return
    h, w = edges.shape
    ok = (pix[:, 0] >= 0) & (pix[:, 0] < w) & (pix[:, 1] >= 0) & (pix[:, 1] < h)
    pix = pix[ok]
    edges[pix[:, 1], pix[:, 0]] = True


def _min_distance_to_segment(points: np.ndarray, seg: Segment) -> float:
    a = np.array([seg.p1.x, seg.p1.y])
    ab = np.array([seg.p2.x - seg.p1.x, seg.p2.y - seg.p1.y])
    t = np.clip((points - a) @ ab / (ab @ ab), 0.0, 1.0)
    nearest = a + t[:, None] * ab
    return float(np.sqrt(((points - nearest) ** 2).sum(axis=1)).min())


def _add_clutter(
    edges: np.ndarray,
    rng: np.random.Generator,
    count: int,
    keep_away_from: tuple[Segment, ...],
) -> None:
    h, w = edges.shape
    for _ in range(count):
        for _attempt in range(200):
            x1 = int(rng.integers(5, w - 5))
            y1 = int(rng.integers(5, h - 5))
            angle = rng.uniform(0.0, math.pi)
            length = rng.uniform(15.0, 35.0)
            x2 = int(round(x1 + length * math.cos(angle)))
            y2 = int(round(y1 + length * math.sin(angle)))
            if not (0 <= x2 < w and 0 <= y2 < h) or (x1, y1) == (x2, y2):
                continue
            pts = np.asarray(bresenham((x1, y1), (x2, y2)), dtype=float)
            if all(
                _min_distance_to_segment(pts, seg) >= _CLUTTER_CLEARANCE
                for seg in keep_away_from
            ):
                edges[pts[:, 1].astype(int), pts[:, 0].astype(int)] = True
                break


def render_scene(spec: SceneSpec) -> SyntheticScene:
    """Render one seeded scene and its exact ground truth.

    The two transverse marks converge to a sampled vanishing point and
    the lane lines land on integer rows, so the drawn pixels coincide
    with the truth segments whenever the noise knobs are zero.
    """
    rng = np.random.default_rng(spec.seed)
    sx = spec.width / _BASE_W
    sy = spec.height / _BASE_H

    def xi(lo: int, hi: int) -> int:
        return int(rng.integers(round(lo * sx), round(hi * sx) + 1))

    def yi(lo: int, hi: int) -> int:
        return int(rng.integers(round(lo * sy), round(hi * sy) + 1))

    y_near = yi(600, 690)
    y_far = yi(150, 300)
    x_near_left = xi(80, 240)
    x_near_right = xi(1040, 1200)
    vp = PixelPoint(
        rng.uniform(500 * sx, 780 * sx), rng.uniform(-900 * sy, -250 * sy)
    )
    min_gap = max(8, round(_MIN_ROW_GAP * sy))
    rows = _sample_rows(rng, y_near, y_far, spec.n_rows, min_gap)

    def x_on_ray(x_near: float, row: float) -> float:
        return vp.x + (x_near - vp.x) * (row - vp.y) / (y_near - vp.y)

    far_left = x_on_ray(x_near_left, y_far)
    far_right = x_on_ray(x_near_right, y_far)

    span_u = spec.lane_span_m
    span_v = _LANE_GAP_M * (spec.n_rows - 1)
    image_corners = [
        (float(x_near_left), float(y_near)),
        (float(x_near_right), float(y_near)),
        (far_left, float(y_far)),
        (far_right, float(y_far)),
    ]
    world_corners = [(0.0, 0.0), (span_u, 0.0), (0.0, span_v), (span_u, span_v)]
    image_to_world = Homography(_solve_homography(image_corners, world_corners))
    world_to_image = image_to_world.inverse()

    offsets = []
    for row in rows:
        w = image_to_world.apply(PixelPoint(x_on_ray(x_near_left, row), float(row)))
        offsets.append(w.y)
    offsets[0] = 0.0
    offsets[-1] = span_v
    world = WorldModel(lane_width_m=span_u, horizontal_spacing_m=tuple(offsets))

    margin = max(4, spec.width // 128)
    horizontals = tuple(
        Segment(
            PixelPoint(float(margin), float(row)),
            PixelPoint(float(spec.width - 1 - margin), float(row)),
        )
        for row in rows
    )
    # The transverse marks overhang the outer lane lines: marks ending
    # exactly on a crossing lose their last pixels to whichever line is
    # extracted first, which would bias the detected endpoints.
    overhang = max(2, int(round(int(rng.integers(6, 15)) * sy)))
    y_lo = y_near + overhang
    y_hi = y_far - overhang
    vertical_left = Segment(
        PixelPoint(x_on_ray(x_near_left, y_lo), float(y_lo)),
        PixelPoint(x_on_ray(x_near_left, y_hi), float(y_hi)),
    )
    vertical_right = Segment(
        PixelPoint(x_on_ray(x_near_right, y_lo), float(y_lo)),
        PixelPoint(x_on_ray(x_near_right, y_hi), float(y_hi)),
    )
    lines = TrackLines(horizontals, vertical_left, vertical_right)

    crossing = intersect(line_through(vertical_left), line_through(vertical_right))
    assert crossing is not None and crossing.distance_to(vp) < 1e-6

    if spec.noise_seed is not None:
        rng = np.random.default_rng(spec.noise_seed)
    edges = np.zeros((spec.height, spec.width), dtype=bool)
    for seg in lines.horizontals + (lines.vertical_left, lines.vertical_right):
        _draw_segment(edges, seg, rng, spec.dropout_prob, spec.jitter_px)
    all_truth = lines.horizontals + (lines.vertical_left, lines.vertical_right)
    _add_clutter(edges, rng, spec.clutter_segments, all_truth)

    truth = SceneTruth(
        lines=lines,
        vanishing_point=vp,
        world=world,
        image_to_world=image_to_world,
        world_to_image=world_to_image,
        reference_y=float(y_near),
    )
    return SyntheticScene(edges, truth, spec)


@dataclass(frozen=True)
class TraceSpec:
    """Parameters of one planted toe-keypoint trace.

    Contacts alternate feet and advance stride_m along the running
    direction at a fixed transverse position per foot. Each contact
    holds the toe for hold_frames frames; all other transitions move.
    """

    world_to_image: Homography
    contact_frames: tuple[int, ...]
    stride_m: float = 1.8
    start_u: float = 0.5
    run_v: float = 2.44
    foot_offset_v: float = 0.12
    first_foot: str = "left"
    fps: float = 30.0
    hold_frames: int = 2
    source_id: str = "synthetic"

    def __post_init__(self) -> None:
        frames = tuple(int(f) for f in self.contact_frames)
        if len(frames) < 2:
            raise ValueError("need at least 2 contact frames")
        if frames[0] < 0:
            raise ValueError(f"contact frames must be non-negative, got {frames[0]}")
        if any(b - a < self.hold_frames + 1 for a, b in zip(frames, frames[1:])):
            raise ValueError(
                f"contact frames must be at least {self.hold_frames + 1} apart, got {frames}"
            )
        object.__setattr__(self, "contact_frames", frames)
        if not (self.stride_m > 0 and math.isfinite(self.stride_m)):
            raise ValueError(f"stride_m must be positive, got {self.stride_m}")
        if not (self.fps > 0 and math.isfinite(self.fps)):
            raise ValueError(f"fps must be positive, got {self.fps}")
        if self.hold_frames < 2:
            raise ValueError(f"a contact needs at least 2 held frames, got {self.hold_frames}")
        if self.first_foot not in ("left", "right"):
            raise ValueError(f"first_foot must be 'left' or 'right', got {self.first_foot}")
        if self.foot_offset_v < 0:
            raise ValueError(f"foot_offset_v must be non-negative, got {self.foot_offset_v}")


@dataclass(frozen=True)
class PlantedContact:
    frame_index: int
    foot: str
    pixel: PixelPoint
    world: WorldPoint


@dataclass(frozen=True)
class SyntheticTrace:
    stream: KeypointStream
    contacts: tuple[PlantedContact, ...]
    spec: TraceSpec


def generate_trace(spec: TraceSpec) -> SyntheticTrace:
    """Plant a toe-keypoint stream whose contacts are known exactly.

    Raises ValueError when the requested cadence would swing a toe
    slower than the stationarity threshold between contacts.
    """
    feet = ["left", "right"] if spec.first_foot == "left" else ["right", "left"]
    contacts: list[PlantedContact] = []
    for k, frame in enumerate(spec.contact_frames):
        u = spec.start_u + k * spec.stride_m
        foot = feet[k % 2]
        v = spec.run_v + (spec.foot_offset_v if foot == "left" else -spec.foot_offset_v)
        contacts.append(
            PlantedContact(frame, foot, _pixel_of(spec.world_to_image, u, v), WorldPoint(u, v))
        )

    first, last = contacts[0], contacts[-1]
    step = np.array(
        [last.pixel.x - first.pixel.x, last.pixel.y - first.pixel.y]
    ) / (last.frame_index - first.frame_index)
    norm = float(np.hypot(*step))
    if norm < 2.0 * STATIONARITY_PX:
        step = step * (2.0 * STATIONARITY_PX / norm)

    n_frames = last.frame_index + spec.hold_frames + 1
    positions: dict[str, np.ndarray] = {}
    for foot in ("left", "right"):
        own = [c for c in contacts if c.foot == foot]
        pos = np.zeros((n_frames, 2))
        for c in own:
            for f in range(c.frame_index, c.frame_index + spec.hold_frames):
                pos[f] = (c.pixel.x, c.pixel.y)
        for prev, nxt in zip(own, own[1:]):
            a = prev.frame_index + spec.hold_frames - 1
            b = nxt.frame_index
            travel = math.hypot(nxt.pixel.x - prev.pixel.x, nxt.pixel.y - prev.pixel.y)
            if travel / (b - a) < 1.5 * STATIONARITY_PX:
                raise ValueError(
                    f"swing between frames {a} and {b} moves only "
                    f"{travel / (b - a):.2f} px per frame"
                )
            for f in range(a + 1, b):
                t = (f - a) / (b - a)
                pos[f, 0] = prev.pixel.x + t * (nxt.pixel.x - prev.pixel.x)
                pos[f, 1] = prev.pixel.y + t * (nxt.pixel.y - prev.pixel.y)
        head = own[0]
        for f in range(0, head.frame_index):
            pos[f] = (
                head.pixel.x + step[0] * (f - head.frame_index),
                head.pixel.y + step[1] * (f - head.frame_index),
            )
        tail_end = own[-1].frame_index + spec.hold_frames - 1
        for f in range(tail_end + 1, n_frames):
            pos[f] = (
                own[-1].pixel.x + step[0] * (f - tail_end),
                own[-1].pixel.y + step[1] * (f - tail_end),
            )
        positions[foot] = pos

    frames = []
    for f in range(n_frames):
        joints = {
            LEFT_TOE: Joint(PixelPoint(*positions["left"][f]), 1.0),
            RIGHT_TOE: Joint(PixelPoint(*positions["right"][f]), 1.0),
        }
        frames.append(KeypointFrame(f, f / spec.fps, joints))
    stream = KeypointStream(tuple(frames), spec.fps, spec.source_id)
    return SyntheticTrace(stream, tuple(contacts), spec)
