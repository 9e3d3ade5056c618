"""Foot-contact detection and metric stride computation.

Contacts are found with a stationarity rule: a toe that moves less than
a pixel threshold between two consecutive, confidently tracked frames
is on the ground. Consecutive stationary transitions merge into one
contact run reported at its first frame. Each contact pixel is then
stabilized by sliding it along the ray through the vanishing point onto
a fixed reference scan line (which preserves the world coordinate the
strides are measured along), mapped to meters, and paired with the next
opposite-foot contact to produce stride lengths, durations, and speeds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Iterable

import jsonschema

from trackstride.errors import (
    DuplicateFrame,
    InsufficientContacts,
    NoIntersection,
    SchemaError,
)
from trackstride.geometry import PixelPoint, WorldPoint
from trackstride.rectify import Homography

STATIONARITY_PX = 1.0
MIN_CONFIDENCE = 0.3

LEFT_TOE = "left_toe"
RIGHT_TOE = "right_toe"

# Adapters pass through their model's toe names; the foot-index and
# big-toe conventions are both accepted and normalized.
_TOE_ALIASES = {
    "left_foot_index": LEFT_TOE,
    "right_foot_index": RIGHT_TOE,
    "left_big_toe": LEFT_TOE,
    "right_big_toe": RIGHT_TOE,
}

_KEYPOINT_SCHEMA = {
    "type": "object",
    "required": ["fps", "source_id", "frames"],
    "properties": {
        "fps": {"type": "number", "exclusiveMinimum": 0},
        "source_id": {"type": "string"},
        "frames": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["frame", "t", "joints"],
                "properties": {
                    "frame": {"type": "integer", "minimum": 0},
                    "t": {"type": "number", "minimum": 0},
                    "joints": {
                        "type": "object",
                        "additionalProperties": {
                            "type": "object",
                            "required": ["x", "y", "c"],
                            "properties": {
                                "x": {"type": "number"},
                                "y": {"type": "number"},
                                "c": {"type": "number", "minimum": 0, "maximum": 1},
                            },
                        },
                    },
                },
            },
        },
    },
}


@dataclass(frozen=True)
class Joint:
    position: PixelPoint
    confidence: float


@dataclass(frozen=True)
class KeypointFrame:
    frame_index: int
    timestamp_s: float
    joints: dict[str, Joint]


@dataclass(frozen=True)
class KeypointStream:
    frames: tuple[KeypointFrame, ...]
    fps: float
    source_id: str


@dataclass(frozen=True)
class ContactEvent:
    """One detected foot landing.

    raw_pixel is the mean toe position over the stationary run;
    stabilized_pixel and world are filled by later pipeline stages.
    """

    frame_index: int
    foot: str  # "left" or "right"
    raw_pixel: PixelPoint
    stabilized_pixel: PixelPoint | None = None
    world: WorldPoint | None = None


@dataclass(frozen=True)
class Stride:
    """One stride between consecutive opposite-foot contacts."""

    from_frame: int
    to_frame: int
    from_foot: str
    to_foot: str
    length_m: float
    duration_s: float

    @property
    def speed_mps(self) -> float:
        return self.length_m / self.duration_s


@dataclass(frozen=True)
class StrideReport:
    athlete_id: str
    source_id: str
    strides: tuple[Stride, ...]
    warnings: tuple[str, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.strides

    @property
    def average_length_m(self) -> float | None:
        if not self.strides:
            return None
        return sum(s.length_m for s in self.strides) / len(self.strides)


def load_keypoints(source) -> KeypointStream:
    """Read a keypoint stream from a JSON file path or file object.

    Validates against the wire schema, normalizes toe joint aliases,
    requires both toes in every frame, rejects duplicate frame indices,
    and returns frames sorted by frame index.
    """
    if hasattr(source, "read"):
        raw = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            raw = fh.read()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"keypoint file is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(doc, _KEYPOINT_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"keypoint file schema violation: {exc.message}") from exc

    frames: list[KeypointFrame] = []
    seen: set[int] = set()
    for rec in doc["frames"]:
        idx = rec["frame"]
        if idx in seen:
            raise DuplicateFrame(f"frame index {idx} appears more than once")
        seen.add(idx)
        joints: dict[str, Joint] = {}
        for name, j in rec["joints"].items():
            canonical = _TOE_ALIASES.get(name, name)
            joints[canonical] = Joint(PixelPoint(float(j["x"]), float(j["y"])), float(j["c"]))
        for toe in (LEFT_TOE, RIGHT_TOE):
            if toe not in joints:
                raise SchemaError(f"frame {idx} is missing required joint '{toe}'")
        frames.append(KeypointFrame(idx, float(rec["t"]), joints))
    frames.sort(key=lambda f: f.frame_index)
    return KeypointStream(tuple(frames), float(doc["fps"]), str(doc["source_id"]))


def keypoints_to_doc(stream: KeypointStream) -> dict:
    """Inverse of load_keypoints: a JSON-serializable wire document."""
    return {
        "fps": stream.fps,
        "source_id": stream.source_id,
        "frames": [
            {
                "frame": f.frame_index,
                "t": f.timestamp_s,
                "joints": {
                    name: {"x": j.position.x, "y": j.position.y, "c": j.confidence}
                    for name, j in sorted(f.joints.items())
                },
            }
            for f in stream.frames
        ],
    }


def detect_contacts(
    frames: Iterable[KeypointFrame],
    stationarity_px: float = STATIONARITY_PX,
    min_confidence: float = MIN_CONFIDENCE,
) -> list[ContactEvent]:
    """Detect foot contacts from toe stationarity.

    A transition between consecutive frame indices qualifies when the
    toe moves less than stationarity_px and both confidences are at
    least min_confidence. Runs of qualifying transitions become one
    event at the run's first frame, with raw_pixel the per-coordinate
    mean over the run.
    """
    ordered = sorted(frames, key=lambda f: f.frame_index)
    events: list[ContactEvent] = []
    for foot, toe in (("left", LEFT_TOE), ("right", RIGHT_TOE)):
        run: list[KeypointFrame] = []
        for prev, curr in zip(ordered, ordered[1:]):
            a, b = prev.joints[toe], curr.joints[toe]
            qualifies = (
                curr.frame_index == prev.frame_index + 1
                and a.confidence >= min_confidence
                and b.confidence >= min_confidence
                and a.position.distance_to(b.position) < stationarity_px
            )
            if qualifies:
                if not run:
                    run = [prev]
                run.append(curr)
            elif run:
                events.append(_finish_run(run, foot, toe))
                run = []
        if run:
            events.append(_finish_run(run, foot, toe))
    events.sort(key=lambda e: (e.frame_index, e.foot))
    return events


def _finish_run(run: list[KeypointFrame], foot: str, toe: str) -> ContactEvent:
    xs = [f.joints[toe].position.x for f in run]
    ys = [f.joints[toe].position.y for f in run]
    mean = PixelPoint(sum(xs) / len(xs), sum(ys) / len(ys))
    return ContactEvent(run[0].frame_index, foot, mean)


def stabilize_contact(
    raw: PixelPoint, vanishing_point: PixelPoint, reference_y: float
) -> PixelPoint:
    """Slide a contact along its vanishing-point ray onto a scan line.

    The ray through the point and the vanishing point is the image of
    the world line transverse to the running direction, so the
    intersection with the row y = reference_y keeps the along-track
    coordinate while normalizing the transverse one.
    """
    if raw == vanishing_point:
        raise ValueError("contact coincides with the vanishing point")
    dy = vanishing_point.y - raw.y
    if abs(dy) < 1e-12:
        raise NoIntersection(
            f"ray through ({raw.x}, {raw.y}) is parallel to the scan line y={reference_y}"
        )
    t = (reference_y - raw.y) / dy
    return PixelPoint(raw.x + t * (vanishing_point.x - raw.x), reference_y)


def stabilize_contacts(
    events: Iterable[ContactEvent],
    vanishing_point: PixelPoint | None,
    reference_y: float | None,
) -> list[ContactEvent]:
    """Stabilize raw contacts; without a vanishing point they pass through."""
    out = []
    for e in events:
        if vanishing_point is None or reference_y is None:
            out.append(replace(e, stabilized_pixel=e.raw_pixel))
        else:
            out.append(
                replace(
                    e,
                    stabilized_pixel=stabilize_contact(e.raw_pixel, vanishing_point, reference_y),
                )
            )
    return out


def compute_strides(
    contacts: list[ContactEvent],
    homography: Homography,
    fps: float,
    athlete_id: str = "unknown",
    source_id: str = "unknown",
) -> StrideReport:
    """Metric strides between consecutive opposite-foot contacts.

    Contacts are mapped to the track plane through the homography
    (using the stabilized pixel when present, the raw one otherwise).
    Consecutive same-foot contacts produce a warning instead of a
    stride. Raises InsufficientContacts for fewer than two contacts.
    """
    if fps <= 0 or not math.isfinite(fps):
        raise ValueError(f"fps must be positive, got {fps}")
    if len(contacts) < 2:
        raise InsufficientContacts(f"need at least 2 contacts, got {len(contacts)}")
    located: list[ContactEvent] = []
    for e in contacts:
        pixel = e.stabilized_pixel if e.stabilized_pixel is not None else e.raw_pixel
        located.append(replace(e, world=homography.apply(pixel)))

    strides: list[Stride] = []
    warnings: list[str] = []
    for a, b in zip(located, located[1:]):
        if a.foot == b.foot:
            warnings.append(
                f"consecutive {a.foot}-foot contacts at frames {a.frame_index} and "
                f"{b.frame_index}; no stride emitted"
            )
            continue
        duration = (b.frame_index - a.frame_index) / fps
        if duration <= 0:
            warnings.append(
                f"non-increasing contact frames {a.frame_index} -> {b.frame_index}; skipped"
            )
            continue
        length = a.world.distance_to(b.world)
        strides.append(
            Stride(a.frame_index, b.frame_index, a.foot, b.foot, length, duration)
        )
    return StrideReport(athlete_id, source_id, tuple(strides), tuple(warnings))


@dataclass(frozen=True)
class SummaryRow:
    athlete_id: str
    source_id: str
    n_strides: int
    mean_m: float
    std_m: float
    min_m: float
    max_m: float


@dataclass(frozen=True)
class CrossSourceRow:
    athlete_id: str
    source_a: str
    source_b: str
    mean_a: float
    mean_b: float
    diff_m: float
    diff_pct: float


@dataclass(frozen=True)
class SummaryTable:
    rows: tuple[SummaryRow, ...]
    cross_source: tuple[CrossSourceRow, ...]


def summarize(reports: Iterable[StrideReport]) -> SummaryTable:
    """Aggregate stride statistics per (athlete, source) and across sources.

    Cross-source rows compare each later source against the first
    (sorted by source id): diff = mean_b - mean_a, percent relative to
    the first source's mean. Population standard deviation is used so
    single-stride groups report 0.
    """
    groups: dict[tuple[str, str], list[float]] = {}
    for rep in reports:
        key = (rep.athlete_id, rep.source_id)
        groups.setdefault(key, []).extend(s.length_m for s in rep.strides)

    rows = []
    for (athlete, source) in sorted(groups):
        lengths = groups[(athlete, source)]
        if not lengths:
            continue
        n = len(lengths)
        mean = sum(lengths) / n
        var = sum((v - mean) ** 2 for v in lengths) / n
        rows.append(
            SummaryRow(athlete, source, n, mean, math.sqrt(var), min(lengths), max(lengths))
        )

    by_athlete: dict[str, list[SummaryRow]] = {}
    for row in rows:
        by_athlete.setdefault(row.athlete_id, []).append(row)
    cross = []
    for athlete in sorted(by_athlete):
        sources = sorted(by_athlete[athlete], key=lambda r: r.source_id)
        base = sources[0]
        for other in sources[1:]:
            diff = other.mean_m - base.mean_m
            cross.append(
                CrossSourceRow(
                    athlete,
                    base.source_id,
                    other.source_id,
                    base.mean_m,
                    other.mean_m,
                    diff,
                    100.0 * diff / base.mean_m,
                )
            )
    return SummaryTable(tuple(rows), tuple(cross))
