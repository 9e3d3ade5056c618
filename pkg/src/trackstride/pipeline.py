"""Frame orchestration: edge maps to line structure to one homography.

Each frame runs the full detection chain independently. Frames that fail
a structural stage are kept with a skip reason instead of aborting the
run; the per-pair homographies of all surviving frames are pooled into a
single element-wise median, which tolerates a minority of bad frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from trackstride.errors import NoValidPair, PipelineError
from trackstride.geometry import PixelPoint
from trackstride.hough import PhtParams, probabilistic_hough
from trackstride.imaging import (
    RoiPolygon,
    apply_roi,
    canny,
    check_edge_map,
    gaussian_blur,
)
from trackstride.lines import (
    AreaConfig,
    TrackLines,
    classify,
    group_horizontals,
    select_verticals,
    vanishing_point,
)
from trackstride.rectify import (
    Homography,
    PairHomography,
    WorldModel,
    frame_homographies,
    median_homography,
)


@dataclass(frozen=True)
class FrameResult:
    """Diagnostics for one analyzed frame."""

    frame_id: str
    n_segments: int
    n_horizontals: int
    lines: TrackLines | None
    vanishing_point: PixelPoint | None
    homographies: tuple[PairHomography, ...]
    skip_reason: str | None

    @property
    def ok(self) -> bool:
        return self.skip_reason is None


def edges_from_gray(
    img: np.ndarray,
    blur_sigma: float,
    canny_low: float,
    canny_high: float,
    roi: RoiPolygon | None = None,
) -> np.ndarray:
    """Grayscale frame to edge map: blur, detect edges, mask to the ROI."""
    smoothed = gaussian_blur(img, blur_sigma) if blur_sigma > 0 else img
    return apply_roi(canny(smoothed, canny_low, canny_high), roi)


def analyze_frame(
    edges: np.ndarray,
    world: WorldModel,
    pht: PhtParams | None = None,
    areas: AreaConfig | None = None,
    frame_id: str = "frame",
    horizontal_tolerance: float = 10.0,
    vertical_min_angle: float = 2.0,
    vertical_band: float = 45.0,
) -> FrameResult:
    """Run detection through homography fitting on one edge map.

    Structural failures (too few verticals, parallel verticals, no valid
    horizontal pair) are reported in skip_reason, never raised: one bad
    frame must not end a multi-frame run.
    """
    edges = check_edge_map(edges)
    height, width = edges.shape
    segments = probabilistic_hough(edges, pht or PhtParams())
    grouped = classify(segments, horizontal_tolerance, vertical_min_angle, vertical_band)
    horizontals = group_horizontals(grouped.horizontal, areas or AreaConfig.for_image(width, height))

    def skipped(reason: str, lines: TrackLines | None = None, vp: PixelPoint | None = None) -> FrameResult:
        return FrameResult(frame_id, len(segments), len(horizontals), lines, vp, (), reason)

    try:
        left, right = select_verticals(grouped.vertical)
        vp = vanishing_point(left, right)
    except PipelineError as exc:
        return skipped(f"{type(exc).__name__}: {exc}")
    lines = TrackLines(tuple(horizontals), left, right)
    try:
        pairs = frame_homographies(lines, world)
    except PipelineError as exc:
        return skipped(f"{type(exc).__name__}: {exc}", lines, vp)
    return FrameResult(frame_id, len(segments), len(horizontals), lines, vp, tuple(pairs), None)


def pooled_homography(results: Iterable[FrameResult]) -> Homography:
    """Element-wise median over every pair homography of every frame."""
    results = list(results)
    pool = [pair.homography for r in results for pair in r.homographies]
    if not pool:
        failed = ", ".join(f"{r.frame_id} ({r.skip_reason})" for r in results[:8])
        more = "" if len(results) <= 8 else f" and {len(results) - 8} more"
        raise NoValidPair(f"no frame produced a usable line pair: {failed}{more}")
    return median_homography(pool)


def reference_row(lines: TrackLines) -> float:
    """Scan-line for contact stabilization: the nearest horizontal.

    Image y grows downward, so the nearest line has the largest midpoint
    y; near the camera a pixel covers the least track, which is where
    projected contacts should land.
    """
    return max(seg.midpoint.y for seg in lines.horizontals)
