"""Markerless stride-length and speed estimation from track footage.

The pipeline detects painted track lines in each frame, fits a robust
image-to-track-plane homography from their intersections, locates foot
contacts in pose keypoint streams, and reports per-stride lengths and
speeds in meters.
"""

from trackstride.geometry import (
    HomogeneousLine,
    PixelPoint,
    Segment,
    WorldPoint,
    endpoint_distance,
    intersect,
    line_through,
    segment_angle,
)

__all__ = [
    "HomogeneousLine",
    "PixelPoint",
    "Segment",
    "WorldPoint",
    "endpoint_distance",
    "intersect",
    "line_through",
    "segment_angle",
]

__version__ = "0.1.0"
