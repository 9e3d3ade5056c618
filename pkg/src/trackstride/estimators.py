"""Estimator-shaped front door for plane rectification.

TrackPlaneRectifier follows the fit/transform convention: fit learns the
image-to-world homography from edge-map frames, transform maps pixel
coordinates to metric world coordinates. Parameters are plain
constructor fields, so get_params/set_params/clone behave as usual.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from trackstride.geometry import PixelPoint
from trackstride.hough import PhtParams
from trackstride.lines import AreaConfig
from trackstride.pipeline import analyze_frame, pooled_homography, reference_row
from trackstride.rectify import WorldModel


def _check_points(X) -> np.ndarray:
    pts = np.asarray(X, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) array of points, got shape {pts.shape}")
    if not np.isfinite(pts).all():
        raise ValueError("points must be finite")
    return pts


class TrackPlaneRectifier(BaseEstimator, TransformerMixin):
    """Learn a pixel-to-meter mapping from lane-line frames.

    Parameters
    ----------
    world : WorldModel or None
        Metric positions of the lane lines; None uses the defaults.
    pht : PhtParams or None
        Segment detector tuning; None uses the defaults.
    areas : AreaConfig or None
        Horizontal-merge strips; None derives them from the frame size.

    Attributes
    ----------
    homography_ : Homography
        Element-wise median over all per-frame pair homographies.
    vanishing_point_ : PixelPoint
        Per-coordinate median of the frame vanishing points.
    reference_y_ : float
        Median scan-line of the nearest horizontal across frames, the
        default stabilization row for contact projection.
    frames_ : tuple of FrameResult
        Per-frame diagnostics, including skip reasons.
    """

    def __init__(
        self,
        world: WorldModel | None = None,
        pht: PhtParams | None = None,
        areas: AreaConfig | None = None,
    ) -> None:
        self.world = world
        self.pht = pht
        self.areas = areas

    def fit(self, X, y=None) -> "TrackPlaneRectifier":
        """Analyze an iterable of boolean edge maps and pool the result."""
        world = self.world if self.world is not None else WorldModel()
        results = [
            analyze_frame(edges, world, self.pht, self.areas, frame_id=str(i))
            for i, edges in enumerate(X)
        ]
        self.frames_ = tuple(results)
        self.homography_ = pooled_homography(results)
        usable = [r for r in results if r.ok]
        self.vanishing_point_ = PixelPoint(
            float(np.median([r.vanishing_point.x for r in usable])),
            float(np.median([r.vanishing_point.y for r in usable])),
        )
        self.reference_y_ = float(np.median([reference_row(r.lines) for r in usable]))
        return self

    def transform(self, X) -> np.ndarray:
        """Map (n, 2) pixel coordinates to (n, 2) world meters."""
        check_is_fitted(self)
        pts = _check_points(X)
        out = np.empty_like(pts)
        for i, (x, y) in enumerate(pts):
            w = self.homography_.apply(PixelPoint(float(x), float(y)))
            out[i] = (w.x, w.y)
        return out

    def inverse_transform(self, X) -> np.ndarray:
        """Map (n, 2) world meters back to (n, 2) pixel coordinates."""
        check_is_fitted(self)
        pts = _check_points(X)
        inv = self.homography_.inverse()
        out = np.empty_like(pts)
        for i, (x, y) in enumerate(pts):
            p = inv.apply(PixelPoint(float(x), float(y)))
            out[i] = (p.x, p.y)
        return out
