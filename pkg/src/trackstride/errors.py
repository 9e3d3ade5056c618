"""Exception types shared across the pipeline.

Split by how the CLI maps failures to exit codes: configuration and input
problems, pipeline (detection/estimation) failures, and I/O failures.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """A configuration value is missing, malformed, or out of range."""


class SchemaError(ConfigError):
    """An input data file does not match its declared schema."""


class DuplicateFrame(SchemaError):
    """A keypoint stream contains two records for the same frame index."""


class SpecError(ConfigError):
    """A fixture-generation spec is invalid or out of range."""


class NoFrames(ConfigError):
    """A frames directory contains no readable frame images."""


class PipelineError(RuntimeError):
    """Base class for failures of the estimation pipeline itself."""


class InsufficientVerticals(PipelineError):
    """Fewer than two distinct steep reference lines survived selection."""


class NoVanishingPoint(PipelineError):
    """The two selected reference lines are parallel in the image."""


class NoValidPair(PipelineError):
    """No line pair in any frame produced a usable homography."""


class DegenerateConfiguration(PipelineError):
    """Control points are collinear or otherwise unusable for fitting."""


class RankDeficient(PipelineError):
    """The fitted transform collapsed to a singular matrix."""


class PointAtInfinity(PipelineError):
    """A mapped point lies on the horizon of the transform."""


class NoIntersection(PipelineError):
    """A ray never crosses the requested scan line."""


class InsufficientContacts(PipelineError):
    """Fewer than two foot contacts were detected in the stream."""


class OutOfBounds(ValueError):
    """A coordinate falls outside the target raster."""
