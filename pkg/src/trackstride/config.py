"""Run configuration: a sectioned text file parsed into typed settings.

The file format is INI. Every key has a default; an empty file or a
missing section is valid. Unknown sections or keys are rejected rather
than ignored, so a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, TypeVar

from trackstride.errors import ConfigError
from trackstride.hough import PhtParams
from trackstride.imaging import RoiPolygon
from trackstride.rectify import WorldModel

_INPUT_KINDS = ("grayscale", "edges")

T = TypeVar("T")


@dataclass(frozen=True)
class ImagingConfig:
    input_kind: str = "grayscale"
    sigma: float = 1.4
    canny_low: float = 20.0
    canny_high: float = 60.0
    roi: RoiPolygon | None = None

    def __post_init__(self) -> None:
        if self.input_kind not in _INPUT_KINDS:
            raise ConfigError(f"imaging.input must be one of {_INPUT_KINDS}, got {self.input_kind!r}")
        if self.sigma < 0:
            raise ConfigError(f"imaging.sigma must be >= 0, got {self.sigma}")
        if not 0 < self.canny_low < self.canny_high:
            raise ConfigError(
                f"canny thresholds need 0 < low < high, got {self.canny_low}/{self.canny_high}"
            )


@dataclass(frozen=True)
class LinesConfig:
    horizontal_tolerance: float = 10.0
    vertical_min_angle: float = 2.0
    vertical_band: float = 45.0
    join_threshold: float | None = None

    def __post_init__(self) -> None:
        if self.horizontal_tolerance <= 0 or self.vertical_band <= 0:
            raise ConfigError("lines tolerances must be positive")
        if self.join_threshold is not None and self.join_threshold <= 0:
            raise ConfigError(f"lines.join_threshold must be positive, got {self.join_threshold}")


@dataclass(frozen=True)
class GaitConfig:
    stationarity_px: float = 1.0
    min_confidence: float = 0.3
    reference_y: float | None = None
    athlete_id: str = "unknown"

    def __post_init__(self) -> None:
        if self.stationarity_px <= 0:
            raise ConfigError(f"gait.stationarity_px must be positive, got {self.stationarity_px}")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ConfigError(f"gait.min_confidence must be in [0, 1], got {self.min_confidence}")


@dataclass(frozen=True)
class IoConfig:
    frames_dir: Path | None = None
    keypoints_file: Path | None = None
    out_dir: Path | None = None
    homography: Path | None = None


@dataclass(frozen=True)
class RunConfig:
    imaging: ImagingConfig = field(default_factory=ImagingConfig)
    hough: PhtParams = field(default_factory=PhtParams)
    lines: LinesConfig = field(default_factory=LinesConfig)
    world: WorldModel = field(default_factory=WorldModel)
    gait: GaitConfig = field(default_factory=GaitConfig)
    io: IoConfig = field(default_factory=IoConfig)


def _parse_roi(raw: str) -> RoiPolygon:
    vertices = []
    for token in raw.split():
        parts = token.split(",")
        if len(parts) != 2:
            raise ConfigError(f"imaging.roi vertices look like 'x,y', got {token!r}")
        vertices.append((float(parts[0]), float(parts[1])))
    return RoiPolygon(vertices)


def _parse_spacing(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


class _Section:
    """One parsed section with typed lookups and leftover-key detection.

    err picks the exception class so fixture specs can report SpecError
    while run configs report ConfigError.
    """

    def __init__(self, name: str, pairs: dict[str, str], err: type[ConfigError] = ConfigError):
        self.name = name
        self.pairs = dict(pairs)
        self.err = err

    def take(self, key: str, cast: Callable[[str], T], default: T) -> T:
        if key not in self.pairs:
            return default
        raw = self.pairs.pop(key)
        try:
            return cast(raw)
        except ConfigError:
            raise
        except ValueError as exc:
            raise self.err(f"{self.name}.{key}: cannot parse {raw!r} ({exc})") from exc

    def finish(self) -> None:
        if self.pairs:
            unknown = ", ".join(sorted(self.pairs))
            raise self.err(f"unknown key(s) in [{self.name}]: {unknown}")


def parse_config(text: str, base: Path | None = None) -> RunConfig:
    """Parse configuration text; every value falls back to its default.

    Relative paths in [io] are anchored at base, so a config travels
    with the fixture directory it describes.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    known = {"imaging", "hough", "lines", "world", "gait", "io"}
    sections = {}
    for name in parser.sections():
        if name not in known:
            raise ConfigError(f"unknown section [{name}]")
        sections[name] = _Section(name, dict(parser.items(name)))

    def section(name: str) -> _Section:
        return sections.get(name, _Section(name, {}))

    try:
        img = section("imaging")
        imaging = ImagingConfig(
            input_kind=img.take("input", str, "grayscale"),
            sigma=img.take("sigma", float, 1.4),
            canny_low=img.take("canny_low", float, 20.0),
            canny_high=img.take("canny_high", float, 60.0),
            roi=img.take("roi", _parse_roi, None),
        )
        hg = section("hough")
        hough = PhtParams(
            rho_resolution=hg.take("rho_resolution", float, 1.0),
            theta_resolution_deg=hg.take("theta_resolution_deg", float, 1.0),
            vote_threshold=hg.take("vote_threshold", int, 30),
            min_line_length=hg.take("min_line_length", float, 40.0),
            max_line_gap=hg.take("max_line_gap", int, 10),
            seed=hg.take("seed", int, 0),
        )
        ln = section("lines")
        lines = LinesConfig(
            horizontal_tolerance=ln.take("horizontal_tolerance", float, 10.0),
            vertical_min_angle=ln.take("vertical_min_angle", float, 2.0),
            vertical_band=ln.take("vertical_band", float, 45.0),
            join_threshold=ln.take("join_threshold", float, None),
        )
        wd = section("world")
        world = WorldModel(
            lane_width_m=wd.take("lane_width_m", float, 1.22),
            horizontal_spacing_m=wd.take("spacing_m", _parse_spacing, (0.0, 5.0, 10.0, 15.0, 20.0)),
        )
        gt = section("gait")
        gait = GaitConfig(
            stationarity_px=gt.take("stationarity_px", float, 1.0),
            min_confidence=gt.take("min_confidence", float, 0.3),
            reference_y=gt.take("reference_y", float, None),
            athlete_id=gt.take("athlete_id", str, "unknown"),
        )
        def path_at(raw: str) -> Path:
            p = Path(raw)
            return base / p if base is not None and not p.is_absolute() else p

        io_sec = section("io")
        io = IoConfig(
            frames_dir=io_sec.take("frames_dir", path_at, None),
            keypoints_file=io_sec.take("keypoints_file", path_at, None),
            out_dir=io_sec.take("out_dir", path_at, None),
            homography=io_sec.take("homography", path_at, None),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        # bounds enforced by the owning parameter types
        raise ConfigError(str(exc)) from exc

    for sec in sections.values():
        sec.finish()
    return RunConfig(imaging=imaging, hough=hough, lines=lines, world=world, gait=gait, io=io)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), base=path.parent)
