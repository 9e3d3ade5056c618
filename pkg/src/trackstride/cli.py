"""Command-line entry points: rectify, strides, synth, summarize.

Exit codes are a stable scripting contract: 0 success, 2 bad
configuration or input schema, 3 pipeline failure, 4 I/O failure.
All floats are written with repr precision and every random draw is
seeded, so re-running a command reproduces its outputs byte for byte.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from trackstride.config import ImagingConfig, RunConfig, _Section, _parse_spacing, load_config
from trackstride.errors import ConfigError, NoFrames, PipelineError, SchemaError, SpecError
from trackstride.gait import (
    ContactEvent,
    KeypointStream,
    Stride,
    StrideReport,
    SummaryTable,
    compute_strides,
    detect_contacts,
    keypoints_to_doc,
    load_keypoints,
    stabilize_contacts,
    summarize,
)
from trackstride.geometry import PixelPoint, Segment
from trackstride.imaging import read_pgm, to_grayscale, write_pgm
from trackstride.lines import AreaConfig
from trackstride.pipeline import (
    FrameResult,
    analyze_frame,
    edges_from_gray,
    pooled_homography,
    reference_row,
)
from trackstride.rectify import Homography
from trackstride.synthetic import SceneSpec, TraceSpec, generate_trace, render_scene

_FRAME_SUFFIXES = (".pgm", ".png")


# ---------------------------------------------------------------------------
# artifact I/O


def _write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _write_homography(path: Path, h: Homography) -> None:
    rows = "\n".join(" ".join(repr(float(v)) for v in row) for row in h.matrix)
    _write_text(path, rows + "\n")


def _read_homography(path: Path) -> Homography:
    values = [float(tok) for tok in path.read_text(encoding="utf-8").split()]
    if len(values) != 9:
        raise ConfigError(f"{path}: expected 9 numbers, got {len(values)}")
    return Homography(np.array(values, dtype=np.float64).reshape(3, 3))


def _read_floats(path: Path, n: int) -> list[float] | None:
    """Optional sidecar artifact: absent file means absent value."""
    if not path.exists():
        return None
    values = [float(tok) for tok in path.read_text(encoding="utf-8").split()]
    if len(values) != n:
        raise ConfigError(f"{path}: expected {n} numbers, got {len(values)}")
    return values


def _write_json(path: Path, doc: dict) -> None:
    _write_text(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _load_frame(path: Path, imaging: ImagingConfig) -> np.ndarray:
    """Read one frame file and reduce it to a boolean edge map."""
    if path.suffix.lower() == ".pgm":
        try:
            img = read_pgm(path)
        except ValueError as exc:
            raise SchemaError(str(exc)) from exc
    else:
        with Image.open(path) as im:
            if im.mode == "L":
                img = np.asarray(im)
            else:
                img = to_grayscale(np.asarray(im.convert("RGB")))
    if imaging.input_kind == "edges":
        return img > 127
    return edges_from_gray(img, imaging.sigma, imaging.canny_low, imaging.canny_high, imaging.roi)


def _frame_files(frames_dir: Path) -> list[Path]:
    files = sorted(p for p in frames_dir.iterdir() if p.suffix.lower() in _FRAME_SUFFIXES)
    if not files:
        raise NoFrames(f"no {' or '.join(_FRAME_SUFFIXES)} frames in {frames_dir}")
    return files


# ---------------------------------------------------------------------------
# rectify


@dataclasses.dataclass(frozen=True)
class RectifyStage:
    """Everything the rectify pass learns about a frame directory."""

    results: tuple[FrameResult, ...]
    homography: Homography
    vanishing_point: PixelPoint | None
    reference_y: float | None


def _run_rectify_stage(cfg: RunConfig) -> RectifyStage:
    if cfg.io.frames_dir is None:
        raise ConfigError("io.frames_dir is required")
    files = _frame_files(cfg.io.frames_dir)
    results: list[FrameResult] = []
    areas: AreaConfig | None = None
    size: tuple[int, int] | None = None
    for path in files:
        edges = _load_frame(path, cfg.imaging)
        if size is None:
            # The first frame fixes the geometry for the whole run.
            size = edges.shape
            areas = AreaConfig.for_image(size[1], size[0])
            if cfg.lines.join_threshold is not None:
                areas = dataclasses.replace(areas, join_threshold=cfg.lines.join_threshold)
        elif edges.shape != size:
            raise ConfigError(
                f"frame {path.name} is {edges.shape[1]}x{edges.shape[0]}, "
                f"expected {size[1]}x{size[0]}"
            )
        results.append(
            analyze_frame(
                edges,
                cfg.world,
                cfg.hough,
                areas,
                frame_id=path.stem,
                horizontal_tolerance=cfg.lines.horizontal_tolerance,
                vertical_min_angle=cfg.lines.vertical_min_angle,
                vertical_band=cfg.lines.vertical_band,
            )
        )
    homography = pooled_homography(results)
    ok = [r for r in results if r.ok]
    vp = None
    ref = None
    if ok:
        vp = PixelPoint(
            float(np.median([r.vanishing_point.x for r in ok])),
            float(np.median([r.vanishing_point.y for r in ok])),
        )
        ref = float(np.median([reference_row(r.lines) for r in ok]))
    return RectifyStage(tuple(results), homography, vp, ref)


def _write_diagnostics(path: Path, results: tuple[FrameResult, ...]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["frame_id", "n_segments", "n_horizontals", "vp_x", "vp_y", "n_pairs", "skip_reason"]
        )
        for r in results:
            vp_x = repr(float(r.vanishing_point.x)) if r.vanishing_point else ""
            vp_y = repr(float(r.vanishing_point.y)) if r.vanishing_point else ""
            writer.writerow(
                [r.frame_id, r.n_segments, r.n_horizontals, vp_x, vp_y,
                 len(r.homographies), r.skip_reason or ""]
            )


def _resolve_out(args: argparse.Namespace, cfg: RunConfig) -> Path:
    out = Path(args.out) if args.out else cfg.io.out_dir
    if out is None:
        raise ConfigError("io.out_dir or --out is required")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_rectify(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    stage = _run_rectify_stage(cfg)
    out = _resolve_out(args, cfg)
    _write_homography(out / "homography.txt", stage.homography)
    if stage.vanishing_point is not None:
        _write_text(
            out / "vanishing_point.txt",
            f"{stage.vanishing_point.x!r} {stage.vanishing_point.y!r}\n",
        )
    if stage.reference_y is not None:
        _write_text(out / "reference_y.txt", f"{stage.reference_y!r}\n")
    _write_diagnostics(out / "diagnostics.csv", stage.results)
    n_ok = sum(1 for r in stage.results if r.ok)
    print(f"homography from {n_ok}/{len(stage.results)} frames -> {out / 'homography.txt'}")
    return 0


# ---------------------------------------------------------------------------
# strides


def _report_doc(report: StrideReport) -> dict:
    return {
        "athlete_id": report.athlete_id,
        "source_id": report.source_id,
        "average_length_m": report.average_length_m,
        "strides": [
            {
                "from_frame": s.from_frame,
                "to_frame": s.to_frame,
                "from_foot": s.from_foot,
                "to_foot": s.to_foot,
                "length_m": s.length_m,
                "duration_s": s.duration_s,
                "speed_mps": s.speed_mps,
            }
            for s in report.strides
        ],
        "warnings": list(report.warnings),
    }


def _write_strides_csv(path: Path, report: StrideReport) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["athlete", "source", "stride", "from_frame", "to_frame", "from_foot",
             "to_foot", "length_m", "duration_s", "speed_mps"]
        )
        for i, s in enumerate(report.strides):
            writer.writerow(
                [report.athlete_id, report.source_id, i, s.from_frame, s.to_frame,
                 s.from_foot, s.to_foot, repr(s.length_m), repr(s.duration_s), repr(s.speed_mps)]
            )


def _draw_cross(rgb: np.ndarray, point: PixelPoint, color: tuple[int, int, int], radius: int = 4) -> None:
    h, w = rgb.shape[:2]
    cx, cy = int(round(point.x)), int(round(point.y))
    for d in range(-radius, radius + 1):
        if 0 <= cy < h and 0 <= cx + d < w:
            rgb[cy, cx + d] = color
        if 0 <= cy + d < h and 0 <= cx < w:
            rgb[cy + d, cx] = color


def _write_overlays(
    out: Path,
    files: list[Path],
    stream: KeypointStream,
    contacts: list[ContactEvent],
    imaging: ImagingConfig,
) -> int:
    """One PNG per contact: every toe keypoint yellow, the contact red."""
    by_frame: dict[int, list[ContactEvent]] = {}
    for c in contacts:
        by_frame.setdefault(c.frame_index, []).append(c)
    frames = {f.frame_index: f for f in stream.frames}
    written = 0
    out.mkdir(parents=True, exist_ok=True)
    for idx in sorted(by_frame):
        if idx >= len(files):
            continue
        if files[idx].suffix.lower() == ".pgm":
            gray = read_pgm(files[idx])
        else:
            with Image.open(files[idx]) as im:
                gray = np.asarray(im.convert("L"))
        rgb = np.repeat(gray[:, :, None], 3, axis=2).copy()
        kp = frames.get(idx)
        if kp is not None:
            for joint in kp.joints.values():
                _draw_cross(rgb, joint.position, (255, 255, 0))
        for c in by_frame[idx]:
            _draw_cross(rgb, c.raw_pixel, (255, 0, 0))
        Image.fromarray(rgb, mode="RGB").save(out / f"contact_{idx:04d}.png")
        written += 1
    return written


def cmd_strides(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if cfg.io.keypoints_file is None:
        raise ConfigError("io.keypoints_file is required")
    stream = load_keypoints(cfg.io.keypoints_file)

    files: list[Path] | None = None
    if cfg.io.homography is not None:
        homography = _read_homography(cfg.io.homography)
        vp_values = _read_floats(cfg.io.homography.parent / "vanishing_point.txt", 2)
        vp = PixelPoint(*vp_values) if vp_values else None
        ref_values = _read_floats(cfg.io.homography.parent / "reference_y.txt", 1)
        ref = ref_values[0] if ref_values else None
    elif cfg.io.frames_dir is not None:
        stage = _run_rectify_stage(cfg)
        homography, vp, ref = stage.homography, stage.vanishing_point, stage.reference_y
        files = _frame_files(cfg.io.frames_dir)
    else:
        raise ConfigError("io.homography or io.frames_dir is required")
    if cfg.gait.reference_y is not None:
        ref = cfg.gait.reference_y

    contacts = detect_contacts(stream.frames, cfg.gait.stationarity_px, cfg.gait.min_confidence)
    stabilized = stabilize_contacts(contacts, vp, ref)
    report = compute_strides(
        stabilized, homography, stream.fps,
        athlete_id=cfg.gait.athlete_id, source_id=stream.source_id,
    )

    out = _resolve_out(args, cfg)
    _write_strides_csv(out / "strides.csv", report)
    _write_json(out / "strides.json", _report_doc(report))
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if files is not None:
        _write_overlays(out / "overlays", files, stream, stabilized, cfg.imaging)
    avg = report.average_length_m
    print(
        f"{len(report.strides)} strides, average "
        f"{'n/a' if avg is None else f'{avg:.3f} m'} -> {out / 'strides.csv'}"
    )
    return 0


# ---------------------------------------------------------------------------
# synth


def _segment_doc(seg: Segment) -> list[float]:
    return [seg.p1.x, seg.p1.y, seg.p2.x, seg.p2.y]


def _parse_synth_spec(text: str) -> tuple[SceneSpec, int, dict | None]:
    """Parse a fixture spec into (scene, frame count, trace kwargs)."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise SpecError(f"malformed spec: {exc}") from exc
    known = {"scene", "trace"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise SpecError(f"unknown section(s): {', '.join(sorted(unknown))}")

    sc = _Section("scene", dict(parser.items("scene")) if parser.has_section("scene") else {}, SpecError)
    try:
        scene = SceneSpec(
            width=sc.take("width", int, 1280),
            height=sc.take("height", int, 720),
            lane_span_m=sc.take("lane_span_m", float, 10.0),
            n_rows=sc.take("n_rows", int, 5),
            dropout_prob=sc.take("dropout", float, 0.0),
            jitter_px=sc.take("jitter", float, 0.0),
            clutter_segments=sc.take("clutter", int, 0),
            seed=sc.take("seed", int, 0),
        )
    except SpecError:
        raise
    except ValueError as exc:
        raise SpecError(str(exc)) from exc
    n_frames = sc.take("frames", int, 1)
    if n_frames < 1:
        raise SpecError(f"scene.frames must be at least 1, got {n_frames}")
    sc.finish()

    trace_kwargs = None
    if parser.has_section("trace"):
        tr = _Section("trace", dict(parser.items("trace")), SpecError)
        contact_frames = tr.take("contact_frames", lambda raw: tuple(int(t) for t in raw.replace(",", " ").split()), None)
        if contact_frames is None:
            raise SpecError("trace.contact_frames is required")
        trace_kwargs = {
            "contact_frames": contact_frames,
            "stride_m": tr.take("stride_m", float, 1.8),
            "start_u": tr.take("start_u", float, 0.5),
            "run_v": tr.take("run_v", float, 2.44),
            "foot_offset_v": tr.take("foot_offset_v", float, 0.12),
            "first_foot": tr.take("first_foot", str, "left"),
            "fps": tr.take("fps", float, 30.0),
            "hold_frames": tr.take("hold_frames", int, 2),
            "source_id": tr.take("source_id", str, "synthetic"),
        }
        tr.finish()
    return scene, n_frames, trace_kwargs


def cmd_synth(args: argparse.Namespace) -> int:
    text = Path(args.spec).read_text(encoding="utf-8")
    scene_spec, n_frames, trace_kwargs = _parse_synth_spec(text)
    out = Path(args.out)
    frames_dir = out / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)

    truth = None
    for i in range(n_frames):
        # One noise stream per frame, derived from the scene seed so the
        # geometry stays fixed while dropout and jitter re-draw.
        spec_i = dataclasses.replace(scene_spec, noise_seed=scene_spec.seed * 100003 + i)
        rendered = render_scene(spec_i)
        truth = rendered.truth
        write_pgm(frames_dir / f"frame_{i:04d}.pgm", np.where(rendered.edges, 255, 0).astype(np.uint8))

    doc = {
        "image_size": [scene_spec.width, scene_spec.height],
        "seed": scene_spec.seed,
        "n_frames": n_frames,
        "image_to_world": [[float(v) for v in row] for row in truth.image_to_world.matrix],
        "world_to_image": [[float(v) for v in row] for row in truth.world_to_image.matrix],
        "vanishing_point": [truth.vanishing_point.x, truth.vanishing_point.y],
        "reference_y": truth.reference_y,
        "world": {
            "lane_width_m": truth.world.lane_width_m,
            "spacing_m": list(truth.world.horizontal_spacing_m),
        },
        "lines": {
            "horizontals": [_segment_doc(s) for s in truth.lines.horizontals],
            "vertical_left": _segment_doc(truth.lines.vertical_left),
            "vertical_right": _segment_doc(truth.lines.vertical_right),
        },
    }

    config_lines = [
        "[imaging]",
        "input = edges",
        "",
        "[world]",
        f"lane_width_m = {truth.world.lane_width_m!r}",
        "spacing_m = " + ", ".join(repr(v) for v in truth.world.horizontal_spacing_m),
        "",
        "[io]",
        "frames_dir = frames",
        "out_dir = results",
    ]

    if trace_kwargs is not None:
        try:
            trace_spec = TraceSpec(world_to_image=truth.world_to_image, **trace_kwargs)
            trace = generate_trace(trace_spec)
        except ValueError as exc:
            raise SpecError(str(exc)) from exc
        _write_json(out / "keypoints.json", keypoints_to_doc(trace.stream))
        doc["contacts"] = [
            {
                "frame": c.frame_index,
                "foot": c.foot,
                "pixel": [c.pixel.x, c.pixel.y],
                "world": [c.world.x, c.world.y],
            }
            for c in trace.contacts
        ]
        doc["stride_m"] = trace_spec.stride_m
        doc["fps"] = trace_spec.fps
        config_lines.insert(len(config_lines) - 1, "keypoints_file = keypoints.json")

    _write_json(out / "truth.json", doc)
    _write_text(out / "run.ini", "\n".join(config_lines) + "\n")
    print(f"{n_frames} frame(s) -> {frames_dir}")
    return 0


# ---------------------------------------------------------------------------
# summarize


def _load_report(path: Path) -> StrideReport:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        strides = tuple(
            Stride(
                from_frame=int(s["from_frame"]),
                to_frame=int(s["to_frame"]),
                from_foot=str(s["from_foot"]),
                to_foot=str(s["to_foot"]),
                length_m=float(s["length_m"]),
                duration_s=float(s["duration_s"]),
            )
            for s in doc["strides"]
        )
        return StrideReport(
            athlete_id=str(doc["athlete_id"]),
            source_id=str(doc["source_id"]),
            strides=strides,
            warnings=tuple(str(w) for w in doc.get("warnings", [])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: not a stride report ({exc})") from exc


def _format_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    lines = []
    for row in [header] + rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def _print_summary(table: SummaryTable) -> None:
    if not table.rows:
        print("no strides")
        return
    rows = [
        [r.athlete_id, r.source_id, str(r.n_strides),
         f"{r.mean_m:.2f}", f"{r.std_m:.2f}", f"{r.min_m:.2f}", f"{r.max_m:.2f}"]
        for r in table.rows
    ]
    print(_format_table(["athlete", "source", "strides", "mean_m", "std_m", "min_m", "max_m"], rows))
    if table.cross_source:
        cross = [
            [c.athlete_id, c.source_a, c.source_b,
             f"{c.mean_a:.2f}", f"{c.mean_b:.2f}", f"{c.diff_m:+.2f}", f"{c.diff_pct:+.2f}%"]
            for c in table.cross_source
        ]
        print()
        print(_format_table(
            ["athlete", "source_a", "source_b", "mean_a", "mean_b", "diff_m", "diff_pct"], cross
        ))


def _write_summary_csv(path: Path, table: SummaryTable) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["athlete", "source", "strides", "mean_m", "std_m", "min_m", "max_m"])
        for r in table.rows:
            writer.writerow(
                [r.athlete_id, r.source_id, r.n_strides,
                 repr(r.mean_m), repr(r.std_m), repr(r.min_m), repr(r.max_m)]
            )


def cmd_summarize(args: argparse.Namespace) -> int:
    reports = [_load_report(Path(p)) for p in args.reports]
    table = summarize(reports)
    _print_summary(table)
    if args.csv:
        _write_summary_csv(Path(args.csv), table)
    return 0


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="trackstride",
        description="Markerless stride-length and speed estimation from track footage.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rectify", help="fit the track-plane homography from a frame directory")
    p.add_argument("config", help="run configuration file")
    p.add_argument("--out", help="output directory (overrides io.out_dir)")
    p.set_defaults(func=cmd_rectify)

    p = sub.add_parser("strides", help="detect contacts and report per-stride lengths and speeds")
    p.add_argument("config", help="run configuration file")
    p.add_argument("--out", help="output directory (overrides io.out_dir)")
    p.set_defaults(func=cmd_strides)

    p = sub.add_parser("synth", help="generate a synthetic scene/trace fixture directory")
    p.add_argument("spec", help="fixture spec file")
    p.add_argument("--out", required=True, help="fixture output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("summarize", help="aggregate stride reports per athlete and source")
    p.add_argument("reports", nargs="+", help="strides.json files")
    p.add_argument("--csv", help="also write the per-group table as CSV")
    p.set_defaults(func=cmd_summarize)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
