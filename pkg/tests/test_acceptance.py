"""Acceptance gate: one test and one printed verdict line per criterion.

Every criterion runs on synthetic fixtures with pinned seeds and pinned
tolerances; nothing here depends on external data or the secondary
package.
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import homography_from_quad
from trackstride.cli import main
from trackstride.gait import Joint, KeypointFrame, Stride, StrideReport, detect_contacts, summarize
from trackstride.geometry import PixelPoint, Segment, WorldPoint
from trackstride.hough import PhtParams, probabilistic_hough
from trackstride.lines import AreaConfig, classify, group_horizontals, select_verticals, vanishing_point
from trackstride.pipeline import PipelineError
from trackstride.rectify import Homography, dlt_homography, median_homography
from trackstride.synthetic import SceneSpec, TraceSpec, generate_trace, render_scene

N_SCENES = 100
ENDPOINT_TOL_PX = 2.0
VP_TOL_PX = 5.0
STRUCTURE_BUDGET = 5  # scenes out of 100 allowed to miss the 5H+2V structure
SPAN_FLOOR = 0.95


# ---------------------------------------------------------------------------
# detection sweep shared by the line-accuracy and vanishing-point criteria


def point_to_segment_px(p: PixelPoint, seg: Segment) -> float:
    ax, ay, bx, by = seg.p1.x, seg.p1.y, seg.p2.x, seg.p2.y
    dx, dy = bx - ax, by - ay
    t = ((p.x - ax) * dx + (p.y - ay) * dy) / (dx * dx + dy * dy)
    t = min(1.0, max(0.0, t))
    return math.hypot(p.x - (ax + t * dx), p.y - (ay + t * dy))


def match_error_px(detected: Segment, truth: Segment) -> float:
    """Worst distance from a detected endpoint to the true segment."""
    return max(point_to_segment_px(detected.p1, truth), point_to_segment_px(detected.p2, truth))


def span_fraction(detected: Segment, truth: Segment) -> float:
    """Fraction of the true segment length the detection spans."""
    ax, ay = truth.p1.x, truth.p1.y
    dx, dy = truth.p2.x - ax, truth.p2.y - ay
    length_sq = dx * dx + dy * dy
    ts = sorted(
        min(1.0, max(0.0, ((q.x - ax) * dx + (q.y - ay) * dy) / length_sq))
        for q in (detected.p1, detected.p2)
    )
    return ts[1] - ts[0]


@pytest.fixture(scope="module")
def detection_sweep():
    """Detect lines on 100 scenes covering the full noise grid.

    Seeds stratify dropout over {0, .05, .1, .15, .2} and jitter over
    {0, .25, .5, .75, 1}, so all 25 noise combinations appear four times.
    """
    scenes = []
    t0 = time.perf_counter()
    for seed in range(N_SCENES):
        spec = SceneSpec(
            dropout_prob=(seed % 5) * 0.05,
            jitter_px=((seed // 5) % 5) * 0.25,
            seed=seed,
        )
        scene = render_scene(spec)
        segments = probabilistic_hough(scene.edges, PhtParams(seed=seed))
        grouped = classify(segments)
        areas = AreaConfig.for_image(spec.width, spec.height)
        horizontals = group_horizontals(grouped.horizontal, areas)

        structure_ok = len(horizontals) == 5
        vp_err = math.inf
        try:
            left, right = select_verticals(grouped.vertical)
            vp = vanishing_point(left, right)
            vp_err = vp.distance_to(scene.truth.vanishing_point)
        except PipelineError:
            structure_ok = False

        truths = scene.truth.lines.horizontals + (
            scene.truth.lines.vertical_left,
            scene.truth.lines.vertical_right,
        )
        worst_err = 0.0
        worst_span = 1.0
        for truth_seg in truths:
            best = min(segments, key=lambda s: match_error_px(s, truth_seg), default=None)
            if best is None:
                worst_err = math.inf
                worst_span = 0.0
                break
            worst_err = max(worst_err, match_error_px(best, truth_seg))
            worst_span = min(worst_span, span_fraction(best, truth_seg))
        scenes.append(
            {
                "seed": seed,
                "structure_ok": structure_ok,
                "vp_err": vp_err,
                "worst_err": worst_err,
                "worst_span": worst_span,
            }
        )
    return scenes, time.perf_counter() - t0


# ---------------------------------------------------------------------------
# criteria


def random_truth_homography(rng) -> Homography:
    """Random non-degenerate image-to-world map via a perturbed trapezoid."""
    world = [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0)]
    image = [
        (100.0 + rng.uniform(-40, 40), 650.0 + rng.uniform(-40, 40)),
        (1100.0 + rng.uniform(-40, 40), 650.0 + rng.uniform(-40, 40)),
        (300.0 + rng.uniform(-40, 40), 150.0 + rng.uniform(-40, 40)),
        (900.0 + rng.uniform(-40, 40), 150.0 + rng.uniform(-40, 40)),
    ]
    return Homography(np.linalg.inv(homography_from_quad(world, image)))


def project(matrix: np.ndarray, points: np.ndarray) -> np.ndarray:
    h = matrix @ np.column_stack([points, np.ones(len(points))]).T
    return (h[:2] / h[2]).T


def test_homography_round_trip(acceptance):
    rng = np.random.default_rng(4242)
    worst = 0.0
    for _ in range(1000):
        truth = random_truth_homography(rng)
        w2i = np.linalg.inv(truth.matrix)
        # four fit points spread over the quadrants, never collinear
        fit_world = np.array(
            [
                [rng.uniform(0.5, 4.0), rng.uniform(0.5, 4.0)],
                [rng.uniform(6.0, 9.5), rng.uniform(0.5, 4.0)],
                [rng.uniform(0.5, 4.0), rng.uniform(6.0, 9.5)],
                [rng.uniform(6.0, 9.5), rng.uniform(6.0, 9.5)],
            ]
        )
        fit_image = project(w2i, fit_world)
        refit = dlt_homography(
            [
                (PixelPoint(float(ix), float(iy)), WorldPoint(float(wx), float(wy)))
                for (ix, iy), (wx, wy) in zip(fit_image, fit_world)
            ]
        )
        held_world = rng.uniform(0.0, 10.0, size=(100, 2))
        held_image = project(w2i, held_world)
        err = np.hypot(*(project(refit.matrix, held_image) - held_world).T).max()
        worst = max(worst, float(err))
    acceptance(
        "homography round-trip",
        worst < 1e-6,
        f"worst reprojection over 1000 fits x 100 held-out points = {worst:.2e} (< 1e-6)",
    )


def test_median_robustness(acceptance):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        truth = random_truth_homography(rng)
        pool = [Homography(truth.matrix.copy()) for _ in range(6)]
        for _ in range(4):
            m = truth.matrix.copy()
            mask = rng.random((3, 3)) < 0.5
            mask[0, 0] |= not mask.any()
            m[mask] *= 10.0
            pool.append(Homography(m))
        order = rng.permutation(len(pool))
        got = median_homography([pool[i] for i in order])
        worst = max(worst, float(np.abs(got.matrix - truth.matrix).max()))
    acceptance(
        "median robustness",
        worst < 1e-6,
        f"60% exact / 40% x10-corrupted, worst entry error = {worst:.2e} (< 1e-6)",
    )


def test_line_detection_accuracy(acceptance, detection_sweep):
    scenes, elapsed = detection_sweep
    bad = [
        s
        for s in scenes
        if not (s["structure_ok"] and s["worst_err"] <= ENDPOINT_TOL_PX and s["worst_span"] >= SPAN_FLOOR)
    ]
    finite = [s["worst_err"] for s in scenes if math.isfinite(s["worst_err"])]
    ok = len(bad) <= STRUCTURE_BUDGET and elapsed < 60.0
    acceptance(
        "line detection accuracy",
        ok,
        f"{N_SCENES - len(bad)}/{N_SCENES} scenes matched all 7 lines within "
        f"{ENDPOINT_TOL_PX} px with the 5+2 structure (worst endpoint error "
        f"{max(finite):.2f} px, {elapsed:.1f}s)",
    )


def test_vanishing_point_accuracy(acceptance, detection_sweep):
    scenes, _ = detection_sweep
    worst = max(s["vp_err"] for s in scenes)
    acceptance(
        "vanishing point",
        worst <= VP_TOL_PX,
        f"worst error over {N_SCENES} scenes = {worst:.2f} px (<= {VP_TOL_PX} px)",
    )


STRIDE_SPEC = """\
[scene]
seed = 21
frames = 3
dropout = {dropout}
jitter = {jitter}

[trace]
contact_frames = 0 14 28 42 56 70
stride_m = 1.8
fps = 30.0
"""


def run_stride_pipeline(tmp_path, name: str, dropout: float, jitter: float) -> float:
    root = tmp_path / name
    spec = tmp_path / f"{name}.ini"
    spec.write_text(STRIDE_SPEC.format(dropout=dropout, jitter=jitter))
    assert main(["synth", str(spec), "--out", str(root)]) == 0
    assert main(["strides", str(root / "run.ini"), "--out", str(root / "res")]) == 0
    doc = json.loads((root / "res" / "strides.json").read_text())
    return doc["average_length_m"]


def test_end_to_end_stride(acceptance, tmp_path):
    t0 = time.perf_counter()
    clean = run_stride_pipeline(tmp_path, "clean", 0.0, 0.0)
    noisy = run_stride_pipeline(tmp_path, "noisy", 0.2, 1.0)
    elapsed = time.perf_counter() - t0
    ok = abs(clean - 1.80) <= 0.02 and abs(noisy - 1.80) <= 0.05 and elapsed < 60.0
    acceptance(
        "end-to-end stride",
        ok,
        f"planted 1.80 m recovered as {clean:.4f} m noiseless (tol 0.02) and "
        f"{noisy:.4f} m at dropout 0.2 / jitter 1 px (tol 0.05), {elapsed:.1f}s",
    )


@pytest.fixture
def planted_traces():
    world, image = _stride_quad()
    w2i = Homography(homography_from_quad(world, image))
    specs = [
        TraceSpec(w2i, (0, 14, 28, 42, 56, 70)),
        TraceSpec(w2i, (3, 20, 37, 54), hold_frames=3, first_foot="right", fps=25.0),
        TraceSpec(w2i, (5, 12, 19, 26, 33), stride_m=1.2, hold_frames=2),
    ]
    return [generate_trace(s) for s in specs]


def _stride_quad():
    world = [(0.0, 0.0), (10.0, 0.0), (0.0, 4.88), (10.0, 4.88)]
    image = [(140.0, 660.0), (1150.0, 660.0), (306.0, 240.0), (955.0, 240.0)]
    return world, image


def test_contact_detection_exactness(acceptance, planted_traces):
    rng = np.random.default_rng(99)
    all_ok = True
    details = []
    for trace in planted_traces:
        jittered = [
            KeypointFrame(
                f.frame_index,
                f.timestamp_s,
                {
                    name: Joint(
                        PixelPoint(
                            j.position.x + rng.uniform(-0.3, 0.3),
                            j.position.y + rng.uniform(-0.3, 0.3),
                        ),
                        j.confidence,
                    )
                    for name, j in f.joints.items()
                },
            )
            for f in trace.stream.frames
        ]
        events = detect_contacts(jittered, 1.0, 0.3)
        planted = [(c.frame_index, c.foot) for c in trace.contacts]
        got = [(e.frame_index, e.foot) for e in events]
        all_ok &= got == planted
        details.append(f"{len(events)}/{len(planted)}")
    acceptance(
        "contact detection exactness",
        all_ok,
        f"planted touchdown sets recovered exactly under sub-threshold jitter ({', '.join(details)})",
    )


def test_summarize_reproduction(acceptance):
    def report(source: str, mean: float) -> StrideReport:
        strides = tuple(
            Stride(14 * i, 14 * (i + 1), "left", "right", mean, 14 / 30.0) for i in range(8)
        )
        return StrideReport("a01", source, strides)

    table = summarize([report("video", 1.66), report("watch", 1.76)])
    row = table.cross_source[0]
    diff = f"{row.diff_m:+.2f}"
    pct = f"{row.diff_pct:.2f}"
    ok = diff == "+0.10" and pct == "6.02"
    acceptance(
        "summarize reproduction",
        ok,
        f"means 1.66/1.76 m give difference {diff} m ({pct}%), expected +0.10 m (6.02%)",
    )


def test_determinism(acceptance, tmp_path):
    spec = tmp_path / "spec.ini"
    spec.write_text(STRIDE_SPEC.format(dropout=0.1, jitter=0.5))
    outputs = []
    for run in ("one", "two"):
        root = tmp_path / run
        assert main(["synth", str(spec), "--out", str(root)]) == 0
        assert main(["rectify", str(root / "run.ini"), "--out", str(root / "rect")]) == 0
        assert main(["strides", str(root / "run.ini"), "--out", str(root / "res")]) == 0
        assert (
            main(
                ["summarize", str(root / "res" / "strides.json"), "--csv", str(root / "sum.csv")]
            )
            == 0
        )
        outputs.append(
            {
                rel: (root / rel).read_bytes()
                for rel in (
                    "truth.json",
                    "keypoints.json",
                    "frames/frame_0001.pgm",
                    "rect/homography.txt",
                    "rect/diagnostics.csv",
                    "res/strides.csv",
                    "res/strides.json",
                    "sum.csv",
                )
            }
        )
    same = {rel for rel in outputs[0] if outputs[0][rel] == outputs[1][rel]}
    ok = len(same) == len(outputs[0])
    acceptance(
        "determinism",
        ok,
        f"{len(same)}/{len(outputs[0])} artifacts byte-identical across two seeded runs",
    )
