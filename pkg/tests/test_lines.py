from __future__ import annotations

import math
import random

import numpy as np
import pytest

from trackstride.errors import InsufficientVerticals, NoVanishingPoint
from trackstride.geometry import PixelPoint, Segment, line_through
from trackstride.lines import (
    AreaConfig,
    TrackLines,
    classify,
    group_horizontals,
    select_verticals,
    vanishing_point,
)


def seg(x1, y1, x2, y2):
    return Segment(PixelPoint(x1, y1), PixelPoint(x2, y2))


def seg_at_angle(cx, cy, angle_deg, length):
    dx = math.cos(math.radians(angle_deg)) * length / 2
    dy = math.sin(math.radians(angle_deg)) * length / 2
    return seg(cx - dx, cy - dy, cx + dx, cy + dy)


def test_classify_frozen_cases():
    horizontal = seg_at_angle(100, 100, 3, 80)
    vertical = seg_at_angle(100, 100, 88, 80)
    oblique = seg_at_angle(100, 100, 30, 80)
    result = classify([horizontal, vertical, oblique])
    assert result.horizontal == (horizontal,)
    assert result.vertical == (vertical,)
    assert result.rejected == (oblique,)


def test_classify_tolerance_boundary():
    at_ten = seg_at_angle(0, 0, 10, 50)
    past_ten = seg_at_angle(0, 0, 11, 50)
    result = classify([at_ten, past_ten])
    assert result.horizontal == (at_ten,)
    assert result.rejected == (past_ten,)  # 11 degrees: neither flat nor steep


def test_classify_is_a_partition():
    rng = random.Random(21)
    segments = [
        seg_at_angle(rng.uniform(0, 500), rng.uniform(0, 500), rng.uniform(-89, 90), 60)
        for _ in range(100)
    ]
    result = classify(segments)
    assert len(result.horizontal) + len(result.vertical) + len(result.rejected) == 100
    claimed = set(map(id, result.horizontal + result.vertical + result.rejected))
    assert claimed == set(map(id, segments))


def test_classify_base_angle_excludes_near_base_steep_lines():
    # With no horizontals the base angle falls back to 0; a steep line
    # within the minimum angle of the base is rejected, not vertical.
    near_vertical = seg_at_angle(0, 0, 89.5, 50)  # 0.5 deg from vertical axis
    result = classify([near_vertical], vertical_min_angle=2.0)
    # angle_between(89.5, 0) = 89.5 > 2: still vertical.
    assert result.vertical == (near_vertical,)
    # A line within 2 degrees of the base angle is excluded even if steep.
    base_setters = [seg_at_angle(0, 0, 0, 50)]
    candidate = seg_at_angle(0, 0, 1.5, 50)
    out = classify(base_setters + [candidate], horizontal_tolerance=1.0, vertical_band=89.5)
    assert candidate in out.rejected


def test_area_config_validation():
    with pytest.raises(ValueError):
        AreaConfig(boundaries=(200, 100))
    with pytest.raises(ValueError):
        AreaConfig(boundaries=(100, 200), merge_thresholds=(25, 8, 15))
    with pytest.raises(ValueError):
        AreaConfig(boundaries=(100, 200), merge_thresholds=(25, 15, -8))
    with pytest.raises(ValueError):
        AreaConfig(boundaries=(100, 200), join_threshold=0)


def test_area_config_scales_with_height():
    full = AreaConfig.for_image(1280, 720)
    half = AreaConfig.for_image(640, 360)
    assert full.merge_thresholds == (25.0, 15.0, 8.0)
    assert half.merge_thresholds == (12.5, 7.5, 4.0)
    assert full.boundaries == pytest.approx((1280 / 3, 2560 / 3))


def test_group_single_segment_unchanged():
    areas = AreaConfig(boundaries=(100, 200))
    s = seg(110, 50, 180, 52)  # lies inside the middle strip
    out = group_horizontals([s], areas)
    assert out == [s]


def test_group_joins_collinear_fragments_across_gap():
    # Two collinear half-width fragments separated by 6 px chain into one
    # segment spanning both when the join threshold allows.
    areas = AreaConfig(boundaries=(100, 200), join_threshold=20.0)
    a = seg(10, 50, 97, 50)
    b = seg(103, 50, 290, 50)
    out = group_horizontals([a, b], areas)
    assert len(out) == 1
    assert (out[0].p1.x, out[0].p1.y) == (10, 50)
    assert (out[0].p2.x, out[0].p2.y) == (290, 50)


def test_group_keeps_distant_lines_apart():
    areas = AreaConfig(boundaries=(100, 200))
    top = seg(10, 50, 290, 50)
    bottom = seg(10, 150, 290, 150)
    out = group_horizontals([top, bottom], areas)
    assert len(out) == 2
    # Nearest line (largest y) first.
    assert out[0].midpoint.y > out[1].midpoint.y


def test_group_reassembles_fragmented_lines():
    # Five slightly sloped source lines fragmented into many pieces with
    # gaps; grouping must return exactly five lines, each within 3 px RMS
    # of its source line (sampled along x).
    rng = random.Random(17)
    width = 900
    areas = AreaConfig(boundaries=(300, 600), merge_thresholds=(25, 15, 8))
    sources = []
    fragments = []
    for k in range(5):
        y0 = 80 + 90 * k
        slope = rng.uniform(-0.02, 0.02)
        sources.append((y0, slope))
        x = 10.0
        while x < width - 60:
            piece_len = rng.uniform(40, 90)
            x2 = min(x + piece_len, width - 10.0)
            jitter = rng.uniform(-0.8, 0.8)
            fragments.append(seg(x, y0 + slope * x + jitter, x2, y0 + slope * x2 + jitter))
            x = x2 + rng.uniform(2, 8)
    rng.shuffle(fragments)
    out = group_horizontals(fragments, areas)
    assert len(out) == 5
    out_sorted = sorted(out, key=lambda s: s.midpoint.y)
    for (y0, slope), merged in zip(sources, out_sorted):
        line = line_through(merged)
        xs = np.linspace(merged.p1.x, merged.p2.x, 50)
        residuals = [line.distance(PixelPoint(x, y0 + slope * x)) for x in xs]
        rms = math.sqrt(sum(r * r for r in residuals) / len(residuals))
        assert rms <= 3.0


def test_group_translation_in_y_shifts_output():
    areas = AreaConfig(boundaries=(100, 200))
    base = [seg(10, 50, 290, 52), seg(10, 90, 290, 88)]
    shifted = [seg(s.p1.x, s.p1.y + 30, s.p2.x, s.p2.y + 30) for s in base]
    out_base = group_horizontals(base, areas)
    out_shift = group_horizontals(shifted, areas)
    assert len(out_base) == len(out_shift)
    for a, b in zip(out_base, out_shift):
        assert (b.p1.x, b.p1.y) == pytest.approx((a.p1.x, a.p1.y + 30))
        assert (b.p2.x, b.p2.y) == pytest.approx((a.p2.x, a.p2.y + 30))


def test_select_verticals_two_clusters():
    left_long = seg_at_angle(250, 400, -62, 500)
    left_short = seg_at_angle(252, 420, -61, 120)
    right_long = seg_at_angle(980, 400, 57, 480)
    left, right = select_verticals([left_short, right_long, left_long])
    assert left == left_long  # longest wins its cluster
    assert right == right_long


def test_select_verticals_insufficient():
    with pytest.raises(InsufficientVerticals):
        select_verticals([])
    # Two segments within the angular tolerance collapse to one cluster.
    a = seg_at_angle(100, 100, 80, 200)
    b = seg_at_angle(400, 100, 86, 150)
    with pytest.raises(InsufficientVerticals):
        select_verticals([a, b])


def test_select_verticals_wraps_near_vertical():
    # 89 and -89 degrees are 2 degrees apart as lines: one cluster.
    a = seg_at_angle(100, 100, 89, 200)
    b = seg_at_angle(400, 100, -89, 150)
    with pytest.raises(InsufficientVerticals):
        select_verticals([a, b])


def test_vanishing_point_frozen_case():
    # Mirrored steep lines with slopes -1.5 and +1.5: the left line is
    # y = 550 - 1.5 (x - 100), the right y = 550 + 1.5 (x - 1100); both
    # give y = -200 at x = 600.
    left = seg(100, 550, 300, 250)
    right = seg(1100, 550, 900, 250)
    vp = vanishing_point(left, right)
    assert (vp.x, vp.y) == pytest.approx((600.0, -200.0))


def test_vanishing_point_steeper_mirrored_pair():
    # Slopes -3 and +3 through these endpoints: y = 1000 - 3x meets
    # y = 3x - 2600 at x = 600, y = -800.
    left = seg(100, 700, 300, 100)
    right = seg(1100, 700, 900, 100)
    vp = vanishing_point(left, right)
    assert (vp.x, vp.y) == pytest.approx((600.0, -800.0))


def test_vanishing_point_parallel_raises():
    with pytest.raises(NoVanishingPoint):
        vanishing_point(seg(100, 700, 100, 100), seg(500, 700, 500, 100))


def test_vanishing_point_shared_endpoint():
    apex = (300, 50)
    left = seg(100, 700, *apex)
    right = seg(500, 700, *apex)
    vp = vanishing_point(left, right)
    assert (vp.x, vp.y) == pytest.approx(apex)


def test_track_lines_ordering():
    far = seg(10, 100, 290, 100)
    near = seg(10, 500, 290, 500)
    mid = seg(10, 300, 290, 300)
    tl = TrackLines(
        horizontals=(far, near, mid),
        vertical_left=seg(50, 600, 150, 50),
        vertical_right=seg(900, 600, 800, 50),
    )
    ys = [s.midpoint.y for s in tl.horizontals]
    assert ys == sorted(ys, reverse=True)
