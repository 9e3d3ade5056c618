"""Config parsing: defaults, overrides, rejection of junk."""

from pathlib import Path

import pytest

from trackstride.config import load_config, parse_config
from trackstride.errors import ConfigError


FULL = """
[imaging]
input = edges
sigma = 2.0
canny_low = 10
canny_high = 90
roi = 0,0 1279,0 1279,719 0,719

[hough]
rho_resolution = 0.5
theta_resolution_deg = 2.0
vote_threshold = 40
min_line_length = 25
max_line_gap = 4
seed = 11

[lines]
horizontal_tolerance = 8
vertical_min_angle = 3
vertical_band = 30
join_threshold = 20

[world]
lane_width_m = 9.5
spacing_m = 0, 1.2, 2.4

[gait]
stationarity_px = 0.5
min_confidence = 0.6
reference_y = 650
athlete_id = a01

[io]
frames_dir = frames
keypoints_file = kp.json
out_dir = out
homography = h/homography.txt
"""


class TestDefaults:
    def test_empty_text_gives_defaults(self):
        cfg = parse_config("")
        assert cfg.imaging.input_kind == "grayscale"
        assert cfg.imaging.sigma == 1.4
        assert cfg.imaging.canny_low == 20.0
        assert cfg.imaging.canny_high == 60.0
        assert cfg.imaging.roi is None
        assert cfg.hough.vote_threshold == 30
        assert cfg.hough.seed == 0
        assert cfg.lines.horizontal_tolerance == 10.0
        assert cfg.lines.join_threshold is None
        assert cfg.world.lane_width_m == 1.22
        assert cfg.world.horizontal_spacing_m == (0.0, 5.0, 10.0, 15.0, 20.0)
        assert cfg.gait.stationarity_px == 1.0
        assert cfg.gait.reference_y is None
        assert cfg.gait.athlete_id == "unknown"
        assert cfg.io.frames_dir is None
        assert cfg.io.homography is None

    def test_missing_sections_are_fine(self):
        cfg = parse_config("[hough]\nseed = 5\n")
        assert cfg.hough.seed == 5
        assert cfg.world.lane_width_m == 1.22


class TestOverrides:
    def test_every_section_overridable(self):
        cfg = parse_config(FULL)
        assert cfg.imaging.input_kind == "edges"
        assert cfg.imaging.sigma == 2.0
        assert cfg.imaging.roi is not None
        assert len(cfg.imaging.roi.vertices) == 4
        assert cfg.hough.rho_resolution == 0.5
        assert cfg.hough.theta_resolution_deg == 2.0
        assert cfg.hough.vote_threshold == 40
        assert cfg.hough.min_line_length == 25.0
        assert cfg.hough.max_line_gap == 4
        assert cfg.hough.seed == 11
        assert cfg.lines.horizontal_tolerance == 8.0
        assert cfg.lines.vertical_min_angle == 3.0
        assert cfg.lines.vertical_band == 30.0
        assert cfg.lines.join_threshold == 20.0
        assert cfg.world.lane_width_m == 9.5
        assert cfg.world.horizontal_spacing_m == (0.0, 1.2, 2.4)
        assert cfg.gait.stationarity_px == 0.5
        assert cfg.gait.min_confidence == 0.6
        assert cfg.gait.reference_y == 650.0
        assert cfg.gait.athlete_id == "a01"
        assert cfg.io.keypoints_file == Path("kp.json")

    def test_spacing_accepts_spaces(self):
        cfg = parse_config("[world]\nspacing_m = 0 1.5 3.0\n")
        assert cfg.world.horizontal_spacing_m == (0.0, 1.5, 3.0)


class TestPathAnchoring:
    def test_relative_paths_anchor_at_base(self):
        cfg = parse_config("[io]\nframes_dir = frames\n", base=Path("/data/run7"))
        assert cfg.io.frames_dir == Path("/data/run7/frames")

    def test_absolute_paths_pass_through(self):
        cfg = parse_config("[io]\nframes_dir = /abs/frames\n", base=Path("/data/run7"))
        assert cfg.io.frames_dir == Path("/abs/frames")

    def test_load_config_anchors_at_file_parent(self, tmp_path):
        (tmp_path / "run.ini").write_text("[io]\nout_dir = results\n")
        cfg = load_config(tmp_path / "run.ini")
        assert cfg.io.out_dir == tmp_path / "results"


class TestRejection:
    def test_unknown_section(self):
        with pytest.raises(ConfigError, match=r"\[turbo\]"):
            parse_config("[turbo]\nboost = 1\n")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key.*speed"):
            parse_config("[hough]\nspeed = 9\n")

    def test_unparsable_value_names_section_and_key(self):
        with pytest.raises(ConfigError, match="hough.vote_threshold"):
            parse_config("[hough]\nvote_threshold = potato\n")

    def test_malformed_ini(self):
        with pytest.raises(ConfigError, match="malformed"):
            parse_config("vote_threshold = 3\n")  # key before any section header

    @pytest.mark.parametrize(
        "text",
        [
            "[imaging]\ninput = video\n",
            "[imaging]\nsigma = -1\n",
            "[imaging]\ncanny_low = 90\ncanny_high = 10\n",
            "[imaging]\nroi = 0,0 1,1\n",
            "[hough]\nvote_threshold = 0\n",
            "[lines]\njoin_threshold = -2\n",
            "[world]\nlane_width_m = -1\n",
            "[world]\nspacing_m = 5, 0\n",
            "[gait]\nmin_confidence = 1.5\n",
        ],
    )
    def test_out_of_range_values(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)
