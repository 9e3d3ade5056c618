from __future__ import annotations

import numpy as np
import pytest

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion.

    The lines are echoed in the terminal summary so a full run shows
    the verdict of every criterion in one block.
    """

    def record(name: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def homography_from_quad(world_pts, image_pts) -> np.ndarray:
    """World->image homography through four correspondences, h33 = 1.

    Solves the classic 8x8 linear system directly; independent of the
    package's DLT so it can serve as its oracle.
    """
    A, b = [], []
    for (u, v), (x, y) in zip(world_pts, image_pts):
        A.append([u, v, 1, 0, 0, 0, -u * x, -v * x])
        b.append(x)
        A.append([0, 0, 0, u, v, 1, -u * y, -v * y])
        b.append(y)
    h = np.linalg.solve(np.asarray(A, dtype=float), np.asarray(b, dtype=float))
    return np.array([[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]])


def scene_quad(
    extent_x: float,
    extent_y: float,
    y_near: float = 660.0,
    y_far: float = 240.0,
    x_near_left: float = 140.0,
    x_near_right: float = 1150.0,
    vp: tuple[float, float] = (620.0, -260.0),
) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
    """Corner correspondences of the standard test scene.

    World (0,0)..(extent_x, extent_y) maps to an image trapezoid whose
    near and far edges are exact image rows (y_near, y_far) and whose
    side edges pass through the given vanishing point, so every world
    line of constant y is an exact image row.
    """
    vx, vy = vp

    def at_far(x_near: float) -> float:
        return vx + (x_near - vx) * (y_far - vy) / (y_near - vy)

    world = [(0.0, 0.0), (extent_x, 0.0), (0.0, extent_y), (extent_x, extent_y)]
    image = [
        (x_near_left, y_near),
        (x_near_right, y_near),
        (at_far(x_near_left), y_far),
        (at_far(x_near_right), y_far),
    ]
    return world, image
