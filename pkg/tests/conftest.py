"""Shared fixtures: cached icospheres and the acceptance summary hook."""

from functools import lru_cache

import numpy as np
import pytest

from helfrich_lab.mesh import TriMesh, make_icosphere


@lru_cache(maxsize=None)
def _unit_icosphere(subdiv: int) -> TriMesh:
    return make_icosphere(subdiv, radius=1.0)


def icosphere(subdiv: int, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Icosphere built by scaling a cached unit mesh (projection commutes
    with scaling, so this is exactly make_icosphere(subdiv, radius, center))."""
    base = _unit_icosphere(subdiv)
    verts = base.vertices * radius + np.asarray(center, dtype=np.float64)
    return TriMesh(verts, base.faces, validate=False)


@pytest.fixture(scope="session")
def unit_s3() -> TriMesh:
    return _unit_icosphere(3)


@pytest.fixture(scope="session")
def unit_s4() -> TriMesh:
    return _unit_icosphere(4)


def cube_mesh() -> TriMesh:
    """Unit cube surface as 12 triangles, outward orientation."""
    v = np.array(
        [
            [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
            [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
        ],
        dtype=np.float64,
    )
    f = np.array(
        [
            [0, 2, 1], [0, 3, 2],  # bottom (z=0), outward = -z
            [4, 5, 6], [4, 6, 7],  # top
            [0, 1, 5], [0, 5, 4],  # y=0
            [2, 3, 7], [2, 7, 6],  # y=1
            [1, 2, 6], [1, 6, 5],  # x=1
            [3, 0, 4], [3, 4, 7],  # x=0
        ],
        dtype=np.int64,
    )
    return TriMesh(v, f)


# Lines recorded by tests/test_acceptance.py; printed after the run so they
# survive pytest's output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
