"""Shared fixtures: canonical solids and serialized mesh files."""

import numpy as np
import pytest

from capext.hull import convex_hull
from capext.meshio import emit_off

PYRAMID_POINTS = [
    (-1.0, -1.0, 0.0),
    (-1.0, 1.0, 0.0),
    (1.0, -1.0, 0.0),
    (1.0, 1.0, 0.0),
    (0.0, 0.0, 1.0),
]

CUBE_POINTS = [(float(x), float(y), float(z)) for x in (0, 1) for y in (0, 1) for z in (0, 1)]

# Truncated pyramid: the flat top face joins the cap, so its plane keeps
# bounding the extension and the removed apex (0, 0, 1) must NOT regrow.
FRUSTUM_POINTS = [
    (-1.0, -1.0, 0.0),
    (-1.0, 1.0, 0.0),
    (1.0, -1.0, 0.0),
    (1.0, 1.0, 0.0),
    (-0.5, -0.5, 0.5),
    (-0.5, 0.5, 0.5),
    (0.5, -0.5, 0.5),
    (0.5, 0.5, 0.5),
]

# Roof with a degree-6 apex whose incident faces alternate between tilts
# of about 49 and 53 degrees around the vertex: selecting at 50 degrees
# keeps two opposite face pairs that meet only at the apex, so the cap
# boundary pinches there.
PINCH_POINTS = [
    (0.0, 0.0, 1.0),
    (1.0, 0.0, 0.8),
    (-1.0, 0.0, 0.8),
    (0.0, 0.6, 0.1),
    (0.0, -0.6, 0.1),
    (1.5, 1.5, -1.0),
    (1.5, -1.5, -1.0),
    (-1.5, 1.5, -1.0),
    (-1.5, -1.5, -1.0),
]
PINCH_PHI_DEGREES = 50.0

# Tent with apex (0, 0, 1) shaved off by the steep plane z = 0.8 - 3x
# (tilt 71.57 degrees).  The three gentle side planes z = 1 - x/2 - y,
# z = 1 - x/2 + y and z = 1 + x all pass through the old apex; at
# phi = 60 degrees the shave face is excluded from the cap, nothing
# bounds the extension there, and the apex regrows as a new vertex.
SHAVED_TENT_POINTS = [
    (-1.0, 1.5, 0.0),
    (-1.0, -1.5, 0.0),
    (4.0 / 15.0, 13.0 / 15.0, 0.0),
    (4.0 / 15.0, -13.0 / 15.0, 0.0),
    (-0.05, 0.075, 0.95),
    (-0.05, -0.075, 0.95),
]
SHAVED_TENT_PHI_DEGREES = 60.0


@pytest.fixture(scope="session")
def pyramid():
    return convex_hull(PYRAMID_POINTS)


@pytest.fixture(scope="session")
def cube():
    return convex_hull(CUBE_POINTS)


@pytest.fixture(scope="session")
def frustum():
    return convex_hull(FRUSTUM_POINTS)


@pytest.fixture(scope="session")
def pinch_hull():
    return convex_hull(PINCH_POINTS)


@pytest.fixture(scope="session")
def shaved_tent():
    return convex_hull(SHAVED_TENT_POINTS)


@pytest.fixture()
def pyramid_off(pyramid, tmp_path):
    path = tmp_path / "pyramid.off"
    path.write_text(emit_off(pyramid))
    return path


@pytest.fixture()
def cube_off(cube, tmp_path):
    path = tmp_path / "cube.off"
    path.write_text(emit_off(cube))
    return path


def random_hull_points(rng: np.random.Generator, n: int) -> np.ndarray:
    """Gaussian cloud; generic position with probability one."""
    return rng.normal(size=(n, 3))
