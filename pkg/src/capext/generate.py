"""Deterministic random test bodies.

Three point distributions are supported.  sphere-cap draws unit-sphere
points above a random horizontal floor, paraboloid drops points on the
graph of z = 1 - x^2 - y^2 over the unit disk, and ball draws uniform
points inside the unit ball.  All sampling is driven by a seeded
numpy Generator, so a config maps to one body forever.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cap import Cap, CapSpec, extract_cap
from .errors import (
    DegenerateExtension,
    DegenerateHull,
    EmptyCap,
    LemmaViolation,
    NoBoundary,
)
from .extension import boundary_face_planes, recession_fan
from .geometry import Vec3
from .hull import Polyhedron, convex_hull

DISTRIBUTIONS = ("sphere-cap", "paraboloid", "ball")

# Redraw attempts for a compatible threshold angle before falling back
# to 90 degrees, which always admits a cap on a closed body.
MAX_PHI_REDRAWS = 64


@dataclass(frozen=True, slots=True)
class GeneratorConfig:
    """Recipe for one random body plus its cap angle."""

    n: int
    seed: int
    distribution: str = "sphere-cap"
    phi_degrees: float = 90.0

    def __post_init__(self):
        if self.n < 4:
            raise ValueError(f"need at least 4 points, got {self.n}")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(
                f"unknown distribution {self.distribution!r}; pick one of {DISTRIBUTIONS}"
            )
        if not (0.0 < self.phi_degrees <= 90.0):
            raise ValueError(f"phi_degrees must be in (0, 90], got {self.phi_degrees}")


def _sample(rng: np.random.Generator, n: int, distribution: str) -> list[Vec3]:
    pts: list[Vec3] = []
    if distribution == "sphere-cap":
        floor = float(rng.uniform(-0.6, 0.6))
        while len(pts) < n:
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            if v[2] > floor:
                pts.append(Vec3(float(v[0]), float(v[1]), float(v[2])))
    elif distribution == "paraboloid":
        while len(pts) < n:
            x, y = rng.uniform(-1.0, 1.0, size=2)
            r2 = x * x + y * y
            if r2 <= 1.0:
                pts.append(Vec3(float(x), float(y), 1.0 - r2))
    else:
        while len(pts) < n:
            v = rng.uniform(-1.0, 1.0, size=3)
            if float(np.linalg.norm(v)) <= 1.0:
                pts.append(Vec3(float(v[0]), float(v[1]), float(v[2])))
    return pts


def generate(cfg: GeneratorConfig) -> Polyhedron:
    """Hull of n sampled points; deterministic for a fixed config.

    Degenerate draws (all points coplanar, conceivable only for tiny n)
    are resampled from the same stream, so the result is always a valid
    closed polyhedron.
    """
    rng = np.random.default_rng(cfg.seed)
    while True:
        pts = _sample(rng, cfg.n, cfg.distribution)
        try:
            return convex_hull(pts)
        except DegenerateHull:
            continue


@dataclass(frozen=True, slots=True)
class FuzzInstance:
    """One corpus entry: a body with a compatible cap angle."""

    hull: Polyhedron
    cap: Cap
    phi_degrees: float
    distribution: str
    redraws: int

    @property
    def phi(self) -> float:
        return math.radians(self.phi_degrees)


def _cone_compatible(cap: Cap) -> bool:
    planes = boundary_face_planes(cap)
    if len(planes) < 3:
        return False
    try:
        recession_fan(planes)
    except DegenerateExtension:
        return False
    return True


def fuzz_instance(seed: int) -> FuzzInstance:
    """Deterministic corpus instance for one seed.

    The body is sampled first, then threshold angles are drawn until the
    cap is usable: nonempty, boundary a single simple cycle, and rim
    faces wrapping around the vertical so the extension has a proper
    downward cone.  Incompatible pairs exist (a 3-face cap on a coarse
    body can sit entirely off to one side) and simply trigger a redraw.
    When no angle works, not even 90 degrees (a near-flat top face can
    touch the whole rim by itself), the body is resampled from the same
    stream, so the result is still pinned by the seed.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, 101))
    distribution = DISTRIBUTIONS[seed % len(DISTRIBUTIONS)]
    redraws = 0
    for _ in range(64):
        pts = _sample(rng, n, distribution)
        try:
            hull = convex_hull(pts)
        except DegenerateHull:
            continue
        for _ in range(MAX_PHI_REDRAWS):
            phi_degrees = 90.0 if rng.random() < 0.125 else float(rng.uniform(10.0, 90.0))
            try:
                cap = extract_cap(hull, CapSpec.from_degrees(phi_degrees))
            except (EmptyCap, NoBoundary, LemmaViolation):
                redraws += 1
                continue
            if not _cone_compatible(cap):
                redraws += 1
                continue
            return FuzzInstance(hull, cap, phi_degrees, distribution, redraws)
    raise DegenerateExtension(f"seed {seed}: no usable body after 64 samples")
