"""Geometric primitives: points, non-vertical planes, tolerances, predicates.

Planes are stored in graph form z = a*x + b*y + c, which every face of a
convex cap admits because such faces are never vertical.  All types are
immutable and reject non-finite components at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry, VerticalPlane

# Relative band for the orientation predicate: the determinant counts as
# zero when it is below this fraction of its own term magnitudes.
ORIENT_REL_EPS = 1e-12


@dataclass(frozen=True, slots=True)
class Vec3:
    """Immutable 3-vector, used for both points and directions."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            c = getattr(self, name)
            if not math.isfinite(c):
                raise DegenerateGeometry(f"non-finite component in {(self.x, self.y, self.z)}")
            if type(c) is not float:
                object.__setattr__(self, name, float(c))

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def __iter__(self):
        yield self.x
        yield self.y
        yield self.z

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n == 0.0:
            raise DegenerateGeometry("cannot normalize the zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


Point3 = Vec3


@dataclass(frozen=True, slots=True)
class Plane:
    """Non-vertical plane z = a*x + b*y + c."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            coef = getattr(self, name)
            if not math.isfinite(coef):
                raise DegenerateGeometry(f"non-finite plane coefficient in {(self.a, self.b, self.c)}")
            if type(coef) is not float:
                object.__setattr__(self, name, float(coef))

    def height_at(self, x: float, y: float) -> float:
        return self.a * x + self.b * y + self.c

    def normal(self) -> Vec3:
        """Unit normal with positive z-component."""
        s = math.sqrt(self.a * self.a + self.b * self.b + 1.0)
        return Vec3(-self.a / s, -self.b / s, 1.0 / s)

    def tilt(self) -> float:
        """Angle between the normal and +z, in [0, pi/2)."""
        return math.atan(math.hypot(self.a, self.b))

    def contains(self, p: Vec3, eps: float) -> bool:
        return abs(p.z - self.height_at(p.x, p.y)) <= eps

    def below(self, p: Vec3, eps: float) -> bool:
        """True when p is on or under the plane (within eps)."""
        return p.z <= self.height_at(p.x, p.y) + eps


@dataclass(frozen=True, slots=True)
class Tolerances:
    """Geometric comparison thresholds.

    eps_geom is an absolute length; scale it to the data with
    Tolerances.scaled(diameter).  eps_angle is in radians and eps_area
    is the square of eps_geom.
    """

    eps_geom: float = 1e-9
    eps_angle: float = 1e-9
    eps_area: float = 1e-18

    def __post_init__(self):
        if not (self.eps_geom > 0 and self.eps_angle > 0 and self.eps_area > 0):
            raise ValueError("tolerances must be positive")

    @classmethod
    def scaled(cls, diameter: float, rel: float = 1e-9) -> "Tolerances":
        eps = rel * max(diameter, 1e-30)
        return cls(eps_geom=eps, eps_angle=1e-9, eps_area=eps * eps)


def orient3d(p0: Vec3, p1: Vec3, p2: Vec3, q: Vec3, rel_eps: float = ORIENT_REL_EPS) -> int:
    """Sign of the signed volume of tetrahedron (p0, p1, p2, q).

    +1 when q is on the positive side of the oriented plane (p0, p1, p2),
    -1 on the negative side, 0 inside a band scaled to the magnitudes of
    the determinant terms.
    """
    ax, ay, az = p1.x - p0.x, p1.y - p0.y, p1.z - p0.z
    bx, by, bz = p2.x - p0.x, p2.y - p0.y, p2.z - p0.z
    cx, cy, cz = q.x - p0.x, q.y - p0.y, q.z - p0.z
    t1 = ax * (by * cz - bz * cy)
    t2 = ay * (bz * cx - bx * cz)
    t3 = az * (bx * cy - by * cx)
    det = t1 + t2 + t3
    permanent = (
        abs(ax) * (abs(by * cz) + abs(bz * cy))
        + abs(ay) * (abs(bz * cx) + abs(bx * cz))
        + abs(az) * (abs(bx * cy) + abs(by * cx))
    )
    if abs(det) <= rel_eps * permanent:
        return 0
    return 1 if det > 0 else -1


def normal_angle_to_z(n: Vec3) -> float:
    """Angle in [0, pi] between n and the +z axis.

    atan2 of the horizontal and vertical parts, not acos of a dot
    product: acos loses half the significant digits near 0 and pi.
    """
    if n.x == 0.0 and n.y == 0.0 and n.z == 0.0:
        raise DegenerateGeometry("zero vector has no direction")
    return math.atan2(math.hypot(n.x, n.y), n.z)


def angle_between(u: Vec3, v: Vec3) -> float:
    """Angle in [0, pi] between two nonzero vectors.

    Same atan2 form as normal_angle_to_z, accurate at both ends of the
    range where the acos form degrades to sqrt(machine-eps).
    """
    nu, nv = u.norm(), v.norm()
    if nu == 0.0 or nv == 0.0:
        raise DegenerateGeometry("zero vector has no direction")
    return math.atan2(u.cross(v).norm(), u.dot(v))


def newell_normal(points: list[Vec3]) -> Vec3:
    """Area-weighted normal of a closed polygon (unnormalized)."""
    nx = ny = nz = 0.0
    k = len(points)
    for i in range(k):
        p, q = points[i], points[(i + 1) % k]
        nx += (p.y - q.y) * (p.z + q.z)
        ny += (p.z - q.z) * (p.x + q.x)
        nz += (p.x - q.x) * (p.y + q.y)
    return Vec3(0.5 * nx, 0.5 * ny, 0.5 * nz)


def plane_through(points: list[Vec3], tol: Tolerances | None = None) -> Plane:
    """Plane z = ax + by + c through coplanar points.

    Raises DegenerateGeometry for fewer than 3 points, collinear input,
    or residuals above tol.eps_geom, and VerticalPlane when the common
    plane has no graph form.
    """
    tol = tol or Tolerances()
    if len(points) < 3:
        raise DegenerateGeometry("plane needs at least 3 points")
    n = newell_normal(points)
    nlen = n.norm()
    if nlen <= tol.eps_area:
        raise DegenerateGeometry("points are collinear or coincident")
    if abs(n.z) <= tol.eps_angle * nlen:
        raise VerticalPlane("plane is vertical; no z = ax + by + c form")
    a = -n.x / n.z
    b = -n.y / n.z
    c = sum(p.z - a * p.x - b * p.y for p in points) / len(points)
    plane = Plane(a, b, c)
    worst = max(abs(p.z - plane.height_at(p.x, p.y)) for p in points)
    if worst > tol.eps_geom:
        raise DegenerateGeometry(f"points deviate from a common plane by {worst:g}")
    return plane


def spherical_polygon_area(dirs: list[Vec3], tol: Tolerances | None = None) -> float:
    """Area (solid angle) of the spherical polygon with the given corners.

    Corners are unit directions in cyclic order; the polygon must be
    genuinely two-dimensional on the sphere.  Computed as the sum of
    signed triangle excesses of a fan decomposition.
    """
    tol = tol or Tolerances()
    if len(dirs) < 3:
        raise DegenerateGeometry("spherical polygon needs at least 3 directions")
    ds = [d.normalized() for d in dirs]
    k = len(ds)
    for i in range(k):
        for j in range(i + 1, k):
            chord = (ds[i] - ds[j]).norm()
            anti = (ds[i] + ds[j]).norm()
            if chord <= tol.eps_angle:
                raise DegenerateGeometry(f"directions {i} and {j} coincide")
            if anti <= tol.eps_angle:
                raise DegenerateGeometry(f"directions {i} and {j} are antipodal")
    mat = np.array([d.as_tuple() for d in ds])
    sigma = np.linalg.svd(mat, compute_uv=False)
    if sigma[-1] <= tol.eps_angle * math.sqrt(k):
        raise DegenerateGeometry("directions lie on a common great circle")
    total = 0.0
    d0 = ds[0]
    for i in range(1, k - 1):
        d1, d2 = ds[i], ds[i + 1]
        num = d0.dot(d1.cross(d2))
        den = 1.0 + d0.dot(d1) + d1.dot(d2) + d2.dot(d0)
        total += 2.0 * math.atan2(num, den)
    return abs(total)


def as_array(points) -> np.ndarray:
    """Stack points into an (n, 3) float array."""
    return np.array([(p.x, p.y, p.z) for p in points], dtype=float)
