"""Brute-force reference implementations shared by the test suite.

These are deliberately naive: facet enumeration by testing every plane
through three points, and envelope enumeration by solving every plane
triple.  Slow but independent of the library's own algorithms.
"""

import itertools

import numpy as np

from capext.geometry import Plane, Vec3, orient3d
from capext.hull import convex_hull


def brute_force_facets(points: np.ndarray) -> set[frozenset[int]]:
    """All maximal facet support sets, by testing every plane through three points.

    A triple spans a supporting plane when every other point lies weakly
    on one side; the facet is the set of points on that plane.  Coplanar
    triples of the same facet produce the same set, so the result is
    deduplicated by construction.
    """
    n = len(points)
    pts = [Vec3(*q) for q in points]
    facets: set[frozenset[int]] = set()
    for i, j, k in itertools.combinations(range(n), 3):
        side_pos = side_neg = False
        on_plane = {i, j, k}
        for m in range(n):
            if m in (i, j, k):
                continue
            s = orient3d(pts[i], pts[j], pts[k], pts[m])
            if s > 0:
                side_pos = True
            elif s < 0:
                side_neg = True
            else:
                on_plane.add(m)
            if side_pos and side_neg:
                break
        if side_pos and side_neg:
            continue
        if not side_pos and not side_neg:
            continue  # all points coplanar with the triple; no solid side
        facets.add(frozenset(on_plane))
    return facets


def hull_facets_as_input_indices(points: np.ndarray) -> set[frozenset[int]]:
    poly = convex_hull(points)
    index_of = {tuple(q): m for m, q in enumerate(points)}
    out = set()
    for face in poly.faces:
        out.add(frozenset(index_of[poly.vertices[v].as_tuple()] for v in face.vertex_ids))
    return out


def random_planes(rng: np.random.Generator, k: int) -> list[Plane]:
    coeffs = rng.uniform(-2.0, 2.0, size=(k, 2))
    offs = rng.uniform(-1.0, 1.0, size=k)
    return [Plane(float(a), float(b), float(c)) for (a, b), c in zip(coeffs, offs)]


def brute_force_envelope(planes: list[Plane]) -> list[Vec3]:
    """Solve every triple of planes and keep points under all of them."""
    out: list[Vec3] = []
    for i, j, k in itertools.combinations(range(len(planes)), 3):
        rows = np.array([[planes[m].a, planes[m].b, -1.0] for m in (i, j, k)])
        rhs = np.array([-planes[m].c for m in (i, j, k)])
        if abs(np.linalg.det(rows)) < 1e-10:
            continue
        x, y, z = np.linalg.solve(rows, rhs)
        q = Vec3(float(x), float(y), float(z))
        scale = 1.0 + abs(q.x) + abs(q.y) + abs(q.z)
        if all(q.z <= p.height_at(q.x, q.y) + 1e-9 * scale for p in planes):
            if not any((q - r).norm() <= 1e-7 * scale for r in out):
                out.append(q)
    return out


def points_match(got: list[Vec3], expected: list[Vec3]) -> bool:
    if len(got) != len(expected):
        return False
    unused = list(expected)
    for q in got:
        scale = 1.0 + abs(q.x) + abs(q.y) + abs(q.z)
        hit = next((r for r in unused if (q - r).norm() <= 1e-6 * scale), None)
        if hit is None:
            return False
        unused.remove(hit)
    return True
