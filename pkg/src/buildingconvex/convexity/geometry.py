"""Local polyhedral geometry in one apartment chart.

Everything here is exact over the rationals except the angular sets, which
are closed arc lists in the orthonormal frame of the Gram form.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .. import circle as S1
from .. import rational as Q
from ..atlas import wall_breakpoints
from ..coxeter import CoxeterDatum, Wall
from ..polytope import Polytope


def active_constraints(poly: Polytope, p, own: int | None = None) -> list:
    """Halfspaces of ``poly`` tight at ``p``; only the first ``own`` ones if given."""
    hs = poly.halfspaces if own is None else poly.halfspaces[:own]
    return [(n, b) for n, b in hs if Q.dot(n, p) == b]


def tangent_angles(datum: CoxeterDatum, constraints: Sequence) -> list:
    """Closed angular set of directions ``v`` with ``n . v <= 0`` for all constraints."""
    out = [(0.0, 2 * math.pi)]
    for n, _ in constraints:
        w = datum.vector_of(n)
        out = S1.intersect(out, S1.ball(datum.direction_angle(Q.scale(-1, w)), math.pi / 2))
        if not out:
            break
    return out


def in_tangent_cone(constraints: Sequence, v) -> bool:
    return all(Q.dot(n, v) <= 0 for n, _ in constraints)


def project_to_cone(datum: CoxeterDatum, constraints: Sequence, v) -> tuple:
    """Exact Gram-metric projection of ``v`` onto ``{x : n . x <= 0}``."""
    v = Q.vec(v)
    if in_tangent_cone(constraints, v):
        return v
    zero = tuple(Fraction(0) for _ in v)
    best, best_d = zero, datum.inner(v, v)
    for n, _ in constraints:
        w = datum.vector_of(n)
        c = Q.dot(n, v) / Q.dot(n, w)
        cand = Q.sub(v, Q.scale(c, w))
        if in_tangent_cone(constraints, cand):
            d = Q.sub(v, cand)
            dd = datum.inner(d, d)
            if dd < best_d:
                best, best_d = cand, dd
    return best


def nearest_point(datum: CoxeterDatum, poly: Polytope, p) -> tuple:
    """Exact Gram-metric nearest point of a closed convex polytope."""
    p = Q.vec(p)
    if poly.contains(p):
        return p
    cands = []
    for n, b in poly.halfspaces:
        w = datum.vector_of(n)
        c = (Q.dot(n, p) - b) / Q.dot(n, w)
        x = Q.sub(p, Q.scale(c, w))
        if poly.contains(x):
            cands.append(x)
    cands += poly.vertices()
    if not cands:
        raise ValueError("empty polytope")
    return min(cands, key=lambda x: (datum.inner(Q.sub(x, p), Q.sub(x, p)), x))


def distance_to(datum: CoxeterDatum, poly: Polytope, p) -> float:
    return datum.distance(p, nearest_point(datum, poly, p))


def wall_direction(h: Wall) -> tuple:
    n = h.normal
    if len(n) == 1:
        return (Fraction(0),)
    return (-n[1], n[0])


def clipped(datum: CoxeterDatum, poly: Polytope) -> Polytope:
    """``poly`` intersected with the modeled region, own constraints first."""
    return Polytope(poly.halfspaces + datum.region.halfspaces, poly.dim)


def boundary_strata(datum: CoxeterDatum, poly: Polytope) -> list:
    """Representatives of the boundary strata of a convex polytope.

    Returns ``(point, kind)`` pairs: the vertices, every point where an edge
    meets a wall, and one midpoint per sub-edge between those.  Points only
    cut out by the modeled region are skipped.
    """
    own = len(poly.halfspaces)
    cp = clipped(datum, poly)
    verts = cp.vertices()
    if not verts:
        return []
    dim = cp.dimension()
    strata: list = []

    def add(x, kind):
        if not active_constraints(cp, x, own):
            return
        if all(x != y for y, _ in strata):
            strata.append((x, kind))

    for v in verts:
        add(v, "vertex")
    if dim == 0 or datum.rank == 1:
        return strata
    for p, q in cp.edges():
        pts = wall_breakpoints(datum, p, q)
        for x in pts[1:-1]:
            add(x, "wall_point")
        for a, b in zip(pts, pts[1:]):
            add(Q.scale(Fraction(1, 2), Q.add(a, b)), "edge")
    return strata


def random_point_in(poly: Polytope, rng) -> tuple:
    """Rational convex combination of the vertices with integer weights."""
    verts = poly.vertices()
    w = [int(x) for x in rng.integers(1, 1000, size=len(verts))]
    tot = sum(w)
    return tuple(sum(Fraction(wi, tot) * v[i] for wi, v in zip(w, verts)) for i in range(poly.dim))


def random_boundary_point(poly: Polytope, rng) -> tuple:
    verts = poly.vertices()
    if len(verts) == 1:
        return verts[0]
    edges = poly.edges() if poly.dim == 2 else [(verts[0], verts[-1])]
    if poly.dim == 1:
        return verts[int(rng.integers(len(verts)))]
    p, q = edges[int(rng.integers(len(edges)))]
    t = Fraction(int(rng.integers(0, 1001)), 1000)
    return Q.add(p, Q.scale(t, Q.sub(q, p)))


def rationalize_direction(datum: CoxeterDatum, theta: float, den: int = 10**6) -> tuple:
    v = datum.vector_at_angle(theta)
    return tuple(Fraction(x).limit_denominator(den) for x in v)
