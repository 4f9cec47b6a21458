"""Small buildings used by the scenes, tests and demos."""
from __future__ import annotations

import itertools

from . import rational as Q
from .atlas import AtlasBuilding, Gluing, SectorGerm
from .coxeter import CoxeterDatum, Wall, identity_iso
from .polytope import PolyhedralSet, Polytope


def half(wall: Wall, side: int) -> PolyhedralSet:
    """Closed half-apartment ``side * (normal . x - offset) >= 0``."""
    n = wall.normal if side < 0 else Q.scale(-1, wall.normal)
    b = wall.offset if side < 0 else -wall.offset
    return PolyhedralSet.convex(Polytope(((n, b),), len(n)))


def tripod_building(type_tag: str, wall: Wall | None = None, center=None, radius: int = 8) -> AtlasBuilding:
    """Three half-apartments glued along a wall ``H``.

    Chart 0 is ``H- u H+``, chart 1 is ``H- u H3`` and chart 2 is ``H+ u H3``.
    In chart 2 the copy of ``H+`` is its ``-`` side, attached through the
    reflection in ``H``, and ``H3`` is its ``+`` side.
    """
    datum = CoxeterDatum.from_type(type_tag, radius)
    wall = Wall.make(datum.root_covectors[0], 0) if wall is None else wall
    if datum.family_of(wall) is None:
        raise ValueError(f"{wall} is not a wall of {type_tag}")
    ident = identity_iso(datum.rank)
    gl = [
        Gluing(1, 0, ident, half(wall, -1)),
        Gluing(2, 0, datum.reflection(wall), half(wall, -1)),
        Gluing(2, 1, ident, half(wall, +1)),
    ]
    return AtlasBuilding(datum, 3, gl, center, name=f"tripod_{type_tag}")


def a2_counterexample_building() -> AtlasBuilding:
    """Thick A2 building of three half-apartments around the wall ``(alpha_1, x) = 0``.

    The fundamental alcove ``C`` has the vertex ``a = 0`` on this wall.  The
    chambers ``D`` (chart 0) and ``D'`` (chart 2) on the far side of the
    wall at ``a`` are adjacent along a panel of the wall.
    """
    return tripod_building("A2affine", Wall.make((2, -1), 0))


def tree_building(q: int, depth: int, radius: int = 8) -> AtlasBuilding:
    """Ball of radius ``depth`` in the ``(q+1)``-regular tree, leaves extended to ends.

    Charts are the lines joining two ends; chart 0 joins the first and the
    last end and its ``+`` direction points to the last end, which is the
    default center at infinity.
    """
    if q < 1 or depth < 1:
        raise ValueError("tree_building needs q >= 1 and depth >= 1")
    parent, dep = [-1], [0]
    frontier = [0]
    for level in range(depth):
        nxt = []
        for v in frontier:
            for _ in range(q + 1 if level == 0 else q):
                parent.append(v)
                dep.append(level + 1)
                nxt.append(len(parent) - 1)
        frontier = nxt
    leaves = frontier
    n = len(leaves)

    def ancestors(v):
        out = []
        while v != -1:
            out.append(v)
            v = parent[v]
        return out

    anc = [set(ancestors(v)) for v in leaves]

    def lca(a, b):
        return max(anc[a] & anc[b], key=lambda v: dep[v])

    pairs = [(0, n - 1)] + [p for p in itertools.combinations(range(n), 2) if p != (0, n - 1)]
    index = {p: i for i, p in enumerate(pairs)}

    def coord(pair, node):
        a, b = pair
        top = lca(a, b)
        s = -1 if node in anc[a] else 1
        return Q.frac(s * (dep[node] - dep[top]))

    def toward(pair, e):
        return -1 if e == pair[0] else 1

    datum = CoxeterDatum.from_type("A1affine", radius)
    gl = []
    for e in range(n):
        lines = [p for p in pairs if e in p]
        for p1, p2 in itertools.combinations(lines, 2):
            f = p1[0] if p1[1] == e else p1[1]
            g = p2[0] if p2[1] == e else p2[1]
            m = max((lca(e, f), lca(e, g), lca(f, g)), key=lambda v: dep[v])
            s1, s2 = toward(p1, e), toward(p2, e)
            x1, x2 = coord(p1, m), coord(p2, m)
            eps = s1 * s2
            iso = (((Q.frac(eps),),), (x2 - eps * x1,))
            # ray from m toward e in chart p1: s1 * x >= s1 * x1
            dom = PolyhedralSet.convex(Polytope((((Q.frac(-s1),), -s1 * x1),), 1))
            gl.append(Gluing(index[p1], index[p2], iso, dom))
    B = AtlasBuilding(datum, len(pairs), gl, SectorGerm(Q.vec([0]), Q.vec([1])),
                      name=f"tree_q{q}_d{depth}")
    B.tree = {"parent": parent, "depth": dep, "leaves": leaves, "pairs": pairs}
    return B
