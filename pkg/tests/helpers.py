"""Shared oracles and generators for the test-suite."""
from __future__ import annotations

from fractions import Fraction as F

import numpy as np

from buildingconvex import rational as Q
from buildingconvex.atlas import AtlasBuilding, BuildingPoint, Gluing, SectorGerm
from buildingconvex.coxeter import Cell, apply, carrier


def rand_point(rng, B: AtlasBuilding, r: int = 3, den: int = 8) -> BuildingPoint:
    k = int(rng.integers(B.n_charts))
    coords = tuple(F(int(rng.integers(-r * den, r * den + 1)), den) for _ in range(B.datum.rank))
    return BuildingPoint(k, coords)


def rebase(B: AtlasBuilding, k: int) -> AtlasBuilding:
    """The same building with chart ``k`` as the base apartment (charts 0 and k swapped)."""
    perm = {0: k, k: 0}
    pi = lambda i: perm.get(i, i)  # noqa: E731
    gl = [Gluing(pi(g.i), pi(g.j), g.iso, g.domain, g.word) for g in B.gluings]
    iso = B.center_isos()[k]
    if isinstance(B.center, Cell):
        center = carrier(B.datum, apply(iso, B.center.barycenter()), check_region=False)
    else:
        center = SectorGerm(apply(iso, B.center.base), Q.matvec(iso[0], B.center.direction))
    return AtlasBuilding(B.datum, B.n_charts, gl, center, name=B.name + f"_rebased{k}")


def tree_height(B: AtlasBuilding, x: BuildingPoint) -> F:
    """Busemann function toward the end of chart 0, from the tree tables alone."""
    t = B.tree
    parent, dep, leaves, pairs = t["parent"], t["depth"], t["leaves"], t["pairs"]
    depth = dep[leaves[0]]
    E = leaves[-1]

    def anc(v):
        out = []
        while v != -1:
            out.append(v)
            v = parent[v]
        return out

    def dist(u, v):
        au = anc(u)
        common = next(w for w in anc(v) if w in au)
        return dep[u] + dep[v] - 2 * dep[common]

    a, b = pairs[x.chart]
    la, lb = leaves[a], leaves[b]
    top = next(w for w in anc(lb) if w in anc(la))
    c = x.coords[0]
    leaf = lb if c > 0 else la
    path = list(reversed(anc(leaf)))
    path = path[path.index(top):]  # top ... leaf
    s = abs(c)
    L = len(path) - 1
    if s >= L:  # on the ray beyond the leaf
        r = s - L
        return depth + r if leaf == E else depth - dist(leaf, E) - r
    i = int(s)
    fr = s - i
    d0 = dist(path[i], E)
    d1 = dist(path[min(i + 1, L)], E)
    return depth - (d0 + fr * (d1 - d0))


def random_polygon(rng, datum, r: int = 3, den: int = 4, n: int = 6):
    """Hull of random rational points; retried until two-dimensional."""
    from buildingconvex.polytope import Polytope
    while True:
        pts = [tuple(F(int(rng.integers(-r * den, r * den + 1)), den) for _ in range(2)) for _ in range(n)]
        P = Polytope.from_points(pts)
        if P.dimension() == 2:
            return P


FIGURE = [(F(-9, 4), F(1, 4)), (F(-1), F(-1)), (F(1), F(-1)), (F(5, 2), F(1, 2)), (F(3, 4), F(9, 4)),
          (F(-3, 4), F(9, 4)), (F(-9, 4), F(3, 4))]

# weak-normal polygons in the C2 apartment (checked by the suite, found by search)
C2_WEAK = [
    [(F(-3, 4), F(1, 2)), (F(3, 8), F(-5, 8)), (F(1), F(0)), (F(1), F(1)), (F(-1, 4), F(1))],
    [(F(-9, 8), F(5, 8)), (F(3, 4), F(-5, 4)), (F(2), F(0)), (F(1, 8), F(15, 8))],
    [(F(-7, 4), F(1)), (F(1, 4), F(-1)), (F(7, 4), F(1, 2)), (F(7, 4), F(3, 2)), (F(-5, 4), F(3, 2))],
    [(F(-1, 2), F(-5, 4)), (F(1, 4), F(-5, 4)), (F(7, 4), F(1, 4)), (F(1, 2), F(3, 2)), (F(-1, 4), F(3, 2)),
     (F(-1, 2), F(5, 4))],
]


def a2_hexagon(k):
    """``|beta . x| <= k`` for the three positive roots of A2."""
    from buildingconvex.coxeter import CoxeterDatum
    from buildingconvex.polytope import Polytope
    d = CoxeterDatum.from_type("A2affine")
    hs = []
    for beta in d.root_covectors:
        hs += [(beta, F(k)), (Q.scale(-1, beta), F(k))]
    return Polytope(tuple(hs), 2)


def a2_segment():
    from buildingconvex.polytope import Polytope
    return Polytope.from_halfspaces([((1, -1), 0), ((-1, 1), 0), ((1, 1), 1), ((-1, -1), 1)])
