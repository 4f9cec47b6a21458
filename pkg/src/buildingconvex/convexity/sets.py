"""Subsets of buildings and their links.

A :class:`BuildingSubset` is either the preimage ``rho^-1(A)`` of a convex
set ``A`` of the base chart under the retraction of the atlas, or an explicit
family of polytopes per chart.  Membership, segment containment and local
tangent cones are exact in both cases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .. import circle as S1
from .. import rational as Q
from ..atlas import AtlasBuilding, BuildingPoint, link_with_retraction, wall_breakpoints
from ..coxeter import (Cell, CoxeterDatum, apply, carrier, chambers_containing,
                       chambers_in_region, invert)
from ..link import Direction, LinkSubset, fine_directions, is_pi_convex, subset_from_angles
from ..polytope import PolyhedralSet, Polytope
from ..report import ConvexityReport
from . import geometry as G


def thin_building(datum: CoxeterDatum, center=None) -> AtlasBuilding:
    """A single apartment viewed as a (thin) building."""
    return AtlasBuilding(datum, 1, [], center, name="apartment")


@dataclass(frozen=True)
class NormalVector:
    """Normal (``role='normal'``) or anti-normal (``role='anti-normal'``) at ``base``.

    The stored ``direction`` always points away from the set; an anti-normal
    ``n_a`` is recorded as its negation.
    """

    base: tuple
    direction: tuple
    role: str = "normal"

    def to_json(self) -> dict:
        return {"base": Q.fmt_vec(self.base), "direction": [round(float(x), 12) for x in self.direction],
                "role": self.role}


@dataclass
class BuildingSubset:
    B: AtlasBuilding
    A: PolyhedralSet | None = None             # preimage mode
    explicit: dict = field(default_factory=dict)  # chart -> list of Polytope

    @property
    def datum(self) -> CoxeterDatum:
        return self.B.datum

    @property
    def is_preimage(self) -> bool:
        return self.A is not None

    # -- membership ----------------------------------------------------------
    def contains(self, x: BuildingPoint) -> bool:
        if self.is_preimage:
            return self.A.contains(self.B.retract(x))
        pc = self.B.point_class(x.chart, x.coords)
        return any(P.contains(p) for k, p in pc.reps.items() for P in self.explicit.get(k, []))

    def local_polytopes(self, chart: int, p) -> list:
        """Polytopes of ``chart`` whose union agrees with the set near ``p``."""
        p = Q.vec(p)
        if not self.is_preimage:
            return [P for P in self.explicit.get(chart, []) if P.contains(p)]
        out = []
        for D in chambers_containing(carrier(self.datum, p, check_region=False)):
            m, t = self.B.retraction_map(chart, D)
            for piece in self.A.pieces:
                P = Polytope(D.closure().halfspaces + _pullback(piece, m, t).halfspaces,
                             self.datum.rank)
                if P.contains(p):
                    out.append(P)
        return out

    def segment_escape(self, chart: int, p, q):
        """``None`` if ``[p, q]`` of ``chart`` lies in the set, else an exit parameter."""
        p, q = Q.vec(p), Q.vec(q)
        pts = wall_breakpoints(self.datum, p, q)
        d = Q.sub(q, p)
        ts = [_param(p, d, x) for x in pts]
        for (t0, x0), (t1, x1) in zip(zip(ts, pts), zip(ts[1:], pts[1:])):
            gap = self._subsegment_gap(chart, x0, x1)
            if gap is not None:
                return t0 + gap * (t1 - t0)
        if len(pts) == 1 and not self.contains(BuildingPoint(chart, p)):
            return Fraction(0)
        return None

    def _subsegment_gap(self, chart: int, x0, x1):
        """Parameter in [0, 1] of a point of ``[x0, x1]`` outside the set, or None."""
        if self.is_preimage:
            mid = Q.scale(Fraction(1, 2), Q.add(x0, x1))
            D = chambers_containing(carrier(self.datum, mid, check_region=False))[0]
            m, t = self.B.retraction_map(chart, D)
            y0, y1 = apply((m, t), x0), apply((m, t), x1)
            # rho is affine here, so for convex A the endpoints decide
            if len(self.A.pieces) == 1 and self.A.contains(y0) and self.A.contains(y1):
                return None
            return _coverage_gap(self.A.pieces, y0, y1)
        pc = self.B.point_class(chart, Q.scale(Fraction(1, 2), Q.add(x0, x1)))
        ivs = []
        for k in pc.charts:
            iso = pc.transfer(chart, k)
            a, b = apply(iso, x0), apply(iso, x1)
            ivs += [P.segment_interval(a, b) for P in self.explicit.get(k, [])]
        return _interval_gap(ivs)

    # -- materialization -----------------------------------------------------
    def pieces(self, chart: int, radius: int | None = None) -> list:
        """Per-chamber polytopes of ``chart`` covering the set in the region."""
        if not self.is_preimage:
            return list(self.explicit.get(chart, []))
        key = ("pieces", chart, radius)
        cache = self.__dict__.setdefault("_cache", {})
        if key not in cache:
            r = self._radius() if radius is None else radius
            out = []
            for D in chambers_in_region(self.datum, r):
                m, t = self.B.retraction_map(chart, D)
                if not self._meets_image(apply((m, t), D.barycenter())):
                    continue
                for piece in self.A.pieces:
                    P = Polytope(D.closure().halfspaces + _pullback(piece, m, t).halfspaces, self.datum.rank)
                    if P.vertices():
                        out.append(P)
            cache[key] = out
        return cache[key]

    def _meets_image(self, bary) -> bool:
        """Does the base chamber through ``bary`` meet ``A``?"""
        E = carrier(self.datum, bary, check_region=False)
        memo = self.__dict__.setdefault("_meets", {})
        if E.key not in memo:
            cl = E.closure()
            memo[E.key] = any(bool(cl.intersect(P).vertices()) for P in self.A.pieces)
        return memo[E.key]

    def _radius(self) -> int:
        d = self.datum
        verts = [v for P in self.A.pieces for v in G.clipped(d, P).vertices()]
        c = [v for v in self.B.center.vertices()] if isinstance(self.B.center, Cell) else []
        vals = [abs(d.root_value(f, v)) for v in verts + c for f in range(d.n_families)]
        return min(d.radius, math.ceil(max(vals, default=0)) + 1)

    def vertices(self) -> list:
        """Canonical vertices of all pieces, deterministic order."""
        seen, out = set(), []
        for k in range(self.B.n_charts):
            for P in self.pieces(k):
                for v in P.vertices():
                    c = self.B.canonical_point(BuildingPoint(k, v))
                    if c not in seen:
                        seen.add(c)
                        out.append(c)
        return sorted(out, key=lambda b: (b.chart, b.coords))

    def all_pieces(self) -> list:
        return [(k, P) for k in range(self.B.n_charts) for P in self.pieces(k)]

    def random_point(self, rng) -> BuildingPoint:
        allp = self.all_pieces()
        k, P = allp[int(rng.integers(len(allp)))]
        return BuildingPoint(k, G.random_point_in(P, rng))

    def random_boundary_point(self, rng) -> BuildingPoint:
        allp = self.all_pieces()
        k, P = allp[int(rng.integers(len(allp)))]
        return BuildingPoint(k, G.random_boundary_point(P, rng))

    def to_json(self) -> dict:
        if self.is_preimage:
            return {"preimage_of": self.A.to_json()}
        return {str(k): [P.to_json() for P in v] for k, v in sorted(self.explicit.items())}


def _param(p, d, x) -> Fraction:
    i = 0 if d[0] != 0 else 1
    return (x[i] - p[i]) / d[i]


def _pullback(piece: Polytope, m, t) -> Polytope:
    """``{x : m x + t in piece}``."""
    mi, ti = invert((m, t))
    return piece.transform(mi, ti)


def _coverage_gap(pieces, a, b):
    """Parameter of a point of ``[a, b]`` not covered by the pieces, or None."""
    a, b = Q.vec(a), Q.vec(b)
    return _interval_gap([P.segment_interval(a, b) for P in pieces])


def _interval_gap(ivs):
    ivs = sorted(iv for iv in ivs if iv is not None)
    reach = Fraction(0)
    started = False
    for lo, hi in ivs:
        if lo > reach or (not started and lo > 0):
            return (reach + lo) / 2 if started else lo / 2
        started = True
        reach = max(reach, hi)
    if not started:
        return Fraction(1, 2)
    if reach < 1:
        return (reach + 1) / 2
    return None


def preimage(B: AtlasBuilding, A: PolyhedralSet) -> BuildingSubset:
    """``rho^-1(A)`` for the retraction centered at the atlas center."""
    if A.dim != B.datum.rank:
        raise ValueError("set and apartment have different dimensions")
    return BuildingSubset(B, A)


def as_subset(datum_or_B, A) -> BuildingSubset:
    """Accept a BuildingSubset, or a PolyhedralSet/Polytope in a (thin) apartment."""
    if isinstance(A, BuildingSubset):
        return A
    if isinstance(A, Polytope):
        A = PolyhedralSet.convex(A)
    B = datum_or_B if isinstance(datum_or_B, AtlasBuilding) else thin_building(datum_or_B)
    return BuildingSubset(B, explicit={0: list(A.pieces)})


# ---------------------------------------------------------------------------
# links of sets
# ---------------------------------------------------------------------------

@dataclass
class SetLink:
    subset: LinkSubset
    lr: object  # LinkRetraction
    a: BuildingPoint

    @property
    def link(self):
        return self.lr.link


def link_of_set(S: BuildingSubset, a: BuildingPoint) -> SetLink:
    """Closed set of directions at ``a`` pointing into ``S``."""
    if not S.contains(a):
        raise ValueError(f"{a} does not lie in the set")
    lr = link_with_retraction(S.B, a) if S.B.center is not None else None
    link = lr.link
    out = LinkSubset(link)
    d = S.datum
    for piece, chart in enumerate(lr.charts):
        p = lr.builder.pieces[piece][1]
        polys = S.local_polytopes(chart, p)
        if d.rank == 1:
            for v in ((Fraction(1),), (Fraction(-1),)):
                if any(G.in_tangent_cone(G.active_constraints(P, p), v) for P in polys):
                    out.add_direction(link.locate(piece, v))
            continue
        angs: list = []
        for P in polys:
            angs = S1.union(angs, G.tangent_angles(d, G.active_constraints(P, p)))
        subset_from_angles(link, piece, angs, out)
        # isolated directions (degenerate pieces) survive as points
    return SetLink(out, lr, a)


def is_locally_convex_at(S, a, datum=None) -> ConvexityReport:
    """pi-convexity of ``Link_S a``; witnesses carry lifted ambient points."""
    if not isinstance(S, BuildingSubset):
        S = as_subset(datum, S)
    if not isinstance(a, BuildingPoint):
        a = BuildingPoint.make(0, a)
    sl = link_of_set(S, a)
    rep = is_pi_convex(sl.subset)
    rep.details["point"] = a
    w = rep.first("escaping_geodesic")
    if w is not None:
        for key in ("p", "q", "escape"):
            w.data[key + "_point"] = lift_direction(sl, w.data[key])
    return rep


def lift_direction(sl: SetLink, d: Direction, r: Fraction = Fraction(1, 16)) -> BuildingPoint:
    """Point at distance about ``r`` from ``a`` in direction ``d``."""
    lr = sl.lr
    piece, ang = lr.link.realize(d)
    chart, p = lr.builder.pieces[piece][0], lr.builder.pieces[piece][1]
    dat = lr.B.datum
    v = ang if dat.rank == 1 else G.rationalize_direction(dat, ang)
    return BuildingPoint(chart, Q.add(p, Q.scale(r, v)))


def is_cone_point(S, a, eps=Fraction(1, 4), datum=None) -> bool:
    """Check ``[a, b] in S`` or ``[a, b] & S = {a}`` on one direction per local face."""
    if not isinstance(S, BuildingSubset):
        S = as_subset(datum, S)
    if not isinstance(a, BuildingPoint):
        a = BuildingPoint.make(0, a)
    d = S.datum
    eps = Q.frac(eps)
    pc = S.B.point_class(a.chart, a.coords)
    for k in pc.charts:
        p = pc.reps[k]
        star = _star_radius(d, p)
        if float(eps) >= star:
            raise ValueError(f"eps={eps} exceeds the local uniqueness radius {star:.6g} at {a}")
        vecs, _, _ = fine_directions(d, p)
        dirs = list(vecs) + ([Q.add(vecs[i], vecs[(i + 1) % len(vecs)]) for i in range(len(vecs))]
                             if d.rank == 2 else [])
        polys = S.local_polytopes(k, p)
        for v in dirs:
            s = eps / Q.frac(math.ceil(d.norm(v) * 1024)) * 1024
            b = Q.add(p, Q.scale(s, v))
            ivs = [iv for iv in (P.segment_interval(p, b) for P in polys) if iv is not None]
            full = _coverage_gap(polys, p, b) is None
            only_a = all(iv == (0, 0) for iv in ivs)
            if not (full or only_a):
                return False
    return True


def _star_radius(d: CoxeterDatum, p) -> float:
    """Distance from ``p`` to the nearest wall not through ``p``."""
    best = math.inf
    for f, beta in enumerate(d.root_covectors):
        v = d.root_value(f, p)
        frac = v - math.floor(v)
        if frac == 0:
            gap = 1
        else:
            gap = min(frac, 1 - frac)
        best = min(best, float(gap) / math.sqrt(float(d.co_inner(beta, beta))))
    return best
