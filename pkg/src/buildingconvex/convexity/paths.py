"""Paths in buildings: retracted paths, angles, length metrics, ascending
geodesics and the local-to-global convexity verifier."""
from __future__ import annotations

import heapq
import itertools
import math
from fractions import Fraction

import numpy as np

from .. import rational as Q
from ..atlas import AtlasBuilding, BuildingPoint, PolyPath, link_with_retraction, wall_breakpoints
from ..coxeter import apply, carrier, chambers_containing
from ..link import Direction, LinkSubset
from ..polytope import PolyhedralSet, Polytope
from ..report import ConvexityReport
from . import geometry as G
from .conditions import away_covector
from .sets import BuildingSubset, _param, is_locally_convex_at, link_of_set


def _poly(A) -> Polytope:
    if isinstance(A, PolyhedralSet):
        if len(A.pieces) != 1:
            raise ValueError("A must be convex, given as a single polytope")
        return A.pieces[0]
    return A


# ---------------------------------------------------------------------------
# segments in one chart
# ---------------------------------------------------------------------------

class Segment:
    """Straight segment ``[p, q]`` of a chart, parametrized by ``s`` in [0, 1]."""

    def __init__(self, B: AtlasBuilding, chart: int, p, q):
        self.B, self.chart = B, chart
        self.p, self.q = Q.vec(p), Q.vec(q)
        if self.p == self.q:
            raise ValueError("degenerate segment")
        self.d = Q.sub(self.q, self.p)
        pts = wall_breakpoints(B.datum, self.p, self.q)
        self.crossings = [_param(self.p, self.d, x) for x in pts]
        self.length = B.datum.distance(self.p, self.q)

    @classmethod
    def between(cls, B: AtlasBuilding, x: BuildingPoint, y: BuildingPoint, chart: int | None = None):
        k = B.common_apartment(x, y) if chart is None else chart
        return cls(B, k, B.express(x, k), B.express(y, k))

    def at(self, s) -> tuple:
        return Q.add(self.p, Q.scale(Q.frac(s), self.d))

    def point(self, s) -> BuildingPoint:
        return BuildingPoint(self.chart, self.at(s))

    def _piece(self, s, after: bool) -> int:
        """Index ``i`` of the sub-segment ``[c_i, c_{i+1}]`` on the given side of ``s``."""
        cs = self.crossings
        for i in range(len(cs) - 1):
            if (cs[i] <= s < cs[i + 1]) if after else (cs[i] < s <= cs[i + 1]):
                return i
        # s = 1 from the right or s = 0 from the left: the adjacent end piece
        return len(cs) - 2 if after else 0

    def rho_map(self, i: int) -> tuple:
        cs = self.crossings
        mid = self.at((cs[i] + cs[i + 1]) / 2)
        D = chambers_containing(carrier(self.B.datum, mid, check_region=False))[0]
        return self.B.retraction_map(self.chart, D)

    def rho(self, s) -> tuple:
        s = Q.frac(s)
        return apply(self.rho_map(self._piece(s, True)), self.at(s))

    def rho_tangent(self, s, after: bool):
        s = Q.frac(s)
        if (after and s >= 1) or (not after and s <= 0):
            return None
        m, _ = self.rho_map(self._piece(s, after))
        return Q.matvec(m, self.d)


def retract_path(B: AtlasBuilding, path: PolyPath) -> list:
    """Chart-0 images of the breakpoints; the image path is affine in between."""
    pts = path.breakpoints
    out = []
    for a, b in zip(pts, pts[1:]):
        seg = Segment(B, a.chart, a.coords, B.express(b, a.chart))
        for s in seg.crossings:
            r = seg.rho(s)
            if not out or out[-1] != r:
                out.append(r)
    if len(pts) == 1:
        out.append(B.retract(pts[0]))
    return out


# ---------------------------------------------------------------------------
# angles
# ---------------------------------------------------------------------------

def _link_direction(lr, B: AtlasBuilding, a: BuildingPoint, x: BuildingPoint) -> Direction:
    k = next(c for c in B.common_charts(a, x) if c in lr.charts)
    piece = lr.piece_of_chart(k)
    p = lr.builder.pieces[piece][1]
    v = Q.sub(B.express(x, k), p)
    if Q.is_zero(v):
        raise ValueError("degenerate segment")
    return lr.link.locate(piece, v)


def building_angle(B: AtlasBuilding, a: BuildingPoint, b: BuildingPoint, c: BuildingPoint) -> float:
    """Angle at ``a`` between ``[a, b]`` and ``[a, c]``: distance in the link at ``a``."""
    lr = link_with_retraction(B, a)
    return lr.link.distance(_link_direction(lr, B, a, b), _link_direction(lr, B, a, c))


def check_angle_pi_concatenation(B: AtlasBuilding, a, b, c, n_pairs: int = 20, seed: int = 0,
                                 tol: float = 1e-9) -> ConvexityReport:
    """If the angle at ``a`` is pi, ``[b, a] + [a, c]`` is a geodesic.

    Samples ``p`` on ``[a, b]`` and ``q`` on ``[a, c]`` and compares the
    building distance with the path length ``|p - a| + |a - q|``.
    """
    rep = ConvexityReport(True, tolerance=tol)
    ang = building_angle(B, a, b, c)
    rep.details["angle"] = ang
    if abs(ang - math.pi) > tol:
        return rep.fail("angle_not_pi", angle=ang)
    rng = np.random.default_rng(seed)
    sb, sc = Segment.between(B, a, b), Segment.between(B, a, c)
    worst = 0.0
    for _ in range(n_pairs):
        u = Fraction(int(rng.integers(0, 1001)), 1000)
        w = Fraction(int(rng.integers(0, 1001)), 1000)
        p, q = sb.point(u), sc.point(w)
        expect = float(u) * sb.length + float(w) * sc.length
        got = B.distance(p, q)
        worst = max(worst, abs(got - expect))
        if abs(got - expect) > tol:
            rep.fail("not_geodesic", p=p, q=q, distance=got, path_length=expect)
            break
    rep.details["max_error"] = worst
    return rep


# ---------------------------------------------------------------------------
# length metrics
# ---------------------------------------------------------------------------

def _dijkstra(adj: dict, src, dst):
    dist, prev = {src: 0.0}, {}
    pq = [(0.0, 0, src)]
    tie = itertools.count(1)
    while pq:
        d, _, x = heapq.heappop(pq)
        if x == dst:
            break
        if d > dist.get(x, math.inf):
            continue
        for y, w in adj.get(x, ()):
            if d + w < dist.get(y, math.inf):
                dist[y], prev[y] = d + w, x
                heapq.heappush(pq, (d + w, next(tie), y))
    if dst not in dist:
        return math.inf, []
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    return dist[dst], path[::-1]


def link_length_distance(S: LinkSubset, d1: Direction, d2: Direction) -> tuple:
    """Length metric of a closed subset of a link; ``(length, node path)``."""
    link = S.link
    adj: dict = {}

    def node(arc, s):
        L = link.arcs[arc][2]
        if s <= 1e-12:
            return ("v", link.arcs[arc][0])
        if s >= L - 1e-12:
            return ("v", link.arcs[arc][1])
        return ("p", arc, round(s, 12))

    def edge(x, y, w):
        adj.setdefault(x, []).append((y, w))
        adj.setdefault(y, []).append((x, w))

    ends = []
    for d in (d1, d2):
        if not S.contains(d):
            raise ValueError(f"{d} is not in the subset")
        arc, s = link.position(d)
        ends.append(("v", link.canonical(d).vertex) if arc is None else node(arc, s))
    for arc, ivs in S.intervals.items():
        for a, b in ivs:
            cuts = sorted({a, b} | {s for e in ends if e[0] == "p" and e[1] == arc and a <= e[2] <= b
                                    for s in [e[2]]})
            for x, y in zip(cuts, cuts[1:]):
                edge(node(arc, x), node(arc, y), y - x)
    return _dijkstra(adj, ends[0], ends[1])


def _is_bend_candidate(S: BuildingSubset, v: BuildingPoint) -> bool:
    sl = link_of_set(S, v)
    return bool(sl.subset.boundary_points())


def length_metric_distance(S: BuildingSubset, x: BuildingPoint, y: BuildingPoint, tol: float = 1e-9) -> tuple:
    """Length metric of ``S``: ``(length, PolyPath)``.

    Shortest paths in a polyhedral set bend only at boundary vertices, so a
    visibility graph on those vertices plus ``x`` and ``y`` gives the
    length metric once straight shortcuts are applied.
    """
    B = S.B
    if not (S.contains(x) and S.contains(y)):
        raise ValueError("endpoints must lie in the set")
    nodes = [B.canonical_point(x), B.canonical_point(y)]
    for v in S.vertices():
        if v not in nodes and _is_bend_candidate(S, v):
            nodes.append(v)

    def visible(u, w):
        cs = B.common_charts(u, w)
        if not cs:
            return None
        k = cs[0]
        p, q = B.express(u, k), B.express(w, k)
        if p == q:
            return 0.0
        return B.datum.distance(p, q) if S.segment_escape(k, p, q) is None else None

    direct = visible(nodes[0], nodes[1])
    if direct is not None:
        return direct, PolyPath([nodes[0], nodes[1]], direct)
    adj: dict = {}
    for i, j in itertools.combinations(range(len(nodes)), 2):
        w = visible(nodes[i], nodes[j])
        if w is not None:
            adj.setdefault(i, []).append((j, w))
            adj.setdefault(j, []).append((i, w))
    length, path = _dijkstra(adj, 0, 1)
    if not path:
        raise ValueError("x and y lie in different path components of the set")
    # shortcut: drop intermediate nodes while the straight replacement stays in S
    pts = [nodes[i] for i in path]
    changed = True
    while changed:
        changed = False
        for i in range(len(pts) - 2):
            w = visible(pts[i], pts[i + 2])
            if w is not None:
                old = B.distance(pts[i], pts[i + 1]) + B.distance(pts[i + 1], pts[i + 2])
                if w < old - tol:
                    del pts[i + 1]
                    changed = True
                    break
    length = sum(B.distance(a, b) for a, b in zip(pts, pts[1:]))
    return length, PolyPath(pts, length)


# ---------------------------------------------------------------------------
# ascending geodesics
# ---------------------------------------------------------------------------

def _d_A(datum, P: Polytope, r) -> float:
    return datum.distance(r, G.nearest_point(datum, P, r))


def is_ascending_at(B: AtlasBuilding, A, gamma: Segment, s) -> ConvexityReport:
    """``(v, m) >= 0`` and ``(w, m) >= 0`` for the tangents of ``rho o gamma`` at ``s``.

    ``m`` is ``r - proj_A(r)`` for ``r = rho(gamma(s))``.  On the boundary of
    ``A`` it is the normal part of ``w``.  Signs are exact.
    """
    datum = B.datum
    P = _poly(A)
    s = Q.frac(s)
    r = gamma.rho(s)
    v, w = gamma.rho_tangent(s, False), gamma.rho_tangent(s, True)
    m = Q.sub(r, G.nearest_point(datum, P, r))
    if Q.is_zero(m):
        act = G.active_constraints(P, r)
        if not act:
            raise ValueError("rho(gamma(t)) lies in the interior of A")
        if w is not None:
            m = Q.sub(w, G.project_to_cone(datum, act, w))
    rep = ConvexityReport(True)
    vm = datum.inner(v, m) if v is not None else None
    wm = datum.inner(w, m) if w is not None else None
    if Q.is_zero(m) or (vm is not None and vm < 0) or (wm is not None and wm < 0):
        rep.fail("not_ascending", s=s, v=v, w=w, m=m, vm=vm, wm=wm)
    det = {"s": s, "v": v, "w": w, "m": m, "vm": vm, "wm": wm}
    if s in gamma.crossings and v is not None and w is not None and v != w:
        x = gamma.at(s)
        hs = datum.walls_through(x)
        rx = gamma.rho(s)
        for h in datum.walls_through(rx):
            n = datum.vector_of(away_covector(datum, B.center, h)) if B.center_is_chamber else None
            if n is None:
                n = datum.vector_of(h.normal)
            diff = Q.sub(w, v)
            if Q.parallel(diff, n):
                i = 0 if n[0] != 0 else 1
                det.update({"n": n, "wall": h, "lambda": diff[i] / n[i]})
                break
        det["walls_crossed"] = hs
    rep.details.update(det)
    return rep


def _exit_param(gamma: Segment, P: Polytope, s0, s1) -> Fraction:
    """Exact last parameter in ``[s0, s1]`` with ``rho(gamma)`` in ``P``; rho o gamma is linear there."""
    r0, r1 = gamma.rho(s0), gamma.rho(s1)
    d = Q.sub(r1, r0)
    t = Fraction(1)
    for n, b in P.halfspaces:
        nd = Q.dot(n, d)
        if nd > 0:
            t = min(t, (b - Q.dot(n, r0)) / nd)
    return s0 + max(t, Fraction(0)) * (s1 - s0)


def verify_ascending_propagation(B: AtlasBuilding, A, gamma: Segment, t_grid=None,
                                 tol: float = 1e-9) -> ConvexityReport:
    """``d_A o rho o gamma`` strictly increasing after ``gamma`` leaves ``rho^-1(A)``."""
    datum = B.datum
    P = _poly(A)
    grid = [Fraction(i, 64) for i in range(65)] if t_grid is None else [Q.frac(t) for t in t_grid]
    grid = sorted(set(grid) | set(gamma.crossings))
    vals = [_d_A(datum, P, gamma.rho(s)) for s in grid]
    rep = ConvexityReport(True, tolerance=tol)
    rep.details.update({"grid_size": len(grid)})
    exit_i = next((i for i, f in enumerate(vals) if f > tol), None)
    if exit_i is None:
        rep.details["exit"] = None
        return rep
    start = max(0, exit_i - 1)
    s_exit = _exit_param(gamma, P, grid[start], grid[exit_i]) if exit_i > 0 else grid[0]
    rep.details["exit"] = s_exit
    rep.details["initial"] = is_ascending_at(B, P, gamma, s_exit).verdict
    for i in range(start, len(grid) - 1):
        drop = vals[i + 1] - vals[i] < -tol
        reentry = i + 1 > exit_i and vals[i + 1] <= tol
        if drop or reentry:
            loc = is_ascending_at(B, P, gamma, grid[i]) if vals[i] > tol else None
            rep.fail("not_monotone", s=grid[i + 1], f_before=vals[i], f_after=vals[i + 1],
                     reentry=reentry, local=loc.details if loc is not None else None)
            break
    rep.details["values"] = [round(f, 12) for f in vals]
    return rep


# ---------------------------------------------------------------------------
# local-to-global verification
# ---------------------------------------------------------------------------

def _stratum_signature(S: BuildingSubset, a: BuildingPoint):
    c = S.B.canonical_point(a)
    p = c.coords
    polys = S.local_polytopes(c.chart, p)
    act = tuple(sorted(tuple(sorted((Q.primitive(n)[0], Q.sign(Q.primitive(n)[1])) for n, _ in
                                    G.active_constraints(P, p))) for P in polys))
    return (c.chart, carrier(S.datum, p, check_region=False).key, act)


def verify_global_convexity(B: AtlasBuilding, S: BuildingSubset, n_samples: int = 1000,
                            tol: float = 1e-9, seed: int = 0, max_witnesses: int = 8) -> ConvexityReport:
    """Local convexity at the strata of ``S``, then geodesics between sampled pairs.

    Phase 1 checks the canonical vertices and ``n_samples`` random boundary
    points, memoized by stratum (chart, carrier cell, active constraints).
    Phase 2 checks ``n_samples`` pairs: vertex pairs (at most half) and
    random pairs.  Each
    geodesic is split at the walls, where the retraction is affine, so
    containment is decided exactly.
    """
    rng = np.random.default_rng(seed)
    rep = ConvexityReport(True, tolerance=tol)
    verts = S.vertices()
    seen: dict = {}
    local_fail = 0
    points = list(verts) + [S.random_boundary_point(rng) for _ in range(n_samples)]
    for a in points:
        sig = _stratum_signature(S, a)
        if sig in seen:
            continue
        r = is_locally_convex_at(S, a)
        seen[sig] = r.verdict
        if not r.verdict:
            local_fail += 1
            if local_fail <= max_witnesses:
                w = r.first()
                rep.fail("local", point=S.B.canonical_point(a), distance=w.data.get("distance"),
                         p_point=w.data.get("p_point"), q_point=w.data.get("q_point"))
    rep.details["phase1"] = {"points": len(points), "strata": len(seen), "failures": local_fail}

    # vertex pairs first (they carry the extreme configurations), then random pairs
    pairs = list(itertools.islice(itertools.combinations(verts, 2), n_samples // 2))
    pairs += [(S.random_point(rng), S.random_point(rng)) for _ in range(n_samples - len(pairs))]
    global_fail = 0
    for x, y in pairs:
        k = B.common_apartment(x, y)
        p, q = B.express(x, k), B.express(y, k)
        if p == q:
            continue
        t = S.segment_escape(k, p, q)
        if t is None:
            continue
        global_fail += 1
        if global_fail <= max_witnesses:
            mid = BuildingPoint(k, Q.scale(Fraction(1, 2), Q.add(p, q)))
            rep.fail("global", x=x, y=y, chart=k, escape=BuildingPoint(k, Q.add(p, Q.scale(t, Q.sub(q, p)))),
                     midpoint=mid, midpoint_in_set=S.contains(mid))
    rep.details["phase2"] = {"pairs": len(pairs), "failures": global_fail}
    rep.details["sound"] = not (global_fail and not local_fail)
    return rep
