"""Links as CAT(1) metric graphs.

The link of a point in a rank-2 apartment is a circle subdivided by the
directions of the walls through the point; in a building it is a metric
graph obtained by gluing such circles.  Rank-1 links are discrete sets whose
points are at distance pi from each other.

Directions are stored as ``(arc, t)`` with ``t`` in [0, 1] or as a vertex.
Because arc lengths are multiples of pi/m the parameter ``t`` of a generic
direction is irrational, so it is kept as a float (tolerance 1e-9).
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import circle as S1
from . import rational as Q
from .coxeter import Cell, CoxeterDatum, carrier, project_chamber_to_cell, side_of_wall
from .report import ConvexityReport

TOL = 1e-9


@dataclass(frozen=True)
class Direction:
    """A point of a link: either on an arc (``arc``, ``t``) or a ``vertex``."""

    arc: int | None = None
    t: float = 0.0
    vertex: int | None = None

    def to_json(self) -> dict:
        if self.vertex is not None:
            return {"vertex": self.vertex}
        return {"arc": self.arc, "t": round(self.t, 12)}


# ---------------------------------------------------------------------------
# metric graph
# ---------------------------------------------------------------------------

class LinkSpace:
    """Finite metric graph; ``arcs`` are ``(u, v, length)`` triples."""

    def __init__(self, n_vertices: int, arcs: Sequence, topology_tag: str,
                 labels: Sequence | None = None, wall_flags: Sequence | None = None):
        self.n_vertices = n_vertices
        self.arcs = [(int(u), int(v), float(L)) for u, v, L in arcs]
        if any(L <= 0 for _, _, L in self.arcs):
            raise ValueError("arc lengths must be positive")
        self.topology_tag = topology_tag
        self.labels = list(labels) if labels is not None else [f"v{i}" for i in range(n_vertices)]
        self.wall_flags = list(wall_flags) if wall_flags is not None else [True] * n_vertices
        self._vd = None
        self.tables = None  # filled by LinkBuilder: locate/realize support

    # -- structure ---------------------------------------------------------
    @property
    def is_discrete(self) -> bool:
        return not self.arcs

    def incident(self, v: int) -> list:
        """Arc germs at ``v`` as ``(arc, end)`` with end 0 (start) or 1 (end)."""
        out = []
        for i, (a, b, _) in enumerate(self.arcs):
            if a == v:
                out.append((i, 0))
            if b == v:
                out.append((i, 1))
        return out

    def total_length(self) -> float:
        return sum(L for _, _, L in self.arcs)

    def canonical(self, d: Direction) -> Direction:
        if d.vertex is not None:
            return d
        u, v, L = self.arcs[d.arc]
        if d.t * L <= TOL:
            return Direction(vertex=u)
        if (1 - d.t) * L <= TOL:
            return Direction(vertex=v)
        return d

    def at(self, arc: int, s: float) -> Direction:
        """Direction at arc-length ``s`` along ``arc``."""
        L = self.arcs[arc][2]
        return self.canonical(Direction(arc=arc, t=min(1.0, max(0.0, s / L))))

    def position(self, d: Direction):
        d = self.canonical(d)
        if d.vertex is not None:
            return None, 0.0
        return d.arc, d.t * self.arcs[d.arc][2]

    # -- distances ---------------------------------------------------------
    def vertex_distances(self):
        if self._vd is None:
            n = self.n_vertices
            self._vd = [self._dijkstra(s)[0] for s in range(n)]
        return self._vd

    def _adjacency(self):
        adj = [[] for _ in range(self.n_vertices)]
        for i, (u, v, L) in enumerate(self.arcs):
            adj[u].append((v, L, i))
            adj[v].append((u, L, i))
        return adj

    def _dijkstra(self, src: int, skip_arc: int | None = None):
        adj = self._adjacency()
        dist = [math.inf] * self.n_vertices
        dist[src] = 0.0
        pq = [(0.0, src)]
        while pq:
            d, x = heapq.heappop(pq)
            if d > dist[x]:
                continue
            for y, L, i in adj[x]:
                if i == skip_arc:
                    continue
                if d + L < dist[y]:
                    dist[y] = d + L
                    heapq.heappush(pq, (d + L, y))
        return dist, adj

    def _anchors(self, d: Direction):
        d = self.canonical(d)
        if d.vertex is not None:
            return [(d.vertex, 0.0)]
        u, v, L = self.arcs[d.arc]
        s = d.t * L
        return [(u, s), (v, L - s)]

    def distance(self, d1: Direction, d2: Direction) -> float:
        """Shortest-path distance; pi between distinct points of a discrete link."""
        d1, d2 = self.canonical(d1), self.canonical(d2)
        if self.is_discrete:
            return 0.0 if d1.vertex == d2.vertex else math.pi
        best = math.inf
        if d1.arc is not None and d1.arc == d2.arc:
            u, v, L = self.arcs[d1.arc]
            best = abs(d1.t - d2.t) * L
        vd = self.vertex_distances()
        for x, a in self._anchors(d1):
            for y, b in self._anchors(d2):
                best = min(best, a + vd[x][y] + b)
        return best

    def shortest_paths(self, d1: Direction, d2: Direction, limit: int = 64):
        """All shortest paths as lists of pieces ``(arc, s_from, s_to)``."""
        d1, d2 = self.canonical(d1), self.canonical(d2)
        if self.is_discrete:
            return (0.0 if d1.vertex == d2.vertex else math.pi), []
        n = self.n_vertices
        P = d1.vertex if d1.vertex is not None else n
        Qn = d2.vertex if d2.vertex is not None else n + 1
        splits: dict = {}
        for d, node in ((d1, P), (d2, Qn)):
            if d.vertex is None:
                splits.setdefault(d.arc, []).append((d.t * self.arcs[d.arc][2], node))
        edges = []  # (x, y, length, arc, s_x, s_y)
        for i, (u, v, L) in enumerate(self.arcs):
            pts = [(0.0, u)] + sorted(splits.get(i, [])) + [(L, v)]
            for (sa, a), (sb, b) in zip(pts, pts[1:]):
                if sb - sa > 0 or a != b:
                    edges.append((a, b, sb - sa, i, sa, sb))
        adj: dict = {}
        for e in edges:
            a, b, w, i, sa, sb = e
            adj.setdefault(a, []).append((b, w, (i, sa, sb)))
            adj.setdefault(b, []).append((a, w, (i, sb, sa)))
        dist = {P: 0.0}
        pq = [(0.0, P)]
        while pq:
            d, x = heapq.heappop(pq)
            if d > dist.get(x, math.inf):
                continue
            for y, w, _ in adj.get(x, []):
                if d + w < dist.get(y, math.inf) - 1e-15:
                    dist[y] = d + w
                    heapq.heappush(pq, (d + w, y))
        total = dist.get(Qn, math.inf)
        if math.isinf(total):
            return total, []
        paths: list = []

        def back(node, acc):
            if len(paths) >= limit:
                return
            if node == P:
                paths.append(list(reversed(acc)))
                return
            for y, w, piece in adj.get(node, []):
                if y in dist and abs(dist[y] + w - dist[node]) <= TOL and w > 0:
                    i, sa, sb = piece
                    back(y, acc + [(i, sb, sa)])

        back(Qn, [])
        return total, paths

    def girth(self) -> float:
        """Length of the shortest embedded cycle (inf for forests)."""
        best = math.inf
        for i, (u, v, L) in enumerate(self.arcs):
            if u == v:
                best = min(best, L)
                continue
            dist, _ = self._dijkstra(u, skip_arc=i)
            best = min(best, L + dist[v])
        return best

    def check_cat1(self) -> ConvexityReport:
        rep = ConvexityReport(True)
        if self.topology_tag == "circle" and abs(self.total_length() - 2 * math.pi) > TOL:
            rep.fail("circumference", length=self.total_length())
        g = self.girth()
        if g < 2 * math.pi - TOL:
            rep.fail("girth", girth=g)
        return rep

    # -- locating geometric directions (filled by LinkBuilder) -------------
    def locate(self, piece: int, vector) -> Direction:
        if self.tables is None:
            raise ValueError("this link carries no chart frame")
        return self.tables.locate(piece, vector)

    def locate_angle(self, piece: int, angle: float) -> Direction:
        return self.tables.locate_angle(piece, angle)

    def realize(self, d: Direction):
        """``(piece, angle)`` of a chart direction representing ``d``."""
        return self.tables.realize(self.canonical(d))

    def label(self, d: Direction) -> str:
        d = self.canonical(d)
        if d.vertex is not None:
            return self.labels[d.vertex]
        return f"arc{d.arc}"


def link_distance(d1: Direction, d2: Direction, link: LinkSpace) -> float:
    return link.distance(d1, d2)


# ---------------------------------------------------------------------------
# subsets
# ---------------------------------------------------------------------------

@dataclass
class LinkSubset:
    """Closed subset: merged subarcs plus isolated vertices."""

    link: LinkSpace
    intervals: dict = field(default_factory=dict)  # arc -> [(s0, s1)]
    points: set = field(default_factory=set)       # vertex ids

    @classmethod
    def full(cls, link: LinkSpace) -> "LinkSubset":
        s = cls(link)
        for i, (_, _, L) in enumerate(link.arcs):
            s.add_interval(i, 0.0, L)
        s.points.update(range(link.n_vertices))
        return s

    def copy(self) -> "LinkSubset":
        return LinkSubset(self.link, {k: list(v) for k, v in self.intervals.items()}, set(self.points))

    def add_interval(self, arc: int, s0: float, s1: float) -> None:
        L = self.link.arcs[arc][2]
        s0, s1 = max(0.0, min(s0, s1)), min(L, max(s0, s1))
        if s0 <= TOL:
            s0 = 0.0
        if s1 >= L - TOL:
            s1 = L
        ivs = self.intervals.setdefault(arc, [])
        ivs.append((s0, s1))
        ivs.sort()
        merged: list = []
        for a, b in ivs:
            if merged and a <= merged[-1][1] + TOL:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        self.intervals[arc] = merged
        u, v, _ = self.link.arcs[arc]
        if s0 == 0.0:
            self.points.add(u)
        if s1 == L:
            self.points.add(v)

    def add_direction(self, d: Direction) -> None:
        d = self.link.canonical(d)
        if d.vertex is not None:
            self.points.add(d.vertex)
        else:
            s = d.t * self.link.arcs[d.arc][2]
            self.add_interval(d.arc, s, s)

    def is_empty(self) -> bool:
        return not self.points and not any(self.intervals.values())

    def contains(self, d: Direction, tol: float = TOL) -> bool:
        d = self.link.canonical(d)
        if d.vertex is not None:
            return d.vertex in self.points
        s = d.t * self.link.arcs[d.arc][2]
        return any(a - tol <= s <= b + tol for a, b in self.intervals.get(d.arc, []))

    def covers(self, arc: int, s0: float, s1: float, tol: float = TOL) -> bool:
        lo, hi = min(s0, s1), max(s0, s1)
        return any(a - tol <= lo and hi <= b + tol for a, b in self.intervals.get(arc, []))

    def uncovered_point(self, arc: int, s0: float, s1: float):
        """Midpoint of the first gap of ``[s0, s1]`` not in the subset."""
        lo, hi = min(s0, s1), max(s0, s1)
        cur = lo
        for a, b in self.intervals.get(arc, []):
            if b < cur - TOL:
                continue
            if a > cur + TOL:
                return (cur + min(a, hi)) / 2
            cur = max(cur, b)
            if cur >= hi - TOL:
                return None
        return (cur + hi) / 2 if cur < hi - TOL else None

    def germ_covered(self, arc: int, end: int) -> bool:
        L = self.link.arcs[arc][2]
        for a, b in self.intervals.get(arc, []):
            if end == 0 and a <= TOL and b > TOL:
                return True
            if end == 1 and b >= L - TOL and a < L - TOL:
                return True
        return False

    def boundary_points(self) -> list:
        out = []
        for arc, ivs in sorted(self.intervals.items()):
            L = self.link.arcs[arc][2]
            for a, b in ivs:
                if a > TOL:
                    out.append(self.link.at(arc, a))
                if b < L - TOL and (b > a or a <= TOL):
                    out.append(self.link.at(arc, b))
        for v in sorted(self.points):
            if any(not self.germ_covered(i, e) for i, e in self.link.incident(v)):
                out.append(Direction(vertex=v))
        uniq: list = []
        for d in out:
            d = self.link.canonical(d)
            if d not in uniq:
                uniq.append(d)
        return uniq

    def measure(self) -> float:
        return sum(b - a for ivs in self.intervals.values() for a, b in ivs)

    def to_json(self) -> list:
        out = []
        for arc, ivs in sorted(self.intervals.items()):
            L = self.link.arcs[arc][2]
            for a, b in ivs:
                out.append([f"arc{arc}", [round(a / L, 12), round(b / L, 12)]])
        covered = {self.link.arcs[a][0] for a, ivs in self.intervals.items() if any(x <= TOL for x, _ in ivs)}
        covered |= {self.link.arcs[a][1] for a, ivs in self.intervals.items()
                    if any(y >= self.link.arcs[a][2] - TOL for _, y in ivs)}
        for v in sorted(self.points - covered):
            out.append([self.link.labels[v], "vertex"])
        return out


def is_pi_convex(S: LinkSubset, link: LinkSpace | None = None, tol: float = TOL) -> ConvexityReport:
    """Decide pi-convexity exactly up to float tolerance.

    A geodesic of length < pi that leaves ``S`` contains a sub-geodesic
    between two boundary points of ``S`` running outside ``S``, so it
    suffices to check all pairs of boundary points.
    """
    link = S.link if link is None else link
    rep = ConvexityReport(True, tolerance=tol)
    bps = S.boundary_points()
    rep.details["boundary_points"] = len(bps)
    for i in range(len(bps)):
        for j in range(i + 1, len(bps)):
            p, q = bps[i], bps[j]
            d, paths = link.shortest_paths(p, q)
            if d >= math.pi - tol:
                continue
            for path in paths:
                for arc, s0, s1 in path:
                    if not S.covers(arc, s0, s1, tol):
                        mid = S.uncovered_point(arc, s0, s1)
                        return rep.fail("escaping_geodesic", p=p, q=q, distance=d,
                                        escape=link.at(arc, mid if mid is not None else (s0 + s1) / 2))
    return rep


# ---------------------------------------------------------------------------
# building links from chart pieces
# ---------------------------------------------------------------------------

def fine_directions(datum: CoxeterDatum, a) -> tuple:
    """Root-hyperplane directions at ``a`` sorted by angle, with wall flags."""
    a = Q.vec(a)
    if datum.rank == 1:
        on_wall = datum.root_value(0, a).denominator == 1
        return [Q.vec([1]), Q.vec([-1])], [0.0, math.pi], [on_wall, on_wall]
    vecs = []
    for f, beta in enumerate(datum.root_covectors):
        d = (-beta[1], beta[0])
        flag = datum.root_value(f, a).denominator == 1
        vecs.append((d, flag))
        vecs.append((Q.scale(-1, d), flag))
    vecs.sort(key=lambda x: datum.direction_angle(x[0]))
    return [v for v, _ in vecs], [datum.direction_angle(v) for v, _ in vecs], [f for _, f in vecs]


class _UF:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


class LinkBuilder:
    """Glue fine circles (one per chart representative) into a link graph."""

    def __init__(self, datum: CoxeterDatum):
        self.datum = datum
        self.pieces: list = []  # (chart, point, vectors, angles, flags)
        self.vuf = _UF()
        self.auf = _UF()

    def add_piece(self, chart: int, point) -> int:
        vecs, angles, flags = fine_directions(self.datum, point)
        self.pieces.append((chart, Q.vec(point), vecs, angles, flags))
        idx = len(self.pieces) - 1
        for k in range(len(vecs)):
            self.vuf.find((idx, k))
            if self.datum.rank == 2:
                self.auf.find((idx, k))
        return idx

    def n_fine(self) -> int:
        return 2 if self.datum.rank == 1 else 2 * self.datum.n_families

    def arc_probe(self, piece: int, k: int):
        """Rational vector strictly inside fine arc ``k`` of a piece."""
        vecs = self.pieces[piece][2]
        return Q.add(vecs[k], vecs[(k + 1) % len(vecs)])

    def _index(self, piece: int, vector) -> int:
        for k, u in enumerate(self.pieces[piece][2]):
            if Q.same_ray(u, vector):
                return k
        raise ValueError("vector is not a root-hyperplane direction")

    def identify(self, pi: int, pj: int, lin, in_domain: Callable) -> None:
        """Identify fine cells of ``pi`` lying in the domain with their images in ``pj``.

        ``lin`` is the linear part of the gluing isometry and ``in_domain(v)``
        tells whether direction ``v`` at the base point points into the
        gluing domain.
        """
        vecs = self.pieces[pi][2]
        m = len(vecs)
        for k, u in enumerate(vecs):
            if in_domain(u):
                self.vuf.union((pi, k), (pj, self._index(pj, Q.matvec(lin, u))))
        if self.datum.rank == 1:
            return
        for k in range(m):
            if in_domain(self.arc_probe(pi, k)):
                x = self._index(pj, Q.matvec(lin, vecs[k]))
                y = self._index(pj, Q.matvec(lin, vecs[(k + 1) % m]))
                j = x if (x + 1) % m == y else y
                self.auf.union((pi, k), (pj, j))

    def build(self) -> LinkSpace:
        if self.datum.rank == 1:
            return self._build_discrete()
        return self._build_graph()

    def _build_discrete(self) -> LinkSpace:
        classes = sorted({self.vuf.find(x) for x in list(self.vuf.parent)})
        index = {c: i for i, c in enumerate(classes)}
        tag = "zero_sphere" if len(classes) == 2 else "graph"
        link = LinkSpace(len(classes), [], tag, labels=[f"d{c[0]}.{c[1]}" for c in classes],
                         wall_flags=[True] * len(classes))
        link.tables = _Tables(self, link, vertex_map={x: Direction(vertex=index[self.vuf.find(x)])
                                                      for x in list(self.vuf.parent)})
        return link

    def _build_graph(self) -> LinkSpace:
        m = self.n_fine()
        npieces = len(self.pieces)
        fine_arcs = [(p, k) for p in range(npieces) for k in range(m)]
        arc_classes = sorted({self.auf.find(a) for a in fine_arcs})
        vclasses = sorted({self.vuf.find((p, k)) for p in range(npieces) for k in range(m)})
        vflag = {c: False for c in vclasses}
        for p in range(npieces):
            for k in range(m):
                if self.pieces[p][4][k]:
                    vflag[self.vuf.find((p, k))] = True

        def length(p, k):
            ang = self.pieces[p][3]
            return (ang[(k + 1) % m] - ang[k]) % (2 * math.pi) or 2 * math.pi

        # fine graph on classes
        farcs = {}
        for c in arc_classes:
            p, k = c
            farcs[c] = (self.vuf.find((p, k)), self.vuf.find((p, (k + 1) % m)), length(p, k))
        incid: dict = {v: [] for v in vclasses}
        for c, (u, v, _) in farcs.items():
            incid[u].append((c, 0))
            incid[v].append((c, 1))
        keep = {v for v in vclasses if vflag[v] or len(incid[v]) != 2}
        # components without kept vertices become loops anchored at their min vertex
        seen_v: set = set()
        for v in vclasses:
            if v in seen_v:
                continue
            comp, todo = [], [v]
            seen_v.add(v)
            while todo:
                x = todo.pop()
                comp.append(x)
                for c, e in incid[x]:
                    u, w, _ = farcs[c]
                    y = w if e == 0 else u
                    if y not in seen_v:
                        seen_v.add(y)
                        todo.append(y)
            if not any(x in keep for x in comp):
                keep.add(min(comp))
        kept = sorted(keep)
        vid = {v: i for i, v in enumerate(kept)}
        coarse = []
        chain_of: dict = {}  # fine arc class -> (coarse arc, offset at class start, forward?)
        vertex_pos: dict = {}  # fine vertex class -> Direction
        for v in kept:
            vertex_pos[v] = Direction(vertex=vid[v])
        used: set = set()
        for v in kept:
            for c, e in incid[v]:
                if c in used:
                    continue
                idx = len(coarse)
                cur, end, off = v, e, 0.0
                chain = []
                while True:
                    used.add(c)
                    u, w, L = farcs[c]
                    forward = end == 0
                    chain_of[c] = (idx, off, forward)
                    off += L
                    nxt = w if forward else u
                    chain.append(c)
                    if nxt in keep:
                        break
                    vertex_pos[nxt] = ("pending", idx, off)
                    # continue through the other germ of nxt
                    arrived = (c, 1 if forward else 0)
                    others = [g for g in incid[nxt] if g != arrived]
                    if not others or others[0][0] in used:
                        break
                    c, end = others[0]
                coarse.append((vid[v], vid[nxt], off))
        link = LinkSpace(len(kept), coarse, "circle" if self._is_circle(len(kept), coarse) else "graph",
                         labels=[self._vlabel(v) for v in kept],
                         wall_flags=[vflag[v] for v in kept])
        for v, pos in list(vertex_pos.items()):
            if isinstance(pos, tuple):
                _, idx, off = pos
                vertex_pos[v] = link.at(idx, off)
        link.tables = _Tables(self, link, chain_of=chain_of, farcs=farcs, vertex_pos=vertex_pos)
        return link

    @staticmethod
    def _is_circle(nv: int, arcs: list) -> bool:
        deg = [0] * nv
        for u, v, _ in arcs:
            deg[u] += 1
            deg[v] += 1
        return all(d == 2 for d in deg) and abs(sum(L for *_, L in arcs) - 2 * math.pi) < 1e-7

    def _vlabel(self, v) -> str:
        p, k = v
        chart, _, vecs, _, _ = self.pieces[p]
        return f"c{chart}:" + ",".join(Q.fmt_vec(vecs[k]))


class _Tables:
    """Translation between chart directions and link points."""

    def __init__(self, builder: LinkBuilder, link: LinkSpace, chain_of=None, farcs=None,
                 vertex_pos=None, vertex_map=None):
        self.b = builder
        self.link = link
        self.chain_of = chain_of or {}
        self.farcs = farcs or {}
        self.vertex_pos = vertex_pos or {}
        self.vertex_map = vertex_map or {}

    def _fine_to_link(self, p: int, k: int, s: float) -> Direction:
        """Point at arc-length ``s`` from fine vertex ``k`` along fine arc ``k``."""
        b = self.b
        m = b.n_fine()
        cls = b.auf.find((p, k))
        idx, off, forward = self.chain_of[cls]
        u, w, L = self.farcs[cls]
        same = b.vuf.find((p, k)) == u
        if u == w:  # degenerate, should not happen in valid links
            same = True
        s_rep = s if same else L - s
        s_coarse = off + s_rep if forward else off + (L - s_rep)
        return self.link.at(idx, s_coarse)

    def locate(self, p: int, vector) -> Direction:
        b = self.b
        vecs = b.pieces[p][2]
        if b.datum.rank == 1:
            for k, u in enumerate(vecs):
                if Q.same_ray(u, Q.vec(vector)):
                    return self.vertex_map[(p, k)]
            raise ValueError("zero direction")
        vector = Q.vec(vector)
        if Q.is_zero(vector):
            raise ValueError("zero direction")
        for k, u in enumerate(vecs):
            if Q.same_ray(u, vector):
                return self.vertex_pos[b.vuf.find((p, k))]
        return self.locate_angle(p, b.datum.direction_angle(vector))

    def locate_angle(self, p: int, theta: float) -> Direction:
        b = self.b
        ang = b.pieces[p][3]
        m = len(ang)
        theta = S1.norm_angle(theta)
        for k in range(m):
            start = ang[k]
            L = (ang[(k + 1) % m] - start) % (2 * math.pi) or 2 * math.pi
            s = (theta - start) % (2 * math.pi)
            if s <= TOL or s >= 2 * math.pi - TOL:
                return self.vertex_pos[b.vuf.find((p, k))]
            if s < L:
                if L - s <= TOL:
                    return self.vertex_pos[b.vuf.find((p, (k + 1) % m))]
                return self._fine_to_link(p, k, s)
        raise AssertionError("angle not located")

    def realize(self, d: Direction):
        """``(piece, angle)`` for a link point; rank 1 gives ``(piece, vector)``."""
        b = self.b
        if b.datum.rank == 1:
            for (p, k), dd in sorted(self.vertex_map.items()):
                if dd == d:
                    return p, b.pieces[p][2][k]
            raise ValueError("unknown direction")
        if d.vertex is not None:
            for key in sorted(b.vuf.parent):
                if self.vertex_pos.get(b.vuf.find(key)) == d:
                    p, k = key
                    return p, b.pieces[p][3][k]
            raise ValueError("unknown vertex")
        s_target = d.t * self.link.arcs[d.arc][2]
        m = b.n_fine()
        for p in range(len(b.pieces)):
            ang = b.pieces[p][3]
            for k in range(m):
                cls = b.auf.find((p, k))
                idx, off, forward = self.chain_of[cls]
                if idx != d.arc:
                    continue
                u, w, L = self.farcs[cls]
                if not (off - TOL <= s_target <= off + L + TOL):
                    continue
                s_rep = s_target - off if forward else L - (s_target - off)
                same = b.vuf.find((p, k)) == u
                s = s_rep if same else L - s_rep
                return p, ang[k] + s
        raise ValueError("direction not realized")

    def fine_arcs_of_piece(self, p: int):
        ang = self.b.pieces[p][3]
        m = len(ang)
        for k in range(m):
            L = (ang[(k + 1) % m] - ang[k]) % (2 * math.pi) or 2 * math.pi
            yield k, ang[k], L


def subset_from_angles(link: LinkSpace, piece: int, cset: list, out: LinkSubset | None = None) -> LinkSubset:
    """Transfer a closed angular set of one chart piece into the link."""
    out = LinkSubset(link) if out is None else out
    tables = link.tables
    for k, start, L in tables.fine_arcs_of_piece(piece):
        for lo, hi in cset:
            for shift in (0.0, 2 * math.pi, -2 * math.pi):
                a, b = lo + shift - start, hi + shift - start
                a, b = max(a, 0.0), min(b, L)
                if a > b + TOL:
                    continue
                b = max(a, b)
                p0 = tables._fine_to_link(piece, k, a) if a > TOL else tables.locate_angle(piece, start)
                p1 = tables._fine_to_link(piece, k, b) if b < L - TOL else tables.locate_angle(piece, start + L)
                _add_between(out, p0, p1, a, b, L)
    return out


def _add_between(out: LinkSubset, p0: Direction, p1: Direction, a: float, b: float, L: float) -> None:
    link = out.link
    if b - a <= TOL:
        out.add_direction(p0)
        return
    # both ends lie on one coarse arc (a fine arc never spans a coarse vertex)
    arcs = {d.arc for d in (p0, p1) if d.vertex is None}
    if arcs:
        arc = arcs.pop()
        s0 = _pos_on(link, p0, arc)
        s1 = _pos_on(link, p1, arc)
        # on a loop arc a vertex end sits at 0 or L: take the one matching the length
        Lc = link.arcs[arc][2]
        if p0.vertex is not None and link.arcs[arc][0] == link.arcs[arc][1]:
            s0 = min((0.0, Lc), key=lambda x: abs(abs(s1 - x) - (b - a)))
        if p1.vertex is not None and link.arcs[arc][0] == link.arcs[arc][1]:
            s1 = min((0.0, Lc), key=lambda x: abs(abs(s0 - x) - (b - a)))
        out.add_interval(arc, s0, s1)
        return
    # both ends are vertices: find the coarse arc of exactly this length joining them
    for i, (u, v, Lc) in enumerate(link.arcs):
        if abs(Lc - (b - a)) <= 1e-7 and {u, v} == {p0.vertex, p1.vertex}:
            out.add_interval(i, 0.0, Lc)
            return
    raise AssertionError("could not place link interval")


def _pos_on(link: LinkSpace, d: Direction, arc: int) -> float:
    u, v, L = link.arcs[arc]
    if d.vertex is None:
        return d.t * L
    if d.vertex == u and d.vertex == v:
        return 0.0
    return 0.0 if d.vertex == u else L


# ---------------------------------------------------------------------------
# apartment links
# ---------------------------------------------------------------------------

def link_datum_at(datum: CoxeterDatum, a) -> LinkSpace:
    """Link of a point of the apartment, subdivided by the walls through it."""
    if datum.rank not in (1, 2):
        raise ValueError("unsupported rank")
    b = LinkBuilder(datum)
    b.add_piece(0, a)
    link = b.build()
    if datum.rank == 2:
        link.topology_tag = "circle"
    return link


def direction_of_segment(a, b, link: LinkSpace, piece: int = 0) -> Direction:
    a, b = Q.vec(a), Q.vec(b)
    if a == b:
        raise ValueError("degenerate segment: a == b")
    return link.locate(piece, Q.sub(b, a))


def angle_between_segments(datum: CoxeterDatum, a, b, c) -> float:
    a, b, c = Q.vec(a), Q.vec(b), Q.vec(c)
    if a == b or a == c:
        raise ValueError("degenerate segment")
    return datum.angle(Q.sub(b, a), Q.sub(c, a))


def halfcircle_towards(datum: CoxeterDatum, covector, side: int) -> list:
    """Closed set of directions ``d`` with ``side * covector . d >= 0``."""
    nv = datum.vector_of(covector)
    if side < 0:
        nv = Q.scale(-1, nv)
    return S1.ball(datum.direction_angle(nv), math.pi / 2)


def proj_angles(datum: CoxeterDatum, a, chamber_side: Callable) -> list:
    """Directions at ``a`` on the center's closed side of every wall through ``a``."""
    out = [(0.0, 2 * math.pi)]
    for h in datum.walls_through(a):
        out = S1.intersect(out, halfcircle_towards(datum, h.normal, chamber_side(h)))
    return out


def proj_link_chamber(datum: CoxeterDatum, a, C: Cell, link: LinkSpace | None = None) -> LinkSubset:
    """Closed set of directions at ``a`` pointing into ``Proj_sigma C``."""
    link = link_datum_at(datum, a) if link is None else link
    bc = C.barycenter()
    if datum.rank == 1:
        out = LinkSubset(link)
        for v in (Q.vec([1]), Q.vec([-1])):
            sigma = carrier(datum, a, check_region=False)
            P = project_chamber_to_cell(C, sigma)
            if P.contains_relint(Q.add(Q.vec(a), Q.scale(_tiny(datum, a), v))):
                out.add_direction(link.locate(0, v))
        return out
    return subset_from_angles(link, 0, proj_angles(datum, a, lambda h: side_of_wall(bc, h)))


def _tiny(datum, a):
    from fractions import Fraction
    return Fraction(1, 10**6)
