"""Euclidean buildings as finite atlases of apartment charts.

Every chart is a copy of the model apartment.  A gluing ``(i, j, iso, D)``
identifies ``x`` in chart ``i`` (``x`` in the closed convex chamber complex
``D``) with ``iso(x)`` in chart ``j``.  Points of the building are the
classes of the equivalence relation generated by the gluings; the canonical
representative sits in the chart with minimal id.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import rational as Q
from .coxeter import (Cell, CoxeterDatum, Wall, apply, carrier, chambers_containing,
                      chambers_in_region, compose, gallery_between, identity_iso, invert,
                      project_direction_to_cell)
from .link import LinkBuilder, LinkSpace, link_datum_at
from .polytope import PolyhedralSet, Polytope, common_denominator
from .report import ConvexityReport


class AtlasError(ValueError):
    """Raised when an operation needs apartments the atlas does not provide."""


@dataclass(frozen=True)
class Gluing:
    i: int
    j: int
    iso: tuple  # (matrix, translation) from chart i to chart j
    domain: PolyhedralSet  # in chart i coordinates
    word: tuple = ()

    def to_json(self) -> dict:
        m, t = self.iso
        return {"i": self.i, "j": self.j, "weyl_word": list(self.word),
                "matrix": [Q.fmt_vec(r) for r in m], "translation": Q.fmt_vec(t),
                "domain": self.domain.to_json()}


@dataclass(frozen=True)
class BuildingPoint:
    chart: int
    coords: tuple

    @classmethod
    def make(cls, chart: int, coords) -> "BuildingPoint":
        return cls(int(chart), Q.vec(coords))

    def to_json(self) -> dict:
        return {"chart": self.chart, "coords": Q.fmt_vec(self.coords)}


@dataclass(frozen=True)
class SectorGerm:
    """Chamber at infinity: the sector ``base + cone`` with ``cone`` the closed
    Weyl chamber containing the generic vector ``direction``."""

    base: tuple
    direction: tuple

    def cone_signs(self, datum: CoxeterDatum) -> tuple:
        s = tuple(Q.sign(datum.root_value(f, self.direction)) for f in range(datum.n_families))
        if 0 in s:
            raise ValueError("sector direction lies on a wall direction")
        return s

    def to_json(self) -> dict:
        return {"base": Q.fmt_vec(self.base), "direction": Q.fmt_vec(self.direction)}


def cone_rays(datum: CoxeterDatum, direction) -> list:
    """Extreme rays of the closed Weyl chamber containing ``direction``."""
    direction = Q.vec(direction)
    if datum.rank == 1:
        return [direction]
    sig = [Q.sign(datum.root_value(f, direction)) for f in range(datum.n_families)]
    rays = []
    for beta in datum.root_covectors:
        for d in ((-beta[1], beta[0]), (beta[1], -beta[0])):
            if all(s * Q.dot(b, d) >= 0 for s, b in zip(sig, datum.root_covectors)):
                if not any(Q.same_ray(d, r) for r in rays):
                    rays.append(d)
    return rays


@dataclass
class PolyPath:
    breakpoints: list  # BuildingPoints
    length: float

    def to_json(self) -> dict:
        return {"breakpoints": [b.to_json() for b in self.breakpoints], "length": self.length}


@dataclass
class PointClass:
    reps: dict    # chart -> coords
    parent: dict  # chart -> (previous chart, gluing iso) on the search tree
    base: int = 0
    conflict: tuple | None = None
    _isos: dict = field(default_factory=dict, repr=False)

    @property
    def charts(self) -> list:
        return sorted(self.reps)

    def iso_from_base(self, k: int) -> tuple:
        if k not in self._isos:
            if k == self.base:
                self._isos[k] = identity_iso(len(self.reps[k]))
            else:
                prev, iso = self.parent[k]
                self._isos[k] = compose(iso, self.iso_from_base(prev))
        return self._isos[k]

    def transfer(self, src: int, dst: int) -> tuple:
        """Gluing isometry from chart ``src`` to chart ``dst`` near the point."""
        if src == self.base:
            return self.iso_from_base(dst)
        return compose(self.iso_from_base(dst), invert(self.iso_from_base(src)))


class AtlasBuilding:
    """Finite atlas; immutable after construction apart from internal caches."""

    def __init__(self, datum: CoxeterDatum, n_charts: int, gluings: Sequence[Gluing],
                 center=None, name: str = "atlas"):
        self.datum = datum
        self.n_charts = int(n_charts)
        self.gluings = tuple(gluings)
        self.center = datum.fundamental_chamber if center is None else center
        self.name = name
        for g in self.gluings:
            if not (0 <= g.i < self.n_charts and 0 <= g.j < self.n_charts):
                raise ValueError(f"gluing references chart outside 0..{self.n_charts - 1}")
        self._out: dict = {k: [] for k in range(self.n_charts)}
        for g in self.gluings:
            self._out[g.i].append((g.j, g.iso, g.domain))
            self._out[g.j].append((g.i, invert(g.iso), g.domain.transform(*g.iso)))
        self._classes: dict = {}
        self._center_isos = None
        self._rho_cache: dict = {}

    # -- points ------------------------------------------------------------
    def point(self, chart: int, coords) -> BuildingPoint:
        self._check_chart(chart)
        return BuildingPoint.make(chart, coords)

    def _check_chart(self, chart: int) -> None:
        if not 0 <= chart < self.n_charts:
            raise ValueError(f"chart id {chart} out of range 0..{self.n_charts - 1}")

    def point_class(self, chart: int, coords, check: bool = False) -> PointClass:
        """Breadth-first closure of a point under the gluings (both directions).

        With ``check`` every gluing applicable to a visited representative is
        evaluated, so that cocycle conflicts are detected.
        """
        self._check_chart(chart)
        coords = Q.vec(coords)
        key = (chart, coords)
        if key in self._classes and not check:
            return self._classes[key]
        reps = {chart: coords}
        parent: dict = {}
        conflict = None
        todo = deque([chart])
        while todo:
            k = todo.popleft()
            p = reps[k]
            nums, den = common_denominator(p)
            for j, iso, dom in self._out[k]:
                if j in reps and not check:
                    continue
                if not dom.contains_int(nums, den):
                    continue
                q = apply(iso, p)
                if j in reps:
                    if reps[j] != q and conflict is None:
                        conflict = (j, reps[j], q)
                    continue
                reps[j] = q
                parent[j] = (k, iso)
                todo.append(j)
        pc = PointClass(reps, parent, chart, conflict)
        if conflict is None:
            for k, q in reps.items():
                self._classes[(k, q)] = pc
        self._classes[key] = pc
        return pc

    def canonical_point(self, x: BuildingPoint) -> BuildingPoint:
        pc = self.point_class(x.chart, x.coords)
        k = min(pc.reps)
        return BuildingPoint(k, pc.reps[k])

    def charts_of(self, x: BuildingPoint) -> list:
        return self.point_class(x.chart, x.coords).charts

    def same_point(self, x: BuildingPoint, y: BuildingPoint) -> bool:
        return self.canonical_point(x) == self.canonical_point(y)

    def express(self, x: BuildingPoint, chart: int):
        """Coordinates of ``x`` in ``chart`` or None."""
        return self.point_class(x.chart, x.coords).reps.get(chart)

    # -- center C ------------------------------------------------------------
    @property
    def center_is_chamber(self) -> bool:
        return isinstance(self.center, Cell)

    def center_isos(self) -> dict:
        """chart -> isometry from chart 0 carrying C (charts containing C)."""
        if self._center_isos is None:
            if self.center_is_chamber:
                pc = self.point_class(0, self.center.barycenter())
                self._center_isos = {k: pc.transfer(0, k) for k in pc.reps}
            else:
                self._center_isos = self._germ_isos(self.center)
        return self._center_isos

    def _germ_isos(self, c: SectorGerm) -> dict:
        c.cone_signs(self.datum)
        isos = {0: identity_iso(self.datum.rank)}
        dirs = {0: Q.vec(c.direction)}
        todo = deque([0])
        while todo:
            k = todo.popleft()
            rays = cone_rays(self.datum, dirs[k])
            for j, iso, dom in self._out[k]:
                if j in isos:
                    continue
                if not any(_recession_contains(piece, rays) for piece in dom.pieces):
                    continue
                isos[j] = compose(iso, isos[k])
                dirs[j] = Q.matvec(iso[0], dirs[k])
                todo.append(j)
        return isos

    def retract(self, x: BuildingPoint) -> tuple:
        """Retraction onto chart 0 centered at the atlas center (C or c)."""
        pc = self.point_class(x.chart, x.coords)
        cis = self.center_isos()
        for k in pc.charts:
            if k in cis:
                return apply(invert(cis[k]), pc.reps[k])
        what = "C" if self.center_is_chamber else "c"
        raise AtlasError(f"no chart contains both {Q.fmt_vec(x.coords)}@chart{x.chart} and the center {what} "
                         f"(atlas not {what}-saturated)")

    def retraction_map(self, chart: int, cell: Cell) -> tuple:
        """Affine map equal to the retraction on the closed ``cell`` of ``chart``."""
        key = (chart, cell.key)
        if key not in self._rho_cache:
            pc = self.point_class(chart, cell.barycenter())
            cis = self.center_isos()
            for k in pc.charts:
                if k in cis:
                    self._rho_cache[key] = compose(invert(cis[k]), pc.transfer(chart, k))
                    break
            else:
                raise AtlasError(f"cell {cell.key} of chart {chart} shares no chart with the center")
        return self._rho_cache[key]

    # -- two-point geometry ------------------------------------------------
    def common_charts(self, x: BuildingPoint, y: BuildingPoint) -> list:
        return sorted(set(self.charts_of(x)) & set(self.charts_of(y)))

    def common_apartment(self, x: BuildingPoint, y: BuildingPoint) -> int:
        cs = self.common_charts(x, y)
        if not cs:
            raise AtlasError("no common chart: the atlas violates the two-point axiom")
        return cs[0]

    def geodesic(self, x: BuildingPoint, y: BuildingPoint, chart: int | None = None) -> PolyPath:
        k = self.common_apartment(x, y) if chart is None else chart
        p, q = self.express(x, k), self.express(y, k)
        if p is None or q is None:
            raise AtlasError(f"chart {k} does not contain both points")
        pts = [BuildingPoint(k, r) for r in wall_breakpoints(self.datum, p, q)]
        return PolyPath(pts, self.datum.distance(p, q))

    def distance(self, x: BuildingPoint, y: BuildingPoint) -> float:
        k = self.common_apartment(x, y)
        return self.datum.distance(self.express(x, k), self.express(y, k))

    def geodesic_lengths(self, x: BuildingPoint, y: BuildingPoint) -> list:
        return [self.datum.distance(self.express(x, k), self.express(y, k))
                for k in self.common_charts(x, y)]

    # -- cells and chambers ------------------------------------------------
    def chamber_classes(self, radius: int = 3) -> dict:
        """Canonical chamber barycenters -> set of charts containing the chamber."""
        out: dict = {}
        local = chambers_in_region(self.datum, radius)
        for k in range(self.n_charts):
            for ch in local:
                pc = self.point_class(k, ch.barycenter())
                c0 = min(pc.reps)
                out.setdefault((c0, pc.reps[c0]), set()).update(pc.reps)
        return out

    def to_json(self) -> dict:
        center = self.center.to_json() if self.center is not None else None
        return {"name": self.name, "coxeter": self.datum.to_json(), "charts": self.n_charts,
                "gluings": [g.to_json() for g in self.gluings], "center": center}


def _recession_contains(piece: Polytope, rays: list) -> bool:
    return all(Q.dot(n, r) <= 0 for n, _ in piece.halfspaces for r in rays)


def wall_breakpoints(datum: CoxeterDatum, p, q) -> list:
    """``p``, the wall crossings of ``[p, q]`` in order, and ``q``."""
    p, q = Q.vec(p), Q.vec(q)
    if p == q:
        return [p]
    ts = {Fraction(0), Fraction(1)}
    for f in range(datum.n_families):
        a, b = datum.root_value(f, p), datum.root_value(f, q)
        if a == b:
            continue
        lo, hi = sorted((a, b))
        for k in range(math.ceil(lo), math.floor(hi) + 1):
            ts.add((k - a) / (b - a))
    d = Q.sub(q, p)
    return [Q.add(p, Q.scale(t, d)) for t in sorted(ts)]


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def _wall_image(h: Wall, iso) -> Wall:
    m, t = iso
    n2 = Q.matvec(Q.transpose(Q.inverse(m)), h.normal)
    return Wall.make(n2, h.offset + Q.dot(n2, t))


def _check_domain(datum: CoxeterDatum, g: Gluing, idx: int, rep: ConvexityReport) -> None:
    for piece in g.domain.pieces:
        for n, b in piece.halfspaces:
            if datum.family_of(Wall.make(n, b)) is None:
                rep.fail("domain_not_chamber_complex", gluing=idx, normal=Q.fmt_vec(n), offset=b)
                return
    if len(g.domain.pieces) > 1 and not _union_convex(datum, g.domain):
        rep.fail("domain_not_convex", gluing=idx, domain=g.domain.to_json())


def _union_convex(datum: CoxeterDatum, dom: PolyhedralSet) -> bool:
    """A union of convex pieces is convex iff segments between vertices stay inside."""
    clipped = [p.intersect(datum.region) for p in dom.pieces]
    verts = [v for p in clipped for v in p.vertices()]
    for a in range(len(verts)):
        for b in range(a + 1, len(verts)):
            cover = sorted(iv for iv in (p.segment_interval(verts[a], verts[b]) for p in clipped)
                           if iv is not None)
            reach = Fraction(0)
            for lo, hi in cover:
                if lo > reach:
                    return False
                reach = max(reach, hi)
            if reach < 1:
                return False
    return True


def validate_atlas(B: AtlasBuilding, radius: int = 3) -> ConvexityReport:
    """Desk-scale check of the building axioms the checkers rely on."""
    rep = ConvexityReport(True)
    d = B.datum
    walls = d.walls_in_region()
    for idx, g in enumerate(B.gluings):
        _check_domain(d, g, idx, rep)
        m, _ = g.iso
        if Q.matmul(Q.matmul(Q.transpose(m), d.gram), m) != d.gram:
            rep.fail("gluing_not_isometry", gluing=idx)
            continue
        for h in walls[:: max(1, len(walls) // 40)]:
            if d.family_of(_wall_image(h, g.iso)) is None:
                rep.fail("gluing_breaks_walls", gluing=idx, wall=h)
                break
    if not rep:
        return rep
    classes = B.chamber_classes(radius)
    # cocycle: each class meets each chart at most once
    for k in range(B.n_charts):
        for ch in chambers_in_region(d, radius):
            for v in ch.vertices() + [ch.barycenter()]:
                pc = B.point_class(k, v, check=True)
                if pc.conflict is not None:
                    j, a, b = pc.conflict
                    return rep.fail("cocycle", chart=j, start=BuildingPoint(k, v), first=a, second=b)
    # two-point axiom on chambers
    keys = sorted(classes)
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            if not classes[keys[a]] & classes[keys[b]]:
                return rep.fail("two_point_axiom", first=BuildingPoint(*keys[a]),
                                second=BuildingPoint(*keys[b]))
    if B.center_is_chamber:
        if not B.center.is_chamber:
            rep.fail("center_not_chamber", center=B.center)
    elif B.center is not None:
        missing = [k for k in range(B.n_charts) if k not in B.center_isos()]
        rep.details["charts_without_c"] = len(missing)
    rep.details.update({"charts": B.n_charts, "gluings": len(B.gluings),
                        "chamber_classes": len(classes), "radius": radius})
    return rep


def canonical_point(B: AtlasBuilding, x: BuildingPoint) -> BuildingPoint:
    return B.canonical_point(x)


def retract_center_chamber(B: AtlasBuilding, x: BuildingPoint) -> tuple:
    if not B.center_is_chamber:
        raise AtlasError("atlas center is not a chamber")
    return B.retract(x)


def retract_center_infinity(B: AtlasBuilding, x: BuildingPoint, germ: SectorGerm | None = None) -> tuple:
    if germ is not None and germ != B.center:
        B = with_center(B, germ)
    if B.center_is_chamber:
        raise AtlasError("atlas center is not a sector germ")
    return B.retract(x)


def with_center(B: AtlasBuilding, center) -> AtlasBuilding:
    out = AtlasBuilding(B.datum, B.n_charts, B.gluings, center, B.name)
    out._classes = B._classes
    return out


def project_chamber_at_infinity(B: AtlasBuilding, c: SectorGerm, chart: int, sigma: Cell):
    """``(chart, chamber)``: the chamber at ``sigma`` pointing into the germ ``c``."""
    isos = B._germ_isos(c)
    pc = B.point_class(chart, sigma.barycenter())
    for k in pc.charts:
        if k in isos:
            s2 = carrier(B.datum, pc.reps[k], check_region=False)
            return k, project_direction_to_cell(s2, Q.matvec(isos[k][0], c.direction))
    raise AtlasError("no chart contains both the cell and the chamber at infinity")


def common_apartment(B: AtlasBuilding, x: BuildingPoint, y: BuildingPoint) -> int:
    return B.common_apartment(x, y)


def geodesic(B: AtlasBuilding, x: BuildingPoint, y: BuildingPoint) -> PolyPath:
    return B.geodesic(x, y)


def type_preserving_map(datum: CoxeterDatum, D: Cell) -> tuple:
    """Affine Weyl element carrying the fundamental chamber onto ``D``."""
    iso = identity_iso(datum.rank)
    for h in gallery_between(datum.fundamental_chamber, D).walls():
        iso = compose(datum.reflection(h), iso)
    return iso


def panel_type(datum: CoxeterDatum, D: Cell, h: Wall) -> int:
    w = type_preserving_map(datum, D)
    return datum.simple_walls.index(_wall_image(h, invert(w)))


@dataclass(frozen=True)
class WeylDistance:
    word: tuple  # panel types of a minimal gallery
    iso: tuple   # the affine map in the common chart carrying D to D'
    chart: int

    def to_json(self) -> dict:
        m, t = self.iso
        return {"word": list(self.word), "chart": self.chart,
                "matrix": [Q.fmt_vec(r) for r in m], "translation": Q.fmt_vec(t)}


def weyl_distance(B: AtlasBuilding, D: tuple, E: tuple) -> WeylDistance:
    """Weyl distance of chambers given as ``(chart, Cell)``."""
    x = BuildingPoint(D[0], D[1].barycenter())
    y = BuildingPoint(E[0], E[1].barycenter())
    k = B.common_apartment(x, y)
    d = B.datum
    c1 = carrier(d, B.express(x, k), check_region=False)
    c2 = carrier(d, B.express(y, k), check_region=False)
    gal = gallery_between(c1, c2)
    word = []
    iso = identity_iso(d.rank)
    for ch, h in zip(gal.chambers, gal.walls()):
        word.append(panel_type(d, ch, h))
        iso = compose(d.reflection(h), iso)
    return WeylDistance(tuple(word), iso, k)


# ---------------------------------------------------------------------------
# links with the induced retraction
# ---------------------------------------------------------------------------

def _tangent_contains(dom: PolyhedralSet, p, v) -> bool:
    """Whether direction ``v`` at ``p`` points into the closed domain."""
    for piece in dom.pieces:
        if not piece.contains(p):
            continue
        if all(Q.dot(n, v) <= 0 for n, b in piece.halfspaces if Q.dot(n, p) == b):
            return True
    return False


@dataclass
class LinkRetraction:
    link: LinkSpace
    target: LinkSpace
    a: BuildingPoint
    rho_a: tuple
    builder: LinkBuilder
    charts: list
    B: AtlasBuilding

    def piece_of_chart(self, chart: int) -> int:
        return self.charts.index(chart)

    def chamber_at(self, piece: int, angle: float) -> Cell:
        """Chamber of the piece's chart entered at ``a`` in direction ``angle``."""
        chart, p, vecs, angles, _ = self.builder.pieces[piece]
        d = self.B.datum
        if d.rank == 1:
            v = vecs[0] if angle == 0 else vecs[1]
        else:
            m = len(angles)
            k = 0
            for i in range(m):
                s = (angle - angles[i]) % (2 * math.pi)
                L = (angles[(i + 1) % m] - angles[i]) % (2 * math.pi) or 2 * math.pi
                if s < L - 1e-12:
                    k = i
                    break
            v = self.builder.arc_probe(piece, k)
        return project_direction_to_cell(carrier(d, p, check_region=False), v)

    def map_direction(self, direction):
        """Image in the target link of a building-link direction."""
        d = self.B.datum
        piece, ang = self.link.realize(direction)
        chart = self.builder.pieces[piece][0]
        if d.rank == 1:
            vec = ang
            cham = project_direction_to_cell(carrier(d, self.builder.pieces[piece][1], check_region=False), vec)
            m, _ = self.B.retraction_map(chart, cham)
            return self.target.locate(0, Q.matvec(m, vec))
        cham = self.chamber_at(piece, ang)
        m, _ = self.B.retraction_map(chart, cham)
        y = d.to_euclid(Q.matvec(m, _rat_dir(d, ang)))
        return self.target.locate_angle(0, math.atan2(y[1], y[0]))


def _rat_dir(d: CoxeterDatum, ang: float):
    v = d.vector_at_angle(ang)
    return tuple(Fraction(x).limit_denominator(10**12) for x in v)


def link_with_retraction(B: AtlasBuilding, a: BuildingPoint) -> LinkRetraction:
    pc = B.point_class(a.chart, a.coords)
    charts = pc.charts
    builder = LinkBuilder(B.datum)
    for k in charts:
        builder.add_piece(k, pc.reps[k])
    for g in B.gluings:
        if g.i in pc.reps and g.j in pc.reps:
            p = pc.reps[g.i]
            if not g.domain.contains(p):
                continue
            builder.identify(charts.index(g.i), charts.index(g.j), g.iso[0],
                             lambda v, p=p, dom=g.domain: _tangent_contains(dom, p, v))
    link = builder.build()
    rho_a = B.retract(a)
    target = link_datum_at(B.datum, rho_a)
    return LinkRetraction(link, target, B.canonical_point(a), rho_a, builder, charts, B)


def chambers_at(B: AtlasBuilding, a: BuildingPoint) -> list:
    """Chambers of the building containing ``a`` as ``(chart, Cell)``, one per class."""
    pc = B.point_class(a.chart, a.coords)
    out, seen = [], set()
    for k in pc.charts:
        for ch in chambers_containing(carrier(B.datum, pc.reps[k], check_region=False)):
            c = B.canonical_point(BuildingPoint(k, ch.barycenter()))
            if c not in seen:
                seen.add(c)
                out.append((k, ch))
    return out
