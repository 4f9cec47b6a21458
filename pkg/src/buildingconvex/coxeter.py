"""Affine Coxeter complexes of rank 1 and 2 with exact wall predicates.

Walls are the hyperplanes ``(beta, x) = k`` for ``beta`` running over the
positive roots of a crystallographic root system (given as covectors in the
chosen coordinates) and ``k`` over the integers.  A cell is then encoded by
one integer code per root family::

    code = 2k      the cell lies on the wall (beta, x) = k
    code = 2k + 1  the cell lies in the open slab k < (beta, x) < k + 1

so chambers are exactly the cells whose codes are all odd.  Codes are
computed by exact rational evaluation, which makes carriers, projections and
galleries robust.

Normalisations per ``type_tag`` (coordinates, Gram matrix, root covectors):

=========  =======================  ========================================
tag        coordinates              walls
=========  =======================  ========================================
A1affine   line, gram [1]           x = k
A1xA1      plane, gram I            x1 = k, x2 = k
A2affine   simple-root basis,       2x1 - x2 = k, -x1 + 2x2 = k, x1 + x2 = k
           gram [[2,-1],[-1,2]]
C2affine   plane, gram I            x1 - x2 = k, x2 = k, x1 = k, x1 + x2 = k
G2affine   simple-root basis,       the six positive roots of G2
           gram [[2,-3],[-3,6]]
=========  =======================  ========================================
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from . import rational as Q
from .polytope import Polytope

MINUS, ZERO, PLUS = -1, 0, 1

# (gram, simple root covectors, positive roots as integer combinations of simples)
_TYPES = {
    "A1affine": ([[1]], [[1]], [[1]]),
    "A1xA1": ([[1, 0], [0, 1]], [[1, 0], [0, 1]], [[1, 0], [0, 1]]),
    "A2affine": ([[2, -1], [-1, 2]], [[2, -1], [-1, 2]], [[1, 0], [0, 1], [1, 1]]),
    "C2affine": ([[1, 0], [0, 1]], [[1, -1], [0, 1]], [[1, 0], [0, 1], [1, 1], [1, 2]]),
    "G2affine": ([[2, -3], [-3, 6]], [[2, -3], [-3, 6]],
                 [[1, 0], [0, 1], [1, 1], [2, 1], [3, 1], [3, 2]]),
}

# sorted off-diagonal Coxeter numbers among the walls of a chamber (0 = infinity)
_EXPECTED_M = {
    "A1affine": [0],
    "A1xA1": [0, 0, 2, 2, 2, 2],
    "A2affine": [3, 3, 3],
    "C2affine": [2, 4, 4],
    "G2affine": [2, 3, 6],
}

TYPE_TAGS = tuple(_TYPES)


@dataclass(frozen=True, order=True)
class Wall:
    """Affine hyperplane ``normal . x = offset`` in canonical scaling."""

    normal: tuple
    offset: Fraction

    @classmethod
    def make(cls, normal, offset) -> "Wall":
        n = Q.vec(normal)
        pn, c = Q.primitive(n)
        return cls(pn, Q.frac(offset) * c)

    def value(self, p: Sequence):
        return Q.dot(self.normal, p) - self.offset

    def to_json(self) -> dict:
        return {"normal": Q.fmt_vec(self.normal), "offset": Q.fmt(self.offset)}


def side_of_wall(p: Sequence, h: Wall) -> int:
    """Exact sign of ``<normal, p> - offset``: -1, 0 or +1."""
    if len(p) != len(h.normal):
        raise ValueError(f"point of dimension {len(p)} against wall of dimension {len(h.normal)}")
    return Q.sign(h.value(Q.vec(p)))


@dataclass(frozen=True)
class CoxeterDatum:
    type_tag: str
    gram: tuple
    simple_covectors: tuple
    root_covectors: tuple
    radius: int = 8

    @classmethod
    def from_type(cls, type_tag: str, radius: int = 8, gram=None) -> "CoxeterDatum":
        if type_tag not in _TYPES:
            raise ValueError(f"unknown type_tag {type_tag!r}; expected one of {TYPE_TAGS}")
        g, simples, positive = _TYPES[type_tag]
        if gram is not None:
            g = gram
        g = Q.mat(g)
        simples = Q.mat(simples)
        roots = tuple(
            tuple(sum((c * s[i] for c, s in zip(comb, simples)), Fraction(0))
                  for i in range(len(g)))
            for comb in positive)
        datum = cls(type_tag, g, simples, roots, int(radius))
        datum.check()
        return datum

    # -- geometry ----------------------------------------------------------
    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def n_families(self) -> int:
        return len(self.root_covectors)

    @cached_property
    def gram_inv(self):
        return Q.inverse(self.gram)

    @cached_property
    def frame(self):
        """Float matrix ``L^T`` with ``G = L L^T``; maps coordinates to R^rank."""
        g = [[float(x) for x in r] for r in self.gram]
        if self.rank == 1:
            return [[math.sqrt(g[0][0])]]
        l11 = math.sqrt(g[0][0])
        l21 = g[1][0] / l11
        l22 = math.sqrt(g[1][1] - l21 * l21)
        return [[l11, l21], [0.0, l22]]

    def to_euclid(self, p: Sequence) -> tuple:
        f = self.frame
        x = [float(a) for a in p]
        return tuple(sum(f[i][j] * x[j] for j in range(self.rank)) for i in range(self.rank))

    def from_euclid(self, y: Sequence) -> tuple:
        f = self.frame
        if self.rank == 1:
            return (y[0] / f[0][0],)
        x2 = y[1] / f[1][1]
        x1 = (y[0] - f[0][1] * x2) / f[0][0]
        return (x1, x2)

    def inner(self, u: Sequence, v: Sequence):
        """Exact Gram inner product of two vectors."""
        return Q.dot(u, Q.matvec(self.gram, v))

    def co_inner(self, m: Sequence, n: Sequence):
        """Exact inner product of two covectors (dual Gram form)."""
        return Q.dot(m, Q.matvec(self.gram_inv, n))

    def norm(self, u: Sequence) -> float:
        return math.sqrt(float(self.inner(u, u)))

    def distance(self, p: Sequence, q: Sequence) -> float:
        return self.norm(Q.sub(q, p))

    def vector_of(self, covector: Sequence) -> tuple:
        """Gram dual of a covector: the vector ``v`` with ``<v, x> = n . x``."""
        return Q.matvec(self.gram_inv, Q.vec(covector))

    def angle(self, u: Sequence, v: Sequence) -> float:
        """Unsigned angle between two nonzero vectors, exact for parallel ones."""
        if self.rank == 1 or Q.parallel(u, v):
            return 0.0 if self.inner(u, v) > 0 else math.pi
        yu, yv = self.to_euclid(u), self.to_euclid(v)
        cross = yu[0] * yv[1] - yu[1] * yv[0]
        return abs(math.atan2(cross, yu[0] * yv[0] + yu[1] * yv[1]))

    def direction_angle(self, u: Sequence) -> float:
        """Angle in [0, 2 pi) of a vector in the orthonormal frame (rank 2)."""
        y = self.to_euclid(u)
        a = math.atan2(y[1], y[0])
        return a + 2 * math.pi if a < 0 else a

    def vector_at_angle(self, theta: float) -> tuple:
        return self.from_euclid((math.cos(theta), math.sin(theta)))

    # -- walls -------------------------------------------------------------
    def wall(self, family: int, k) -> Wall:
        return Wall.make(self.root_covectors[family], k)

    def family_of(self, h: Wall):
        """``(family, k)`` if ``h`` is a wall of the arrangement, else ``None``."""
        for f, beta in enumerate(self.root_covectors):
            pb, c = Q.primitive(beta)
            if pb != h.normal:
                continue
            k = h.offset / c
            return (f, int(k)) if k.denominator == 1 else None
        return None

    def root_value(self, family: int, p: Sequence):
        return Q.dot(self.root_covectors[family], p)

    def walls_through(self, p: Sequence) -> list:
        p = Q.vec(p)
        out = []
        for f in range(self.n_families):
            v = self.root_value(f, p)
            if v.denominator == 1:
                out.append(self.wall(f, v))
        return sorted(out)

    @cached_property
    def region(self) -> Polytope:
        """Bounding polytope ``|(beta, x)| <= radius`` of the modeled region."""
        hs = []
        for beta in self.root_covectors:
            hs.append((beta, Fraction(self.radius)))
            hs.append((Q.scale(-1, beta), Fraction(self.radius)))
        return Polytope(tuple(hs), self.rank)

    def in_region(self, p: Sequence) -> bool:
        return self.region.contains(Q.vec(p))

    def walls_in_region(self) -> list:
        return [self.wall(f, k) for f in range(self.n_families)
                for k in range(-self.radius, self.radius + 1)]

    # -- reflections -------------------------------------------------------
    def reflection(self, h: Wall):
        """Affine reflection across ``h`` as ``(matrix, translation)``."""
        n = h.normal
        nv = self.vector_of(n)
        nn = Q.dot(n, nv)
        size = self.rank
        m = tuple(tuple((Fraction(int(i == j)) - 2 * nv[i] * n[j] / nn) for j in range(size))
                  for i in range(size))
        t = tuple(2 * h.offset * nv[i] / nn for i in range(size))
        return m, t

    def simple_reflection(self, i: int):
        return self.reflection(Wall.make(self.simple_covectors[i], 0))

    def word_isometry(self, word: Sequence[int], translation=None):
        """Linear Weyl element ``s_{w1} ... s_{wk}`` followed by a translation."""
        m = Q.identity(self.rank)
        for i in word:
            si, _ = self.simple_reflection(int(i))
            m = Q.matmul(m, si)
        t = Q.vec(translation) if translation is not None else tuple(Fraction(0) for _ in range(self.rank))
        return m, t

    # -- invariants --------------------------------------------------------
    def check(self) -> None:
        g = self.gram
        if any(g[i][j] != g[j][i] for i in range(self.rank) for j in range(self.rank)):
            raise ValueError("gram must be symmetric")
        if g[0][0] <= 0 or Q.det(g) <= 0:
            raise ValueError("gram must be positive definite")
        for beta in self.root_covectors:
            m, _ = self.reflection(Wall.make(beta, 0))
            if Q.matmul(Q.matmul(Q.transpose(m), g), m) != g:
                raise ValueError("reflection does not preserve gram")
        if self.coxeter_numbers() != _EXPECTED_M[self.type_tag]:
            raise ValueError(
                f"chamber walls give Coxeter numbers {self.coxeter_numbers()}, "
                f"expected {_EXPECTED_M[self.type_tag]} for {self.type_tag}")

    @cached_property
    def fundamental_chamber(self) -> "Cell":
        return Cell(tuple(1 for _ in range(self.n_families)), self)

    @cached_property
    def simple_walls(self) -> list:
        """Walls carrying a panel of the fundamental chamber."""
        return [h for h in panel_walls(self.fundamental_chamber)]

    def coxeter_numbers(self) -> list:
        """Orders of products of reflections in the fundamental chamber's walls.

        Relations are verified on words up to length 12; 0 stands for an
        infinite order (parallel walls).
        """
        refl = [self.reflection(h) for h in self.simple_walls]
        out = []
        for a, b in itertools.combinations(refl, 2):
            m = _compose(a, b)
            p = (Q.identity(self.rank), tuple(Fraction(0) for _ in range(self.rank)))
            order = 0
            for k in range(1, 7):
                p = _compose(p, m)
                if p[0] == Q.identity(self.rank) and Q.is_zero(p[1]):
                    order = k
                    break
            out.append(order)
        for a in refl:
            sq = _compose(a, a)
            if sq[0] != Q.identity(self.rank) or not Q.is_zero(sq[1]):
                raise ValueError("reflection is not an involution")
        return sorted(out)

    def to_json(self) -> dict:
        return {"type_tag": self.type_tag, "gram": [Q.fmt_vec(r) for r in self.gram],
                "radius": self.radius}


def _compose(a, b):
    """``a o b`` for affine maps given as (matrix, translation)."""
    ma, ta = a
    mb, tb = b
    return Q.matmul(ma, mb), Q.add(Q.matvec(ma, tb), ta)


def apply(iso, p):
    m, t = iso
    return Q.add(Q.matvec(m, p), t)


def compose(a, b):
    return _compose(a, b)


def invert(iso):
    m, t = iso
    mi = Q.inverse(m)
    return mi, Q.scale(-1, Q.matvec(mi, t))


def identity_iso(rank: int):
    return Q.identity(rank), tuple(Fraction(0) for _ in range(rank))


# ---------------------------------------------------------------------------
# cells
# ---------------------------------------------------------------------------

_CLOSURES: dict = {}
_REALIZABLE: dict = {}


def _code(v: Fraction) -> int:
    if v.denominator == 1:
        return 2 * int(v)
    return 2 * math.floor(v) + 1


@dataclass(frozen=True)
class Cell:
    """A face of the wall arrangement, identified by its code vector."""

    key: tuple
    datum: CoxeterDatum = field(compare=False, hash=False, repr=False)

    @property
    def is_chamber(self) -> bool:
        return all(c % 2 == 1 for c in self.key)

    def zero_walls(self) -> list:
        return sorted(self.datum.wall(f, c // 2) for f, c in enumerate(self.key) if c % 2 == 0)

    def positive_walls(self) -> list:
        """Bounding walls with the side the cell lies on (strict inequalities)."""
        out = []
        for f, c in enumerate(self.key):
            if c % 2 == 1:
                k = c // 2
                lo, hi = self.datum.wall(f, k), self.datum.wall(f, k + 1)
                out.append((lo, _orient(self.datum, f, lo, +1)))
                out.append((hi, _orient(self.datum, f, hi, -1)))
        return out

    def closure(self) -> Polytope:
        ck = (self.datum.gram, self.datum.root_covectors, self.key)
        if ck not in _CLOSURES:
            _CLOSURES[ck] = self._closure()
        return _CLOSURES[ck]

    def _closure(self) -> Polytope:
        hs = []
        for f, c in enumerate(self.key):
            beta = self.datum.root_covectors[f]
            neg = Q.scale(-1, beta)
            if c % 2 == 0:
                k = Fraction(c // 2)
                hs += [(beta, k), (neg, -k)]
            else:
                k = Fraction(c // 2)
                hs += [(beta, k + 1), (neg, -k)]
        return Polytope(tuple(hs), self.datum.rank)

    def vertices(self) -> list:
        return self.closure().vertices()

    def barycenter(self) -> tuple:
        return self.closure().barycenter()

    @property
    def dimension(self) -> int:
        zw = [self.datum.root_covectors[f] for f, c in enumerate(self.key) if c % 2 == 0]
        if not zw:
            return self.datum.rank
        if self.datum.rank == 1 or all(Q.parallel(zw[0], z) for z in zw):
            return self.datum.rank - 1
        return 0

    def is_realizable(self) -> bool:
        ck = (self.datum.gram, self.datum.root_covectors, self.key)
        if ck not in _REALIZABLE:
            _REALIZABLE[ck] = bool(self.vertices()) and \
                carrier(self.datum, self.barycenter(), check_region=False).key == self.key
        return _REALIZABLE[ck]

    def contains(self, p) -> bool:
        """Closed-cell membership."""
        return self.closure().contains(Q.vec(p))

    def contains_relint(self, p) -> bool:
        return carrier(self.datum, p, check_region=False).key == self.key

    def is_face_of(self, other: "Cell") -> bool:
        """``self <= other`` in the face order (closure inclusion)."""
        for a, b in zip(self.key, other.key):
            if b % 2 == 0:
                if a != b:
                    return False
            elif a % 2 == 0:
                if a not in (b - 1, b + 1):
                    return False
            elif a != b:
                return False
        return True

    def to_json(self) -> dict:
        return {"key": list(self.key), "barycenter": Q.fmt_vec(self.barycenter())}


def _orient(datum, family, wall, side):
    """Translate a side w.r.t. the root covector into a side w.r.t. the canonical wall."""
    _, c = Q.primitive(datum.root_covectors[family])
    return side if c > 0 else -side


def carrier(datum: CoxeterDatum, p: Sequence, check_region: bool = True) -> Cell:
    """Smallest cell containing ``p`` (``p`` lies in its relative interior)."""
    p = Q.vec(p)
    if len(p) != datum.rank:
        raise ValueError("dimension mismatch")
    if check_region and not datum.in_region(p):
        raise ValueError(f"point {Q.fmt_vec(p)} lies outside the modeled region")
    return Cell(tuple(_code(datum.root_value(f, p)) for f in range(datum.n_families)), datum)


def chamber_of(datum: CoxeterDatum, p: Sequence) -> Cell:
    c = carrier(datum, p)
    if not c.is_chamber:
        raise ValueError("point is not in the interior of a chamber")
    return c


def separating_walls(C: Cell, D: Cell) -> list:
    """Walls separating two chambers, in canonical wall order."""
    if not (C.is_chamber and D.is_chamber):
        raise ValueError("separating_walls expects chambers")
    out = []
    for f, (a, b) in enumerate(zip(C.key, D.key)):
        ka, kb = a // 2, b // 2
        for j in range(min(ka, kb) + 1, max(ka, kb) + 1):
            out.append(C.datum.wall(f, j))
    return sorted(out)


def strictly_separating_walls(sigma: Cell, C: Cell) -> list:
    """Walls with ``sigma`` and chamber ``C`` in opposite open halfspaces."""
    out = []
    for f, (s, c) in enumerate(zip(sigma.key, C.key)):
        kc = c // 2
        if s % 2 == 1:
            ks = s // 2
            lo, hi = min(ks, kc) + 1, max(ks, kc)
            js = range(lo, hi + 1) if ks != kc else range(0)
        else:
            v = s // 2
            js = range(kc + 1, v) if v > kc else range(v + 1, kc + 1)
        out.extend(C.datum.wall(f, j) for j in js)
    return sorted(out)


def panel_walls(C: Cell) -> list:
    """Walls that carry a codimension-one face of chamber ``C``."""
    # a facet wall carries ``rank`` vertices of the closure
    verts = C.vertices()
    d = C.datum
    out = []
    for f, c in enumerate(C.key):
        for k in (c // 2, c // 2 + 1):
            if sum(1 for v in verts if d.root_value(f, v) == k) >= d.rank:
                out.append(d.wall(f, k))
    return sorted(out)


def cross_panel(C: Cell, h: Wall) -> Cell:
    fk = C.datum.family_of(h)
    if fk is None:
        raise ValueError("not a wall of the arrangement")
    f, k = fk
    c = C.key[f]
    new = 2 * k + 1 if c == 2 * k - 1 else 2 * k - 1
    return Cell(C.key[:f] + (new,) + C.key[f + 1:], C.datum)


def project_chamber_to_cell(C: Cell, sigma: Cell) -> Cell:
    """Chamber ``>= sigma`` on ``C``'s side of every wall through ``sigma``."""
    if not C.is_chamber:
        raise ValueError("C must be a chamber")
    key = []
    for s, c in zip(sigma.key, C.key):
        if s % 2 == 1:
            key.append(s)
        else:
            key.append(s + 1 if c > s else s - 1)
    return Cell(tuple(key), C.datum)


def project_direction_to_cell(sigma: Cell, direction: Sequence) -> Cell:
    """Chamber ``>= sigma`` entered by moving from ``sigma`` along ``direction``.

    ``direction`` must not be parallel to any wall through ``sigma``.
    """
    key = []
    for f, s in enumerate(sigma.key):
        if s % 2 == 1:
            key.append(s)
            continue
        v = Q.dot(sigma.datum.root_covectors[f], direction)
        if v == 0:
            raise ValueError("direction is parallel to a wall through the cell")
        key.append(s + 1 if v > 0 else s - 1)
    return Cell(tuple(key), sigma.datum)


def chambers_containing(sigma: Cell) -> list:
    """All chambers having ``sigma`` as a face."""
    opts = [[s] if s % 2 == 1 else [s - 1, s + 1] for s in sigma.key]
    out = []
    for key in itertools.product(*opts):
        cell = Cell(tuple(key), sigma.datum)
        if cell.is_realizable():
            out.append(cell)
    return out


@dataclass(frozen=True)
class Gallery:
    chambers: tuple

    def __len__(self) -> int:
        return len(self.chambers) - 1

    def walls(self) -> list:
        out = []
        for a, b in zip(self.chambers, self.chambers[1:]):
            (w,) = separating_walls(a, b)
            out.append(w)
        return out


def gallery_between(C: Cell, D: Cell) -> Gallery:
    """Minimal gallery; at each step cross the smallest admissible panel wall."""
    if not (C.is_chamber and D.is_chamber):
        raise ValueError("gallery_between expects chambers")
    seq = [C]
    cur = C
    while cur.key != D.key:
        sep = set(separating_walls(cur, D))
        nxt = None
        for h in panel_walls(cur):
            if h in sep:
                nxt = cross_panel(cur, h)
                break
        if nxt is None:  # pragma: no cover - impossible in a Coxeter complex
            raise RuntimeError("no separating panel found")
        seq.append(nxt)
        cur = nxt
    return Gallery(tuple(seq))


def chambers_in_region(datum: CoxeterDatum, radius: int | None = None) -> list:
    """All chambers whose barycenter satisfies ``|(beta, x)| <= radius``."""
    r = datum.radius if radius is None else radius
    return list(_chambers_in_region(datum, r))


@functools.lru_cache(maxsize=64)
def _chambers_in_region(datum: CoxeterDatum, r: int) -> tuple:
    box = Polytope(tuple(h for beta in datum.root_covectors
                         for h in ((beta, Fraction(r)), (Q.scale(-1, beta), Fraction(r)))),
                   datum.rank)
    start = datum.fundamental_chamber
    seen = {start.key: start}
    todo = [start]
    while todo:
        cur = todo.pop()
        for h in panel_walls(cur):
            nb = cross_panel(cur, h)
            if nb.key in seen:
                continue
            if not box.contains(nb.barycenter()):
                continue
            seen[nb.key] = nb
            todo.append(nb)
    return tuple(seen[k] for k in sorted(seen))
