"""Exact rational polytopes in dimension 1 or 2.

A :class:`Polytope` is an intersection of closed halfspaces ``n . x <= b``
with rational data.  Lower-dimensional sets (segments, points) are written
with pairs of opposite halfspaces.  Vertex enumeration is brute force over
pairs of boundary lines, which is plenty for desk-scale scenes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import rational as Q

Halfspace = tuple  # (normal: Vec, offset: Fraction)


def halfspace(normal, offset) -> Halfspace:
    n = Q.vec(normal)
    if Q.is_zero(n):
        raise ValueError("halfspace normal must be nonzero")
    return (n, Q.frac(offset))


@dataclass(frozen=True)
class Polytope:
    """Closed convex polyhedron ``{x : n_i . x <= b_i for all i}``."""

    halfspaces: tuple
    dim: int = 2
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @classmethod
    def from_halfspaces(cls, items: Iterable, dim: int | None = None) -> "Polytope":
        hs = []
        for item in items:
            if isinstance(item, dict):
                if set(item) != {"normal", "offset"}:
                    raise ValueError(
                        f"polytope constraints are linear halfspaces only, got keys {sorted(item)}")
                item = (item["normal"], item["offset"])
            n, b = item
            hs.append(halfspace(n, b))
        if not hs:
            raise ValueError("empty halfspace list describes the whole space; give a bound")
        d = len(hs[0][0]) if dim is None else dim
        if any(len(n) != d for n, _ in hs):
            raise ValueError("dimension mismatch among halfspaces")
        return cls(tuple(hs), d)

    @classmethod
    def from_points(cls, points: Sequence) -> "Polytope":
        """Convex hull of finitely many rational points (d <= 2)."""
        pts = sorted({Q.vec(p) for p in points})
        if not pts:
            raise ValueError("need at least one point")
        d = len(pts[0])
        if d == 1:
            lo, hi = pts[0][0], pts[-1][0]
            return cls(((( Fraction(1),), hi), ((Fraction(-1),), -lo)), 1)
        hull = convex_hull(pts)
        hs: list = []
        if len(hull) == 1:
            (x, y), = hull
            hs = [((Fraction(1), Fraction(0)), x), ((Fraction(-1), Fraction(0)), -x),
                  ((Fraction(0), Fraction(1)), y), ((Fraction(0), Fraction(-1)), -y)]
        elif len(hull) == 2:
            p, q = hull
            e = Q.sub(q, p)
            n = (-e[1], e[0])
            hs = [(n, Q.dot(n, p)), (Q.scale(-1, n), -Q.dot(n, p)),
                  (e, Q.dot(e, q)), (Q.scale(-1, e), -Q.dot(e, p))]
        else:
            for i, p in enumerate(hull):
                q = hull[(i + 1) % len(hull)]
                e = Q.sub(q, p)
                n = (e[1], -e[0])  # outward for counter-clockwise order
                hs.append((n, Q.dot(n, p)))
        return cls(tuple(hs), 2)

    # -- basic predicates -------------------------------------------------
    def contains(self, x: Sequence) -> bool:
        return all(Q.dot(n, x) <= b for n, b in self.halfspaces)

    def contains_int(self, nums: tuple, den: int) -> bool:
        """Membership of ``nums / den`` using integer arithmetic only."""
        form = self._cache.get("int_form")
        if form is None:
            form = self._cache["int_form"] = [_int_halfspace(n, b) for n, b in self.halfspaces]
        for n, bn, bd in form:
            if sum(a * c for a, c in zip(n, nums)) * bd > bn * den:
                return False
        return True

    def slack(self, x: Sequence) -> list:
        return [b - Q.dot(n, x) for n, b in self.halfspaces]

    def active(self, x: Sequence) -> list:
        return [i for i, (n, b) in enumerate(self.halfspaces) if Q.dot(n, x) == b]

    def intersect(self, other: "Polytope") -> "Polytope":
        return Polytope(self.halfspaces + other.halfspaces, self.dim)

    def with_halfspace(self, normal, offset) -> "Polytope":
        return Polytope(self.halfspaces + (halfspace(normal, offset),), self.dim)

    def transform(self, m: Q.Mat, t: Q.Vec) -> "Polytope":
        """Image under the affine bijection ``x -> m x + t``."""
        minv_t = Q.transpose(Q.inverse(m))
        out = []
        for n, b in self.halfspaces:
            n2 = Q.matvec(minv_t, n)
            out.append((n2, b + Q.dot(n2, t)))
        return Polytope(tuple(out), self.dim)

    # -- vertex enumeration -----------------------------------------------
    def vertices(self) -> list:
        """Vertices, counter-clockwise for 2D full-dimensional sets.

        Only meaningful for bounded polytopes; unbounded ones should be
        clipped first (see :meth:`clip`).
        """
        if "vertices" not in self._cache:
            self._cache["vertices"] = self._enumerate()
        return list(self._cache["vertices"])

    def _enumerate(self) -> list:
        hs = self.halfspaces
        cand = set()
        if self.dim == 1:
            for n, b in hs:
                cand.add((b / n[0],))
        else:
            # integer lines a . x <= b; Cramer with a positive common denominator
            lines, seen = [], set()
            for n, b in hs:
                (a1, a2), bn, bd = _int_halfspace(n, b)
                a1, a2 = a1 * bd, a2 * bd
                g = math.gcd(math.gcd(abs(a1), abs(a2)), abs(bn))
                key = (a1 // g, a2 // g, bn // g)
                if key not in seen:
                    seen.add(key)
                    lines.append(key)
            for i in range(len(lines)):
                a1, a2, b = lines[i]
                for j in range(i + 1, len(lines)):
                    c1, c2, e = lines[j]
                    det = a1 * c2 - a2 * c1
                    if det == 0:
                        continue
                    xn, yn = b * c2 - a2 * e, a1 * e - b * c1
                    if det < 0:
                        det, xn, yn = -det, -xn, -yn
                    if all(u * xn + v * yn <= w * det for u, v, w in lines):
                        cand.add((Fraction(xn, det), Fraction(yn, det)))
            pts = sorted(cand)
            return pts if len(pts) <= 2 else convex_hull(pts)
        pts = [p for p in cand if self.contains(p)]
        if self.dim == 1 or len(pts) <= 2:
            return sorted(pts)
        return convex_hull(pts)

    def clip(self, box: "Polytope") -> "Polytope":
        return self.intersect(box)

    def is_empty(self) -> bool:
        return not self.vertices()

    def dimension(self) -> int:
        v = self.vertices()
        if not v:
            return -1
        if len(v) == 1:
            return 0
        if self.dim == 1 or len(v) == 2:
            return 1
        return 2

    def barycenter(self) -> Q.Vec:
        v = self.vertices()
        if not v:
            raise ValueError("empty polytope")
        k = Fraction(1, len(v))
        return tuple(sum(p[i] for p in v) * k for i in range(self.dim))

    def edges(self) -> list:
        """Boundary 1-faces as vertex pairs (2D only)."""
        v = self.vertices()
        if len(v) < 2 or self.dim == 1:
            return []
        if len(v) == 2:
            return [(v[0], v[1])]
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def support(self, n: Sequence):
        return max(Q.dot(n, p) for p in self.vertices())

    def segment_interval(self, p: Sequence, q: Sequence):
        """Exact parameter interval ``{t in [0,1] : p + t (q-p) in self}``."""
        lo, hi = Fraction(0), Fraction(1)
        d = Q.sub(q, p)
        for n, b in self.halfspaces:
            nd = Q.dot(n, d)
            s = b - Q.dot(n, p)
            if nd == 0:
                if s < 0:
                    return None
            elif nd > 0:
                hi = min(hi, s / nd)
            else:
                lo = max(lo, s / nd)
            if lo > hi:
                return None
        return lo, hi

    def contains_segment(self, p, q) -> bool:
        iv = self.segment_interval(p, q)
        return iv is not None and iv == (0, 1)

    def to_json(self) -> list:
        return [{"normal": Q.fmt_vec(n), "offset": Q.fmt(b)} for n, b in self.halfspaces]


def _int_halfspace(n, b):
    """``n . x <= b`` rescaled to an integer normal and the offset as a ratio."""
    n = [Fraction(a) for a in n]
    m = math.lcm(*(a.denominator for a in n))
    b = Fraction(b) * m
    return tuple(int(a * m) for a in n), b.numerator, b.denominator


def common_denominator(x) -> tuple:
    if all(isinstance(a, int) for a in x):
        return tuple(x), 1
    x = [Fraction(a) for a in x]
    den = math.lcm(*(a.denominator for a in x))
    return tuple(a.numerator * (den // a.denominator) for a in x), den


def convex_hull(points: Sequence) -> list:
    """Exact monotone-chain hull, counter-clockwise, collinear points dropped."""
    pts = sorted(set(tuple(p) for p in points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return hull if len(hull) >= 2 else pts[:1] + pts[-1:]


@dataclass(frozen=True)
class PolyhedralSet:
    """Finite union of convex pieces living in one apartment chart.

    Most checkers require a single convex piece; ``convex_piece`` enforces it.
    """

    pieces: tuple

    @classmethod
    def convex(cls, poly: Polytope) -> "PolyhedralSet":
        return cls((poly,))

    @classmethod
    def from_points(cls, points) -> "PolyhedralSet":
        return cls((Polytope.from_points(points),))

    @property
    def dim(self) -> int:
        return self.pieces[0].dim

    def contains(self, x) -> bool:
        return any(p.contains(x) for p in self.pieces)

    def contains_int(self, nums: tuple, den: int) -> bool:
        return any(p.contains_int(nums, den) for p in self.pieces)

    @property
    def convex_piece(self) -> Polytope:
        if len(self.pieces) != 1:
            raise ValueError("set is not given as a single convex piece")
        return self.pieces[0]

    def transform(self, m, t) -> "PolyhedralSet":
        return PolyhedralSet(tuple(p.transform(m, t) for p in self.pieces))

    def vertices(self) -> list:
        out = []
        for p in self.pieces:
            for v in p.vertices():
                if v not in out:
                    out.append(v)
        return out

    def to_json(self) -> list:
        return [p.to_json() for p in self.pieces]


def float_distance_sq(g, u: Sequence, v: Sequence) -> float:
    d = [float(a) - float(b) for a, b in zip(u, v)]
    return sum(d[i] * float(g[i][j]) * d[j] for i in range(len(d)) for j in range(len(d)))


def gram_norm(g, u: Sequence) -> float:
    return math.sqrt(max(0.0, float(sum(u[i] * g[i][j] * u[j]
                                        for i in range(len(u)) for j in range(len(u))))))
