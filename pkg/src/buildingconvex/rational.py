"""Small exact-arithmetic helpers over :class:`fractions.Fraction`.

Vectors are plain tuples of Fractions, matrices are tuples of rows.  Rank is
at most 2 throughout the package, so nothing here tries to be fast for large
dimensions.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

Vec = tuple  # tuple[Fraction, ...]
Mat = tuple  # tuple[tuple[Fraction, ...], ...]


def frac(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected on purpose: every exact predicate downstream relies
    on the inputs being rational.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def vec(xs: Iterable) -> Vec:
    return tuple(frac(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> Mat:
    return tuple(vec(r) for r in rows)


def fmt(x: Fraction) -> str:
    """Serialize a rational as ``"p/q"`` (or ``"p"`` for integers)."""
    x = frac(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def fmt_vec(v: Sequence) -> list:
    return [fmt(x) for x in v]


def add(u: Vec, v: Vec) -> Vec:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Vec, v: Vec) -> Vec:
    return tuple(a - b for a, b in zip(u, v))


def scale(c, u: Vec) -> Vec:
    return tuple(c * a for a in u)


def dot(u: Sequence, v: Sequence):
    """Plain pairing (covector applied to vector)."""
    if len(u) == 2:
        return u[0] * v[0] + u[1] * v[1]
    if len(u) == 1:
        return u[0] * v[0]
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def matvec(m: Mat, v: Vec) -> Vec:
    return tuple(dot(row, v) for row in m)


def matmul(a: Mat, b: Mat) -> Mat:
    cols = list(zip(*b))
    return tuple(tuple(dot(row, col) for col in cols) for row in a)


def transpose(m: Mat) -> Mat:
    return tuple(tuple(r) for r in zip(*m))


def identity(n: int) -> Mat:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def det(m: Mat):
    if len(m) == 1:
        return m[0][0]
    if len(m) == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    raise ValueError("only rank <= 2 is supported")


def inverse(m: Mat) -> Mat:
    d = det(m)
    if d == 0:
        raise ZeroDivisionError("singular matrix")
    if len(m) == 1:
        return ((1 / d,),)
    (a, b), (c, e) = m
    return ((e / d, -b / d), (-c / d, a / d))


def solve(m: Mat, rhs: Vec):
    """Solve ``m x = rhs`` exactly; ``None`` when singular."""
    if det(m) == 0:
        return None
    return matvec(inverse(m), rhs)


def sign(x) -> int:
    return (x > 0) - (x < 0)


def is_zero(v: Vec) -> bool:
    return all(a == 0 for a in v)


def primitive(v: Sequence) -> tuple[Vec, Fraction]:
    """Scale a nonzero rational vector to a primitive integer vector.

    Returns ``(w, c)`` with ``w = c * v``, ``c > 0`` and the first nonzero
    entry of ``w`` positive (so ``c`` may carry the sign flip).
    """
    v = vec(v)
    if is_zero(v):
        raise ValueError("zero vector has no primitive form")
    lcm = 1
    for a in v:
        lcm = lcm * a.denominator // math.gcd(lcm, a.denominator)
    ints = [int(a * lcm) for a in v]
    g = 0
    for a in ints:
        g = math.gcd(g, abs(a))
    c = Fraction(lcm, g)
    first = next(a for a in ints if a != 0)
    if first < 0:
        c = -c
    return tuple(c * a for a in v), c


def parallel(u: Vec, v: Vec) -> bool:
    if len(u) == 1:
        return True
    return u[0] * v[1] - u[1] * v[0] == 0


def same_ray(u: Vec, v: Vec) -> bool:
    """True iff ``u`` and ``v`` are positive multiples of each other."""
    return parallel(u, v) and dot(u, v) > 0


def to_float(v: Sequence) -> tuple:
    return tuple(float(a) for a in v)


def rationalize(x: float, max_den: int = 10**6) -> Fraction:
    return Fraction(x).limit_denominator(max_den)
