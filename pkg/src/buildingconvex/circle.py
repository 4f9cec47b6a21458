"""Closed subsets of the circle R / 2piZ as finite unions of closed arcs."""
from __future__ import annotations

import math

TAU = 2 * math.pi
EPS = 1e-9


def norm_angle(a: float) -> float:
    a = math.fmod(a, TAU)
    if a < 0:
        a += TAU
    if a >= TAU - 1e-12:
        a = 0.0
    return a


def arc(start: float, length: float) -> list:
    """Closed arc starting at ``start`` going counter-clockwise."""
    if length >= TAU - EPS:
        return [(0.0, TAU)]
    s = norm_angle(start)
    e = s + length
    if e <= TAU:
        return [(s, e)]
    return _merge([(s, TAU), (0.0, e - TAU)])


def point(a: float) -> list:
    a = norm_angle(a)
    return [(a, a)]


def ball(center: float, radius: float) -> list:
    """Closed ball of the given radius around an angle."""
    if radius >= math.pi - EPS:
        return [(0.0, TAU)]
    return arc(center - radius, 2 * radius)


def _merge(ivs: list) -> list:
    ivs = sorted(ivs)
    out: list = []
    for a, b in ivs:
        if out and a <= out[-1][1] + EPS:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def union(*sets) -> list:
    return _merge([iv for s in sets for iv in s])


def intersect(s1: list, s2: list) -> list:
    out = []
    for a, b in s1:
        for c, d in s2:
            # arcs touching across the seam 0 == 2pi meet there too
            for shift in (0.0, TAU, -TAU):
                lo, hi = max(a, c + shift), min(b, d + shift)
                if lo <= hi + EPS and -EPS <= lo <= TAU + EPS:
                    lo, hi = min(max(lo, 0.0), TAU), min(max(lo, hi), TAU)
                    out.append((0.0, 0.0) if lo >= TAU - EPS else (lo, hi))
    return _merge(out)


def is_empty(s: list) -> bool:
    return not s


def is_full(s: list) -> bool:
    return len(s) == 1 and s[0][0] <= EPS and s[0][1] >= TAU - EPS


def contains(s: list, a: float) -> bool:
    a = norm_angle(a)
    for lo, hi in s:
        if lo - EPS <= a <= hi + EPS:
            return True
    # wrap-around at 0 == 2pi
    return a > TAU - EPS and any(lo <= EPS for lo, _ in s)


def components(s: list) -> list:
    """Arcs as ``(start, length)`` with pieces glued across angle 0."""
    s = _merge(s)
    if is_full(s):
        return [(0.0, TAU)]
    if len(s) >= 2 and s[0][0] <= EPS and s[-1][1] >= TAU - EPS:
        first = s.pop(0)
        last = s.pop()
        s.append((last[0], first[1] + TAU))
    return [(a, b - a) for a, b in s]


def angular_distance(a: float, b: float) -> float:
    d = abs(norm_angle(a) - norm_angle(b))
    return min(d, TAU - d)


def measure(s: list) -> float:
    return sum(b - a for a, b in s)
