"""Apartment pictures for rank-2 scenes.

Drawn in the orthonormal frame of chart 0: wall lines, the chamber ``C`` in
blue, the set ``A`` shaded, the anti-normal arrows found by the normal
condition check and witness points and segments in red.  Output only depends
on the scene and the report, so repeated runs give identical files.
"""
from __future__ import annotations

import math
from pathlib import Path

from .atlas import BuildingPoint, SectorGerm, cone_rays
from .convexity import geometry as G
from .convexity.sets import NormalVector
from .coxeter import Cell
from .report import Witness

SIZE = 480
PAD = 1.0


class SvgError(ValueError):
    pass


def _f(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Canvas:
    def __init__(self, lo, hi):
        self.lo, self.hi = lo, hi
        span = max(hi[0] - lo[0], hi[1] - lo[1])
        self.k = SIZE / span
        self.items: list = []

    def xy(self, y) -> tuple:
        return (y[0] - self.lo[0]) * self.k, (self.hi[1] - y[1]) * self.k

    def pts(self, ys) -> str:
        return " ".join(f"{_f(a)},{_f(b)}" for a, b in map(self.xy, ys))

    def line(self, p, q, **attrs) -> None:
        (x1, y1), (x2, y2) = self.xy(p), self.xy(q)
        self.items.append(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}"{_attrs(attrs)}/>')

    def polygon(self, ys, **attrs) -> None:
        self.items.append(f'<polygon points="{self.pts(ys)}"{_attrs(attrs)}/>')

    def circle(self, y, r: float, **attrs) -> None:
        cx, cy = self.xy(y)
        self.items.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(r)}"{_attrs(attrs)}/>')


def _attrs(a: dict) -> str:
    return "".join(f' {k.replace("_", "-")}="{v}"' for k, v in sorted(a.items()))


def _clip_line(p, d, lo, hi):
    """Liang-Barsky clip of the line ``p + t d`` to the box."""
    t0, t1 = -math.inf, math.inf
    for i in range(2):
        if abs(d[i]) < 1e-15:
            if not lo[i] <= p[i] <= hi[i]:
                return None
            continue
        a, b = (lo[i] - p[i]) / d[i], (hi[i] - p[i]) / d[i]
        t0, t1 = max(t0, min(a, b)), min(t1, max(a, b))
    if t0 >= t1:
        return None
    return (p[0] + t0 * d[0], p[1] + t0 * d[1]), (p[0] + t1 * d[0], p[1] + t1 * d[1])


def _hull_order(ys: list) -> list:
    cx = sum(y[0] for y in ys) / len(ys)
    cy = sum(y[1] for y in ys) / len(ys)
    return sorted(ys, key=lambda y: math.atan2(y[1] - cy, y[0] - cx))


def _witness_points(w: Witness, B) -> tuple:
    """Points and segments of a witness, in chart 0 euclidean coordinates where possible."""
    pts, segs = [], []
    chart = w.data.get("chart")

    def loc(x):
        if isinstance(x, BuildingPoint):
            c = B.express(x, 0) if B is not None else (x.coords if x.chart == 0 else None)
            if c is None and chart is not None and B is not None:
                c = B.express(x, chart)
            return c if c is not None else x.coords
        if isinstance(x, (tuple, list)) and len(x) == 2:
            return tuple(x)
        return None

    for key in ("point", "escape", "midpoint", "p_point", "q_point"):
        c = loc(w.data.get(key))
        if c is not None:
            pts.append(c)
    if isinstance(w.data.get("x"), BuildingPoint) and isinstance(w.data.get("y"), BuildingPoint) and B:
        on = [B.express(w.data[k], chart if chart is not None else 0) for k in ("x", "y")]
        if all(c is not None for c in on):
            segs.append(tuple(on))
    for key in ("start", "end"):
        c = loc(w.data.get(key))
        if c is not None:
            pts.append(c)
    if isinstance(w.data.get("start"), BuildingPoint) and B:
        on = [B.express(w.data[k], w.data["start"].chart) for k in ("start", "end")]
        if all(c is not None for c in on):
            segs.append(tuple(on))
    return pts, segs


def render(scene, report=None) -> str:
    """SVG text for a rank-2 scene and an optional run report."""
    d = scene.datum
    if d is None or d.rank != 2:
        raise SvgError("SVG figures need a rank-2 scene")
    B = scene.building
    E = d.to_euclid
    polys = []
    if scene.A is not None:
        polys = [G.clipped(d, P) for P in scene.A.pieces]
    elif scene.explicit:
        polys = [G.clipped(d, P) for P in scene.explicit.get(0, [])]
    center = B.center if B is not None else None
    interest = [E(v) for P in polys for v in P.vertices()]
    if isinstance(center, Cell):
        interest += [E(v) for v in center.vertices()]
    elif isinstance(center, SectorGerm):
        interest.append(E(center.base))
    interest += [(-2.0, -2.0), (2.0, 2.0)]
    lo = (min(y[0] for y in interest) - PAD, min(y[1] for y in interest) - PAD)
    hi = (max(y[0] for y in interest) + PAD, max(y[1] for y in interest) + PAD)
    span = max(hi[0] - lo[0], hi[1] - lo[1])
    hi = (lo[0] + span, lo[1] + span)
    cv = _Canvas(lo, hi)

    # walls
    for f, beta in enumerate(d.root_covectors):
        nn = beta[0] * beta[0] + beta[1] * beta[1]
        for k in range(-d.radius, d.radius + 1):
            p0 = E((k * beta[0] / nn, k * beta[1] / nn))
            dv = E((-beta[1], beta[0]))
            seg = _clip_line(p0, dv, lo, hi)
            if seg:
                cv.line(*seg, stroke="#999999", stroke_width="0.8", data_family=str(f))
    # chamber C
    if isinstance(center, Cell):
        cv.polygon(_hull_order([E(v) for v in center.vertices()]), fill="#3366cc", fill_opacity="0.6",
                   stroke="#1a3d80", id="C")
    elif isinstance(center, SectorGerm):
        b = E(center.base)
        rays = [E(r) for r in cone_rays(d, center.direction)]
        far = [(b[0] + 3 * span * r[0] / math.hypot(*r), b[1] + 3 * span * r[1] / math.hypot(*r)) for r in rays]
        cv.polygon([b] + far, fill="#3366cc", fill_opacity="0.25", stroke="#1a3d80", id="C")
    # the set A
    for i, P in enumerate(polys):
        ys = [E(v) for v in P.vertices()]
        if len(ys) >= 3:
            cv.polygon(_hull_order(ys), fill="#888888", fill_opacity="0.45", stroke="#222222", id=f"A{i}")
        elif len(ys) == 2:
            cv.line(ys[0], ys[1], stroke="#222222", stroke_width="3", id=f"A{i}")
        elif ys:
            cv.circle(ys[0], 3, fill="#222222", id=f"A{i}")
    # anti-normals and witnesses
    if report is not None:
        normal = report.checks.get("normal")
        for n in (normal.details.get("anti_normals", []) if normal else []):
            if isinstance(n, NormalVector):
                b = E(n.base)
                v = E(tuple(-x for x in n.direction))
                s = 0.5 / max(math.hypot(*v), 1e-12)
                tip = (b[0] + s * v[0], b[1] + s * v[1])
                cv.line(b, tip, stroke="#006600", stroke_width="1.5", marker_end="url(#arrow)")
        for name, rep in report.checks.items():
            for w in rep.witnesses[:8]:
                pts, segs = _witness_points(w, B)
                for p, q in segs:
                    cv.line(E(p), E(q), stroke="#cc0000", stroke_width="2", data_check=name)
                for p in pts:
                    if len(p) == 2:
                        cv.circle(E(p), 4, fill="#cc0000", data_check=name)
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
            f'viewBox="0 0 {SIZE} {SIZE}">\n'
            '<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="6" refY="3" orient="auto">'
            '<path d="M0,0 L6,3 L0,6 z" fill="#006600"/></marker></defs>\n'
            f'<title>{scene.name}</title>\n<rect width="{SIZE}" height="{SIZE}" fill="white"/>\n')
    return head + "\n".join(cv.items) + "\n</svg>\n"


def emit_svg(scene, report, path) -> Path:
    """Write the picture of ``scene`` (and ``report``) to ``path``."""
    p = Path(path)
    p.write_text(render(scene, report))
    return p
