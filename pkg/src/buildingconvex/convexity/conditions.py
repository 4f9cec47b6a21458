"""Normal and weak normal conditions, thickening, and the key halfspace inclusion.

All checks run on a closed convex ``A`` of one apartment, given as a single
polytope, against a center that is a chamber ``C`` or a sector germ ``c``.
For polytopal ``A`` the normal cone is constant along boundary strata, so a
finite list of stratum representatives decides each condition exactly.

Conventions.  A *normal* of ``A`` at ``a`` points away from ``A`` (it lies
in the cone spanned by the outward constraint normals).  The normal
condition's *anti-normal* ``n_a`` points into ``A``; witnesses store it as a
:class:`NormalVector` with ``role='anti-normal'`` and the outward direction
``-n_a``.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .. import circle as S1
from .. import rational as Q
from ..atlas import SectorGerm
from ..coxeter import Cell, CoxeterDatum, Wall, side_of_wall
from ..polytope import PolyhedralSet, Polytope
from ..report import ConvexityReport
from . import geometry as G
from .sets import NormalVector

MODES = ("all_walls", "two_closest")


def _single(A) -> Polytope:
    if isinstance(A, Polytope):
        return A
    if isinstance(A, PolyhedralSet):
        if len(A.pieces) != 1:
            raise ValueError("A must be convex, given as a single polytope")
        return A.pieces[0]
    raise TypeError(f"expected a Polytope or PolyhedralSet, got {type(A).__name__}")


def center_side(datum: CoxeterDatum, center, h: Wall) -> int:
    """Side (+1/-1) of ``h`` on which the center lies."""
    if isinstance(center, Cell):
        s = side_of_wall(center.barycenter(), h)
    elif isinstance(center, SectorGerm):
        s = Q.sign(Q.dot(h.normal, center.direction))
    else:
        raise TypeError("center must be a Cell or a SectorGerm")
    if s == 0:
        raise ValueError("center is not in an open halfspace of the wall")
    return s


def away_covector(datum: CoxeterDatum, center, h: Wall) -> tuple:
    """Covector ``m`` with ``m . v > 0`` iff ``v`` points to the side without the center."""
    return Q.scale(-center_side(datum, center, h), h.normal)


def proj_angles(datum: CoxeterDatum, a, center) -> list:
    out = [(0.0, 2 * math.pi)]
    for h in datum.walls_through(a):
        m = datum.vector_of(Q.scale(-1, away_covector(datum, center, h)))
        out = S1.intersect(out, S1.ball(datum.direction_angle(m), math.pi / 2))
    return out


def _polar_arcs(L: list) -> list | None:
    """``\\bigcap_{x in L} B(x, pi/2)`` as an arc list."""
    out = [(0.0, 2 * math.pi)]
    for start, length in S1.components(L):
        if length > math.pi + S1.EPS:
            return []
        out = S1.intersect(out, S1.arc(start + length - math.pi / 2, max(0.0, math.pi - length)))
    return out


# ---------------------------------------------------------------------------
# normal condition
# ---------------------------------------------------------------------------

def check_normal_condition(A, C, datum: CoxeterDatum) -> ConvexityReport:
    """At each boundary stratum look for ``n_a`` in ``Link_A a & Proj C`` with
    ``Link_A a`` inside the closed pi/2-ball around it."""
    P = _single(A)
    rep = ConvexityReport(True)
    strata = G.boundary_strata(datum, P)
    own = len(P.halfspaces)
    anti = []
    for x, kind in strata:
        act = G.active_constraints(P, x, own)
        if datum.rank == 1:
            ok, n = _normal_rank1(datum, act, x, C)
        else:
            L = G.tangent_angles(datum, act)
            Pr = proj_angles(datum, x, C)
            N = S1.intersect(S1.intersect(L, Pr), _polar_arcs(L))
            ok = bool(N)
            n = None
            if ok:
                lo, hi = N[0]
                v = datum.vector_at_angle((lo + hi) / 2)
                n = NormalVector(x, tuple(-c for c in v), "anti-normal")
        if ok:
            anti.append(n)
        else:
            rep.fail("normal_condition", point=x, stratum=kind,
                     link_A=G.tangent_angles(datum, act) if datum.rank == 2 else None,
                     walls=datum.walls_through(x))
    rep.details.update({"strata": len(strata), "anti_normals": anti})
    return rep


def _normal_rank1(datum, act, x, center):
    dirs = [v for v in ((Fraction(1),), (Fraction(-1),)) if G.in_tangent_cone(act, v)]
    for v in dirs:
        if all(Q.dot(away_covector(datum, center, h), v) <= 0 for h in datum.walls_through(x)):
            # the other directions of Link_A a are within pi/2 only if equal
            if all(u == v for u in dirs):
                return True, NormalVector(x, tuple(-c for c in v), "anti-normal")
    return False, None


# ---------------------------------------------------------------------------
# weak normal condition
# ---------------------------------------------------------------------------

def _family_range(datum: CoxeterDatum, P: Polytope, f: int):
    verts = G.clipped(datum, P).vertices()
    vals = [datum.root_value(f, v) for v in verts]
    return math.ceil(min(vals)), math.floor(max(vals))


def selected_walls(datum: CoxeterDatum, P: Polytope, center, mode: str) -> set | None:
    """Walls considered by ``mode``; ``None`` means every wall."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode == "all_walls":
        return None
    out = set()
    for f in range(datum.n_families):
        lo, hi = _family_range(datum, P, f)
        if lo > hi:
            continue
        if isinstance(center, Cell):
            k0 = center.key[f] // 2
            below = [k for k in (min(k0, hi),) if lo <= k <= k0]
            above = [k for k in (max(k0 + 1, lo),) if k0 + 1 <= k <= hi]
            ks = below + above
        else:
            s = Q.sign(datum.root_value(f, center.direction))
            ks = [hi if s > 0 else lo]
        out.update(datum.wall(f, k) for k in ks)
    return out


def check_weak_normal_condition(A, center, datum: CoxeterDatum, mode: str = "all_walls") -> ConvexityReport:
    """For each boundary stratum ``a`` and wall ``H`` through ``a``: some normal
    of ``A`` at ``a`` points into the closed halfspace of ``H`` without the center.

    Two tests are applied.  The literal one asks for a generator ``g`` of the
    normal cone with ``<g, m_H> >= 0``.  The robust one is the limit of the
    same condition for ``A + eps``: for ``u`` along ``H`` the normal part
    ``u - proj_T(u)`` (``T`` the tangent cone) must point away from the
    center.  Both agree for full-dimensional ``A``; for sets with empty
    interior only the robust test detects the failure of the theorem.
    """
    P = _single(A)
    rep = ConvexityReport(True)
    sel = selected_walls(datum, P, center, mode)
    own = len(P.halfspaces)
    checked = 0
    for x, kind in G.boundary_strata(datum, P):
        act = G.active_constraints(P, x, own)
        for h in datum.walls_through(x):
            if sel is not None and h not in sel:
                continue
            checked += 1
            m = away_covector(datum, center, h)
            literal = any(datum.co_inner(n, m) >= 0 for n, _ in act)
            robust_w = None
            if datum.rank == 2:
                u = G.wall_direction(h)
                for s in (1, -1):
                    v = Q.scale(s, u)
                    w = Q.sub(v, G.project_to_cone(datum, act, v))
                    if not Q.is_zero(w) and Q.dot(m, w) < 0:
                        robust_w = w
                        break
            if not literal:
                rep.fail("weak_normal_literal", point=x, stratum=kind, wall=h,
                         normals=[Q.fmt_vec(n) for n, _ in act])
            elif robust_w is not None:
                rep.fail("weak_normal_robust", point=x, stratum=kind, wall=h,
                         normal=NormalVector(x, robust_w))
    rep.details.update({"mode": mode, "wall_checks": checked})
    return rep


def modes_agree(A, center, datum) -> bool:
    return (check_weak_normal_condition(A, center, datum, "all_walls").verdict
            == check_weak_normal_condition(A, center, datum, "two_closest").verdict)


# ---------------------------------------------------------------------------
# key observation
# ---------------------------------------------------------------------------

def key_halfspace_inclusion(A, H: Wall, side: int, datum: CoxeterDatum) -> ConvexityReport:
    """Verify ``H+ & A  in  (H & A) + H^perp`` where ``H+ = {side * (n.x - b) >= 0}``."""
    P = _single(A)
    rep = ConvexityReport(True)
    cp = G.clipped(datum, P)
    own = len(P.halfspaces)
    verts = cp.vertices()
    cov = Q.scale(side, H.normal)
    off = side * H.offset
    if all(Q.dot(cov, v) >= off for v in verts):
        return rep.fail("precondition", reason="A lies inside H+")
    # normal into H+ at every point of dA & H
    HA = cp.intersect(Polytope(((H.normal, H.offset), (Q.scale(-1, H.normal), -H.offset)), datum.rank))
    hv = HA.vertices()
    for x, _ in G.boundary_strata(datum, P):
        if H.value(x) != 0:
            continue
        act = G.active_constraints(P, x, own)
        if not any(datum.co_inner(n, cov) >= 0 for n, _ in act):
            return rep.fail("precondition", reason="no normal into H+", point=x)
    plus = cp.with_halfspace(Q.scale(-1, cov), -off)
    pv = plus.vertices()
    if not pv:
        return rep
    if not hv:
        return rep.fail("inclusion", point=pv[0])
    u = G.wall_direction(H)
    if datum.rank == 1:
        return rep if all(v in hv for v in pv) else rep.fail("inclusion", point=pv[0])
    ts = [datum.inner(Q.sub(v, hv[0]), u) for v in hv]
    lo, hi = min(ts), max(ts)
    for v in pv:
        t = datum.inner(Q.sub(v, hv[0]), u)
        if not lo <= t <= hi:
            rep.fail("inclusion", point=v)
            break
    rep.details["slab"] = [lo, hi]
    return rep


# ---------------------------------------------------------------------------
# thickening
# ---------------------------------------------------------------------------

GRID = Fraction(1, 2**30)


def _round_up(x: float) -> Fraction:
    return Fraction(math.ceil(x / float(GRID)) + 1) * GRID


def _in_normal_cone(n, gens) -> bool:
    """``n`` in the closed cone spanned by the covectors ``gens``."""
    if any(Q.same_ray(g, n) for g in gens):
        return True
    if len(n) == 1:
        return False
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            x = Q.solve(Q.transpose((gens[i], gens[j])), n)
            if x is not None and x[0] >= 0 and x[1] >= 0:
                return True
    return False


def thicken(A, eps, datum: CoxeterDatum, error_ratio: int = 32) -> Polytope:
    """Outer polytopal approximation of ``A + eps``.

    Supporting halfspaces are taken along the constraint normals of ``A``,
    the roots and a uniform fan of directions fine enough that the corner
    error is at most ``eps / error_ratio``.  Offsets are rounded up to the
    ``2**-30`` grid, so the result contains ``A + eps``.  Directions in
    which ``A`` is unbounded are skipped.
    """
    eps = Q.frac(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    P = _single(A)
    gens = [n for n, _ in P.halfspaces]
    verts = G.clipped(datum, P).vertices()
    if not verts:
        raise ValueError("A is empty")
    dirs = list(gens)
    for beta in datum.root_covectors:
        dirs += [beta, Q.scale(-1, beta)]
    if datum.rank == 2:
        # eps * (sec(step / 2) - 1) <= eps / ratio
        step = 2 * math.acos(error_ratio / (error_ratio + 1))
        count = max(8, math.ceil(2 * math.pi / step))
        for i in range(count):
            v = G.rationalize_direction(datum, 2 * math.pi * i / count, 10**4)
            dirs.append(Q.matvec(datum.gram, v))
    out, seen = [], set()
    for n in dirs:
        pn, c = Q.primitive(n)
        if c < 0:
            pn = Q.scale(-1, pn)
        if pn in seen or not _in_normal_cone(pn, gens):
            continue
        seen.add(pn)
        h = max(Q.dot(pn, v) for v in verts)
        out.append((pn, h + _round_up(float(eps) * math.sqrt(float(datum.co_inner(pn, pn))))))
    return Polytope(tuple(out), datum.rank)


def check_weak_normal_thickened(A, eps, center, datum: CoxeterDatum, tol: float = 1e-9) -> ConvexityReport:
    """Weak normal condition of the exact ``A + eps``.

    On every wall ``H`` meeting ``A + eps`` the boundary points ``x`` (where
    ``d(x, A) = eps``) are located; ``x - proj_A(x)`` is the outer normal
    there and must point into the closed side of ``H`` without the center.
    """
    epsf = float(Q.frac(eps))
    P = _single(A)
    rep = ConvexityReport(True, tolerance=tol)
    cp = G.clipped(datum, P)
    verts = cp.vertices()
    E = np.array([datum.to_euclid(v) for v in verts])
    checked = 0
    for f in range(datum.n_families):
        beta = datum.root_covectors[f]
        vals = [float(datum.root_value(f, v)) for v in verts]
        cn = math.sqrt(float(datum.co_inner(beta, beta)))
        lo = math.ceil(min(vals) - epsf * cn - 1e-12)
        hi = math.floor(max(vals) + epsf * cn + 1e-12)
        for k in range(max(lo, -datum.radius), min(hi, datum.radius) + 1):
            h = datum.wall(f, k)
            m = np.array(datum.to_euclid(datum.vector_of(away_covector(datum, center, h))))
            m /= np.linalg.norm(m)
            for x in _boundary_on_wall(datum, E, h, epsf, tol):
                checked += 1
                v = x - _nearest(E, x)
                val = float(v @ m)
                if val < -tol:
                    rep.fail("weak_normal_thickened", wall=h, value=val,
                             point=[float(c) for c in datum.from_euclid(x)])
    rep.details.update({"eps": epsf, "boundary_points": checked})
    return rep


def _nearest(E: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Nearest point of the convex hull of ``E`` (vertices in cyclic order)."""
    m = len(E)
    if len(x) == 1:
        return np.clip(x, E.min(axis=0), E.max(axis=0))
    if m >= 3:
        cr = [(E[(i + 1) % m] - E[i])[0] * (x[1] - E[i][1]) - (E[(i + 1) % m] - E[i])[1] * (x[0] - E[i][0])
              for i in range(m)]
        if min(cr) >= 0 or max(cr) <= 0:
            return x
    best, bd = E[0], math.inf
    for i in range(m if m > 2 else 1):
        a, b = E[i], E[(i + 1) % m]
        d = b - a
        L = float(d @ d)
        t = 0.0 if L == 0 else min(1.0, max(0.0, float((x - a) @ d) / L))
        y = a + t * d
        dd = float((x - y) @ (x - y))
        if dd < bd:
            best, bd = y, dd
    return best


def _boundary_on_wall(datum, E: np.ndarray, h: Wall, eps: float, tol: float) -> list:
    """Points of the wall ``h`` at distance ``eps`` from the hull of ``E``."""
    n = np.array(datum.to_euclid(datum.vector_of(h.normal)))
    nn = float(n @ n)
    x0 = n * (float(h.offset) / nn)
    if len(n) == 1:
        return [x0] if abs(np.linalg.norm(x0 - _nearest(E, x0)) - eps) <= tol else []
    u = np.array([-n[1], n[0]]) / math.sqrt(nn)

    def dist(s):
        x = x0 + s * u
        return float(np.linalg.norm(x - _nearest(E, x)))

    proj = E @ u
    lo, hi = float(proj.min()) - 2 * eps - 1, float(proj.max()) + 2 * eps + 1
    res = minimize_scalar(dist, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    smin = float(res.x)
    dmin = dist(smin)
    if dmin > eps + tol:
        return []
    if dmin >= eps:
        return [x0 + smin * u]
    return [x0 + brentq(lambda s: dist(s) - eps, smin, end, xtol=1e-14) * u for end in (lo, hi)]
