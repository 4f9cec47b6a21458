"""Scene runner: checker pipelines, run reports and the scenario catalog."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import rational as Q
from .atlas import BuildingPoint, validate_atlas
from .convexity import conditions as K
from .convexity import geometry as G
from .convexity.paths import (Segment, building_angle, length_metric_distance, link_length_distance,
                              verify_ascending_propagation, verify_global_convexity)
from .convexity.sets import BuildingSubset, is_locally_convex_at, preimage
from .coxeter import Cell
from .link import Direction, is_pi_convex
from .report import ConvexityReport, jsonable
from .scene import CHECKS, Scene, SceneError, load_scene, parse_scene, point, rat, scene_dir

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


@dataclass
class RunReport:
    scene: str
    scene_hash: str
    seed: int
    n_samples: int
    tol: float
    mode: str
    checks: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return all(r.verdict for r in self.checks.values())

    @property
    def exit_code(self) -> int:
        return EXIT_PASS if self.verdict else EXIT_FAIL

    def verdicts(self) -> dict:
        return {k: r.verdict for k, r in self.checks.items()}

    def to_json(self, timings: bool = False) -> dict:
        out = {"scene": self.scene, "scene_hash": self.scene_hash, "seed": self.seed,
               "n_samples": self.n_samples, "tol": self.tol, "mode": self.mode,
               "verdict": self.verdict,
               "checks": {k: r.to_json() for k, r in self.checks.items()}}
        if timings:
            out["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return jsonable(out)

    def dumps(self, timings: bool = False) -> str:
        return json.dumps(self.to_json(timings), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# individual checks
# ---------------------------------------------------------------------------

def _subset(sc: Scene) -> BuildingSubset:
    if sc.set_kind == "preimage":
        return preimage(sc.building, sc.A)
    if sc.set_kind == "explicit":
        return BuildingSubset(sc.building, explicit=sc.explicit)
    raise SceneError(f"scene {sc.name!r} has no set")


def _convex_A(sc: Scene):
    if sc.A is None or len(sc.A.pieces) != 1:
        raise SceneError("this check needs a convex set given by one polytope in preimage mode")
    return sc.A.pieces[0]


def _chamber_center(sc: Scene) -> Cell:
    c = sc.building.center
    if not isinstance(c, Cell):
        raise SceneError("the normal condition needs a chamber center")
    return c


def check_validate(sc: Scene, opts: dict) -> ConvexityReport:
    if sc.circle is not None:
        return sc.circle.link().check_cat1()
    return validate_atlas(sc.building)


def check_normal(sc: Scene, opts: dict) -> ConvexityReport:
    return K.check_normal_condition(_convex_A(sc), _chamber_center(sc), sc.datum)


def check_weak_normal(sc: Scene, opts: dict) -> ConvexityReport:
    return K.check_weak_normal_condition(_convex_A(sc), sc.building.center, sc.datum, opts["mode"])


def check_thicken(sc: Scene, opts: dict) -> ConvexityReport:
    A = _convex_A(sc)
    eps_list = [rat(e, "verify.thicken.eps") for e in opts.get("thicken", {}).get("eps", ["1/10", "1/2", "1"])]
    rep = ConvexityReport(True, tolerance=opts["tol"])
    per = {}
    for eps in eps_list:
        exact = K.check_weak_normal_thickened(A, eps, sc.building.center, sc.datum, opts["tol"])
        poly = K.check_weak_normal_condition(K.thicken(A, eps, sc.datum), sc.building.center, sc.datum,
                                            opts["mode"])
        per[Q.fmt(eps)] = {"exact": exact.verdict, "polytopal": poly.verdict,
                           "boundary_points": exact.details["boundary_points"]}
        for r, how in ((exact, "exact"), (poly, "polytopal")):
            if not r.verdict:
                rep.fail("thickened", eps=eps, how=how, witness=r.witnesses[0])
    rep.details["eps"] = per
    return rep


def check_key_observation(sc: Scene, opts: dict) -> ConvexityReport:
    A = _convex_A(sc)
    d, center = sc.datum, sc.building.center
    rep = ConvexityReport(True)
    verified, skipped = 0, 0
    for h in sorted(K.selected_walls(d, A, center, "two_closest")):
        side = -K.center_side(d, center, h)
        r = K.key_halfspace_inclusion(A, h, side, d)
        if r.first("precondition") is not None:
            skipped += 1
            continue
        verified += 1
        if not r.verdict:
            rep.fail("inclusion", wall=h, side=side, witness=r.witnesses[0])
    rep.details.update({"verified": verified, "skipped": skipped})
    return rep


def check_preimage(sc: Scene, opts: dict) -> ConvexityReport:
    """Pointwise oracle: retract-and-test against the chart pieces and against ``A``."""
    S = _subset(sc)
    B = sc.building
    rng = np.random.default_rng(opts["seed"])
    rep = ConvexityReport(True)
    r = S._radius() if S.is_preimage else sc.datum.radius
    n = min(int(opts["n_samples"]), 400)
    box = G.clipped(sc.datum, _box(sc.datum, r))
    for _ in range(n):
        k = int(rng.integers(B.n_charts))
        x = G.random_point_in(box, rng)
        bp = BuildingPoint(k, x)
        inside = S.contains(bp)
        by_pieces = any(P.contains(x) for P in S.pieces(k))
        if inside != by_pieces:
            rep.fail("pieces_mismatch", point=bp, retract_test=inside, pieces=by_pieces)
            break
        if S.is_preimage and k == 0 and inside != S.A.contains(x):
            rep.fail("base_mismatch", point=bp)
            break
        if inside != S.contains(B.canonical_point(bp)):
            rep.fail("chart_asymmetry", point=bp)
            break
    rep.details.update({"samples": n, "pieces": {str(k): len(S.pieces(k)) for k in range(B.n_charts)}})
    return rep


def _box(d, r):
    from .polytope import Polytope
    hs = []
    for beta in d.root_covectors:
        hs += [(beta, Fraction(r)), (Q.scale(-1, beta), Fraction(r))]
    return Polytope(tuple(hs), d.rank)


def check_angle(sc: Scene, opts: dict) -> ConvexityReport:
    cfg = opts.get("angle")
    if not cfg:
        raise SceneError("verify.angle must give at, b, c")
    a, b, c = (point(cfg[k], f"verify.angle.{k}") for k in ("at", "b", "c"))
    ang = building_angle(sc.building, a, b, c)
    rep = ConvexityReport(True, tolerance=opts["tol"])
    rep.details.update({"angle": ang, "angle_over_pi": ang / math.pi})
    if "expect" in cfg:
        want = float(rat(cfg["expect"])) * math.pi
        rep.details["expected"] = want
        if abs(ang - want) > opts["tol"]:
            rep.fail("angle_mismatch", angle=ang, expected=want)
    return rep


def check_local(sc: Scene, opts: dict) -> ConvexityReport:
    if sc.circle is not None:
        return _circle_local(sc)
    S = _subset(sc)
    pts = [point(p, "verify.local.points") for p in opts.get("local", {}).get("points", [])] or S.vertices()
    rep = ConvexityReport(True, tolerance=opts["tol"])
    for a in pts:
        r = is_locally_convex_at(S, a)
        if not r.verdict:
            w = r.first()
            rep.fail("not_locally_convex", point=a, distance=w.data["distance"],
                     p_point=w.data.get("p_point"), q_point=w.data.get("q_point"))
    rep.details["points"] = len(pts)
    return rep


def check_global(sc: Scene, opts: dict) -> ConvexityReport:
    if sc.circle is not None:
        return _circle_global(sc, opts)
    return verify_global_convexity(sc.building, _subset(sc), int(opts["n_samples"]), opts["tol"],
                                   int(opts["seed"]))


def check_length_metric(sc: Scene, opts: dict) -> ConvexityReport:
    cfg = opts.get("length_metric", {})
    rep = ConvexityReport(True, tolerance=opts["tol"])
    if sc.circle is not None:
        S = sc.circle_set
        bps = S.boundary_points()
        length, _ = link_length_distance(S, bps[0], bps[-1])
        ambient = S.link.distance(bps[0], bps[-1])
        rep.details.update({"length": length, "length_over_pi": length / math.pi, "ambient": ambient})
    else:
        x, y = point(cfg["x"], "verify.length_metric.x"), point(cfg["y"], "verify.length_metric.y")
        S = _subset(sc)
        length, path = length_metric_distance(S, x, y, opts["tol"])
        ambient = sc.building.distance(x, y)
        rep.details.update({"length": length, "ambient": ambient, "path": path})
        if length < ambient - opts["tol"]:
            rep.fail("shorter_than_geodesic", length=length, ambient=ambient)
    if "expect" in cfg:
        want = float(rat(cfg["expect"])) * (math.pi if cfg.get("units") == "pi" else 1.0)
        if cfg.get("units") == "sqrt":
            want = math.sqrt(float(rat(cfg["expect"])))
        rep.details["expected"] = want
        if abs(length - want) > opts["tol"]:
            rep.fail("length_mismatch", length=length, expected=want)
    return rep


def random_exit_geodesics(sc: Scene, n: int, seed: int) -> list:
    """Seeded segments starting in the set and ending outside it."""
    S = _subset(sc)
    B = sc.building
    rng = np.random.default_rng(seed)
    r = S._radius() + 1
    box = G.clipped(sc.datum, _box(sc.datum, min(r, sc.datum.radius)))
    out = []
    while len(out) < n:
        x = S.random_point(rng)
        y = BuildingPoint(int(rng.integers(B.n_charts)), G.random_point_in(box, rng))
        if S.contains(y) or not B.common_charts(x, y):
            continue
        out.append(Segment.between(B, x, y))
    return out


def check_ascend(sc: Scene, opts: dict) -> ConvexityReport:
    cfg = opts.get("ascend", {})
    A = _convex_A(sc)
    if "from" in cfg:
        segs = [Segment.between(sc.building, point(cfg["from"], "verify.ascend.from"),
                                point(cfg["to"], "verify.ascend.to"))]
    else:
        segs = random_exit_geodesics(sc, int(cfg.get("n_geodesics", 100)), int(opts["seed"]))
    rep = ConvexityReport(True, tolerance=opts["tol"])
    exits = 0
    for g in segs:
        r = verify_ascending_propagation(sc.building, A, g, None, opts["tol"])
        exits += r.details.get("exit") is not None
        if not r.verdict:
            rep.fail("not_ascending", start=g.point(0), end=g.point(1), witness=r.witnesses[0])
    rep.details.update({"geodesics": len(segs), "exiting": exits})
    return rep


# circle: a CAT(1) space where local convexity does not imply pi-convexity

def _circle_local(sc: Scene) -> ConvexityReport:
    """Every closed subset of a metric graph is locally convex.

    The link at a point of a graph is a finite set with all distinct points
    at distance pi, so no short geodesic of the link can leave a subset.
    The report lists the strata that were inspected.
    """
    S = sc.circle_set
    link = S.link
    rep = ConvexityReport(True)
    strata = [Direction(vertex=v) for v in sorted(S.points)]
    strata += [link.at(arc, (a + b) / 2) for arc, ivs in sorted(S.intervals.items()) for a, b in ivs]
    germs = {i: _germs(S, d) for i, d in enumerate(strata)}
    rep.details.update({"strata": len(strata), "max_germs": max(map(len, germs.values()), default=0),
                        "boundary_points": S.boundary_points()})
    return rep


def _germs(S, d) -> list:
    d = S.link.canonical(d)
    if d.vertex is None:
        return ["+", "-"]
    return [(i, e) for i, e in S.link.incident(d.vertex) if S.germ_covered(i, e)]


def _circle_global(sc: Scene, opts: dict) -> ConvexityReport:
    S = sc.circle_set
    rep = is_pi_convex(S, tol=opts["tol"])
    w = rep.first("escaping_geodesic")
    if w is not None:
        length, paths = S.link.shortest_paths(w.data["p"], w.data["q"])
        removed = [iv for iv in _complement(S)]
        inside = all(any(a - 1e-9 <= min(s0, s1) and max(s0, s1) <= b + 1e-9 for arc2, a, b in removed
                         if arc2 == arc) for arc, s0, s1 in paths[0])
        rep.details.update({"geodesic_length": length, "geodesic_in_closed_removed_ball": inside})
    return rep


def _complement(S) -> list:
    out = []
    for i, (_, _, L) in enumerate(S.link.arcs):
        cur = 0.0
        for a, b in S.intervals.get(i, []):
            if a > cur:
                out.append((i, cur, a))
            cur = max(cur, b)
        if cur < L:
            out.append((i, cur, L))
    return out


CHECK_FUNCS = {
    "validate": check_validate, "normal": check_normal, "weak_normal": check_weak_normal,
    "thicken": check_thicken, "key_observation": check_key_observation, "preimage": check_preimage,
    "angle": check_angle, "local": check_local, "global": check_global,
    "length_metric": check_length_metric, "ascend": check_ascend,
}


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def run_loaded(sc: Scene, overrides: dict | None = None) -> RunReport:
    opts = dict(sc.verify)
    for k, v in (overrides or {}).items():
        if v is not None:
            opts[k] = v
    checks = opts.get("checks") or []
    unknown = [c for c in checks if c not in CHECK_FUNCS]
    if unknown:
        raise SceneError(f"unknown check(s) {unknown}")
    rep = RunReport(sc.name, sc.hash, int(opts["seed"]), int(opts["n_samples"]), float(opts["tol"]),
                    opts["mode"])
    for name in CHECKS:  # dependency order
        if name not in checks:
            continue
        t = time.perf_counter()
        rep.checks[name] = CHECK_FUNCS[name](sc, opts)
        rep.timings[name] = time.perf_counter() - t
    return rep


def run_scene(path, overrides: dict | None = None) -> RunReport:
    """Load a scene (file path or shipped name) and run its checks."""
    return run_loaded(load_scene(path), overrides)


def run_dict(data: dict, overrides: dict | None = None) -> RunReport:
    return run_loaded(parse_scene(data), overrides)


def list_scenarios(filter: str | None = None) -> list:
    names = sorted(p.name[:-5] for p in scene_dir().glob("*.json") if not p.name.endswith(".expected.json"))
    return [n for n in names if not filter or filter in n]
