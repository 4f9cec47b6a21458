"""The acceptance criteria, one test each, at the stated tolerances and runtime budgets.

A line ``criterion N: PASS|FAIL (t s / budget s) title`` per criterion is
printed in the pytest terminal summary.
"""
import functools
import math
import time
from fractions import Fraction as F

import numpy as np
import pytest

from buildingconvex.atlas import BuildingPoint, SectorGerm, with_center
from buildingconvex.canned import a2_counterexample_building, tree_building, tripod_building
from buildingconvex.convexity import (Segment, building_angle, check_angle_pi_concatenation,
                                      check_weak_normal_condition, check_weak_normal_thickened,
                                      is_locally_convex_at, key_halfspace_inclusion, modes_agree, preimage,
                                      verify_ascending_propagation, verify_global_convexity)
from buildingconvex.convexity.conditions import center_side
from buildingconvex.coxeter import CoxeterDatum, Wall, carrier
from buildingconvex.harness import list_scenarios, random_exit_geodesics, run_scene
from buildingconvex.polytope import PolyhedralSet, Polytope
from buildingconvex.scene import load_scene

from helpers import C2_WEAK, FIGURE, a2_hexagon, rand_point, random_polygon, rebase

TOL = 1e-9
RESULTS: dict = {}


def criterion(n: int, title: str, budget: float | None):
    def deco(fn):
        @functools.wraps(fn)
        def run(*a, **k):
            t0 = time.perf_counter()
            ok = False
            try:
                fn(*a, **k)
                ok = True
            finally:
                dt = time.perf_counter() - t0
                in_time = budget is None or dt < budget
                lim = f"{budget:g} s" if budget else "none"
                RESULTS[n] = (f"criterion {n:>2}: {'PASS' if ok and in_time else 'FAIL'}  "
                              f"({dt:.2f} s / budget {lim})  {title}")
            assert in_time, f"runtime {dt:.2f} s exceeds {budget} s"
        return run
    return deco


def _buildings():
    c2 = tripod_building("C2affine")
    tree = tree_building(2, 2)
    return [
        tripod_building("A1xA1", Wall.make((1, 0), 0)),
        a2_counterexample_building(),
        c2,
        with_center(c2, SectorGerm((F(0), F(0)), (F(3), F(1)))),
        tree,
        with_center(tree, carrier(tree.datum, (F(1, 2),))),
    ]


@criterion(1, "retraction composition law", 2.0)
def test_c1_composition_law():
    rng = np.random.default_rng(101)
    count = 0
    for B in _buildings():
        ks = sorted(B.center_isos())
        rebased = {k: rebase(B, k) for k in ks if k}
        for _ in range(200):
            x = rand_point(rng, B)
            k = ks[int(rng.integers(len(ks)))]
            if k == 0:
                xk = BuildingPoint(0, B.retract(x))
            else:
                swapped = BuildingPoint({0: k, k: 0}.get(x.chart, x.chart), x.coords)
                xk = BuildingPoint(k, rebased[k].retract(swapped))
            assert B.retract(xk) == B.retract(x)
            count += 1
    assert count >= 1000


@criterion(2, "geodesic chart independence", 5.0)
def test_c2_chart_independence():
    rng = np.random.default_rng(102)
    for B in _buildings()[:3] + _buildings()[4:5]:
        multi = 0
        for _ in range(1000):
            x, y = rand_point(rng, B), rand_point(rng, B)
            ls = B.geodesic_lengths(x, y)
            assert ls and max(ls) - min(ls) <= TOL
            multi += len(ls) > 1
        assert multi > 0


@criterion(3, "A2 counterexample: angle pi/3, local and global failure", 2.0)
def test_c3_a2_counterexample():
    sc = load_scene("a2_counterexample")
    B = sc.building
    S = preimage(B, sc.A)
    a, b, b2 = (BuildingPoint(0, (F(0), F(0))), BuildingPoint(0, (F(-1, 2), F(-1, 2))),
                BuildingPoint(1, (F(0), F(-1, 2))))
    assert abs(building_angle(B, a, b, b2) - math.pi / 3) <= TOL
    r = is_locally_convex_at(S, a)
    assert not r.verdict
    assert abs(r.first().data["distance"] - math.pi / 3) <= TOL
    g = verify_global_convexity(B, S, n_samples=200, seed=0)
    assert not g.verdict
    mid_b = [w for w in g.witnesses if w.kind == "global" and not w.data["midpoint_in_set"]]
    assert mid_b
    # the midpoint of [b, b'] itself
    k = B.common_apartment(b, b2)
    p, q = B.express(b, k), B.express(b2, k)
    assert not S.contains(BuildingPoint(k, tuple((x + y) / 2 for x, y in zip(p, q))))


@criterion(4, "circle counterexample", 1.0)
def test_c4_circle():
    rep = run_scene("circle_counterexample")
    assert rep.checks["local"].verdict
    assert not rep.checks["global"].verdict
    gd = rep.checks["global"].details
    assert abs(gd["geodesic_length"] - math.pi / 2) <= TOL
    assert gd["geodesic_in_closed_removed_ball"]
    assert abs(rep.checks["length_metric"].details["length"] - 3 * math.pi / 2) <= TOL


def _theorem_cases():
    c2 = load_scene("tripod_preimage")
    demo = load_scene("ascending_demo")
    a2 = a2_counterexample_building()
    return [(c2.building, c2.A), (demo.building, demo.A),
            (a2, PolyhedralSet.convex(a2_hexagon(F(1)))), (a2, PolyhedralSet.convex(a2_hexagon(F(3, 2))))]


@criterion(5, "preimages of weak-normal sets are convex", 30.0)
def test_c5_theorem():
    cases = _theorem_cases()
    assert len(cases) >= 3
    for B, A in cases:
        P = A.pieces[0]
        C = B.center
        assert P.intersect(C.closure()).vertices(), "A must meet C"
        assert check_weak_normal_condition(P, C, B.datum).verdict
        r = verify_global_convexity(B, preimage(B, A), n_samples=1000, tol=TOL, seed=0)
        assert r.verdict, r.witnesses[:1]


@criterion(6, "all_walls and two_closest modes agree", 10.0)
def test_c6_modes():
    rng = np.random.default_rng(106)
    for d in (CoxeterDatum.from_type("A2affine"), CoxeterDatum.from_type("C2affine")):
        for _ in range(50):
            assert modes_agree(random_polygon(rng, d), d.fundamental_chamber, d)


@criterion(7, "thickening keeps the weak normal condition", 5.0)
def test_c7_thicken():
    C2 = CoxeterDatum.from_type("C2affine")
    A2 = CoxeterDatum.from_type("A2affine")
    suite = [(C2, Polytope.from_points(FIGURE))] + [(C2, Polytope.from_points(v)) for v in C2_WEAK]
    suite += [(A2, a2_hexagon(k)) for k in (F(1), F(3, 2))]
    for d, P in suite:
        assert check_weak_normal_condition(P, d.fundamental_chamber, d).verdict
        for eps in (F(1, 10), F(1, 2), F(1)):
            assert check_weak_normal_thickened(P, eps, d.fundamental_chamber, d).verdict


@criterion(8, "ascending propagation", 10.0)
def test_c8_ascending():
    n = 0
    for name in ("ascending_demo", "tripod_preimage"):
        sc = load_scene(name)
        for g in random_exit_geodesics(sc, 50, 8):
            r = verify_ascending_propagation(sc.building, sc.A, g, tol=TOL)
            assert r.details["exit"] is not None
            assert r.verdict
            n += 1
    assert n >= 100
    sc = load_scene("a2_counterexample")
    g = Segment.between(sc.building, BuildingPoint(0, (F(-1, 2), F(-1, 2))), BuildingPoint(1, (F(0), F(-1, 2))))
    r = verify_ascending_propagation(sc.building, sc.A, g, tol=TOL)
    assert not r.verdict and r.first("not_monotone") is not None


@criterion(9, "angle-pi concatenations are geodesics", 2.0)
def test_c9_angle_pi():
    rng = np.random.default_rng(109)
    Bs = [tripod_building("A2affine"), tripod_building("C2affine")]
    for i in range(100):
        B = Bs[i % 2]
        k = int(rng.integers(B.n_charts))
        a = tuple(F(int(rng.integers(-8, 9)), 4) for _ in range(2))
        v = tuple(F(int(rng.integers(-4, 5)), 4) for _ in range(2))
        if v == (0, 0):
            v = (F(1), F(0))
        s, t = F(int(rng.integers(1, 5))), F(int(rng.integers(1, 5)))
        pa = BuildingPoint(k, a)
        pb = B.canonical_point(BuildingPoint(k, tuple(x - s * y for x, y in zip(a, v))))
        pc = B.canonical_point(BuildingPoint(k, tuple(x + t * y for x, y in zip(a, v))))
        r = check_angle_pi_concatenation(B, pa, pb, pc, n_pairs=5, seed=i, tol=TOL)
        assert r.verdict, r.witnesses[:1]


@criterion(10, "key observation on random polygons", 5.0)
def test_c10_key_observation():
    rng = np.random.default_rng(110)
    ds = [CoxeterDatum.from_type("C2affine"), CoxeterDatum.from_type("A2affine")]
    found = 0
    for i in range(5000):
        d = ds[i % 2]
        P = random_polygon(rng, d)
        H = d.wall(int(rng.integers(d.n_families)), int(rng.integers(-2, 3)))
        side = -center_side(d, d.fundamental_chamber, H)
        r = key_halfspace_inclusion(P, H, side, d)
        if r.first("precondition") is not None:
            continue
        assert r.verdict
        found += 1
        if found == 20:
            break
    assert found == 20


@criterion(11, "byte-identical reports per seed", None)
def test_c11_determinism():
    for name in list_scenarios():
        over = {"seed": 5, "n_samples": 200}
        assert run_scene(name, over).dumps() == run_scene(name, over).dumps()


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
