import math
from fractions import Fraction as F

import numpy as np
import pytest

from buildingconvex.atlas import BuildingPoint
from buildingconvex.convexity import (Segment, as_subset, building_angle, is_ascending_at, is_cone_point,
                                      is_locally_convex_at, length_metric_distance, link_of_set, preimage,
                                      verify_ascending_propagation, verify_global_convexity)
from buildingconvex.coxeter import CoxeterDatum
from buildingconvex.polytope import Polytope
from buildingconvex.scene import load_scene

from helpers import FIGURE, rand_point

C2 = CoxeterDatum.from_type("C2affine")


def interior_angle(d, verts, i):
    E = [np.array(d.to_euclid(v), float) for v in verts]
    p, a, b = E[i], E[i - 1], E[(i + 1) % len(E)]
    u, w = a - p, b - p
    return math.acos(float(u @ w) / (np.linalg.norm(u) * np.linalg.norm(w)))


def ordered_figure():
    P = Polytope.from_points(FIGURE)
    E = [C2.to_euclid(v) for v in P.vertices()]
    cx, cy = sum(e[0] for e in E) / len(E), sum(e[1] for e in E) / len(E)
    return sorted(P.vertices(), key=lambda v: math.atan2(C2.to_euclid(v)[1] - cy, C2.to_euclid(v)[0] - cx))


@pytest.fixture(scope="module")
def a2():
    sc = load_scene("a2_counterexample")
    return sc, preimage(sc.building, sc.A)


@pytest.fixture(scope="module")
def tripod():
    sc = load_scene("tripod_preimage")
    return sc, preimage(sc.building, sc.A)


# -- links of sets -------------------------------------------------------------

def test_link_of_vertex_is_interior_angle():
    verts = ordered_figure()
    S = as_subset(C2, Polytope.from_points(FIGURE))
    for i, v in enumerate(verts):
        sl = link_of_set(S, BuildingPoint(0, v))
        measure = sum(s1 - s0 for ivs in sl.subset.intervals.values() for s0, s1 in ivs)
        assert measure == pytest.approx(interior_angle(C2, verts, i), abs=1e-9)


def test_link_outside_raises():
    S = as_subset(C2, Polytope.from_points(FIGURE))
    with pytest.raises(ValueError):
        link_of_set(S, BuildingPoint(0, (F(50), F(50))))


def test_cone_points_of_polygon():
    S = as_subset(C2, Polytope.from_points(FIGURE))
    for v in ordered_figure():
        assert is_cone_point(S, BuildingPoint(0, v), eps=F(1, 64))
    with pytest.raises(ValueError):
        is_cone_point(S, BuildingPoint(0, (F(0), F(0))), eps=F(5))


def test_convex_polygon_locally_convex_everywhere():
    S = as_subset(C2, Polytope.from_points(FIGURE))
    for v in ordered_figure():
        assert is_locally_convex_at(S, BuildingPoint(0, v)).verdict


def test_a2_local_failure_at_a(a2):
    sc, S = a2
    r = is_locally_convex_at(S, BuildingPoint(0, (F(0), F(0))))
    assert not r.verdict
    w = r.first("escaping_geodesic")
    assert w.data["distance"] == pytest.approx(math.pi / 3, abs=1e-9)
    # lifted points are near a, at distance about 1/16
    a = BuildingPoint(0, (F(0), F(0)))
    for k in ("p_point", "q_point"):
        assert sc.building.distance(a, w.data[k]) < 0.2


# -- preimages ---------------------------------------------------------------------

@pytest.mark.parametrize("name", ["tripod_preimage", "a2_counterexample", "figure_normal_condition"])
def test_preimage_membership_matches_retraction(name):
    sc = load_scene(name)
    B, A = sc.building, sc.A
    S = preimage(B, A)
    rng = np.random.default_rng(3)
    for _ in range(300):
        x = rand_point(rng, B, r=2)
        if not B.datum.in_region(x.coords):
            continue
        assert S.contains(x) == A.contains(B.retract(x))


# -- angles and the length metric ------------------------------------------------

def test_a2_angle_and_length_metric(a2):
    sc, S = a2
    B = sc.building
    a, b, c = BuildingPoint(0, (F(0), F(0))), BuildingPoint(0, (F(-1, 2), F(-1, 2))), BuildingPoint(1, (F(0), F(-1, 2)))
    assert building_angle(B, a, b, c) == pytest.approx(math.pi / 3, abs=1e-9)
    length, path = length_metric_distance(S, b, c)
    # the only path in S bends at a
    assert length == pytest.approx(B.distance(a, b) + B.distance(a, c), abs=1e-9)
    assert length == pytest.approx(math.sqrt(2), abs=1e-9)
    assert B.distance(b, c) < length - 1e-3


def test_length_metric_convex_equals_geodesic():
    sc = load_scene("figure_normal_condition")
    S = preimage(sc.building, sc.A)
    rng = np.random.default_rng(5)
    for _ in range(6):
        x, y = S.random_point(rng), S.random_point(rng)
        length, _ = length_metric_distance(S, x, y)
        assert length == pytest.approx(sc.building.distance(x, y), abs=1e-9)


def test_length_metric_tripod_mirrored_points(tripod):
    sc, S = tripod
    B = sc.building
    x, y = BuildingPoint(1, (F(1), F(1))), BuildingPoint(2, (F(1), F(1)))
    if not (S.contains(x) and S.contains(y)):
        pytest.skip("mirrored points outside the set")
    length, _ = length_metric_distance(S, x, y)
    assert length == pytest.approx(B.distance(x, y), abs=1e-9)


def test_length_metric_rejects_outside(a2):
    sc, S = a2
    with pytest.raises(ValueError):
        length_metric_distance(S, BuildingPoint(0, (F(3), F(3))), BuildingPoint(0, (F(0), F(0))))


# -- ascending geodesics ----------------------------------------------------------

def test_a2_ascend_fails(a2):
    sc, _ = a2
    B = sc.building
    g = Segment.between(B, BuildingPoint(0, (F(-1, 2), F(-1, 2))), BuildingPoint(1, (F(0), F(-1, 2))))
    r = verify_ascending_propagation(B, sc.A, g)
    assert not r.verdict
    assert r.first("not_monotone") is not None


def test_ascending_at_inside_raises(tripod):
    sc, _ = tripod
    B = sc.building
    g = Segment.between(B, BuildingPoint(0, (F(0), F(1))), BuildingPoint(0, (F(1, 2), F(1))))
    with pytest.raises(ValueError):
        is_ascending_at(B, sc.A, g, F(1, 2))


def test_tripod_exit_geodesics_ascend(tripod):
    from buildingconvex.harness import random_exit_geodesics
    sc, _ = tripod
    segs = random_exit_geodesics(sc, 20, 0)
    assert segs
    for g in segs:
        r = verify_ascending_propagation(sc.building, sc.A, g)
        assert r.verdict
        assert r.details["exit"] is not None
        assert r.details["initial"]


# -- global convexity --------------------------------------------------------------

def test_global_tripod_convex(tripod):
    sc, S = tripod
    r = verify_global_convexity(sc.building, S, n_samples=150)
    assert r.verdict and r.details["sound"]


def test_global_a2_fails_with_midpoint_outside(a2):
    sc, S = a2
    r = verify_global_convexity(sc.building, S, n_samples=150)
    assert not r.verdict
    w = r.first("global")
    assert w is not None and not w.data["midpoint_in_set"]
    assert r.details["phase1"]["failures"] >= 1
