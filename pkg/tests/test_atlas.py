import math
from fractions import Fraction as F

import numpy as np
import pytest

from buildingconvex import rational as Q
from buildingconvex.atlas import (AtlasError, BuildingPoint, Gluing, SectorGerm, canonical_point,
                                  common_apartment, geodesic, link_with_retraction,
                                  project_chamber_at_infinity, retract_center_chamber,
                                  retract_center_infinity, validate_atlas, weyl_distance, with_center)
from buildingconvex.atlas import AtlasBuilding
from buildingconvex.canned import a2_counterexample_building, half, tree_building, tripod_building
from buildingconvex.coxeter import CoxeterDatum, apply, Wall, carrier, chambers_in_region, project_chamber_to_cell
from buildingconvex.link import link_distance
from buildingconvex.polytope import PolyhedralSet, Polytope

from helpers import rand_point, rebase, tree_height

TRIPOD = tripod_building("A1xA1", Wall.make((1, 0), 0))
TREE = tree_building(2, 2)
A2T = a2_counterexample_building()


def gram_len(d, v):
    return math.sqrt(float(sum(v[i] * d.gram[i][j] * v[j] for i in range(d.rank) for j in range(d.rank))))


# -- validate_atlas --------------------------------------------------------------

def test_validate_examples():
    d = CoxeterDatum.from_type("A2affine")
    assert validate_atlas(AtlasBuilding(d, 1, [])).verdict
    assert validate_atlas(tripod_building("A1affine")).verdict
    d1 = CoxeterDatum.from_type("A1affine")
    bad = PolyhedralSet((Polytope((((F(1),), F(-1)),), 1), Polytope((((F(-1),), F(-1)),), 1)))
    B = AtlasBuilding(d1, 2, [Gluing(0, 1, ((((F(1),),)), (F(0),)), bad)])
    r = validate_atlas(B)
    assert not r.verdict and r.first().kind == "domain_not_convex"
    assert r.first().data["gluing"] == 0


@pytest.mark.parametrize("B", [tree_building(2, 3), TRIPOD, A2T, tripod_building("C2affine")],
                         ids=["tree23", "tripodA1xA1", "a2", "tripodC2"])
def test_canned_buildings_valid(B):
    assert validate_atlas(B).verdict


# -- canonical points ------------------------------------------------------------

def test_canonical_point_examples():
    x = BuildingPoint.make(0, (1, 2))
    assert canonical_point(TRIPOD, x) == x
    y = BuildingPoint.make(2, (-1, 2))  # H+ seen from chart 2 through the reflection
    assert canonical_point(TRIPOD, y) == BuildingPoint.make(0, (1, 2))
    z = BuildingPoint.make(1, (1, 2))  # H3 lies in charts 1 and 2 only
    assert canonical_point(TRIPOD, z) == z
    with pytest.raises(ValueError):
        TRIPOD.point(7, (0, 0))


def test_canonical_idempotent():
    rng = np.random.default_rng(1)
    for B in (TRIPOD, TREE, A2T):
        for _ in range(50):
            x = rand_point(rng, B)
            c = B.canonical_point(x)
            assert B.canonical_point(c) == c
            assert B.same_point(x, c)


# -- retractions -----------------------------------------------------------------

def test_retract_chamber_examples():
    C = TRIPOD.center
    assert C.contains(C.barycenter()) and C.barycenter()[0] > 0  # C lies in H+
    for p in [(F(1, 3), F(2)), C.barycenter()]:
        assert retract_center_chamber(TRIPOD, BuildingPoint(0, p)) == p
    # x in branch H3 at distance t from the wall: mirror image on the side away from C
    for t, y in [(F(1, 2), F(3)), (F(5, 4), F(-2))]:
        assert retract_center_chamber(TRIPOD, BuildingPoint(1, (t, y))) == (-t, y)


def test_retract_infinity_tree_oracle():
    rng = np.random.default_rng(2)
    for _ in range(300):
        x = rand_point(rng, TREE, r=4)
        (h,) = retract_center_infinity(TREE, x)
        assert h == tree_height(TREE, x)
    assert retract_center_infinity(TREE, BuildingPoint.make(0, (F(3, 2),))) == (F(3, 2),)


def test_retract_infinity_needs_germ_center():
    with pytest.raises(AtlasError):
        retract_center_infinity(TRIPOD, BuildingPoint.make(0, (0, 0)))


def test_composition_law_small():
    rng = np.random.default_rng(3)
    for B in (TRIPOD, A2T, TREE, with_center(TREE, carrier(TREE.datum, (F(1, 2),)))):
        for k in sorted(B.center_isos()):
            Bk = rebase(B, k)
            for _ in range(20):
                x = rand_point(rng, B)
                xk = BuildingPoint(k, B.retract(x) if k == 0 else Bk.retract(_swap(x, k)))
                assert B.retract(xk) == B.retract(x)


def _swap(x, k):
    return BuildingPoint({0: k, k: 0}.get(x.chart, x.chart), x.coords)


def test_retraction_nonexpanding_and_isometric_on_center_charts():
    rng = np.random.default_rng(4)
    for B in (TRIPOD, A2T, TREE):
        d = B.datum
        cis = B.center_isos()
        for _ in range(100):
            x, y = rand_point(rng, B), rand_point(rng, B)
            dxy = B.distance(x, y)
            dr = d.distance(B.retract(x), B.retract(y))
            assert dr <= dxy + 1e-9
            k = sorted(cis)[int(rng.integers(len(cis)))]
            xk, yk = BuildingPoint(k, x.coords), BuildingPoint(k, y.coords)
            assert abs(d.distance(B.retract(xk), B.retract(yk)) - d.distance(x.coords, y.coords)) < 1e-9


def test_projection_compatible_with_retraction():
    B = A2T
    d = B.datum
    C = B.center
    cis = B.center_isos()
    for k in range(B.n_charts):
        for D in chambers_in_region(d, 1):
            for v in D.vertices():
                sigma = carrier(d, v, check_region=False)
                pc = B.point_class(k, v)
                j = next(j for j in pc.charts if j in cis)
                Cj = carrier(d, apply(cis[j], C.barycenter()), check_region=False)
                sj = carrier(d, pc.reps[j], check_region=False)
                P = project_chamber_to_cell(Cj, sj)
                img = carrier(d, B.retract(BuildingPoint(j, P.barycenter())), check_region=False)
                rs = carrier(d, B.retract(BuildingPoint(k, v)), check_region=False)
                assert img == project_chamber_to_cell(C, rs)


# -- chambers at infinity ------------------------------------------------------------

def test_project_at_infinity_examples():
    d = CoxeterDatum.from_type("C2affine")
    germ = SectorGerm(Q.vec((0, 0)), Q.vec((F(3), F(1))))
    B = AtlasBuilding(d, 1, [], germ)
    sigma = carrier(d, (0, 0))
    k, ch = project_chamber_at_infinity(B, germ, 0, sigma)
    eps = F(1, 1000)
    assert ch == carrier(d, (3 * eps + eps / 7, eps))  # shoot a ray from a perturbation of sigma
    D = d.fundamental_chamber
    assert project_chamber_at_infinity(B, germ, 0, D)[1] == D
    # tree: the edge at a node toward the end
    rng = np.random.default_rng(5)
    for _ in range(60):
        x = rand_point(rng, TREE, r=2, den=1)
        node = carrier(TREE.datum, x.coords, check_region=False)
        k, e = project_chamber_at_infinity(TREE, TREE.center, x.chart, node)
        (h,) = TREE.retract(BuildingPoint(k, e.barycenter()))
        assert h == tree_height(TREE, x) + F(1, 2)


# -- two-point geometry ----------------------------------------------------------------

def test_common_apartment_examples():
    x, y = BuildingPoint.make(0, (1, 1)), BuildingPoint.make(0, (-1, 2))
    assert common_apartment(TRIPOD, x, y) == 0
    y3 = BuildingPoint.make(1, (1, 1))  # H3
    assert common_apartment(TRIPOD, x, y3) == 2  # chart made of H+ and H3
    assert common_apartment(TRIPOD, y3, y3) == 1


def test_geodesic_examples():
    x = BuildingPoint.make(0, (1, 1))
    g = geodesic(TRIPOD, x, x)
    assert g.length == 0
    C = A2T.center
    b = C.barycenter()
    p = BuildingPoint(0, b)
    q = BuildingPoint(0, Q.add(b, (F(1, 100), F(1, 100))))
    assert abs(geodesic(A2T, p, q).length - gram_len(A2T.datum, (F(1, 100), F(1, 100)))) < 1e-12
    d = TRIPOD.datum
    s, t, y1, y2 = F(1, 2), F(3, 2), F(1), F(-2)
    x = BuildingPoint(0, (s, y1))   # H+ at distance s
    y = BuildingPoint(1, (t, y2))   # H3 at distance t
    # folding chart 2: H+ sits at x1 = -s, H3 at x1 = t
    want = gram_len(d, (s + t, y1 - y2))
    assert abs(geodesic(TRIPOD, x, y).length - want) < 1e-12


def test_geodesic_chart_independence_small():
    rng = np.random.default_rng(6)
    for B in (TRIPOD, A2T, TREE):
        for _ in range(100):
            x, y = rand_point(rng, B), rand_point(rng, B)
            ls = B.geodesic_lengths(x, y)
            assert ls and max(ls) - min(ls) < 1e-9


# -- links with retraction ----------------------------------------------------------------

def _sample_check(B, a, lr, n=16):
    d = B.datum
    ra = B.retract(a)
    eps = F(1, 1000)
    for k in lr.charts:
        piece = lr.piece_of_chart(k)
        p = B.express(a, k)
        for i in range(n):
            th = 2 * math.pi * (i + 0.3) / n
            v = tuple(F(x).limit_denominator(10**4) for x in d.vector_at_angle(th))
            got = lr.map_direction(lr.link.locate(piece, v))
            y = B.retract(BuildingPoint(k, Q.add(p, Q.scale(eps, v))))
            want = lr.target.locate(0, Q.sub(y, ra))
            assert link_distance(got, want, lr.target) < 1e-6


def test_link_with_retraction_chamber_interior():
    a = BuildingPoint(0, TRIPOD.center.barycenter())
    lr = link_with_retraction(TRIPOD, a)
    assert abs(lr.link.total_length() - 2 * math.pi) < 1e-9
    _sample_check(TRIPOD, a, lr)


def test_link_with_retraction_tripod_wall():
    a = BuildingPoint.make(0, (0, F(1, 2)))
    lr = link_with_retraction(TRIPOD, a)
    L = lr.link
    assert L.n_vertices == 2 and len(L.arcs) == 3
    assert all(abs(arc[2] - math.pi) < 1e-9 for arc in L.arcs)
    _sample_check(TRIPOD, a, lr)


def test_link_with_retraction_a2_vertex_bijective_on_proj():
    a = BuildingPoint.make(0, (0, 0))
    lr = link_with_retraction(A2T, a)
    assert lr.link.check_cat1().verdict
    _sample_check(A2T, a, lr, n=12)
    # directions into Proj C = C: the map is injective and preserves distances
    C = A2T.center
    vs = [Q.add(Q.scale(F(i, 10), C.vertices()[1]), Q.scale(F(10 - i, 10), C.vertices()[2])) for i in range(1, 10)]
    src = [lr.link.locate(0, v) for v in vs]
    img = [lr.map_direction(s) for s in src]
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            assert abs(link_distance(src[i], src[j], lr.link) - link_distance(img[i], img[j], lr.target)) < 1e-9
            assert link_distance(img[i], img[j], lr.target) > 0


def test_weyl_distance_a2():
    d = A2T.datum
    C = A2T.center
    h = Wall.make((2, -1), 0)
    m, t = d.reflection(h)
    D = carrier(d, tuple(a + b for a, b in zip(Q.matvec(m, C.barycenter()), t)))
    # D' is the H3 chamber on the panel, at C's coordinates in chart 1
    wd = weyl_distance(A2T, (0, D), (1, C))
    assert len(wd.word) == 1
    assert wd.iso == d.reflection(h)


def test_tree_thick_everywhere():
    B = tree_building(2, 3)
    assert validate_atlas(B).verdict
    # every node of the base line lies in at least 3 branches: its link has >= 3 points
    for c in range(-2, 3):
        lr = link_with_retraction(B, BuildingPoint.make(0, (c,)))
        assert lr.link.n_vertices >= 3
