import math
from fractions import Fraction as F

import pytest
from hypothesis import assume, given, strategies as st

from buildingconvex import rational as Q
from buildingconvex.coxeter import CoxeterDatum, carrier, chambers_containing, project_chamber_to_cell
from buildingconvex.link import (Direction, LinkSpace, LinkSubset, angle_between_segments,
                                 direction_of_segment, is_pi_convex, link_datum_at, link_distance,
                                 proj_link_chamber)

A2 = CoxeterDatum.from_type("A2affine")
C2 = CoxeterDatum.from_type("C2affine")
O = (F(0), F(0))


def circle(n):
    return LinkSpace(n, [(i, (i + 1) % n, 2 * math.pi / n) for i in range(n)], "circle")


def arc_oracle(link, d1, d2):
    """Both ways around a circle: walk the cycle and compare positions."""
    start = {}  # arc -> (position of its start along the walk, walked forward?)
    pos, v, used = 0.0, 0, set()
    while len(used) < len(link.arcs):
        i = next(i for i, (a, b, _) in enumerate(link.arcs) if i not in used and v in (a, b))
        a, b, L = link.arcs[i]
        start[i] = (pos, a == v)
        used.add(i)
        pos += L
        v = b if a == v else a
    xs = []
    for d in (d1, d2):
        d = link.canonical(d)
        if d.vertex is not None:
            i = next(i for i, (a, b, _) in enumerate(link.arcs) if d.vertex in (a, b))
            a, b, L = link.arcs[i]
            t = 0.0 if d.vertex == a else 1.0
        else:
            i, t, L = d.arc, d.t, link.arcs[d.arc][2]
        p0, fwd = start[i]
        xs.append(p0 + (t if fwd else 1 - t) * L)
    x = abs(xs[0] - xs[1]) % (2 * math.pi)
    return min(x, 2 * math.pi - x)


# -- directions --------------------------------------------------------------

def test_direction_examples():
    L = link_datum_at(A2, O)
    d = direction_of_segment(O, (F(2, 3), F(1, 3)), L)  # along the wall (-1,2).x = 0
    assert d.vertex is not None
    b = A2.fundamental_chamber.barycenter()
    d = direction_of_segment(O, b, L)
    assert d.vertex is None and abs(d.t - 0.5) < 1e-9
    # oracle: pi/6 to both bounding wall directions
    for v in A2.fundamental_chamber.vertices()[1:]:
        assert abs(A2.angle(b, v) - math.pi / 6) < 1e-9
    with pytest.raises(ValueError):
        direction_of_segment(O, O, L)


def test_link_distance_examples():
    L = circle(1)
    d = L.at(0, 0.25)
    assert link_distance(d, d, L) == 0
    assert abs(link_distance(L.at(0, 0.2), L.at(0, 0.2 + math.pi), L) - math.pi) < 1e-9
    A = link_datum_at(A2, O)
    C = A2.fundamental_chamber
    opp2 = [D for D in chambers_containing(carrier(A2, O))
            if abs(A2.angle(C.barycenter(), D.barycenter()) - 2 * math.pi / 3) < 1e-9]
    assert len(opp2) == 2
    d1 = direction_of_segment(O, C.barycenter(), A)
    d2 = direction_of_segment(O, opp2[0].barycenter(), A)
    assert abs(link_distance(d1, d2, A) - 2 * math.pi / 3) < 1e-9
    assert abs(link_distance(d1, d2, A) - arc_oracle(A, d1, d2)) < 1e-9


def test_disconnected_distance_is_infinite():
    L = LinkSpace(4, [(0, 1, 1.0), (2, 3, 1.0)], "graph")
    assert math.isinf(link_distance(Direction(vertex=0), Direction(vertex=3), L))


def test_angle_examples():
    b = (F(1), F(0))
    assert angle_between_segments(A2, O, b, b) == 0
    assert abs(angle_between_segments(A2, O, b, (F(-2), F(0))) - math.pi) < 1e-12
    with pytest.raises(ValueError):
        angle_between_segments(A2, O, O, b)


vec2 = st.tuples(st.integers(-6, 6), st.integers(-6, 6)).filter(lambda v: v != (0, 0))


@given(st.sampled_from([A2, C2]), vec2, vec2, vec2)
def test_link_distance_is_a_metric(d, u, v, w):
    L = link_datum_at(d, O)
    ds = [L.locate(0, Q.vec(x)) for x in (u, v, w)]
    a, b, c = ds
    assert abs(link_distance(a, b, L) - link_distance(b, a, L)) < 1e-12
    assert link_distance(a, c, L) <= link_distance(a, b, L) + link_distance(b, c, L) + 1e-9
    assert abs(link_distance(a, b, L) - arc_oracle(L, a, b)) < 1e-9


@given(st.sampled_from([A2, C2]), vec2, vec2)
def test_direction_distance_matches_angle(d, u, v):
    L = link_datum_at(d, O)
    ang = angle_between_segments(d, O, Q.vec(u), Q.vec(v))
    assume(ang < math.pi - 1e-9)
    got = link_distance(direction_of_segment(O, Q.vec(u), L), direction_of_segment(O, Q.vec(v), L), L)
    assert abs(got - ang) < 1e-9


# -- pi-convexity ------------------------------------------------------------

def test_pi_convex_examples():
    L = circle(8)
    assert is_pi_convex(LinkSubset.full(L)).verdict
    S = LinkSubset(L)
    for i in range(4):
        S.add_interval(i, 0, L.arcs[i][2])
    assert is_pi_convex(S).verdict
    # circle minus an open arc of length pi/2 (two arcs of pi/4)
    S = LinkSubset(L)
    for i in range(8):
        if i not in (3, 4):
            S.add_interval(i, 0, L.arcs[i][2])
    r = is_pi_convex(S)
    assert not r.verdict
    w = r.first("escaping_geodesic")
    assert {w.data["p"], w.data["q"]} == {Direction(vertex=3), Direction(vertex=5)}
    assert abs(w.data["distance"] - math.pi / 2) < 1e-9


@pytest.mark.parametrize("k", range(1, 48))
def test_closed_arc_pi_convex_iff_short(k):
    # arc of length k * pi / 24 on a circle of 48 equal arcs
    L = circle(48)
    S = LinkSubset(L)
    for i in range(k):
        S.add_interval(i, 0, L.arcs[i][2])
    assert is_pi_convex(S).verdict == (k <= 24)


def test_full_circle_pi_convex_from_arcs():
    L = circle(48)
    S = LinkSubset(L)
    for i in range(48):
        S.add_interval(i, 0, L.arcs[i][2])
    assert is_pi_convex(S).verdict


@given(st.integers(1, 47), st.integers(0, 47))
def test_rotated_arc(k, start):
    L = circle(48)
    S = LinkSubset(L)
    for i in range(k):
        j = (start + i) % 48
        S.add_interval(j, 0, L.arcs[j][2])
    assert is_pi_convex(S).verdict == (k <= 24)


def test_cat1_girth():
    assert circle(6).check_cat1().verdict
    small = LinkSpace(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)], "graph")
    assert not small.check_cat1().verdict


# -- projections -------------------------------------------------------------

def _sample_oracle(d, a, C, S, L, n=72):
    """Directions pointing into Proj chamber: a + eps v lies in its closure."""
    P = project_chamber_to_cell(C, carrier(d, a))
    eps = F(1, 1000)
    for i in range(n):
        th = 2 * math.pi * (i + 0.37) / n
        v = tuple(F(x).limit_denominator(10**6) for x in d.vector_at_angle(th))
        inside = P.closure().contains(Q.add(a, Q.scale(eps, v)))
        assert S.contains(L.locate(0, v), tol=1e-6) == inside


def test_proj_link_examples():
    C = A2.fundamental_chamber
    b = C.barycenter()
    S = proj_link_chamber(A2, b, C)
    assert abs(S.measure() - 2 * math.pi) < 1e-9
    panel = (F(1, 3), F(1, 6))
    L = link_datum_at(A2, panel)
    S = proj_link_chamber(A2, panel, C, L)
    assert abs(S.measure() - math.pi) < 1e-9
    _sample_oracle(A2, panel, C, S, L)
    L = link_datum_at(A2, O)
    S = proj_link_chamber(A2, O, C, L)
    assert abs(S.measure() - math.pi / 3) < 1e-9
    _sample_oracle(A2, O, C, S, L)


@given(st.sampled_from([A2, C2]), st.data())
def test_proj_link_sampling_oracle(d, data):
    from buildingconvex.coxeter import chambers_in_region
    ch = chambers_in_region(d, 2)
    C = data.draw(st.sampled_from(ch))
    D = data.draw(st.sampled_from(ch))
    a = data.draw(st.sampled_from(D.vertices()))
    L = link_datum_at(d, a)
    _sample_oracle(d, a, C, proj_link_chamber(d, a, C, L), L, 24)
