"""Why the weak normal condition matters: a segment whose preimage bends.

Three half-apartments of type A2 meet along a wall through the vertex ``a``
of the fundamental alcove.  The segment ``A`` through ``a`` is convex in the
apartment, yet its preimage under the retraction is not: the two halves meet
at ``a`` with an angle of pi/3.

Run: python3 demos/a2_counterexample.py [--svg out.svg]
"""
import argparse
import math
from fractions import Fraction as F

from buildingconvex.atlas import BuildingPoint
from buildingconvex.convexity import (Segment, building_angle, check_weak_normal_condition, is_locally_convex_at,
                                      length_metric_distance, preimage, verify_ascending_propagation)
from buildingconvex.harness import run_scene
from buildingconvex.scene import load_scene
from buildingconvex.svg import emit_svg


def fmt(p) -> str:
    return "(" + ", ".join(str(x) for x in p) + ")"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--svg", default=None)
    args = ap.parse_args()

    sc = load_scene("a2_counterexample")
    B, A = sc.building, sc.A
    S = preimage(B, A)
    a = BuildingPoint(0, (F(0), F(0)))
    b = BuildingPoint(0, (F(-1, 2), F(-1, 2)))
    b2 = BuildingPoint(1, (F(0), F(-1, 2)))  # the mirror of b in the third sheet

    print("1. The set A is a segment; b and b' both retract into it.")
    print(f"   rho(b) = {fmt(B.retract(b))}, rho(b') = {fmt(B.retract(b2))}")

    ang = building_angle(B, a, b, b2)
    print(f"2. Angle at a between [a, b] and [a, b']: {ang / math.pi:.6f} pi")

    r = is_locally_convex_at(S, a)
    print(f"3. Link of the preimage at a is pi-convex: {r.verdict} "
          f"(its two directions are {r.first().data['distance'] / math.pi:.6f} pi apart)")

    length, _ = length_metric_distance(S, b, b2)
    print(f"4. Inside the preimage b and b' are {length:.6f} apart, in the building {B.distance(b, b2):.6f}.")

    g = Segment.between(B, b, b2)
    rep = verify_ascending_propagation(B, A, g)
    w = rep.first()
    print(f"5. d_A(rho(gamma(s))) along [b, b'] is monotone: {rep.verdict}; it drops back at s = {w.data['s']}")

    wn = check_weak_normal_condition(A.pieces[0], B.center, B.datum)
    print(f"6. The segment satisfies the weak normal condition: {wn.verdict} "
          f"(first failure at {fmt(wn.first().data['point'])})")

    if args.svg:
        emit_svg(sc, run_scene("a2_counterexample", {"checks": ["global"], "n_samples": 200}), args.svg)
        print(f"   picture written to {args.svg}")


if __name__ == "__main__":
    main()
