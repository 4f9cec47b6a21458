"""Thickening a weak-normal polygon keeps the weak normal condition.

``thicken`` returns a polygonal outer approximation of the epsilon
neighbourhood.  The sweep reports the number of sides and the worst corner
overshoot relative to epsilon.

Run: python3 demos/thicken_sweep.py
"""
from fractions import Fraction as F

from buildingconvex.convexity import check_weak_normal_condition, thicken
from buildingconvex.convexity.geometry import nearest_point
from buildingconvex.scene import load_scene


def main():
    sc = load_scene("thicken_sweep")
    d, P, C = sc.datum, sc.A.pieces[0], sc.building.center
    print(f"A: {len(P.vertices())} vertices, weak normal: {check_weak_normal_condition(P, C, d).verdict}")
    for eps in (F(1, 10), F(1, 2), F(1)):
        T = thicken(P, eps, d)
        over = max(d.distance(v, nearest_point(d, P, v)) for v in T.vertices()) / float(eps) - 1
        ok = check_weak_normal_condition(T, C, d).verdict
        print(f"eps={str(eps):>4}: {len(T.vertices()):>2} sides, corner overshoot {over:.4f} eps, weak normal: {ok}")


if __name__ == "__main__":
    main()
