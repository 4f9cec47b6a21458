"""Local convexity is not enough in curvature 1 without a diameter bound.

The circle of length 2 pi is CAT(1).  Remove an open ball of radius pi/4.
What is left is locally convex everywhere, but the short geodesic between its
two boundary points runs through the removed ball.

Run: python3 demos/circle_counterexample.py
"""
import math

from buildingconvex.harness import run_scene


def main():
    rep = run_scene("circle_counterexample")
    loc, glob, lm = rep.checks["local"], rep.checks["global"], rep.checks["length_metric"]
    print(f"locally convex at every stratum: {loc.verdict} ({loc.details['strata']} strata inspected)")
    print(f"pi-convex:                       {glob.verdict}")
    print(f"geodesic between the endpoints:  {glob.details['geodesic_length'] / math.pi:.4f} pi, "
          f"inside the closed removed ball: {glob.details['geodesic_in_closed_removed_ball']}")
    print(f"distance inside the set:         {lm.details['length'] / math.pi:.4f} pi")


if __name__ == "__main__":
    main()
