"""The positive direction: preimages of weak-normal sets are convex.

A pentagon in the C2 apartment satisfies the weak normal condition with
respect to the fundamental chamber.  Its preimage in a tripod (three
half-apartments glued along a wall) is then convex: sampled geodesics stay
inside, and distance to the set grows along every geodesic that leaves it.

Run: python3 demos/tripod_convexity.py [--samples N]
"""
import argparse

from buildingconvex.harness import run_scene


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=300)
    args = ap.parse_args()
    rep = run_scene("tripod_preimage", {"n_samples": args.samples})
    for name, r in rep.checks.items():
        print(f"{name:<16} {'PASS' if r.verdict else 'FAIL'}")
    g = rep.checks["global"].details
    print(f"strata checked locally: {g['phase1']['strata']}, geodesic pairs: {g['phase2']['pairs']}")
    asc = run_scene("ascending_demo", {"n_samples": args.samples}).checks["ascend"]
    print(f"exit geodesics ascending: {asc.verdict} ({asc.details['exiting']} of {asc.details['geodesics']} leave the set)")


if __name__ == "__main__":
    main()
