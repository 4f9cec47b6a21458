"""Command line interface: ``buildingconvex COMMAND SCENE [flags]``.

Exit codes: 0 when every requested verdict holds, 1 on a verdict failure,
2 on malformed input.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import EXIT_FAIL, EXIT_INPUT, EXIT_PASS, RunReport, list_scenarios, run_loaded
from .scene import SceneError, expected_verdicts, load_scene, scene_dir
from .svg import SvgError, emit_svg

# command -> checks it runs (None: the scene's own list)
COMMANDS = {
    "validate": ["validate"],
    "check-normal": ["normal"],
    "check-weak-normal": ["weak_normal"],
    "preimage": ["preimage"],
    "verify-convex": ["local", "global"],
    "ascend": ["ascend"],
    "repro": None,
    "run": None,
}
MODES = {"all": "all_walls", "two": "two_closest", "all_walls": "all_walls", "two_closest": "two_closest"}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("scene", help="scene file or shipped scene name")
    p.add_argument("--samples", type=int, default=None, help="sample budget (default 1000)")
    p.add_argument("--tol", type=float, default=None, help="float tolerance (default 1e-9)")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    p.add_argument("--svg", type=Path, default=None, help="write a rank-2 picture here")
    p.add_argument("--json", type=Path, default=None, help="write the JSON report here ('-' for stdout)")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the JSON")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="buildingconvex",
                                 description="Convexity checks for retraction preimages in buildings.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _common(p)
        if name == "check-weak-normal":
            p.add_argument("--mode", choices=sorted(MODES), default=None)
    p = sub.add_parser("list", help="list shipped scenes")
    p.add_argument("filter", nargs="?", default=None)
    return ap


def _summary(rep: RunReport, out) -> None:
    print(f"scene {rep.scene}  hash {rep.scene_hash[:12]}  seed {rep.seed}  samples {rep.n_samples}  "
          f"tol {rep.tol:g}  mode {rep.mode}", file=out)
    for name, r in rep.checks.items():
        line = f"  {name:<15} {'PASS' if r.verdict else 'FAIL'}"
        if r.witnesses and not r.verdict:
            line += f"  witness: {r.witnesses[0].kind}"
        print(line, file=out)
    print(f"verdict {'PASS' if rep.verdict else 'FAIL'}", file=out)


def _run(args) -> int:
    sc = load_scene(args.scene)
    over = {"n_samples": args.samples, "tol": args.tol, "seed": args.seed}
    checks = COMMANDS[args.command]
    if checks is not None:
        over["checks"] = checks
    if getattr(args, "mode", None):
        over["mode"] = MODES[args.mode]
    rep = run_loaded(sc, over)
    out = sys.stderr if args.json is not None and str(args.json) == "-" else sys.stdout
    _summary(rep, out)
    if args.json is not None:
        text = rep.dumps(args.timings)
        if str(args.json) == "-":
            sys.stdout.write(text)
        else:
            args.json.write_text(text)
    if args.svg is not None:
        emit_svg(sc, rep, args.svg)
    if args.command == "repro" and (scene_dir() / f"{sc.name}.expected.json").exists():
        want = expected_verdicts(sc.name)["verdicts"]
        got = {k: v for k, v in rep.verdicts().items() if k in want}
        print(f"expected table: {'match' if got == want else 'MISMATCH'}", file=out)
    return rep.exit_code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name in list_scenarios(args.filter):
            print(name)
        return EXIT_PASS
    try:
        return _run(args)
    except (SceneError, SvgError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except KeyError as e:
        print(f"error: missing key {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
