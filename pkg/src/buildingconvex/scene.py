"""Scene files: JSON descriptions of a building, a center, a set and the checks to run.

Rationals are strings ``"p/q"`` (plain integers are accepted too).  Unknown
keys are rejected at every level so that typos cannot silently change a run.
See the README for the full grammar; the shipped scenes are examples.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import rational as Q
from .atlas import AtlasBuilding, BuildingPoint, Gluing, SectorGerm
from .canned import tree_building, tripod_building
from .coxeter import TYPE_TAGS, Cell, CoxeterDatum, Wall, carrier
from .link import LinkSpace, LinkSubset
from .polytope import PolyhedralSet, Polytope

TOP_KEYS = {"name", "description", "coxeter", "builder", "charts", "gluings", "center", "set", "verify"}
CHECKS = ("validate", "normal", "weak_normal", "thicken", "key_observation", "preimage",
          "angle", "local", "global", "length_metric", "ascend")
VERIFY_KEYS = {"checks", "n_samples", "tol", "seed", "mode", "angle", "local", "length_metric",
               "ascend", "thicken"}


class SceneError(ValueError):
    """Malformed or invalid scene."""


@dataclass
class CircleSpace:
    """Circle of length 2 pi subdivided into ``arcs`` equal arcs (a CAT(1) space)."""

    arcs: int

    def link(self) -> LinkSpace:
        n = self.arcs
        return LinkSpace(n, [(i, (i + 1) % n, 2 * math.pi / n) for i in range(n)], "circle")


@dataclass
class Scene:
    name: str
    description: str
    raw: dict
    datum: CoxeterDatum | None = None
    building: AtlasBuilding | None = None
    circle: CircleSpace | None = None
    set_kind: str = "preimage"
    A: PolyhedralSet | None = None
    explicit: dict = field(default_factory=dict)
    circle_set: LinkSubset | None = None
    verify: dict = field(default_factory=dict)

    @property
    def checks(self) -> list:
        return list(self.verify.get("checks", []))

    @property
    def hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------

def _keys(obj, allowed: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise SceneError(f"{where}: expected an object")
    extra = set(obj) - allowed
    if extra:
        raise SceneError(f"{where}: unknown key(s) {sorted(extra)}")


def rat(x, where: str = "value") -> Fraction:
    try:
        return Q.frac(x)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise SceneError(f"{where}: not a rational: {x!r}") from e


def vec(xs, where: str = "vector") -> tuple:
    if not isinstance(xs, list):
        raise SceneError(f"{where}: expected a list")
    return tuple(rat(x, where) for x in xs)


def halfspace(obj, where: str) -> tuple:
    _keys(obj, {"normal", "offset"}, where)
    return vec(obj["normal"], where + ".normal"), rat(obj["offset"], where + ".offset")


def polytope(obj, rank: int, where: str) -> Polytope:
    if isinstance(obj, list):
        obj = {"halfspaces": obj}
    _keys(obj, {"halfspaces", "vertices"}, where)
    if "vertices" in obj:
        pts = [vec(p, where + ".vertices") for p in obj["vertices"]]
        if any(len(p) != rank for p in pts):
            raise SceneError(f"{where}: vertex dimension differs from the rank {rank}")
        return Polytope.from_points(pts)
    hs = [halfspace(h, f"{where}.halfspaces[{i}]") for i, h in enumerate(obj.get("halfspaces", []))]
    if any(len(n) != rank for n, _ in hs):
        raise SceneError(f"{where}: normal dimension differs from the rank {rank}")
    return Polytope(tuple(hs), rank)


def point(obj, where: str) -> BuildingPoint:
    if isinstance(obj, list):
        return BuildingPoint.make(0, vec(obj, where))
    _keys(obj, {"chart", "coords"}, where)
    return BuildingPoint.make(int(obj.get("chart", 0)), vec(obj["coords"], where + ".coords"))


def wall(obj, where: str) -> Wall:
    n, b = halfspace(obj, where)
    return Wall.make(n, b)


# ---------------------------------------------------------------------------
# sections
# ---------------------------------------------------------------------------

def _coxeter(obj) -> CoxeterDatum:
    _keys(obj, {"type_tag", "radius", "gram"}, "coxeter")
    tag = obj.get("type_tag")
    if tag not in TYPE_TAGS:
        raise SceneError(f"coxeter.type_tag: expected one of {list(TYPE_TAGS)}, got {tag!r}")
    gram = [vec(r, "coxeter.gram") for r in obj["gram"]] if "gram" in obj else None
    try:
        return CoxeterDatum.from_type(tag, int(obj.get("radius", 8)), gram)
    except ValueError as e:
        raise SceneError(f"coxeter: {e}") from e


def _center(obj, datum: CoxeterDatum):
    if obj is None:
        return None
    _keys(obj, {"chamber", "sector"}, "center")
    if "chamber" in obj:
        c = obj["chamber"]
        _keys(c, {"point", "key"}, "center.chamber")
        if "point" in c:
            cell = carrier(datum, vec(c["point"], "center.chamber.point"), check_region=False)
        else:
            cell = Cell(tuple(int(k) for k in c["key"]), datum)
        if not cell.is_chamber or not cell.is_realizable():
            raise SceneError("center.chamber does not describe a chamber")
        return cell
    s = obj["sector"]
    _keys(s, {"base", "direction"}, "center.sector")
    return SectorGerm(vec(s["base"], "center.sector.base"), vec(s["direction"], "center.sector.direction"))


def _gluings(items, datum: CoxeterDatum) -> list:
    out = []
    for i, g in enumerate(items):
        where = f"gluings[{i}]"
        _keys(g, {"i", "j", "weyl_word", "matrix", "translation", "domain"}, where)
        t = vec(g.get("translation", [0] * datum.rank), where + ".translation")
        if "matrix" in g:
            m = tuple(vec(r, where + ".matrix") for r in g["matrix"])
            word = ()
        else:
            word = tuple(int(w) for w in g.get("weyl_word", []))
            m, _ = datum.word_isometry(word)
        dom = g.get("domain", {"halfspaces": []})
        pieces = dom["pieces"] if isinstance(dom, dict) and "pieces" in dom else [dom]
        ps = PolyhedralSet(tuple(polytope(p, datum.rank, f"{where}.domain") for p in pieces))
        out.append(Gluing(int(g["i"]), int(g["j"]), (m, t), ps, word))
    return out


def _builder(obj, datum, center):
    _keys(obj, {"kind", "wall", "q", "depth", "arcs"}, "builder")
    kind = obj.get("kind")
    if kind == "thin":
        return AtlasBuilding(datum, 1, [], center, name="thin"), None
    if kind == "tripod":
        w = wall(obj["wall"], "builder.wall") if "wall" in obj else None
        B = tripod_building(datum.type_tag, w, None, datum.radius)
        return (B if center is None else AtlasBuilding(datum, 3, B.gluings, center, name=B.name)), None
    if kind == "tree":
        if datum.type_tag != "A1affine":
            raise SceneError("builder.kind tree needs coxeter.type_tag A1affine")
        B = tree_building(int(obj.get("q", 2)), int(obj.get("depth", 2)), datum.radius)
        if center is not None:
            tree = B.tree
            B = AtlasBuilding(datum, B.n_charts, B.gluings, center, name=B.name)
            B.tree = tree
        return B, None
    if kind == "circle":
        return None, CircleSpace(int(obj.get("arcs", 8)))
    raise SceneError(f"builder.kind: unknown kind {kind!r}")


def _set(obj, scene: Scene) -> None:
    if obj is None:
        scene.set_kind = "none"
        return
    _keys(obj, {"mode", "polytopes", "chart", "circle_minus_ball"}, "set")
    if scene.circle is not None:
        cfg = obj.get("circle_minus_ball")
        if cfg is None:
            raise SceneError("set: circle scenes need circle_minus_ball")
        _keys(cfg, {"center", "radius"}, "set.circle_minus_ball")
        scene.set_kind = "circle"
        scene.circle_set = circle_minus_ball(scene.circle, rat(cfg["center"]), rat(cfg["radius"]))
        return
    mode = obj.get("mode", "preimage")
    if mode not in ("preimage", "explicit"):
        raise SceneError(f"set.mode: expected preimage or explicit, got {mode!r}")
    rank = scene.datum.rank
    polys = tuple(polytope(p, rank, f"set.polytopes[{i}]") for i, p in enumerate(obj.get("polytopes", [])))
    scene.set_kind = mode
    if not polys:
        scene.set_kind = "empty"
        return
    if any(not P.vertices() and not _unbounded_nonempty(scene.datum, P) for P in polys):
        raise SceneError("set: a polytope is empty")
    if mode == "preimage":
        scene.A = PolyhedralSet(polys)
    else:
        scene.explicit = {int(obj.get("chart", 0)): list(polys)}


def _unbounded_nonempty(datum, P: Polytope) -> bool:
    return bool(P.intersect(datum.region).vertices())


def circle_minus_ball(space: CircleSpace, center_pi: Fraction, radius_pi: Fraction) -> LinkSubset:
    """Circle minus the open ball ``B(center * pi, radius * pi)``; ends must be vertices."""
    link = space.link()
    n = space.arcs
    lo, hi = (center_pi - radius_pi) * n / 2, (center_pi + radius_pi) * n / 2
    if lo.denominator != 1 or hi.denominator != 1:
        raise SceneError("circle_minus_ball: ball ends must be subdivision vertices")
    S = LinkSubset(link)
    removed = {int(k) % n for k in range(int(lo), int(hi))}
    for i, (_, _, L) in enumerate(link.arcs):
        if i not in removed:
            S.add_interval(i, 0.0, L)
    S.points.update({int(lo) % n, int(hi) % n})
    return S


def _verify(obj) -> dict:
    obj = dict(obj or {})
    _keys(obj, VERIFY_KEYS, "verify")
    checks = obj.get("checks", [])
    bad = [c for c in checks if c not in CHECKS]
    if bad:
        raise SceneError(f"verify.checks: unknown check(s) {bad}; expected a subset of {list(CHECKS)}")
    mode = obj.get("mode", "all_walls")
    if mode not in ("all_walls", "two_closest"):
        raise SceneError(f"verify.mode: expected all_walls or two_closest, got {mode!r}")
    obj.setdefault("n_samples", 1000)
    obj.setdefault("tol", 1e-9)
    obj.setdefault("seed", 0)
    obj["mode"] = mode
    return obj


def parse_scene(data: dict) -> Scene:
    _keys(data, TOP_KEYS, "scene")
    is_circle = isinstance(data.get("builder"), dict) and data["builder"].get("kind") == "circle"
    for k in ("name",) + (() if is_circle else ("coxeter",)):
        if k not in data:
            raise SceneError(f"scene: missing key {k!r}")
    sc = Scene(str(data["name"]), str(data.get("description", "")), data)
    if is_circle:
        _keys(data, {"name", "description", "builder", "set", "verify"}, "scene")
        sc.circle = _builder(data["builder"], None, None)[1]
        _set(data.get("set"), sc)
        sc.verify = _verify(data.get("verify"))
        return sc
    sc.datum = _coxeter(data["coxeter"])
    center = _center(data.get("center"), sc.datum)
    if "builder" in data:
        if "charts" in data or "gluings" in data:
            raise SceneError("scene: give either builder or charts/gluings")
        sc.building, sc.circle = _builder(data["builder"], sc.datum, center)
    else:
        n = int(data.get("charts", 1))
        sc.building = AtlasBuilding(sc.datum, n, _gluings(data.get("gluings", []), sc.datum), center,
                                    name=sc.name)
    _set(data.get("set"), sc)
    sc.verify = _verify(data.get("verify"))
    return sc


def load_scene(path) -> Scene:
    """Parse a scene file or a shipped scene name."""
    p = Path(path)
    if not p.exists() and not str(path).endswith(".json"):
        shipped = scene_dir() / f"{path}.json"
        if shipped.exists():
            p = shipped
    try:
        text = p.read_text()
    except OSError as e:
        raise SceneError(f"cannot read scene {path}: {e.strerror}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneError(f"{p.name}: parse error at line {e.lineno}, column {e.colno}: {e.msg}") from e
    return parse_scene(data)


def scene_dir() -> Path:
    return Path(str(resources.files("buildingconvex") / "scenes"))


def expected_verdicts(name: str) -> dict:
    return json.loads((scene_dir() / f"{name}.expected.json").read_text())
