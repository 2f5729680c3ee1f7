"""JSON scene documents: regions, fields, distributions and tasks.

Polynomials are written as ``{"2,0,0": 1.0, "0,1,0": 1.0}`` (``x^2 + y``).
Vector fields are lists of three such maps. Density components of a patch
are keyed by their 1-based axis digits, e.g. ``"13"`` for ``rho^{13}``
(``""`` for order 0). Wherever a field is expected, either an inline value
or the name of an entry in ``fields`` is accepted.

Example::

    {
      "regions": {"ref": [[[0,0,0],[1,0,0],[0,1,0],[0,0,1]]]},
      "fields": {"phi": {"1,0,0": 1.0}},
      "distributions": {
        "P": {"type": "multipole", "order": 1, "patches": [
          {"tet": [[0,0,0],[1,0,0],[0,1,0],[0,0,1]], "order": 1,
           "density": {"1": {"0,0,0": 1.0}}}]}
      },
      "tasks": [{"name": "energy", "kind": "evaluate", "distribution": "P",
                 "phi": "phi", "expect": 0.16666666666666666}]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .fields import MAX_DEGREE, DegreeCapError, PolyScalarField, PolyVectorField
from .flux import BalanceSystem, Hyperflux
from .geometry import DegenerateTetError, SimplicialRegion, Tet
from .multipole import MAX_ORDER, DensityPatch, MultipoleDistribution, PointAtom, indices

TASK_KINDS = (
    "evaluate", "decompose-dipole", "decompose-quadrupole", "power", "force-decompose",
    "balance", "variational", "hyperflux", "moving-dipole-flux", "verify-suite",
)


class SceneParseError(ValueError):
    """Malformed document; ``location`` is a JSON path or ``line:col``."""

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


class SceneValidationError(ValueError):
    """Well-formed document with unresolved names, degree caps or degenerate cells."""


@dataclass
class Task:
    name: str
    kind: str
    params: dict[str, Any] = field(default_factory=dict)


@dataclass
class Scene:
    regions: dict[str, SimplicialRegion] = field(default_factory=dict)
    fields: dict[str, PolyScalarField | PolyVectorField] = field(default_factory=dict)
    distributions: dict[str, MultipoleDistribution | BalanceSystem] = field(default_factory=dict)
    tasks: list[Task] = field(default_factory=list)


# -- parsing ------------------------------------------------------------------------

def _expect(value, kind, where: str):
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise SceneParseError(f"expected {name}, got {type(value).__name__}", where)
    return value


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SceneParseError(f"expected a number, got {value!r}", where)
    return float(value)


def _exponent_key(key: str, where: str) -> tuple[int, int, int]:
    try:
        exps = tuple(int(p) for p in key.split(","))
    except ValueError:
        raise SceneParseError(f"bad exponent key {key!r}", where) from None
    if len(exps) != 3 or min(exps) < 0:
        raise SceneParseError(f"exponent key {key!r} must be three non-negative ints", where)
    return exps


def parse_scalar(obj, where: str) -> PolyScalarField:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return PolyScalarField.constant(obj)
    _expect(obj, dict, where)
    terms = {}
    for key, value in obj.items():
        exps = _exponent_key(key, f"{where}[{key!r}]")
        terms[exps] = terms.get(exps, 0.0) + _number(value, f"{where}[{key!r}]")
    return PolyScalarField(terms)


def parse_vector(obj, where: str) -> PolyVectorField:
    _expect(obj, list, where)
    if len(obj) != 3:
        raise SceneParseError("a vector field needs three components", where)
    return PolyVectorField(tuple(parse_scalar(c, f"{where}[{i}]") for i, c in enumerate(obj)))


def parse_tet(obj, where: str) -> Tet:
    _expect(obj, list, where)
    if len(obj) != 4:
        raise SceneParseError("a tetrahedron needs four vertices", where)
    verts = []
    for i, p in enumerate(obj):
        _expect(p, list, f"{where}[{i}]")
        if len(p) != 3:
            raise SceneParseError("a vertex needs three coordinates", f"{where}[{i}]")
        verts.append(tuple(_number(c, f"{where}[{i}][{j}]") for j, c in enumerate(p)))
    return Tet(tuple(verts))


def _tensor(obj, order: int, where: str) -> np.ndarray:
    if order == 0:
        return np.array(_number(obj, where))
    arr = np.asarray(obj, dtype=object)
    if arr.shape != (3,) * order:
        raise SceneParseError(f"strength of an order-{order} atom must have shape "
                              f"{(3,) * order}, got {arr.shape}", where)
    for idx in np.ndindex(arr.shape):
        _number(arr[idx], f"{where}{list(idx)}")
    return arr.astype(float)


def _index_key(key: str, order: int, where: str) -> tuple[int, ...]:
    if len(key) != order or any(c not in "123" for c in key):
        raise SceneParseError(f"density key {key!r} must be {order} digits in 1..3", where)
    return tuple(int(c) - 1 for c in key)


class _Resolver:
    def __init__(self, fields_raw: dict):
        self.raw = fields_raw
        self.parsed: dict[str, PolyScalarField | PolyVectorField] = {}

    def field(self, name: str, where: str):
        if name not in self.raw:
            raise SceneValidationError(f"{where}: undefined field {name!r}")
        if name not in self.parsed:
            obj = self.raw[name]
            path = f"$.fields.{name}"
            self.parsed[name] = parse_vector(obj, path) if isinstance(obj, list) \
                else parse_scalar(obj, path)
        return self.parsed[name]

    def scalar(self, obj, where: str) -> PolyScalarField:
        if isinstance(obj, str):
            f = self.field(obj, where)
            if not isinstance(f, PolyScalarField):
                raise SceneValidationError(f"{where}: field {obj!r} is not scalar")
            return f
        return parse_scalar(obj, where)

    def vector(self, obj, where: str) -> PolyVectorField:
        if isinstance(obj, str):
            f = self.field(obj, where)
            if not isinstance(f, PolyVectorField):
                raise SceneValidationError(f"{where}: field {obj!r} is not a vector field")
            return f
        return parse_vector(obj, where)


def _parse_distribution(obj, res: _Resolver, where: str):
    _expect(obj, dict, where)
    kind = obj.get("type", "multipole")
    if kind == "balance":
        for key in ("u", "beta", "s"):
            if key not in obj:
                raise SceneParseError(f"balance system needs {key!r}", where)
        return BalanceSystem(res.vector(obj["u"], f"{where}.u"),
                             res.scalar(obj["beta"], f"{where}.beta"),
                             res.scalar(obj["s"], f"{where}.s"))
    if kind not in ("multipole", "hyperflux"):
        raise SceneParseError(f"unknown distribution type {kind!r}", where)
    order = obj.get("order")
    if isinstance(order, bool) or not isinstance(order, int):
        raise SceneParseError("order must be an integer", f"{where}.order")
    if not 0 <= order <= MAX_ORDER:
        raise SceneValidationError(f"{where}.order: order {order} outside 0..{MAX_ORDER}")
    atoms = []
    for i, a in enumerate(_expect(obj.get("atoms", []), list, f"{where}.atoms")):
        w = f"{where}.atoms[{i}]"
        _expect(a, dict, w)
        k = a.get("order", 0)
        if isinstance(k, bool) or not isinstance(k, int) or not 0 <= k <= order:
            raise SceneValidationError(f"{w}.order: must be an integer in 0..{order}")
        loc = _expect(a.get("location"), list, f"{w}.location")
        if len(loc) != 3:
            raise SceneParseError("location needs three coordinates", f"{w}.location")
        atoms.append(PointAtom(np.array([_number(c, f"{w}.location") for c in loc]),
                               _tensor(a.get("strength"), k, f"{w}.strength")))
    patches = []
    for i, p in enumerate(_expect(obj.get("patches", []), list, f"{where}.patches")):
        w = f"{where}.patches[{i}]"
        _expect(p, dict, w)
        k = p.get("order", 0)
        if isinstance(k, bool) or not isinstance(k, int) or not 0 <= k <= order:
            raise SceneValidationError(f"{w}.order: must be an integer in 0..{order}")
        tet = parse_tet(p.get("tet"), f"{w}.tet")
        dens = {}
        for key, value in _expect(p.get("density", {}), dict, f"{w}.density").items():
            dens[_index_key(key, k, f"{w}.density")] = res.scalar(value, f"{w}.density[{key!r}]")
        try:
            patches.append(DensityPatch(tet, k, dens))
        except DegenerateTetError as exc:
            raise SceneValidationError(f"{w}.tet: {exc}") from None
    cls = Hyperflux if kind == "hyperflux" else MultipoleDistribution
    return cls(order, tuple(atoms), tuple(patches))


def scene_from_dict(doc) -> Scene:
    _expect(doc, dict, "$")
    for key in ("regions", "fields", "distributions"):
        _expect(doc.get(key, {}), dict, f"$.{key}")
    _expect(doc.get("tasks", []), list, "$.tasks")
    res = _Resolver(doc.get("fields", {}))
    scene = Scene()
    for name in doc.get("fields", {}):
        scene.fields[name] = res.field(name, "$.fields")
    for name, tets in doc.get("regions", {}).items():
        where = f"$.regions.{name}"
        cells = [parse_tet(t, f"{where}[{i}]") for i, t in enumerate(_expect(tets, list, where))]
        try:
            scene.regions[name] = SimplicialRegion(tuple(cells))
        except DegenerateTetError as exc:
            raise SceneValidationError(f"{where}: {exc}") from None
    for name, obj in doc.get("distributions", {}).items():
        scene.distributions[name] = _parse_distribution(obj, res, f"$.distributions.{name}")
    seen = set()
    for i, t in enumerate(doc.get("tasks", [])):
        where = f"$.tasks[{i}]"
        _expect(t, dict, where)
        name = t.get("name", f"task{i}")
        kind = t.get("kind")
        if not isinstance(name, str):
            raise SceneParseError("task name must be a string", f"{where}.name")
        if kind not in TASK_KINDS:
            raise SceneParseError(f"unknown task kind {kind!r}; expected one of {TASK_KINDS}",
                                  f"{where}.kind")
        if name in seen:
            raise SceneValidationError(f"{where}: duplicate task name {name!r}")
        seen.add(name)
        params = {k: v for k, v in t.items() if k not in ("name", "kind")}
        scene.tasks.append(Task(name, kind, params))
    validate(scene)
    return scene


_NAME_REFS = {
    "distribution": "distributions",
    "system": "distributions",
    "region": "regions",
}


def validate(scene: Scene):
    """Check references, degree caps and that every name is unique across sections."""
    names = list(scene.regions) + list(scene.fields) + list(scene.distributions)
    dup = {n for n in names if names.count(n) > 1}
    if dup:
        raise SceneValidationError(f"names used in more than one section: {sorted(dup)}")
    for name, f in scene.fields.items():
        try:
            f.check_degree(MAX_DEGREE, f"field {name!r}")
        except DegreeCapError as exc:
            raise SceneValidationError(str(exc)) from None
    for task in scene.tasks:
        for key, section in _NAME_REFS.items():
            ref = task.params.get(key)
            if ref is None:
                continue
            if not isinstance(ref, str) or ref not in getattr(scene, section):
                raise SceneValidationError(f"task {task.name!r}: undefined {key} {ref!r}")
        for key in ("phi", "phi_dot", "v"):
            ref = task.params.get(key)
            if isinstance(ref, str) and ref not in scene.fields:
                raise SceneValidationError(f"task {task.name!r}: undefined field {ref!r}")


def load_scene(path) -> Scene:
    with open(path) as fh:
        text = fh.read()
    return loads_scene(text)


def loads_scene(text: str) -> Scene:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneParseError(exc.msg, f"line {exc.lineno}:{exc.colno}") from None
    return scene_from_dict(doc)


# -- serialization --------------------------------------------------------------------

def scalar_to_json(f: PolyScalarField) -> dict:
    return {f"{a},{b},{c}": v for (a, b, c), v in sorted(f.terms.items())}


def vector_to_json(w: PolyVectorField) -> list:
    return [scalar_to_json(c) for c in w]


def field_to_json(f):
    return vector_to_json(f) if isinstance(f, PolyVectorField) else scalar_to_json(f)


def tet_to_json(t: Tet) -> list:
    return [list(p) for p in t.vertices]


def distribution_to_json(Q) -> dict:
    if isinstance(Q, BalanceSystem):
        return {"type": "balance", "u": vector_to_json(Q.u), "beta": scalar_to_json(Q.beta),
                "s": scalar_to_json(Q.s)}
    return {
        "type": "hyperflux" if isinstance(Q, Hyperflux) else "multipole",
        "order": Q.order,
        "atoms": [{"order": a.order, "location": a.location.tolist(),
                   "strength": a.strength.tolist()} for a in Q.atoms],
        "patches": [{"order": p.order, "tet": tet_to_json(p.support),
                     "density": {"".join(str(i + 1) for i in idx): scalar_to_json(p[idx])
                                 for idx in indices(p.order) if not p[idx].is_zero()}}
                    for p in Q.patches],
    }


def scene_to_dict(scene: Scene) -> dict:
    return {
        "regions": {n: [tet_to_json(t) for t in r.tets] for n, r in scene.regions.items()},
        "fields": {n: field_to_json(f) for n, f in scene.fields.items()},
        "distributions": {n: distribution_to_json(d) for n, d in scene.distributions.items()},
        "tasks": [{"name": t.name, "kind": t.kind, **t.params} for t in scene.tasks],
    }


def dumps_scene(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), indent=2)
