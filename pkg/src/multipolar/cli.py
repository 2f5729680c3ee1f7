"""Command-line front end.

    multipolar run SCENE [--tolerance X] [--seed N] [--cases N] [--out PATH]
                         [--quadrature-degree-margin M]
    multipolar verify [--seed N] [--cases N] [--out PATH]

Exit status: 0 when every check passes, 1 on a tolerance failure, 2 when the
scene cannot be parsed, 3 when it fails validation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from typing import Any

import numpy as np

from . import integrate
from .bound import bound_dipole, bound_quadrupole, dipole_bound_terms, direct_value, \
    quad_bound_terms
from .fields import DegreeCapError, PolyScalarField, PolyVectorField
from .flux import BalanceSystem, balance_residual, hyperflux_evaluate, moving_dipole_hyperflux, \
    variational_power
from .geometry import DegenerateTetError, StraddleError
from .mechanics import force_decompose_dipole, force_decompose_quadrupole, power
from .multipole import MultipoleDistribution, evaluate
from .scene import Scene, SceneParseError, SceneValidationError, Task, field_to_json, load_scene, \
    parse_scalar, parse_vector
from .verification import SUITES, run_suite

log = logging.getLogger("multipolar")

EXIT_OK, EXIT_TOLERANCE, EXIT_PARSE, EXIT_VALIDATION = 0, 1, 2, 3


class TaskContext:
    def __init__(self, scene: Scene, tolerance: float, seed: int, cases: int):
        self.scene = scene
        self.tolerance = tolerance
        self.seed = seed
        self.cases = cases

    def scalar(self, task: Task, key: str, default=None) -> PolyScalarField:
        ref = task.params.get(key, default)
        if ref is None:
            raise SceneValidationError(f"task {task.name!r} needs {key!r}")
        if isinstance(ref, str):
            f = self.scene.fields[ref]
        else:
            f = parse_scalar(ref, f"task {task.name}.{key}")
        if not isinstance(f, PolyScalarField):
            raise SceneValidationError(f"task {task.name!r}: {key} must be a scalar field")
        return f

    def vector(self, task: Task, key: str) -> PolyVectorField:
        ref = task.params.get(key)
        if ref is None:
            raise SceneValidationError(f"task {task.name!r} needs {key!r}")
        if isinstance(ref, str):
            f = self.scene.fields[ref]
        else:
            f = parse_vector(ref, f"task {task.name}.{key}")
        if not isinstance(f, PolyVectorField):
            raise SceneValidationError(f"task {task.name!r}: {key} must be a vector field")
        return f

    def distribution(self, task: Task, key: str = "distribution") -> MultipoleDistribution:
        ref = task.params.get(key)
        d = self.scene.distributions.get(ref) if isinstance(ref, str) else None
        if not isinstance(d, MultipoleDistribution):
            raise SceneValidationError(f"task {task.name!r}: {key} {ref!r} is not a distribution")
        return d

    def system(self, task: Task) -> BalanceSystem:
        ref = task.params.get("system")
        d = self.scene.distributions.get(ref) if isinstance(ref, str) else None
        if not isinstance(d, BalanceSystem):
            raise SceneValidationError(f"task {task.name!r}: system {ref!r} is not a balance system")
        return d

    def region(self, task: Task, required: bool = False):
        ref = task.params.get("region")
        if ref is None:
            if required:
                raise SceneValidationError(f"task {task.name!r} needs a region")
            return None
        return self.scene.regions[ref]

    def tol(self, task: Task) -> float:
        return float(task.params.get("tolerance", self.tolerance))


def _check(name: str, residual: float, tolerance: float) -> dict:
    residual = float(residual)
    return {"name": name, "passed": bool(residual <= tolerance), "residual": residual,
            "tolerance": tolerance}


def _relcheck(name: str, value: float, reference: float, tol: float) -> dict:
    return _check(name, abs(value - reference) / (1.0 + abs(reference)), tol)


def _patches(Q: MultipoleDistribution, order: int, task: Task):
    patches = [p for p in Q.patches if p.order == order]
    which = task.params.get("patch")
    if which is not None:
        patches = [patches[int(which)]]
    if not patches:
        raise SceneValidationError(f"task {task.name!r}: no order-{order} patches")
    return patches


def _task_evaluate(ctx: TaskContext, task: Task) -> dict:
    value = evaluate(ctx.distribution(task), ctx.scalar(task, "phi"), ctx.region(task))
    return {"results": {"value": value}}


def _task_decompose_dipole(ctx: TaskContext, task: Task) -> dict:
    phi = ctx.scalar(task, "phi")
    out = {"results": {}, "terms": {}, "checks": []}
    for i, patch in enumerate(_patches(ctx.distribution(task), 1, task)):
        terms = dipole_bound_terms(bound_dipole(patch), phi)
        direct = direct_value(patch, phi)
        decomposed = sum(terms.values())
        out["results"][f"patch{i}"] = {"direct": direct, "decomposed": decomposed}
        out["terms"][f"patch{i}"] = terms
        out["checks"].append(_relcheck(f"patch{i} identity", decomposed, direct, ctx.tol(task)))
    return out


def _task_decompose_quadrupole(ctx: TaskContext, task: Task) -> dict:
    phi = ctx.scalar(task, "phi")
    convention = task.params.get("convention", "outward")
    out = {"results": {}, "terms": {}, "checks": []}
    for i, patch in enumerate(_patches(ctx.distribution(task), 2, task)):
        d = bound_quadrupole(patch, convention)
        terms = quad_bound_terms(d, phi)
        direct = direct_value(patch, phi)
        decomposed = sum(terms.values())
        out["results"][f"patch{i}"] = {
            "direct": direct,
            "decomposed": decomposed,
            "line_density": {f"{a}{b}": field_to_json(f) for (a, b), f in d.line_density.items()},
        }
        out["terms"][f"patch{i}"] = terms
        out["checks"].append(_relcheck(f"patch{i} identity", decomposed, direct, ctx.tol(task)))
    return out


def _task_power(ctx: TaskContext, task: Task) -> dict:
    P = power(ctx.distribution(task), ctx.scalar(task, "phi"), ctx.vector(task, "v"),
              ctx.region(task))
    return {"results": {"power": P}}


def _task_force(ctx: TaskContext, task: Task) -> dict:
    phi, v = ctx.scalar(task, "phi"), ctx.vector(task, "v")
    Q = ctx.distribution(task)
    out = {"results": {}, "terms": {}, "checks": []}
    found = False
    for order, fn in ((1, force_decompose_dipole), (2, force_decompose_quadrupole)):
        for i, patch in enumerate(p for p in Q.patches if p.order == order):
            found = True
            report = fn(patch, phi, v)
            key = f"order{order}_patch{i}"
            out["results"][key] = {"power": report.power, "total": report.total}
            out["terms"][key] = report.terms
            out["checks"].append(_relcheck(f"{key} closure", report.total, report.expected_total,
                                           ctx.tol(task)))
    if not found:
        raise SceneValidationError(f"task {task.name!r}: no order-1 or order-2 patches")
    return out


def _task_balance(ctx: TaskContext, task: Task) -> dict:
    res = balance_residual(ctx.system(task), ctx.region(task, required=True))
    return {
        "results": {"integral_residual": res.integral, "volume_integral": res.volume_integral,
                    "pointwise_residual": field_to_json(res.pointwise)},
        "checks": [_relcheck("divergence theorem", res.integral, res.volume_integral,
                             ctx.tol(task))],
    }


def _task_variational(ctx: TaskContext, task: Task) -> dict:
    lhs, rhs = variational_power(ctx.system(task), ctx.scalar(task, "phi"),
                                 ctx.region(task, required=True))
    return {"results": {"lhs": lhs, "rhs": rhs},
            "checks": [_relcheck("lhs = rhs", rhs, lhs, ctx.tol(task))]}


def _task_hyperflux(ctx: TaskContext, task: Task) -> dict:
    value = hyperflux_evaluate(ctx.distribution(task), ctx.scalar(task, "phi"), ctx.region(task))
    return {"results": {"value": value}}


def _task_moving_dipole(ctx: TaskContext, task: Task) -> dict:
    Q, v, phi = ctx.distribution(task), ctx.vector(task, "v"), ctx.scalar(task, "phi")
    flux = moving_dipole_hyperflux(Q, v)
    value = hyperflux_evaluate(flux, phi, ctx.region(task))
    P = power(Q.component(1), phi, v, ctx.region(task))
    return {
        "results": {"hyperflux": value, "power": P,
                    "atom_strengths": [a.strength.tolist() for a in flux.atoms]},
        "checks": [_relcheck("hyperflux = power", value, P, ctx.tol(task))],
    }


def _task_verify(ctx: TaskContext, task: Task) -> dict:
    names = task.params.get("suites", list(SUITES))
    seed = int(task.params.get("seed", ctx.seed))
    cases = task.params.get("cases", ctx.cases)
    out = {"results": {}, "checks": []}
    for name in names:
        if name not in SUITES:
            raise SceneValidationError(f"task {task.name!r}: unknown suite {name!r}")
        r = run_suite(name, seed, int(cases) if cases is not None else None)
        out["results"][name] = r.as_dict()
        out["checks"].append({"name": name, "passed": r.passed, "residual": r.max_residual,
                              "tolerance": r.tolerance})
    return out


RUNNERS = {
    "evaluate": _task_evaluate,
    "decompose-dipole": _task_decompose_dipole,
    "decompose-quadrupole": _task_decompose_quadrupole,
    "power": _task_power,
    "force-decompose": _task_force,
    "balance": _task_balance,
    "variational": _task_variational,
    "hyperflux": _task_hyperflux,
    "moving-dipole-flux": _task_moving_dipole,
    "verify-suite": _task_verify,
}


def _expectations(task: Task, results: dict, tol: float) -> list[dict]:
    expect = task.params.get("expect")
    if expect is None:
        return []
    if isinstance(expect, dict):
        pairs = expect.items()
    else:
        scalars = [k for k, v in results.items() if isinstance(v, float)]
        pairs = [(scalars[0] if scalars else "value", expect)]
    checks = []
    for key, want in pairs:
        got = results.get(key)
        if not isinstance(got, (int, float)):
            raise SceneValidationError(f"task {task.name!r}: no scalar result {key!r} to compare")
        checks.append(_relcheck(f"expect {key}", got, float(want), tol))
    return checks


def run_scene(scene: Scene, tolerance: float = 1e-9, seed: int = 0, cases: int = 200) -> dict:
    """Run every task; the report holds one entry per task, in order."""
    ctx = TaskContext(scene, tolerance, seed, cases)
    entries = []
    for task in scene.tasks:
        start = time.perf_counter()
        out = RUNNERS[task.kind](ctx, task)
        checks = out.get("checks", []) + _expectations(task, out["results"], ctx.tol(task))
        entries.append({
            "name": task.name,
            "kind": task.kind,
            "inputs": task.params,
            "results": out["results"],
            "terms": out.get("terms", {}),
            "checks": checks,
            "passed": all(c["passed"] for c in checks),
            "wall_time": time.perf_counter() - start,
        })
    return {
        "tolerance": tolerance,
        "seed": seed,
        "cases": cases,
        "tasks": entries,
        "passed": all(e["passed"] for e in entries),
    }


def _json_default(obj: Any):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_report(report: dict, path: str | None):
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    if path is None or path == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def cmd_run(args) -> int:
    integrate.DEGREE_MARGIN = args.quadrature_degree_margin
    try:
        scene = load_scene(args.scene)
    except SceneParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"cannot read scene: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SceneValidationError, DegreeCapError, DegenerateTetError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        report = run_scene(scene, args.tolerance, args.seed, args.cases)
    except (SceneValidationError, DegreeCapError, DegenerateTetError, StraddleError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    write_report(report, args.out)
    for e in report["tasks"]:
        for c in e["checks"]:
            if not c["passed"]:
                log.warning("task %s: %s residual %.3e > %.1e", e["name"], c["name"],
                            c["residual"], c["tolerance"])
    return EXIT_OK if report["passed"] else EXIT_TOLERANCE


def cmd_verify(args) -> int:
    results = []
    for name in SUITES:
        r = run_suite(name, args.seed, args.cases)
        print(r.line(), file=sys.stderr)
        results.append(r)
    report = {"seed": args.seed, "suites": [r.as_dict() for r in results],
              "passed": all(r.passed for r in results)}
    if args.out:
        write_report(report, args.out)
    return EXIT_OK if report["passed"] else EXIT_TOLERANCE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multipolar", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the tasks of a scene file")
    run.add_argument("scene")
    run.add_argument("--tolerance", type=float, default=1e-9,
                     help="relative tolerance for checks (default 1e-9)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--cases", type=int, default=200,
                     help="cases per randomized suite in verify-suite tasks")
    run.add_argument("--out", default=None, help="report path (default stdout)")
    run.add_argument("--quadrature-degree-margin", type=int, default=0,
                     help="extra exactness degree for every quadrature rule")
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser("verify", help="run the built-in identity suites")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--cases", type=int, default=None,
                        help="override the per-suite case counts")
    verify.add_argument("--out", default=None, help="optional JSON report path")
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
