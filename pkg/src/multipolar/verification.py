"""Randomized identity suites backing ``multipolar verify`` and the acceptance tests.

Each suite draws its own cases from a seeded generator and returns a
:class:`SuiteResult` carrying the worst measured residual and the
tolerance it was held to.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bound import bound_dipole, bound_quadrupole, direct_value, evaluate_dipole_bound, \
    evaluate_quad_bound
from .fields import PolyScalarField, PolyVectorField, compose_flow, flow_derivative, poly, \
    random_poly, random_vector_field
from .flux import BalanceSystem, hyperflux_evaluate, moving_dipole_hyperflux, variational_power
from .geometry import SimplicialRegion, Tet, edge_conormals
from .integrate import integrate_edge, integrate_face, integrate_tet, normal_flux, \
    surface_divergence, tangential_part
from .mechanics import power, promoted_atoms
from .multipole import DensityPatch, MultipoleDistribution, PointAtom, evaluate, indices

EPS = np.finfo(float).eps


@dataclass
class SuiteResult:
    name: str
    passed: bool
    cases: int
    max_residual: float
    tolerance: float
    details: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: {self.cases} cases, max residual "
                f"{self.max_residual:.3e} (tol {self.tolerance:.1e}), {self.wall_time:.2f}s")

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "max_residual": float(self.max_residual),
            "tolerance": self.tolerance,
            "details": _plain(self.details),
        }


def _plain(obj):
    """Numpy scalars and arrays to builtin types, for JSON output."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# -- random inputs ------------------------------------------------------------

def random_tet(rng: np.random.Generator, min_quality: float = 1e-2) -> Tet:
    """Random tet in [-1, 1]^3 with ``|vol| >= min_quality * L^3 / 6``.

    Slivers are rejected so that residuals measure the identities rather
    than the conditioning of the geometry.
    """
    while True:
        t = Tet(rng.uniform(-1.0, 1.0, size=(4, 3)))
        if abs(t.volume) >= min_quality * t.longest_edge**3 / 6.0:
            return t


def random_patch(rng, t: Tet, order: int, max_degree: int) -> DensityPatch:
    return DensityPatch(t, order, {idx: random_poly(rng, int(rng.integers(0, max_degree + 1)))
                                   for idx in indices(order)})


def random_point_in(rng, t: Tet) -> np.ndarray:
    lam = rng.dirichlet(np.ones(4))
    return lam @ t.points


def random_atoms(rng, t: Tet, orders=(0, 1, 2), count: int = 3) -> tuple[PointAtom, ...]:
    atoms = []
    for _ in range(count):
        k = int(rng.choice(orders))
        atoms.append(PointAtom(random_point_in(rng, t), rng.standard_normal((3,) * k)))
    return tuple(atoms)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / (1.0 + abs(b))


# -- suites ---------------------------------------------------------------------

def suite_dipole_identity(rng, cases: int = 200, tol: float = 1e-9) -> SuiteResult:
    worst = 0.0
    for _ in range(cases):
        t = random_tet(rng)
        patch = random_patch(rng, t, 1, 2)
        phi = random_poly(rng, int(rng.integers(0, 4)))
        direct = direct_value(patch, phi)
        worst = max(worst, _rel(evaluate_dipole_bound(bound_dipole(patch), phi), direct))
    return SuiteResult("dipole decomposition identity", worst <= tol, cases, worst, tol)


def edge_necessity_case() -> tuple[float, float]:
    """``(with edges, without edges)`` for rho^{13} = 1 on the reference tet, phi = y."""
    patch = DensityPatch.constant(Tet.reference(), _unit_tensor(0, 2))
    d = bound_quadrupole(patch)
    phi = PolyScalarField.coordinate(1)
    return evaluate_quad_bound(d, phi), evaluate_quad_bound(d, phi, include_edges=False)


def _unit_tensor(i: int, j: int) -> np.ndarray:
    c = np.zeros((3, 3))
    c[i, j] = 1.0
    return c


def suite_quadrupole_identity(rng, cases: int = 200, tol: float = 1e-9,
                              necessity: float = 1e-3) -> SuiteResult:
    worst = 0.0
    for _ in range(cases):
        t = random_tet(rng)
        patch = random_patch(rng, t, 2, 2)
        phi = random_poly(rng, int(rng.integers(0, 5)))
        direct = direct_value(patch, phi)
        worst = max(worst, _rel(evaluate_quad_bound(bound_quadrupole(patch), phi), direct))
    with_edges, without_edges = edge_necessity_case()
    gap = abs(with_edges - without_edges)
    passed = worst <= tol and gap >= necessity
    return SuiteResult("quadrupole simplex identity", passed, cases, worst, tol,
                       {"edge_term_gap": gap, "edge_term_gap_min": necessity})


def suite_zero_net_charge(rng, cases: int = 100, tol: float = 1e-10) -> SuiteResult:
    worst = 0.0
    one = PolyScalarField.constant(1.0)
    for _ in range(cases):
        patch = random_patch(rng, random_tet(rng), 2, 2)
        worst = max(worst, abs(evaluate_quad_bound(bound_quadrupole(patch), one)))
    return SuiteResult("zero net bound charge", worst <= tol, cases, worst, tol)


def random_distribution(rng, t: Tet, max_order: int = 2, patch_degree: int = 2,
                        atoms: int = 3) -> MultipoleDistribution:
    items = list(random_atoms(rng, t, tuple(range(max_order + 1)), atoms))
    for k in range(max_order + 1):
        items.append(random_patch(rng, t, k, patch_degree))
    return MultipoleDistribution.of(*items, order=max_order)


def convergence_order(errors: list[float], steps: list[float], floors: list[float]):
    """Observed orders between consecutive steps whose errors clear the floor.

    Returns ``(ok, orders)``. An error below its floor is rounding-limited
    and terminates the measurable sequence; an error that rises back above
    its floor after that is a failure.
    """
    orders = []
    rounding = False
    for i, (e, f) in enumerate(zip(errors, floors)):
        if e <= f:
            rounding = True
            continue
        if rounding:
            return False, orders
        if i > 0:
            orders.append(math.log(errors[i - 1] / e) / math.log(steps[i - 1] / steps[i]))
    return all(p >= 1.9 for p in orders), orders


def suite_power_energy_rate(rng, cases: int = 100, tol: float = 1e-11,
                            steps=(1e-2, 1e-3, 1e-4)) -> SuiteResult:
    worst_exact = 0.0
    measured = 0
    failures = 0
    all_orders = []
    worst_fd = 0.0
    for _ in range(cases):
        t = random_tet(rng)
        Q = random_distribution(rng, t, max_order=2, patch_degree=1)
        phi = random_poly(rng, int(rng.integers(3, 6)))
        v = PolyVectorField.constant(rng.standard_normal(3))
        P = power(Q, phi, v)
        exact = evaluate(Q, flow_derivative(phi, v))
        worst_exact = max(worst_exact, abs(P + exact) / (1.0 + abs(P)))
        errors, floors = [], []
        for h in steps:
            up = evaluate(Q, compose_flow(phi, v, h))
            down = evaluate(Q, compose_flow(phi, v, -h))
            rate = (up - down) / (2.0 * h)
            errors.append(abs(P + rate))
            floors.append(100.0 * EPS * (abs(up) + abs(down) + 1.0) / (2.0 * h))
        worst_fd = max(worst_fd, errors[-1] / (1.0 + abs(P)))
        ok, orders = convergence_order(errors, list(steps), floors)
        measured += bool(orders)
        all_orders.extend(orders)
        failures += not ok
    passed = worst_exact <= tol and failures == 0 and measured > 0
    return SuiteResult("power vs energy rate", passed, cases, worst_exact, tol, {
        "convergence_failures": failures,
        "cases_with_measured_order": measured,
        "min_observed_order": min(all_orders) if all_orders else None,
        "median_observed_order": float(np.median(all_orders)) if all_orders else None,
        "worst_fd_residual_h_min": worst_fd,
    })


def suite_divergence(rng, cases: int = 200, tol: float = 1e-10) -> SuiteResult:
    worst_vol = 0.0
    worst_surf = 0.0
    for _ in range(cases):
        t = random_tet(rng)
        w = random_vector_field(rng, int(rng.integers(0, 6)))
        lhs = integrate_tet(w.divergence(), t)
        rhs = sum(normal_flux(w, f) for f in t.faces())
        worst_vol = max(worst_vol, _rel(rhs, lhs))
        a = int(rng.integers(0, 4))
        f = t.faces()[a]
        g = tangential_part(random_vector_field(rng, int(rng.integers(0, 6))), f.unit_normal)
        s_lhs = integrate_face(surface_divergence(g, f), f)
        s_rhs = 0.0
        for b in range(4):
            if b != a:
                e = edge_conormals(t, a, b)
                s_rhs += integrate_edge(g.dot(e.conormal_ab), e)
        worst_surf = max(worst_surf, _rel(s_rhs, s_lhs))
    worst = max(worst_vol, worst_surf)
    return SuiteResult("divergence theorems", worst <= tol, cases, worst, tol,
                       {"volume_residual": worst_vol, "surface_residual": worst_surf})


def worked_variational_example() -> tuple[float, float]:
    system = BalanceSystem(PolyVectorField((poly({(1, 0, 0): 1.0}), poly(0.0), poly(0.0))),
                           poly(0.0), poly(1.0))
    return variational_power(system, PolyScalarField.coordinate(0),
                             SimplicialRegion((Tet.reference(),)))


def suite_variational(rng, cases: int = 100, tol: float = 1e-10,
                      worked_tol: float = 1e-12) -> SuiteResult:
    worst = 0.0
    for _ in range(cases):
        region = SimplicialRegion((random_tet(rng),))
        u = random_vector_field(rng, int(rng.integers(0, 4)))
        beta = random_poly(rng, int(rng.integers(0, 4)))
        system = BalanceSystem.balanced(u, beta)
        phi = random_poly(rng, int(rng.integers(0, 4)))
        lhs, rhs = variational_power(system, phi, region)
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs)))
    lhs, rhs = worked_variational_example()
    worked = max(abs(lhs - 1 / 12), abs(rhs - 1 / 12))
    return SuiteResult("variational balance", worst <= tol and worked <= worked_tol, cases,
                       worst, tol, {"worked_example_error": worked, "worked_tolerance": worked_tol})


def suite_moving_dipole(rng, cases: int = 100, tol: float = 1e-10) -> SuiteResult:
    worst = 0.0
    for _ in range(cases):
        t = random_tet(rng)
        items = list(random_atoms(rng, t, (1,), 2)) + [random_patch(rng, t, 1, 2)]
        Q = MultipoleDistribution.of(*items, order=1)
        v = random_vector_field(rng, int(rng.integers(1, 3)))
        phi = random_poly(rng, int(rng.integers(0, 4)))
        P = power(Q, phi, v)
        worst = max(worst, _rel(hyperflux_evaluate(moving_dipole_hyperflux(Q, v), phi), P))
    return SuiteResult("moving-dipole hyperflux", worst <= tol, cases, worst, tol)


def suite_symmetrization(rng, cases: int = 100, tol: float = 1e-12,
                         null_tol: float = 1e-10) -> SuiteResult:
    worst = 0.0
    worst_null_direct = 0.0
    worst_null_decomposed = 0.0
    for _ in range(cases):
        t = random_tet(rng)
        Q = random_distribution(rng, t, max_order=int(rng.integers(2, 5)), patch_degree=1)
        phi = random_poly(rng, int(rng.integers(0, 6)))
        worst = max(worst, _rel(evaluate(Q.symmetrized(), phi), evaluate(Q, phi)))
        c = rng.standard_normal((3, 3))
        skew = c - c.T
        dens = {idx: PolyScalarField.constant(skew[idx]) for idx in indices(2)}
        patch = DensityPatch(t, 2, dens)
        A = MultipoleDistribution.of(PointAtom(random_point_in(rng, t), skew), patch, order=2)
        worst_null_direct = max(worst_null_direct, abs(evaluate(A, phi)))
        worst_null_decomposed = max(worst_null_decomposed,
                                    abs(evaluate_quad_bound(bound_quadrupole(patch), phi)))
    passed = worst <= tol and worst_null_direct <= tol and worst_null_decomposed <= null_tol
    return SuiteResult("symmetrization invariance", passed, cases, worst, tol, {
        "antisymmetric_direct": worst_null_direct,
        "antisymmetric_decomposed": worst_null_decomposed,
        "antisymmetric_decomposed_tol": null_tol,
    })


def suite_promotion(rng, cases: int = 30, tol: float = 1e-12) -> SuiteResult:
    worst = 0.0
    for _ in range(cases):
        for k in (0, 1, 2):
            loc = rng.uniform(-1, 1, 3)
            Q = MultipoleDistribution.of(PointAtom(loc, rng.standard_normal((3,) * k)), order=k)
            vel = rng.standard_normal(3)
            phi = random_poly(rng, int(rng.integers(k + 1, 6)))
            P = power(Q, phi, PolyVectorField.constant(vel))
            worst = max(worst, _rel(evaluate(promoted_atoms(Q, vel), phi), P))
    return SuiteResult("k-order promotion", worst <= tol, 3 * cases, worst, tol)


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "dipole": suite_dipole_identity,
    "quadrupole": suite_quadrupole_identity,
    "net-charge": suite_zero_net_charge,
    "energy-rate": suite_power_energy_rate,
    "divergence": suite_divergence,
    "variational": suite_variational,
    "moving-dipole": suite_moving_dipole,
    "symmetrization": suite_symmetrization,
    "promotion": suite_promotion,
}


def run_suite(name: str, seed: int = 0, cases: int | None = None,
              tolerance: float | None = None) -> SuiteResult:
    """Run one suite with its own generator seeded from ``(seed, name)``."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    rng = np.random.default_rng([seed, list(SUITES).index(name)])
    kwargs = {}
    if cases is not None:
        kwargs["cases"] = cases
    if tolerance is not None:
        kwargs["tol"] = tolerance
    start = time.perf_counter()
    result = SUITES[name](rng, **kwargs)
    result.wall_time = time.perf_counter() - start
    return result


def run_all(seed: int = 0, cases: int | None = None) -> list[SuiteResult]:
    return [run_suite(name, seed, cases) for name in SUITES]
