"""Power and force functionals for multipoles carried by a velocity field.

The power delivered by the field is ``P = -sum_k int phi_{,I j} v^j dq^I``,
the negative of the rate of change of the potential energy under the flow
``x + t v(x)`` when ``v`` is constant. The force decompositions below
integrate the smooth dipole and quadrupole cases by parts; their named
terms sum to the energy rate ``-P``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bound import bound_dipole_vector, bound_quadrupole, double_divergence, edge_line_density
from .fields import MAX_DEGREE, PolyScalarField, PolyVectorField, flow_derivative
from .integrate import integrate_edge, integrate_face, integrate_tet
from .multipole import (DensityPatch, MultipoleDistribution, PointAtom, evaluate,
                        pushforward_energy, restrict)


class _PowerKernel:
    """``idx -> phi_{,idx j} v^j``, memoized on the sorted index."""

    def __init__(self, phi: PolyScalarField, v: PolyVectorField):
        self.phi = phi
        self.v = v
        self._grad: dict[tuple, PolyScalarField] = {(): phi}
        self._out: dict[tuple, PolyScalarField] = {}

    def _derivative(self, key):
        if key not in self._grad:
            self._grad[key] = self._derivative(key[:-1]).partial(key[-1])
        return self._grad[key]

    def __call__(self, idx):
        key = tuple(sorted(idx))
        if key not in self._out:
            self._out[key] = flow_derivative(self._derivative(key), self.v)
        return self._out[key]


def power(Q: MultipoleDistribution, phi: PolyScalarField, v: PolyVectorField,
          region=None) -> float:
    """Power ``P_B`` delivered by the potential ``phi`` to ``Q`` moving with ``v``."""
    phi.check_degree(MAX_DEGREE, "test function")
    v.check_degree(MAX_DEGREE, "velocity")
    if region is not None:
        Q = restrict(Q, region)
    kernel = _PowerKernel(phi, v)
    total = sum((a.action(kernel) for a in Q.atoms), 0.0)
    total += sum((p.action(kernel) for p in Q.patches), 0.0)
    return -total


def exact_energy_rate(Q: MultipoleDistribution, phi: PolyScalarField, v: PolyVectorField) -> float:
    """``d/dt Q(phi o c_t)`` at ``t = 0``, from the exact t-derivative of the flow."""
    return evaluate(Q, flow_derivative(phi, v))


def power_rate_gap(Q: MultipoleDistribution, phi: PolyScalarField, v: PolyVectorField) -> float:
    """``P + dU/dt``; zero for constant ``v``, generally not for varying ``v``.

    For a non-uniform velocity the derivatives of ``phi o c_t`` pick up
    velocity-gradient terms that the power formula does not contain. The
    gap is reported as a diagnostic only.
    """
    return power(Q, phi, v) + exact_energy_rate(Q, phi, v)


class EnergyRateCheck(NamedTuple):
    power: float
    rate: float  # central difference of the pushforward energy
    discrepancy: float  # |power + rate|


def energy_rate_check(Q: MultipoleDistribution, phi: PolyScalarField, v: PolyVectorField,
                      h: float) -> EnergyRateCheck:
    """Compare ``P`` with a central difference of the transported energy.

    Only spatially constant velocities are accepted; see
    :func:`power_rate_gap` for the non-uniform case.
    """
    if not v.is_constant():
        raise ValueError(
            "energy_rate_check needs a spatially constant velocity; for varying v the "
            "power formula and the energy rate differ by velocity-gradient terms "
            "(use power_rate_gap for a diagnostic)")
    if h <= 0:
        raise ValueError("step must be positive")
    P = power(Q, phi, v)
    rate = (pushforward_energy(Q, phi, v, h) - pushforward_energy(Q, phi, v, -h)) / (2.0 * h)
    return EnergyRateCheck(P, rate, abs(P + rate))


def promoted_atoms(Q: MultipoleDistribution, v) -> MultipoleDistribution:
    """Replace each order-k atom ``c`` by the order-(k+1) atom ``-c (x) v``."""
    vv = np.asarray(v, dtype=float)
    atoms = tuple(PointAtom(a.location, -np.multiply.outer(a.strength, vv)) for a in Q.atoms)
    return MultipoleDistribution(min(Q.order + 1, 4), atoms, ())


@dataclass
class ForceReport:
    """Power plus the named integration-by-parts terms.

    ``terms`` are the integration-by-parts pieces; they sum to the energy
    rate ``-power`` (available as :attr:`expected_total`).
    """

    power: float
    terms: dict[str, float] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return sum(self.terms.values())

    @property
    def expected_total(self) -> float:
        return -self.power

    @property
    def closure_error(self) -> float:
        return abs(self.total - self.expected_total)


def dipole_stress(patch: DensityPatch, phi: PolyScalarField) -> list[list[PolyScalarField]]:
    """``sigma[i][j] = phi_{,j} rho^i``; not symmetric in general."""
    rho = patch.as_vector()
    grad = phi.gradient()
    return [[grad[j] * rho[i] for j in range(3)] for i in range(3)]


def force_decompose_dipole(patch: DensityPatch, phi: PolyScalarField,
                           v: PolyVectorField) -> ForceReport:
    if patch.order != 1:
        raise ValueError("force_decompose_dipole needs an order-1 density")
    rho = patch.as_vector()
    t = patch.support
    w = flow_derivative(phi, v)  # phi_{,j} v^j
    sigma = dipole_stress(patch, phi)
    stress = sum((sigma[i][j] * v[j].partial(i) for i in range(3) for j in range(3)),
                 PolyScalarField())
    terms = {
        "boundary_force": sum(integrate_face(w * rho.dot(f.unit_normal), f) for f in t.faces()),
        "volume_force": -integrate_tet(w * rho.divergence(), t),
        "stress": -integrate_tet(stress, t),
    }
    return ForceReport(power(MultipoleDistribution(1, (), (patch,)), phi, v), terms)


def force_decompose_quadrupole(patch: DensityPatch, phi: PolyScalarField, v: PolyVectorField,
                               convention: str = "outward") -> ForceReport:
    """Boundary, edge, stress and hyper-stress split of a quadrupole's force."""
    if patch.order != 2:
        raise ValueError("force_decompose_quadrupole needs an order-2 density")
    t = patch.support
    qb = bound_quadrupole(patch, convention)
    w = flow_derivative(phi, v)  # v^i phi_{,i}
    dphi = phi.gradient()
    # grad_v[i][j] = v^i_{,j}
    grad_v = [[v[i].partial(j) for j in range(3)] for i in range(3)]

    def vgrad_phi(j):  # v^i_{,j} phi_{,i}
        return sum((grad_v[i][j] * dphi[i] for i in range(3)), PolyScalarField())

    vg = [vgrad_phi(j) for j in range(3)]
    dip = bound_dipole_vector(patch)  # rho^{ij}_{,j}
    # rho^{jk}_{,k} with free index j is dip[j]; rho^{jk}_{,j} with free k:
    dip_first = PolyVectorField(tuple(
        sum((patch[(j, k)].partial(j) for j in range(3)), PolyScalarField()) for k in range(3)))

    hyper = PolyScalarField()
    for j in range(3):
        for k in range(3):
            rho_jk = patch[(j, k)]
            if rho_jk.is_zero():
                continue
            vjk = sum((v[i].partial(j).partial(k) * dphi[i] for i in range(3)), PolyScalarField())
            hyper = hyper + vjk * rho_jk

    terms = {
        "edge_force": sum(integrate_edge(qb.line_density[key] * w, e) for key, e in qb.edges.items()),
        "tangential_charge": -sum(integrate_face(fb.tangential_divergence * w, fb.face)
                                  for fb in qb.faces),
        "normal_dipole": sum(integrate_face(w.directional(fb.face.unit_normal) * fb.normal_dipole,
                                            fb.face) for fb in qb.faces),
        "boundary_stress_trace": -sum(integrate_face(
            sum((vg[j] * fb.trace[j] for j in range(3)), PolyScalarField()), fb.face)
            for fb in qb.faces),
        "boundary_stress_cotrace": -sum(integrate_face(
            sum((vg[k] * patch[(j, k)] * float(fb.face.unit_normal[j])
                 for j in range(3) for k in range(3)), PolyScalarField()), fb.face)
            for fb in qb.faces),
        "hyperstress": integrate_tet(hyper, t),
        "stress_bound_dipole_first": integrate_tet(
            sum((vg[k] * dip_first[k] for k in range(3)), PolyScalarField()), t),
        "boundary_bound_dipole": -sum(integrate_face(w * dip.dot(fb.face.unit_normal), fb.face)
                                      for fb in qb.faces),
        "stress_bound_dipole_second": integrate_tet(
            sum((vg[j] * dip[j] for j in range(3)), PolyScalarField()), t),
        "volume_charge": integrate_tet(w * double_divergence(patch), t),
    }
    return ForceReport(power(MultipoleDistribution(2, (), (patch,)), phi, v), terms)


def edge_force_density(patch: DensityPatch, phi: PolyScalarField, a: int, b: int,
                       convention: str = "outward") -> PolyVectorField:
    """Force per unit length ``F^L_i = phi_{,i} l_ab`` on edge ``(a, b)``, ``a > b``."""
    l_ab = edge_line_density(patch, a, b, convention)
    return PolyVectorField(tuple(phi.partial(i) * l_ab for i in range(3)))
