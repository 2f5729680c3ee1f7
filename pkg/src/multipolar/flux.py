"""Scalar balance laws and higher-order fluxes.

A :class:`BalanceSystem` holds a flux vector ``u``, a density rate ``beta``
and a source ``s``; the balance ``div u + beta = s`` is measured, never
assumed. A :class:`Hyperflux` has the same representation as a multipole
distribution (atoms and densities of orders ``0..r``) but acts on a fixed
potential as the power of rearranging the property.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .fields import PolyScalarField, PolyVectorField
from .geometry import OrientedFace, SimplicialRegion
from .integrate import integrate_face, integrate_tet
from .multipole import DensityPatch, MultipoleDistribution, PointAtom, evaluate


@dataclass(frozen=True, eq=False)
class BalanceSystem:
    """Flux ``u``, density rate ``beta`` and source ``s`` (static fields)."""

    u: PolyVectorField
    beta: PolyScalarField
    s: PolyScalarField

    def __eq__(self, other):
        if not isinstance(other, BalanceSystem):
            return NotImplemented
        return self.u == other.u and self.beta == other.beta and self.s == other.s

    @classmethod
    def balanced(cls, u: PolyVectorField, beta: PolyScalarField) -> "BalanceSystem":
        """System with ``s := div u + beta``, so the residual vanishes."""
        return cls(u, beta, u.divergence() + beta)

    @property
    def residual_field(self) -> PolyScalarField:
        return self.u.divergence() + self.beta - self.s


class Hyperflux(MultipoleDistribution):
    """Flux functional of order ``r``; same representation as a multipole."""


def boundary_flux(system: BalanceSystem, face: OrientedFace) -> PolyScalarField:
    """``tau = u . nu`` on ``face``."""
    return system.u.dot(face.unit_normal)


class BalanceResidual(NamedTuple):
    pointwise: PolyScalarField  # div u + beta - s
    integral: float  # int_dB tau dA + int beta dV - int s dV
    volume_integral: float  # int (div u + beta - s) dV, equal to `integral`


def balance_residual(system: BalanceSystem, region: SimplicialRegion) -> BalanceResidual:
    """Pointwise and integral balance residuals on ``region``.

    Boundary terms are summed tet by tet, so faces shared inside the region
    contribute twice with opposite normals and cancel.
    """
    integral = 0.0
    vol = 0.0
    pointwise = system.residual_field
    for t in region.tets:
        integral += sum(integrate_face(boundary_flux(system, f), f) for f in t.faces())
        integral += integrate_tet(system.beta - system.s, t)
        vol += integrate_tet(pointwise, t)
    return BalanceResidual(pointwise, integral, vol)


def variational_power(system: BalanceSystem, phi: PolyScalarField,
                      region: SimplicialRegion) -> tuple[float, float]:
    """``(lhs, rhs)`` with lhs ``int tau phi dA + int beta phi dV`` and
    rhs ``int s phi dV + int u . grad phi dV``."""
    grad = phi.gradient()
    lhs = rhs = 0.0
    for t in region.tets:
        lhs += sum(integrate_face(boundary_flux(system, f) * phi, f) for f in t.faces())
        lhs += integrate_tet(system.beta * phi, t)
        rhs += integrate_tet(system.s * phi + system.u.dot(grad), t)
    return lhs, rhs


def hyperflux_evaluate(flux: MultipoleDistribution, phi: PolyScalarField,
                       region: SimplicialRegion | None = None) -> float:
    """``sum_k int_B phi_{,I} ds^I``."""
    return evaluate(flux, phi, region)


def _dipole_part(Q: MultipoleDistribution) -> MultipoleDistribution:
    if Q.order < 1:
        raise ValueError("distribution has no order-1 component")
    return Q.component(1)


def moving_dipole_hyperflux(Q: MultipoleDistribution, v: PolyVectorField) -> Hyperflux:
    """Order-2 flux of a dipole distribution carried with velocity ``v``.

    Strengths are ``s^{ij} = -v^j q^i``, so evaluating the result on ``phi``
    gives the power of the moving dipoles.
    """
    return _moving_dipole(Q, v, -1.0)


def identified_quadrupole_flux(Q: MultipoleDistribution, v: PolyVectorField) -> Hyperflux:
    """Same construction with ``s^{ij} = +rho^i v^j``.

    This matches the quadrupole form ``int phi_{,ij} rho^{ij} dV`` of the
    transported dipoles, i.e. minus the power; useful to feed the bound
    charge machinery in :mod:`multipolar.bound`.
    """
    return _moving_dipole(Q, v, 1.0)


def _moving_dipole(Q: MultipoleDistribution, v: PolyVectorField, sign: float) -> Hyperflux:
    dip = _dipole_part(Q)
    atoms = []
    for a in dip.atoms:
        vel = v(a.location)
        atoms.append(PointAtom(a.location, sign * np.outer(a.strength, vel)))
    patches = []
    for p in dip.patches:
        dens = {(i, j): p[(i,)] * v[j] * sign for i in range(3) for j in range(3)}
        patches.append(DensityPatch(p.support, 2, dens))
    return Hyperflux(2, tuple(atoms), tuple(patches))


def _same_structure(Q: MultipoleDistribution, Qdot: MultipoleDistribution) -> bool:
    if len(Q.atoms) != len(Qdot.atoms) or len(Q.patches) != len(Qdot.patches):
        return False
    for a, b in zip(Q.atoms, Qdot.atoms):
        if a.order != b.order or not np.array_equal(a.location, b.location):
            return False
    for p, q in zip(Q.patches, Qdot.patches):
        if p.order != q.order or not p.support.same_cell(q.support):
            return False
    return True


def energy_rate_split(phi: PolyScalarField, phi_dot: PolyScalarField,
                      Q: MultipoleDistribution, Q_dot: MultipoleDistribution) -> tuple[float, float]:
    """``(Q(phi_dot), Q_dot(phi))``: potential-variation and rearrangement power."""
    if not _same_structure(Q, Q_dot):
        raise ValueError("rate distribution must share the atoms and patch supports of Q")
    return evaluate(Q, phi_dot), evaluate(Q_dot, phi)
