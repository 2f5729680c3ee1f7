"""Bound charge of dipole and quadrupole densities on a tetrahedron.

Integrating a dipole density by parts moves it onto a surface charge
``rho . nu`` and a volume charge ``-div rho``. A quadrupole density on a
tetrahedron further splits into, per face, a tangential surface charge,
a normal dipole layer and the face trace of the bound dipole ``rho^{ij}_{,j}``;
a volume charge ``rho^{ij}_{,ij}``; and line charges on the six edges, where
the face normal jumps.

Edge line density
-----------------
Summing the in-face divergence theorem over the four faces puts every edge
``(a, b)`` in the boundary of both faces, each time with that face's outward
conormal and the unsigned arclength. The line density that reproduces the
direct functional is therefore

    l_ab = rho_at . mu_ab + rho_bt . mu_ba

(``convention="outward"``, the default). The variant that subtracts the
second term (``convention="oriented"``) treats the two traversals of the
edge as cancelling; it is kept for comparison and does not close the
identity unless ``rho_bt . mu_ba`` vanishes on the edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import PolyScalarField, PolyVectorField
from .geometry import OrientedEdge, OrientedFace, edge_conormals
from .integrate import integrate_edge, integrate_face, integrate_tet, surface_divergence, \
    tangential_part
from .multipole import DensityPatch, patch_direct_value

CONVENTIONS = ("outward", "oriented")


def _check_order(patch: DensityPatch, order: int):
    if patch.order != order:
        raise ValueError(f"expected an order-{order} density, got order {patch.order}")


def face_trace(patch: DensityPatch, nu) -> PolyVectorField:
    """``rho_a^i = rho^{ij} nu_j`` for an order-2 patch."""
    return PolyVectorField(tuple(
        sum((patch[(i, j)] * float(nu[j]) for j in range(3) if nu[j] != 0.0), PolyScalarField())
        for i in range(3)))


def bound_dipole_vector(patch: DensityPatch) -> PolyVectorField:
    """``rho^{ij}_{,j}`` (minus the bound dipole density)."""
    return PolyVectorField(tuple(
        sum((patch[(i, j)].partial(j) for j in range(3)), PolyScalarField()) for i in range(3)))


def double_divergence(patch: DensityPatch) -> PolyScalarField:
    """``rho^{ij}_{,ij}``."""
    return bound_dipole_vector(patch).divergence()


# -- dipole -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DipoleBound:
    patch: DensityPatch
    faces: tuple[OrientedFace, ...]
    surface_charge: tuple[PolyScalarField, ...]  # rho . nu per face
    volume_charge: PolyScalarField  # -div rho


def bound_dipole(patch: DensityPatch) -> DipoleBound:
    _check_order(patch, 1)
    rho = patch.as_vector()
    faces = tuple(patch.support.faces())
    return DipoleBound(
        patch=patch,
        faces=faces,
        surface_charge=tuple(rho.dot(f.unit_normal) for f in faces),
        volume_charge=-rho.divergence(),
    )


def dipole_bound_terms(d: DipoleBound, phi: PolyScalarField) -> dict[str, float]:
    return {
        "surface": sum(integrate_face(s * phi, f) for s, f in zip(d.surface_charge, d.faces)),
        "volume": integrate_tet(d.volume_charge * phi, d.patch.support),
    }


def evaluate_dipole_bound(d: DipoleBound, phi: PolyScalarField) -> float:
    """``sum_a int_a phi rho.nu dA - int phi div rho dV``."""
    return sum(dipole_bound_terms(d, phi).values())


# -- quadrupole ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FaceBound:
    """Per-face pieces of a quadrupole decomposition."""

    face: OrientedFace
    trace: PolyVectorField  # rho_a = rho^{ij} nu_j
    normal_dipole: PolyScalarField  # rho_a . nu, the normal dipole layer density
    tangential: PolyVectorField  # rho_at
    tangential_divergence: PolyScalarField  # div_t rho_at
    surface_charge: PolyScalarField  # -div_t rho_at - rho^{ij}_{,j} nu_i

    @property
    def normal(self) -> PolyVectorField:
        """``rho_anu`` as a vector, ``(rho_a . nu) nu``."""
        return PolyVectorField(tuple(self.normal_dipole * float(c) for c in self.face.unit_normal))


@dataclass(frozen=True, eq=False)
class QuadBound:
    patch: DensityPatch
    faces: tuple[FaceBound, ...]
    bound_dipole: PolyVectorField  # rho^{ij}_{,j}
    volume_charge: PolyScalarField  # rho^{ij}_{,ij}
    edges: dict[tuple[int, int], OrientedEdge]
    line_density: dict[tuple[int, int], PolyScalarField]  # keyed (a, b), a > b
    convention: str = "outward"


def _face_bound(patch: DensityPatch, face: OrientedFace, dip: PolyVectorField) -> FaceBound:
    nu = face.unit_normal
    trace = face_trace(patch, nu)
    tangential = tangential_part(trace, nu)
    div_t = surface_divergence(tangential, face)
    return FaceBound(
        face=face,
        trace=trace,
        normal_dipole=trace.dot(nu),
        tangential=tangential,
        tangential_divergence=div_t,
        surface_charge=-div_t - dip.dot(nu),
    )


def _line_density(fa: FaceBound, fb: FaceBound, edge: OrientedEdge, full: bool,
                  convention: str) -> PolyScalarField:
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; use one of {CONVENTIONS}")
    va = fa.trace if full else fa.tangential
    vb = fb.trace if full else fb.tangential
    first = va.dot(edge.conormal_ab)
    second = vb.dot(edge.conormal_ba)
    return first + second if convention == "outward" else first - second


def edge_line_density(patch: DensityPatch, a: int, b: int, convention: str = "outward",
                      tol: float = 1e-12) -> PolyScalarField:
    """Line density on the edge shared by faces ``a > b``.

    Computed from the tangential traces and cross-checked against the full
    traces ``rho_a``, whose normal parts are orthogonal to the conormals.
    """
    _check_order(patch, 2)
    if a <= b:
        raise ValueError(f"edge line density needs a > b, got ({a}, {b})")
    edge = edge_conormals(patch.support, a, b)
    dip = bound_dipole_vector(patch)
    fa = _face_bound(patch, patch.support.faces()[a], dip)
    fb = _face_bound(patch, patch.support.faces()[b], dip)
    tangential = _line_density(fa, fb, edge, False, convention)
    full = _line_density(fa, fb, edge, True, convention)
    scale = 1.0 + max((abs(c) for c in full.terms.values()), default=0.0)
    if not tangential.allclose(full, atol=tol * scale, rtol=tol):
        raise ArithmeticError(f"tangential and full line densities disagree on edge {(a, b)}")
    return tangential


def bound_quadrupole(patch: DensityPatch, convention: str = "outward") -> QuadBound:
    _check_order(patch, 2)
    dip = bound_dipole_vector(patch)
    faces = tuple(_face_bound(patch, f, dip) for f in patch.support.faces())
    edges = {}
    lines = {}
    for a in range(4):
        for b in range(a):
            e = edge_conormals(patch.support, a, b)
            edges[(a, b)] = e
            lines[(a, b)] = _line_density(faces[a], faces[b], e, False, convention)
    return QuadBound(patch, faces, dip, dip.divergence(), edges, lines, convention)


def quad_bound_terms(d: QuadBound, phi: PolyScalarField, include_edges: bool = True) -> dict[str, float]:
    """The five contribution families of the decomposed quadrupole functional."""
    terms = {
        "tangential_charge": -sum(integrate_face(fb.tangential_divergence * phi, fb.face)
                                  for fb in d.faces),
        "normal_dipole": sum(integrate_face(fb.normal_dipole * phi.directional(fb.face.unit_normal),
                                            fb.face) for fb in d.faces),
        "volume_charge": integrate_tet(d.volume_charge * phi, d.patch.support),
        "dipole_trace_charge": -sum(integrate_face(d.bound_dipole.dot(fb.face.unit_normal) * phi,
                                                   fb.face) for fb in d.faces),
    }
    if include_edges:
        terms["edge_charge"] = sum(integrate_edge(d.line_density[k] * phi, e)
                                   for k, e in d.edges.items())
    return terms


def evaluate_quad_bound(d: QuadBound, phi: PolyScalarField, include_edges: bool = True) -> float:
    return sum(quad_bound_terms(d, phi, include_edges).values())


def direct_value(patch: DensityPatch, phi: PolyScalarField) -> float:
    """``int phi_{,I} rho^I dV`` for a single patch."""
    return patch_direct_value(patch, phi)


def total_surface_charge(d: QuadBound, phi: PolyScalarField) -> float:
    """``int (surface charge) phi dA`` summed over faces."""
    return sum(integrate_face(fb.surface_charge * phi, fb.face) for fb in d.faces)


def edge_total(d: QuadBound, weight: PolyScalarField | None = None) -> np.ndarray:
    """Integral of each line density (times ``weight``) in key order."""
    weight = PolyScalarField.constant(1.0) if weight is None else weight
    return np.array([integrate_edge(d.line_density[k] * weight, d.edges[k]) for k in d.edges])
