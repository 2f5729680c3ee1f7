"""Exact-degree quadrature on tetrahedra, flat triangles and segments.

Rules are collapsed (conical) Gauss-Jacobi products, so a rule of any
requested exactness degree is available. The degree used for a polynomial
integrand is its symbolic total degree plus an optional margin.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .fields import PolyScalarField, PolyVectorField
from .geometry import DegenerateTetError, OrientedEdge, OrientedFace, Tet

# Extra exactness degree applied to every rule; settable from the CLI.
DEGREE_MARGIN = 0


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes on a reference simplex of dimension ``dim``.

    ``points`` are reference coordinates; ``barycentric`` prepends the
    complementary weight ``1 - sum(points)``. ``weights`` sum to the
    reference measure (1, 1/2 or 1/6).
    """

    dim: int
    degree: int
    points: np.ndarray
    weights: np.ndarray

    @property
    def barycentric(self) -> np.ndarray:
        return np.column_stack([1.0 - self.points.sum(axis=1), self.points])

    def __len__(self):
        return len(self.weights)


def _gauss_jacobi01(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi nodes/weights on [0, 1] for weight ``(1 - t)**alpha``."""
    x, w = roots_jacobi(n, alpha, 0.0)
    return (x + 1.0) / 2.0, w / 2.0 ** (alpha + 1)


def _npoints(degree: int) -> int:
    return max(1, (degree + 2) // 2)


@lru_cache(maxsize=None)
def segment_rule(degree: int) -> QuadratureRule:
    t, w = _gauss_jacobi01(_npoints(degree), 0.0)
    return QuadratureRule(1, degree, t[:, None], w)


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> QuadratureRule:
    n = _npoints(degree)
    u, wu = _gauss_jacobi01(n, 1.0)
    v, wv = _gauss_jacobi01(n, 0.0)
    U, V = np.meshgrid(u, v, indexing="ij")
    pts = np.column_stack([U.ravel(), (V * (1.0 - U)).ravel()])
    return QuadratureRule(2, degree, pts, np.outer(wu, wv).ravel())


@lru_cache(maxsize=None)
def tet_rule(degree: int) -> QuadratureRule:
    n = _npoints(degree)
    u, wu = _gauss_jacobi01(n, 2.0)
    v, wv = _gauss_jacobi01(n, 1.0)
    w, ww = _gauss_jacobi01(n, 0.0)
    U, V, W = np.meshgrid(u, v, w, indexing="ij")
    pts = np.column_stack([
        U.ravel(),
        (V * (1.0 - U)).ravel(),
        (W * (1.0 - U) * (1.0 - V)).ravel(),
    ])
    weights = (wu[:, None, None] * wv[None, :, None] * ww[None, None, :]).ravel()
    return QuadratureRule(3, degree, pts, weights)


def _degree(f: PolyScalarField, margin: int | None) -> int:
    return f.degree + (DEGREE_MARGIN if margin is None else margin)


def tet_nodes(t: Tet, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Physical nodes and weights (including ``|det J|``) on ``t``."""
    t.check()
    rule = tet_rule(degree)
    x = t.points[0] + rule.points @ t.jacobian.T
    return x, rule.weights * abs(6.0 * t.volume)


def face_nodes(face: OrientedFace, degree: int) -> tuple[np.ndarray, np.ndarray]:
    p = face.points
    area = face.area
    if area == 0.0:
        raise DegenerateTetError("zero-area face")
    rule = triangle_rule(degree)
    x = p[0] + rule.points[:, :1] * (p[1] - p[0]) + rule.points[:, 1:] * (p[2] - p[0])
    return x, rule.weights * (2.0 * area)


def edge_nodes(edge: OrientedEdge, degree: int) -> tuple[np.ndarray, np.ndarray]:
    length = edge.length
    if length == 0.0:
        raise DegenerateTetError("zero-length edge")
    rule = segment_rule(degree)
    x = edge.start + rule.points * (edge.end - edge.start)
    return x, rule.weights * length


def integrate_tet(f: PolyScalarField, t: Tet, margin: int | None = None) -> float:
    """Volume integral of ``f`` over ``t``."""
    if f.is_zero():
        return 0.0
    x, w = tet_nodes(t, _degree(f, margin))
    return float(w @ f(x))


def integrate_face(f: PolyScalarField, face: OrientedFace, margin: int | None = None) -> float:
    """Area integral of ``f`` over a flat triangular face (unsigned measure)."""
    if f.is_zero():
        return 0.0
    x, w = face_nodes(face, _degree(f, margin))
    return float(w @ f(x))


def integrate_edge(f: PolyScalarField, edge: OrientedEdge, margin: int | None = None) -> float:
    """Arclength integral of ``f`` along an edge."""
    if f.is_zero():
        return 0.0
    x, w = edge_nodes(edge, _degree(f, margin))
    return float(w @ f(x))


def integrate_region(f: PolyScalarField, region, margin: int | None = None) -> float:
    return sum(integrate_tet(f, t, margin) for t in region.tets)


def normal_flux(w: PolyVectorField, face: OrientedFace, margin: int | None = None) -> float:
    """``int_face w . nu dA``."""
    return integrate_face(w.dot(face.unit_normal), face, margin)


def surface_divergence(w: PolyVectorField, face: OrientedFace) -> PolyScalarField:
    """In-plane divergence of ``w`` on the plane of ``face``.

    With an orthonormal in-plane frame ``(e1, e2)`` this is
    ``sum_a e_a . D_{e_a} w``, the divergence of the pullback of the
    tangential part of ``w`` to plane coordinates.
    """
    out = PolyScalarField()
    for e in face.frame():
        out = out + w.dot(e).directional(e)
    return out


def tangential_part(w: PolyVectorField, nu) -> PolyVectorField:
    """``w - (w . nu) nu`` for a constant unit ``nu``."""
    wn = w.dot(nu)
    return PolyVectorField(tuple(w[i] - wn * float(nu[i]) for i in range(3)))
