"""Oriented tetrahedra, their faces and edges, and simplicial regions.

Face ``a`` of a tetrahedron is the triangle opposite vertex ``a``. Faces are
stored with a vertex ordering whose right-hand normal points out of the
tetrahedron, whatever the orientation of the parent, so callers never carry
the alternating ``(-1)**a`` signs themselves. The sign that *was* applied is
kept in :attr:`OrientedFace.orientation` for inspection.

Edge ``(a, b)`` is the segment shared by faces ``a`` and ``b``, oriented as
part of the boundary cycle of face ``a``; hence ``edge(a, b)`` and
``edge(b, a)`` are the same segment traversed in opposite directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

DEGENERACY_RATIO = 1e-12
UNIT_TOL = 1e-12


class DegenerateTetError(ValueError):
    """Raised for tetrahedra (or faces/edges) too thin to carry normals."""


def _point(p) -> tuple[float, float, float]:
    arr = np.asarray(p, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ValueError(f"expected a finite 3-vector, got {p!r}")
    return (float(arr[0]), float(arr[1]), float(arr[2]))


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise DegenerateTetError("cannot normalize a zero vector")
    return v / n


@dataclass(frozen=True)
class Tet:
    """Four ordered vertices. Construction does not reject degenerate input."""

    vertices: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        verts = tuple(_point(p) for p in self.vertices)
        if len(verts) != 4:
            raise ValueError("a tetrahedron has exactly four vertices")
        object.__setattr__(self, "vertices", verts)

    @classmethod
    def reference(cls) -> "Tet":
        return cls(((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)))

    @cached_property
    def points(self) -> np.ndarray:
        return np.array(self.vertices)

    @cached_property
    def volume(self) -> float:
        """Signed volume."""
        return signed_volume(self)

    @cached_property
    def longest_edge(self) -> float:
        p = self.points
        return max(np.linalg.norm(p[i] - p[j]) for i in range(4) for j in range(i + 1, 4))

    @property
    def is_degenerate(self) -> bool:
        scale = self.longest_edge
        return scale == 0.0 or abs(self.volume) < DEGENERACY_RATIO * scale**3

    def check(self) -> "Tet":
        if self.is_degenerate:
            raise DegenerateTetError(
                f"degenerate tetrahedron (volume {self.volume:.3e}): {self.vertices}")
        return self

    @cached_property
    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)

    @cached_property
    def jacobian(self) -> np.ndarray:
        """Columns ``x1 - x0, x2 - x0, x3 - x0``."""
        p = self.points
        return (p[1:] - p[0]).T

    def barycentric(self, x) -> np.ndarray:
        """Barycentric coordinates of ``x`` (``(4,)`` or ``(n, 4)``)."""
        self.check()
        x = np.asarray(x, dtype=float)
        local = np.linalg.solve(self.jacobian, (np.atleast_2d(x) - self.points[0]).T).T
        lam = np.column_stack([1.0 - local.sum(axis=1), local])
        return lam[0] if x.ndim == 1 else lam

    def contains(self, x, tol: float = 1e-12) -> bool:
        """Closed containment; points within ``tol`` of the boundary count."""
        return bool(np.all(self.barycentric(x) >= -tol))

    def same_cell(self, other: "Tet") -> bool:
        """True when both tets have the same vertex set (any ordering)."""
        return sorted(self.vertices) == sorted(other.vertices)

    def faces(self) -> list["OrientedFace"]:
        return [face(self, a) for a in range(4)]

    def edges(self) -> list["OrientedEdge"]:
        """Edges ``(a, b)`` with ``a > b`` (each geometric edge once)."""
        return [edge_conormals(self, a, b) for a in range(4) for b in range(a)]


@dataclass(frozen=True)
class OrientedFace:
    parent: Tet
    index: int
    vertices: tuple[tuple[float, float, float], ...]
    unit_normal: np.ndarray
    vector_area: np.ndarray
    orientation: int  # sign applied to the increasing vertex list

    @property
    def area(self) -> float:
        return float(np.linalg.norm(self.vector_area))

    @property
    def points(self) -> np.ndarray:
        return np.array(self.vertices)

    @property
    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)

    def frame(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal in-plane pair ``(e1, e2)`` with ``e1 x e2 = nu``."""
        p = self.points
        e1 = _unit(p[1] - p[0])
        e2 = np.cross(self.unit_normal, e1)
        return e1, e2


@dataclass(frozen=True)
class OrientedEdge:
    """Segment shared by faces ``a`` and ``b``, oriented from face ``a``'s boundary."""

    faces: tuple[int, int]
    start: np.ndarray
    end: np.ndarray
    conormal_ab: np.ndarray  # in face a, out of face a
    conormal_ba: np.ndarray  # in face b, out of face b

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    @property
    def direction(self) -> np.ndarray:
        return _unit(self.end - self.start)

    @property
    def points(self) -> np.ndarray:
        return np.array([self.start, self.end])

    def reversed(self) -> "OrientedEdge":
        a, b = self.faces
        return OrientedEdge((b, a), self.end, self.start, self.conormal_ba, self.conormal_ab)


def signed_volume(t: Tet | Sequence) -> float:
    """``det[x1 - x0, x2 - x0, x3 - x0] / 6``."""
    p = t.points if isinstance(t, Tet) else np.asarray(t, dtype=float)
    return float(np.linalg.det(np.array([p[1] - p[0], p[2] - p[0], p[3] - p[0]])) / 6.0)


def _face_vertices(t: Tet, a: int) -> tuple[list[int], int]:
    """Vertex indices of face ``a`` ordered outward, plus the sign used."""
    idx = [i for i in range(4) if i != a]
    sign = (-1) ** a * (1 if t.volume > 0 else -1)
    if sign < 0:
        idx[0], idx[1] = idx[1], idx[0]
    return idx, sign


def face(t: Tet, a: int) -> OrientedFace:
    """Face opposite vertex ``a`` with outward unit normal and vector area."""
    if a not in range(4):
        raise IndexError(f"face index must be 0..3, got {a}")
    t.check()
    idx, sign = _face_vertices(t, a)
    p = t.points[idx]
    cross = np.cross(p[1] - p[0], p[2] - p[0])
    vector_area = 0.5 * cross
    normal = _unit(cross)
    # The (-1)^a ordering is outward for positively oriented simplices.
    assert np.dot(normal, p[0] - t.points[a]) > 0
    return OrientedFace(t, a, tuple(map(tuple, p)), normal, vector_area, sign)


def edge_conormals(t: Tet, a: int, b: int) -> OrientedEdge:
    """Edge shared by faces ``a`` and ``b`` with in-face conormals."""
    if a == b:
        raise ValueError("edge needs two distinct face indices")
    if a not in range(4) or b not in range(4):
        raise IndexError(f"face indices must be 0..3, got {(a, b)}")
    fa = face(t, a)
    fb = face(t, b)
    idx, _ = _face_vertices(t, a)
    # face a's boundary cycle is idx[0] -> idx[1] -> idx[2]; drop the side holding b
    cycle = [(idx[0], idx[1]), (idx[1], idx[2]), (idx[2], idx[0])]
    i, j = next(side for side in cycle if b not in side)
    start, end = t.points[i], t.points[j]
    tangent = _unit(end - start)
    mu_ab = _unit(np.cross(tangent, fa.unit_normal))
    mu_ba = _unit(np.cross(-tangent, fb.unit_normal))
    # vertex b lies in face a, off the edge, so mu_ab must point away from it
    assert np.dot(mu_ab, t.points[b] - start) < 0
    assert np.dot(mu_ba, t.points[a] - start) < 0
    return OrientedEdge((a, b), start, end, mu_ab, mu_ba)


def alternating_edge_orientation(a: int, b: int) -> tuple[int, tuple[int, int]]:
    """Alternating-sign convention for the edge shared by faces ``a``, ``b``.

    Returns ``(sign, (i, j))``: the edge is ``sign * [x_i, x_j]`` with
    ``i < j`` the two vertices other than ``a`` and ``b``.
    """
    i, j = sorted(set(range(4)) - {a, b})
    sign = (-1) ** (a + b) if b < a else (-1) ** (a + b + 1)
    return sign, (i, j)


def tangential_decompose(w, nu) -> tuple[np.ndarray, np.ndarray]:
    """Split ``w`` into normal ``(w.nu) nu`` and tangential remainder."""
    w = np.asarray(w, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if abs(np.linalg.norm(nu) - 1.0) > 1e-10:
        raise ValueError(f"normal must be a unit vector, |nu| = {np.linalg.norm(nu)}")
    w_nu = np.dot(w, nu) * nu
    return w_nu, w - w_nu


class StraddleError(ValueError):
    """A density patch partially overlaps a region (clipping is unsupported)."""


@dataclass(frozen=True)
class SimplicialRegion:
    """Disjoint union of non-degenerate tetrahedra.

    Interior faces shared by neighbouring tets are kept on both sides; no
    cancellation is performed.
    """

    tets: tuple[Tet, ...] = ()

    def __post_init__(self):
        tets = tuple(t if isinstance(t, Tet) else Tet(t) for t in self.tets)
        for t in tets:
            t.check()
        object.__setattr__(self, "tets", tets)

    @classmethod
    def of(cls, tets: Iterable) -> "SimplicialRegion":
        return cls(tuple(tets))

    def __len__(self):
        return len(self.tets)

    def __iter__(self):
        return iter(self.tets)

    def union(self, other: "SimplicialRegion") -> "SimplicialRegion":
        return SimplicialRegion(self.tets + other.tets)

    @property
    def volume(self) -> float:
        return sum(abs(t.volume) for t in self.tets)

    def contains(self, x, tol: float = 1e-12) -> bool:
        """Closed containment: boundary points count as inside."""
        return any(t.contains(x, tol) for t in self.tets)

    def has_cell(self, t: Tet) -> bool:
        return any(t.same_cell(s) for s in self.tets)

    def classify(self, t: Tet) -> bool:
        """Whether tet ``t`` lies in the region (True) or outside it (False).

        Raises :class:`StraddleError` when ``t`` neither is contained in one
        of the region's tets nor avoids the region's interior.
        """
        if self.has_cell(t):
            return True
        pts = t.points
        for s in self.tets:
            if all(s.contains(p, 1e-12) for p in pts):
                return True
        # interior sample points of t, tested against open interiors
        c = t.centroid
        samples = [c] + [c + 0.9 * (p - c) for p in pts]
        samples += [c + 0.9 * (pts[[i for i in range(4) if i != a]].mean(axis=0) - c)
                    for a in range(4)]
        for s in self.tets:
            if any(np.all(s.barycentric(x) > 1e-12) for x in samples):
                raise StraddleError(f"patch support {t.vertices} straddles the region")
        return False


def permutation_sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def vertex_permutations(t: Tet):
    """Yield ``(sign, permuted tet)`` over all 24 vertex orderings."""
    for perm in permutations(range(4)):
        yield permutation_sign(perm), Tet(tuple(t.vertices[i] for i in perm))
