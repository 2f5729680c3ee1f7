"""Multipole distributions: point atoms and polynomial densities per order.

A distribution of order ``r`` acts on a test function ``phi`` by contracting
the ``k``-th partial derivatives of ``phi`` against the order-``k``
component, for every ``k <= r``. Components are stored unsymmetrized:
a strength ``c`` of order 2 is a full ``3 x 3`` array and ``c[0, 2]`` and
``c[2, 0]`` are independent entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import permutations, product
from math import factorial
from typing import Iterable, Mapping

import numpy as np

from .fields import MAX_DEGREE, PolyScalarField, PolyVectorField, compose_flow
from .geometry import SimplicialRegion, Tet
from .integrate import integrate_tet, tet_nodes

MAX_ORDER = 4

Index = tuple[int, ...]


def indices(k: int) -> Iterable[Index]:
    """All ``3**k`` axis tuples of length ``k``."""
    return product(range(3), repeat=k)


def symmetrize(c) -> np.ndarray:
    """Average a ``k``-index tensor over all index permutations."""
    c = np.asarray(c, dtype=float)
    k = c.ndim
    if k < 2:
        return c.copy()
    return sum(np.transpose(c, p) for p in permutations(range(k))) / factorial(k)


class DerivativeCache:
    """Memoized ``phi_{,i1...ik}``, keyed by the sorted index tuple."""

    def __init__(self, phi: PolyScalarField):
        self.phi = phi
        self._cache: dict[Index, PolyScalarField] = {(): phi}

    def __call__(self, idx: Index) -> PolyScalarField:
        key = tuple(sorted(idx))
        if key not in self._cache:
            self._cache[key] = self(key[:-1]).partial(key[-1])
        return self._cache[key]


@dataclass(frozen=True, eq=False)
class PointAtom:
    """A point multipole of order ``strength.ndim`` at ``location``."""

    location: np.ndarray
    strength: np.ndarray

    def __post_init__(self):
        loc = np.asarray(self.location, dtype=float)
        s = np.asarray(self.strength, dtype=float)
        if loc.shape != (3,) or not np.all(np.isfinite(loc)):
            raise ValueError(f"atom location must be a finite 3-vector, got {self.location!r}")
        if s.shape != (3,) * s.ndim or not np.all(np.isfinite(s)):
            raise ValueError(f"atom strength must be a finite 3x...x3 tensor, got shape {s.shape}")
        object.__setattr__(self, "location", loc)
        object.__setattr__(self, "strength", s)

    @property
    def order(self) -> int:
        return self.strength.ndim

    def __eq__(self, other):
        if not isinstance(other, PointAtom):
            return NotImplemented
        return (np.array_equal(self.location, other.location)
                and np.array_equal(self.strength, other.strength))

    def action(self, d: DerivativeCache) -> float:
        x = self.location
        if self.order == 0:
            return float(self.strength) * d(())(x)
        total = 0.0
        for idx in indices(self.order):
            c = self.strength[idx]
            if c != 0.0:
                total += c * d(idx)(x)
        return total


@dataclass(frozen=True, eq=False)
class DensityPatch:
    """Polynomial multipole density of order ``order`` supported on one tet.

    ``density`` maps every axis tuple of length ``order`` to a polynomial.
    """

    support: Tet
    order: int
    density: Mapping[Index, PolyScalarField] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.support, Tet):
            object.__setattr__(self, "support", Tet(self.support))
        self.support.check()
        if not 0 <= self.order <= MAX_ORDER:
            raise ValueError(f"order must be in 0..{MAX_ORDER}")
        dens = {}
        for idx in indices(self.order):
            f = self.density.get(idx, PolyScalarField())
            dens[idx] = f if isinstance(f, PolyScalarField) else PolyScalarField.constant(f)
        extra = set(self.density) - set(dens)
        if extra:
            raise ValueError(f"density keys {sorted(extra)} do not match order {self.order}")
        object.__setattr__(self, "density", dens)

    @classmethod
    def constant(cls, support: Tet, value) -> "DensityPatch":
        value = np.asarray(value, dtype=float)
        return cls(support, value.ndim,
                   {idx: PolyScalarField.constant(value[idx]) for idx in indices(value.ndim)})

    @classmethod
    def from_vector(cls, support: Tet, rho: PolyVectorField) -> "DensityPatch":
        return cls(support, 1, {(i,): rho[i] for i in range(3)})

    def __getitem__(self, idx) -> PolyScalarField:
        if isinstance(idx, int):
            idx = (idx,)
        return self.density[tuple(idx)]

    def __eq__(self, other):
        if not isinstance(other, DensityPatch):
            return NotImplemented
        return (self.support.same_cell(other.support) and self.support == other.support
                and self.order == other.order and self.density == other.density)

    @property
    def degree(self) -> int:
        return max(f.degree for f in self.density.values())

    def as_vector(self) -> PolyVectorField:
        if self.order != 1:
            raise ValueError("only order-1 densities are vector fields")
        return PolyVectorField(tuple(self.density[(i,)] for i in range(3)))

    def map(self, fn) -> "DensityPatch":
        return DensityPatch(self.support, self.order, {k: fn(v) for k, v in self.density.items()})

    def symmetrized(self) -> "DensityPatch":
        by_class = {}
        for idx in indices(self.order):
            key = tuple(sorted(idx))
            if key not in by_class:
                perms = list(permutations(idx))
                acc = sum((self.density[p] for p in perms), PolyScalarField())
                by_class[key] = acc / len(perms)
        out = {idx: by_class[tuple(sorted(idx))] for idx in indices(self.order)}
        return DensityPatch(self.support, self.order, out)

    def action(self, d: DerivativeCache) -> float:
        """``int phi_{,I} rho^I dV`` over the support, summed on ``I``."""
        pairs = [(d(idx), f) for idx, f in self.density.items() if not f.is_zero()]
        pairs = [(g, f) for g, f in pairs if not g.is_zero()]
        if not pairs:
            return 0.0
        degree = max(g.degree + f.degree for g, f in pairs)
        x, w = tet_nodes(self.support, degree + _margin())
        return float(w @ sum(g(x) * f(x) for g, f in pairs))


def _margin() -> int:
    from . import integrate
    return integrate.DEGREE_MARGIN


@dataclass(frozen=True, eq=False)
class MultipoleDistribution:
    """Order-``r`` collection of atoms and density patches (``r <= 4``)."""

    order: int
    atoms: tuple[PointAtom, ...] = ()
    patches: tuple[DensityPatch, ...] = ()

    def __post_init__(self):
        if not 0 <= self.order <= MAX_ORDER:
            raise ValueError(f"order must be in 0..{MAX_ORDER}, got {self.order}")
        atoms = tuple(self.atoms)
        patches = tuple(self.patches)
        for item in atoms + patches:
            if item.order > self.order:
                raise ValueError(
                    f"component of order {item.order} exceeds distribution order {self.order}")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "patches", patches)

    @classmethod
    def of(cls, *items, order: int | None = None) -> "MultipoleDistribution":
        atoms = tuple(i for i in items if isinstance(i, PointAtom))
        patches = tuple(i for i in items if isinstance(i, DensityPatch))
        if order is None:
            order = max((i.order for i in items), default=0)
        return cls(order, atoms, patches)

    def __eq__(self, other):
        if not isinstance(other, MultipoleDistribution):
            return NotImplemented
        return (type(self) is type(other) and self.order == other.order
                and self.atoms == other.atoms and self.patches == other.patches)

    def component(self, k: int) -> "MultipoleDistribution":
        """Only the order-``k`` atoms and patches."""
        return replace(self,
                       atoms=tuple(a for a in self.atoms if a.order == k),
                       patches=tuple(p for p in self.patches if p.order == k))

    def support(self) -> SimplicialRegion:
        return SimplicialRegion(tuple(p.support for p in self.patches))

    def symmetrized(self) -> "MultipoleDistribution":
        return replace(self,
                       atoms=tuple(PointAtom(a.location, symmetrize(a.strength)) for a in self.atoms),
                       patches=tuple(p.symmetrized() for p in self.patches))

    def scaled(self, s: float) -> "MultipoleDistribution":
        return replace(self,
                       atoms=tuple(PointAtom(a.location, s * a.strength) for a in self.atoms),
                       patches=tuple(p.map(lambda f: f * s) for p in self.patches))


def restrict(Q: MultipoleDistribution, region: SimplicialRegion) -> MultipoleDistribution:
    """Keep atoms inside ``region`` (boundary inclusive) and patches in it.

    Raises :class:`~multipolar.geometry.StraddleError` for a patch that
    partially overlaps the region.
    """
    atoms = tuple(a for a in Q.atoms if region.contains(a.location))
    patches = tuple(p for p in Q.patches if region.classify(p.support))
    return replace(Q, atoms=atoms, patches=patches)


def evaluate(Q: MultipoleDistribution, phi: PolyScalarField,
             region: SimplicialRegion | None = None) -> float:
    """``Q_B(phi)``; ``region=None`` means all of space."""
    phi.check_degree(MAX_DEGREE, "test function")
    if region is not None:
        Q = restrict(Q, region)
    d = DerivativeCache(phi)
    return sum((a.action(d) for a in Q.atoms), 0.0) + sum((p.action(d) for p in Q.patches), 0.0)


def pushforward_energy(Q: MultipoleDistribution, phi: PolyScalarField,
                       v: PolyVectorField, t: float) -> float:
    """Energy of ``Q`` carried by the flow ``x + t v(x)``: ``Q(phi o c_t)``."""
    phi.check_degree(MAX_DEGREE, "test function")
    return evaluate(Q, compose_flow(phi, v, t))


def atom(location, strength) -> PointAtom:
    return PointAtom(np.asarray(location, dtype=float), np.asarray(strength, dtype=float))


def patch_direct_value(patch: DensityPatch, phi: PolyScalarField) -> float:
    """Direct functional of a single patch (used by the decomposition modules)."""
    return patch.action(DerivativeCache(phi))


def patch_integral(f: PolyScalarField, patch: DensityPatch) -> float:
    return integrate_tet(f, patch.support)
