"""Polynomial scalar and vector fields on R^3.

Fields are stored as sparse maps from exponent triples ``(e1, e2, e3)`` to
float coefficients, so ``{(2, 0, 0): 1.0, (0, 1, 0): 1.0}`` is ``x**2 + y``.
Differentiation is exact; evaluation accepts a single point or an ``(n, 3)``
array of points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_DEGREE = 16

MultiIndex = tuple[int, int, int]

_UNIT = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


class DegreeCapError(ValueError):
    """Raised when an input polynomial exceeds :data:`MAX_DEGREE`."""


def _add_exponents(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


@dataclass(frozen=True, eq=False)
class PolyScalarField:
    """Polynomial ``sum_e c_e x^e1 y^e2 z^e3``; zero coefficients are dropped."""

    terms: Mapping[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for key, value in dict(self.terms).items():
            key = tuple(int(k) for k in key)
            if len(key) != 3 or min(key) < 0:
                raise ValueError(f"bad exponent triple {key!r}")
            value = float(value)
            if not np.isfinite(value):
                raise ValueError(f"non-finite coefficient for {key!r}")
            if value != 0.0:
                clean[key] = clean.get(key, 0.0) + value
        object.__setattr__(self, "terms", {k: v for k, v in clean.items() if v != 0.0})

    @classmethod
    def _trusted(cls, terms: dict) -> "PolyScalarField":
        # results of algebra on valid fields: keys are valid, values are floats
        obj = object.__new__(cls)
        object.__setattr__(obj, "terms", {k: v for k, v in terms.items() if v != 0.0})
        return obj

    # -- constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, value: float) -> "PolyScalarField":
        return cls({(0, 0, 0): value})

    @classmethod
    def coordinate(cls, axis: int) -> "PolyScalarField":
        """The coordinate function ``x``, ``y`` or ``z`` (axis 0, 1, 2)."""
        return cls({_UNIT[axis]: 1.0})

    @classmethod
    def zero(cls) -> "PolyScalarField":
        return cls({})

    @classmethod
    def promote(cls, item) -> "PolyScalarField":
        if isinstance(item, PolyScalarField):
            return item
        return cls.constant(float(item))

    # -- structure ------------------------------------------------------------

    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial has degree 0."""
        if not self.terms:
            return 0
        return max(sum(k) for k in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def check_degree(self, cap: int = MAX_DEGREE, name: str = "field") -> "PolyScalarField":
        if self.degree > cap:
            raise DegreeCapError(f"{name} has degree {self.degree} > cap {cap}")
        return self

    def allclose(self, other, atol: float = 1e-12, rtol: float = 1e-12) -> bool:
        other = PolyScalarField.promote(other)
        keys = set(self.terms) | set(other.terms)
        for k in keys:
            a = self.terms.get(k, 0.0)
            b = other.terms.get(k, 0.0)
            if abs(a - b) > atol + rtol * max(abs(a), abs(b)):
                return False
        return True

    def __eq__(self, other):
        if isinstance(other, (int, float)):
            other = PolyScalarField.constant(other)
        if not isinstance(other, PolyScalarField):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "PolyScalarField(0)"
        parts = []
        for (a, b, c), v in sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), kv[0])):
            mono = "*".join(
                s if e == 1 else f"{s}^{e}" for s, e in zip("xyz", (a, b, c)) if e
            )
            parts.append(f"{v:g}" + (f"*{mono}" if mono else ""))
        return "PolyScalarField(" + " + ".join(parts) + ")"

    # -- evaluation -----------------------------------------------------------

    def __call__(self, points) -> float | np.ndarray:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if not self.terms:
            out = np.zeros(len(pts))
        else:
            exps = np.array(list(self.terms.keys()), dtype=int)
            coeffs = np.fromiter(self.terms.values(), dtype=float, count=len(exps))
            top = int(exps.max())
            # powers[axis][p, e] = pts[p, axis] ** e
            powers = [pts[:, ax, None] ** np.arange(top + 1) for ax in range(3)]
            monos = powers[0][:, exps[:, 0]] * powers[1][:, exps[:, 1]] * powers[2][:, exps[:, 2]]
            out = monos @ coeffs
        return float(out[0]) if single else out

    def eval(self, point) -> float:
        return self(point)

    # -- algebra --------------------------------------------------------------

    def __add__(self, other):
        other = PolyScalarField.promote(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return PolyScalarField._trusted(out)

    __radd__ = __add__

    def __neg__(self):
        return PolyScalarField._trusted({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-PolyScalarField.promote(other))

    def __rsub__(self, other):
        return PolyScalarField.promote(other) - self

    def __mul__(self, other):
        if isinstance(other, PolyScalarField):
            out: dict[MultiIndex, float] = {}
            for ka, va in self.terms.items():
                for kb, vb in other.terms.items():
                    k = _add_exponents(ka, kb)
                    out[k] = out.get(k, 0.0) + va * vb
            return PolyScalarField._trusted(out)
        if isinstance(other, PolyVectorField):
            return NotImplemented
        scale = float(other)
        if not np.isfinite(scale):
            raise ValueError("non-finite scale factor")
        return PolyScalarField._trusted({k: v * scale for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, other: float):
        return self * (1.0 / float(other))

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = PolyScalarField.constant(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- calculus -------------------------------------------------------------

    def partial(self, axis: int) -> "PolyScalarField":
        """Exact partial derivative along ``axis`` (0, 1 or 2)."""
        out = {}
        for k, v in self.terms.items():
            e = k[axis]
            if e:
                nk = list(k)
                nk[axis] = e - 1
                out[tuple(nk)] = v * e
        return PolyScalarField._trusted(out)

    def derivative(self, axes: Iterable[int]) -> "PolyScalarField":
        """Repeated partial derivative ``f_{,i1 i2 ...}``."""
        f = self
        for ax in axes:
            f = f.partial(ax)
        return f

    def gradient(self) -> "PolyVectorField":
        return PolyVectorField(tuple(self.partial(i) for i in range(3)))

    def directional(self, direction) -> "PolyScalarField":
        """Derivative along a constant vector."""
        d = np.asarray(direction, dtype=float)
        return sum((self.partial(i) * d[i] for i in range(3) if d[i] != 0.0), PolyScalarField())

    def substitute(self, components: Sequence["PolyScalarField"]) -> "PolyScalarField":
        """Composition ``x -> f(g1(x), g2(x), g3(x))``."""
        if not self.terms:
            return PolyScalarField()
        top = [max(k[ax] for k in self.terms) for ax in range(3)]
        powers = []
        for ax in range(3):
            row = [PolyScalarField.constant(1.0)]
            for _ in range(top[ax]):
                row.append(row[-1] * components[ax])
            powers.append(row)
        out = PolyScalarField()
        for (a, b, c), v in self.terms.items():
            out = out + powers[0][a] * powers[1][b] * powers[2][c] * v
        return out


@dataclass(frozen=True, eq=False)
class PolyVectorField:
    """Three polynomial components ``(w1, w2, w3)``."""

    components: tuple[PolyScalarField, PolyScalarField, PolyScalarField]

    def __post_init__(self):
        comps = tuple(PolyScalarField.promote(c) if not isinstance(c, PolyScalarField)
                      else c for c in self.components)
        if len(comps) != 3:
            raise ValueError("a vector field needs exactly three components")
        object.__setattr__(self, "components", comps)

    @classmethod
    def constant(cls, vector) -> "PolyVectorField":
        return cls(tuple(PolyScalarField.constant(float(c)) for c in vector))

    @classmethod
    def zero(cls) -> "PolyVectorField":
        return cls((PolyScalarField(), PolyScalarField(), PolyScalarField()))

    @classmethod
    def identity(cls) -> "PolyVectorField":
        """The position field ``x -> x``."""
        return cls(tuple(PolyScalarField.coordinate(i) for i in range(3)))

    def __getitem__(self, i: int) -> PolyScalarField:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return 3

    def __eq__(self, other):
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"PolyVectorField{self.components!r}"

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def is_constant(self) -> bool:
        return self.degree == 0

    def check_degree(self, cap: int = MAX_DEGREE, name: str = "vector field") -> "PolyVectorField":
        if self.degree > cap:
            raise DegreeCapError(f"{name} has degree {self.degree} > cap {cap}")
        return self

    def allclose(self, other: "PolyVectorField", atol=1e-12, rtol=1e-12) -> bool:
        return all(a.allclose(b, atol, rtol) for a, b in zip(self, other))

    def __call__(self, points) -> np.ndarray:
        return np.stack([np.asarray(c(points)) for c in self.components], axis=-1)

    def __add__(self, other: "PolyVectorField"):
        return PolyVectorField(tuple(a + b for a, b in zip(self, other)))

    def __sub__(self, other: "PolyVectorField"):
        return PolyVectorField(tuple(a - b for a, b in zip(self, other)))

    def __neg__(self):
        return PolyVectorField(tuple(-a for a in self))

    def __mul__(self, other):
        # scalar or scalar-field multiple
        return PolyVectorField(tuple(a * other for a in self))

    __rmul__ = __mul__

    def dot(self, other) -> PolyScalarField:
        """Contraction with another vector field or a constant vector."""
        if isinstance(other, PolyVectorField):
            return sum((a * b for a, b in zip(self, other)), PolyScalarField())
        w = np.asarray(other, dtype=float)
        return sum((a * float(w[i]) for i, a in enumerate(self) if w[i] != 0.0), PolyScalarField())

    def partial(self, axis: int) -> "PolyVectorField":
        return PolyVectorField(tuple(c.partial(axis) for c in self))

    def divergence(self) -> PolyScalarField:
        return self[0].partial(0) + self[1].partial(1) + self[2].partial(2)

    def substitute(self, components: Sequence[PolyScalarField]) -> "PolyVectorField":
        return PolyVectorField(tuple(c.substitute(components) for c in self))


def poly(terms: Mapping[MultiIndex, float] | float) -> PolyScalarField:
    """Shorthand constructor accepting a term map or a constant."""
    if isinstance(terms, Mapping):
        return PolyScalarField(terms)
    return PolyScalarField.constant(terms)


def vector(*components) -> PolyVectorField:
    """Build a vector field from three scalars, term maps or fields."""
    if len(components) == 1:
        components = tuple(components[0])
    return PolyVectorField(tuple(
        c if isinstance(c, PolyScalarField) else poly(c) for c in components))


def eval(f: PolyScalarField, p) -> float:  # noqa: A001 - mirrors the operation name
    return f(p)


def partial(f: PolyScalarField, axis: int) -> PolyScalarField:
    return f.partial(axis)


def flow_map(v: PolyVectorField, t: float) -> tuple[PolyScalarField, ...]:
    """Components of the flow ``c_t(x) = x + t v(x)``."""
    return tuple(PolyScalarField.coordinate(i) + v[i] * t for i in range(3))


def compose_flow(f: PolyScalarField, v: PolyVectorField, t: float) -> PolyScalarField:
    """The polynomial ``x -> f(x + t v(x))``."""
    if t == 0.0:
        return f
    return f.substitute(flow_map(v, t))


def flow_derivative(f: PolyScalarField, v: PolyVectorField) -> PolyScalarField:
    """Exact ``d/dt compose_flow(f, v, t)`` at ``t = 0``, i.e. ``f_{,j} v^j``."""
    return sum((f.partial(j) * v[j] for j in range(3)), PolyScalarField())


def random_poly(rng: np.random.Generator, degree: int, scale: float = 1.0) -> PolyScalarField:
    """Dense random polynomial of total degree ``<= degree``, N(0, scale) coefficients."""
    terms = {}
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            for c in range(degree + 1 - a - b):
                terms[(a, b, c)] = scale * rng.standard_normal()
    return PolyScalarField(terms)


def random_vector_field(rng: np.random.Generator, degree: int, scale: float = 1.0) -> PolyVectorField:
    return PolyVectorField(tuple(random_poly(rng, degree, scale) for _ in range(3)))
