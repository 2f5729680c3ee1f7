import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multipolar.fields import (MAX_DEGREE, DegreeCapError, PolyScalarField, PolyVectorField,
                               compose_flow, flow_derivative, poly, random_poly, vector)

x, y, z = (PolyScalarField.coordinate(i) for i in range(3))

coeffs = st.floats(-5, 5, allow_nan=False)
exponents = st.tuples(*(st.integers(0, 3),) * 3)
polys = st.dictionaries(exponents, coeffs, max_size=6).map(PolyScalarField)
points = st.tuples(*(st.floats(-2, 2),) * 3).map(np.array)


def test_evaluate_examples():
    assert poly({(2, 0, 0): 1, (0, 1, 0): 1})((2, 3, 0)) == 7
    assert poly(1.0)((4, -1, 9)) == 1
    assert (x * y * z)((1, 1, 1)) == 1


def test_vectorized_evaluation_matches_pointwise():
    f = poly({(2, 1, 0): 1.5, (0, 0, 3): -2.0, (0, 0, 0): 0.25})
    pts = np.random.default_rng(0).uniform(-1, 1, (7, 3))
    assert np.allclose(f(pts), [f(p) for p in pts])


def test_partial_examples():
    assert (x**2).partial(0) == 2 * x
    assert (x * y).partial(1).partial(0) == poly(1.0)
    assert (x * y).partial(0).partial(1) == poly(1.0)
    assert (x**2 + y).partial(2).is_zero()


def test_zero_coefficients_are_not_stored():
    f = x - x + poly({(1, 1, 0): 0.0})
    assert f.is_zero() and f.terms == {}


def test_degree_cap():
    f = x ** MAX_DEGREE
    assert f.degree == MAX_DEGREE
    with pytest.raises(DegreeCapError):
        (f * x).check_degree()


@settings(max_examples=100, deadline=None)
@given(polys, st.integers(0, 2), st.integers(0, 2))
def test_mixed_partials_commute(f, i, j):
    assert f.partial(i).partial(j).allclose(f.partial(j).partial(i))


@settings(max_examples=100, deadline=None)
@given(polys, polys, st.integers(0, 2))
def test_leibniz_rule(f, g, i):
    assert (f * g).partial(i).allclose(f.partial(i) * g + f * g.partial(i), atol=1e-9, rtol=1e-9)


@settings(max_examples=100, deadline=None)
@given(polys, polys, points)
def test_ring_operations_are_pointwise(f, g, p):
    scale = 1 + abs(f(p)) * abs(g(p))
    assert abs((f * g)(p) - f(p) * g(p)) <= 1e-9 * scale
    assert abs((f + g)(p) - f(p) - g(p)) <= 1e-9 * (1 + abs(f(p)) + abs(g(p)))


def test_compose_flow_translation():
    assert compose_flow(x, vector(1, 0, 0), 0.5) == x + 0.5


def test_compose_flow_identity_at_zero():
    f = random_poly(np.random.default_rng(1), 4)
    assert compose_flow(f, vector(x * y, 1, z), 0.0) == f


def test_compose_flow_quadratic_and_exact_rate():
    v = vector(1, 0, 0)
    t = 0.3
    assert compose_flow(x**2, v, t).allclose((x + t) ** 2)
    assert flow_derivative(x**2, v) == 2 * x


@settings(max_examples=50, deadline=None)
@given(polys, points, st.floats(-1, 1))
def test_compose_flow_matches_substitution(f, p, t):
    v = vector(y, x * z, 1.0)
    moved = p + t * v(p)
    assert abs(compose_flow(f, v, t)(p) - f(moved)) <= 1e-8 * (1 + abs(f(moved)))


def test_flow_derivative_matches_finite_difference():
    rng = np.random.default_rng(3)
    f = random_poly(rng, 4)
    v = PolyVectorField(tuple(random_poly(rng, 2) for _ in range(3)))
    p = rng.uniform(-1, 1, 3)
    h = 1e-5
    fd = (compose_flow(f, v, h)(p) - compose_flow(f, v, -h)(p)) / (2 * h)
    assert fd == pytest.approx(flow_derivative(f, v)(p), rel=1e-7, abs=1e-7)


def test_vector_field_divergence_and_dot():
    u = vector(x, y, z)
    assert u.divergence() == poly(3.0)
    assert u.dot([1, 1, 1]) == x + y + z
    assert PolyVectorField.identity() == u
    assert vector(1, 2, 3).is_constant() and not u.is_constant()
