import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multipolar.fields import PolyScalarField, PolyVectorField, poly, random_poly
from multipolar.geometry import Tet, edge_conormals, face
from multipolar.integrate import (integrate_edge, integrate_face, integrate_tet, normal_flux,
                                  segment_rule, surface_divergence, tet_rule, triangle_rule)
from multipolar.verification import random_tet

from conftest import REFERENCE
from oracles import simplex_integral

x, y, z = (PolyScalarField.coordinate(i) for i in range(3))


def test_tet_examples(ref):
    assert integrate_tet(poly(1.0), ref) == pytest.approx(1 / 6, rel=1e-14)
    assert integrate_tet(x, ref) == pytest.approx(1 / 24, rel=1e-14)
    assert integrate_tet(x * y, ref) == pytest.approx(1 / 120, rel=1e-14)


def test_face_examples(ref):
    bottom = face(ref, 3)
    assert integrate_face(poly(1.0), bottom) == pytest.approx(0.5, rel=1e-14)
    assert integrate_face(x, bottom) == pytest.approx(1 / 6, rel=1e-14)
    assert integrate_face(poly(1.0), face(ref, 0)) == pytest.approx(math.sqrt(3) / 2, rel=1e-14)


def test_edge_examples(ref):
    e = edge_conormals(ref, 3, 1)  # (0,0,0)-(0,1,0)
    assert integrate_edge(poly(1.0), e) == pytest.approx(1.0, rel=1e-14)
    assert integrate_edge(y, e) == pytest.approx(0.5, rel=1e-14)
    slant = edge_conormals(ref, 3, 0)  # (1,0,0)-(0,1,0)
    assert integrate_edge(poly(1.0), slant) == pytest.approx(math.sqrt(2), rel=1e-14)


@pytest.mark.parametrize("degree", [0, 1, 4, 9, 16])
def test_reference_rules_are_exact(degree):
    # monomials of the top degree on the unit simplices, against the closed form
    tet, tri, seg = tet_rule(degree), triangle_rule(degree), segment_rule(degree)
    assert tet.weights.sum() == pytest.approx(1 / 6, rel=1e-14)
    assert tri.weights.sum() == pytest.approx(1 / 2, rel=1e-14)
    assert seg.weights.sum() == pytest.approx(1.0, rel=1e-14)
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            c = degree - a - b
            exact = math.factorial(a) * math.factorial(b) * math.factorial(c) / math.factorial(degree + 3)
            got = np.sum(tet.weights * tet.points[:, 0]**a * tet.points[:, 1]**b * tet.points[:, 2]**c)
            assert got == pytest.approx(exact, rel=1e-12)
        exact = math.factorial(a) * math.factorial(degree - a) / math.factorial(degree + 2)
        got = np.sum(tri.weights * tri.points[:, 0]**a * tri.points[:, 1]**(degree - a))
        assert got == pytest.approx(exact, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 5))
def test_random_tets_against_oracle(seed, degree):
    rng = np.random.default_rng(seed)
    t = random_tet(rng)
    f = random_poly(rng, degree)
    exact = simplex_integral(f.terms, t.points)
    assert integrate_tet(f, t) == pytest.approx(exact, rel=1e-11, abs=1e-12)
    fa = t.faces()[int(rng.integers(4))]
    assert integrate_face(f, fa) == pytest.approx(simplex_integral(f.terms, fa.points),
                                                  rel=1e-11, abs=1e-12)
    e = t.edges()[int(rng.integers(6))]
    assert integrate_edge(f, e) == pytest.approx(simplex_integral(f.terms, e.points),
                                                 rel=1e-11, abs=1e-12)


def test_orientation_does_not_change_tet_integral(ref):
    f = poly({(2, 1, 0): 1.0, (0, 0, 1): -3.0})
    v = ref.vertices
    swapped = Tet((v[1], v[0], v[2], v[3]))
    assert integrate_tet(f, swapped) == pytest.approx(integrate_tet(f, ref), rel=1e-14)


def test_divergence_theorem_example(ref):
    u = PolyVectorField((x * y**2, z**3, x * y * z))
    lhs = sum(normal_flux(u, f) for f in ref.faces())
    assert lhs == pytest.approx(integrate_tet(u.divergence(), ref), rel=1e-13)


def test_surface_divergence_of_constant_field_vanishes(ref):
    fa = face(ref, 0)
    assert surface_divergence(PolyVectorField.constant([1.0, 2.0, 3.0]), fa).is_zero()
