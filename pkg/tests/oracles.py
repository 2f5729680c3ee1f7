"""Independent reference integrals for polynomial test data.

A polynomial given as ``{(a, b, c): coeff}`` is rewritten in barycentric
coordinates with exact sympy polynomials, and each barycentric monomial is integrated with
the closed form

    int_S prod_i lam_i^{k_i} = d! prod_i k_i! / (d + sum_i k_i)! * |S|

on a ``d``-simplex of measure ``|S|``. Nothing here touches the package's
quadrature or polynomial code.
"""

from math import factorial

import numpy as np
import sympy as sp


def _measure(vertices):
    v = np.asarray(vertices, dtype=float)
    edges = v[1:] - v[0]
    gram = edges @ edges.T
    return float(np.sqrt(abs(np.linalg.det(gram)))) / factorial(len(edges))


def simplex_integral(terms, vertices):
    """Integral over a 1-, 2- or 3-simplex in exact rational arithmetic.

    Float inputs are converted exactly (binary rationals); only the final
    measure factor is rounded.
    """
    d = len(vertices) - 1
    lam = sp.symbols(f"l0:{d + 1}")
    verts = [[sp.Rational(float(c)) for c in p] for p in vertices]
    xyz = [sp.Poly(sum(lam[i] * verts[i][ax] for i in range(d + 1)), *lam, domain="QQ")
           for ax in range(3)]
    expr = sp.Poly(0, *lam, domain="QQ")
    for (a, b, e), c in terms.items():
        expr += xyz[0] ** a * xyz[1] ** b * xyz[2] ** e * sp.Rational(float(c))
    total = sp.Integer(0)
    for exps, coeff in expr.terms():
        num = factorial(d)
        for k in exps:
            num *= factorial(k)
        total += coeff * sp.Rational(num, factorial(d + sum(exps)))
    return float(total) * _measure(vertices)


def product_terms(f, g):
    out = {}
    for ka, va in f.items():
        for kb, vb in g.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            out[k] = out.get(k, 0.0) + va * vb
    return out
