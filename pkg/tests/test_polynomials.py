from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherical_gowers.errors import MalformedDataError
from spherical_gowers.polynomials import Poly, mfact, monomials


@st.composite
def polys(draw, d=2, p=7, max_deg=3):
    terms = {}
    for j in range(max_deg + 1):
        for m in monomials(d, j):
            terms[m] = draw(st.integers(0, p - 1))
    return Poly(terms, d, p)


@pytest.mark.parametrize("d,j", [(1, 3), (2, 2), (3, 2), (4, 3)])
def test_monomial_count_and_order(d, j):
    ms = monomials(d, j)
    assert len(ms) == comb(d + j - 1, j)
    assert list(ms) == sorted(ms, reverse=True)


def test_mfact():
    assert mfact((2, 3, 0)) == 12


@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * (b * c) == (a * b) * c
    assert a - a == Poly.zero(2, 7)


@given(polys(), polys(), st.lists(st.integers(0, 6), min_size=2, max_size=2))
def test_eval_is_a_ring_map(a, b, x):
    x = np.array(x)
    assert (a * b).eval(x) == a.eval(x) * b.eval(x) % 7
    assert (a + b).eval(x) == (a.eval(x) + b.eval(x)) % 7


@given(polys())
def test_text_round_trip(a):
    assert Poly.from_text(a.to_text(), 2) == a


def test_rational_eval_exact():
    f = Poly({(2,): Fraction(1, 3), (0,): Fraction(1, 2)}, 1)
    assert f.eval(np.array([3])) == Fraction(7, 2)
    assert f.max_denominator() == 6


def test_from_text_rejects_garbage():
    with pytest.raises(MalformedDataError):
        Poly.from_text("3*y1 + 1", 1)


def test_quadratic_matches_form():
    A = np.array([[1, 2], [2, 3]])
    q = Poly.quadratic(A, [1, 0], 4, 5)
    x = np.array([2, 3])
    assert q.eval(x) == (x @ A @ x + x[0] + 4) % 5
