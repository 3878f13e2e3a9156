from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from spherical_gowers.errors import MalformedDataError
from spherical_gowers.harness import decomposition_instance, perturbed_alf
from spherical_gowers.ideals import (AlmostLinearFunction, HString, MIdeal, att5_decompose, ideal_member,
                                     is_freiman, is_reducible_direct, is_reducible_ideal,
                                     poly_to_string, string_combination, string_to_poly, strings_independent)
from spherical_gowers.polynomials import Poly
from spherical_gowers.quadform import QuadraticForm, SphereSet, is_isotropic


@given(st.sampled_from([3, 5, 7]), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2 ** 32))
def test_string_poly_round_trip(p, d, j, seed):
    assume(j < p)
    xi = HString.random(j, d, p, np.random.default_rng(seed))
    assert poly_to_string(string_to_poly(xi), j, p) == xi
    assert HString.from_json(xi.to_json()) == xi


def test_string_rejects_wrong_length():
    with pytest.raises(ValueError):
        HString((1, 2), 2, 2, 5)


@given(st.integers(0, 2 ** 32))
def test_member_witness_reproduces_form(seed):
    rng = np.random.default_rng(seed)
    M = QuadraticForm.random(5, 4, rng)
    h = rng.integers(0, 5, 4)
    J = MIdeal(M, (h,))
    Q, L = J.generators()
    F = Q * int(rng.integers(0, 5)) + L * Poly.linear(rng.integers(0, 5, 4), 4, 5)
    if not F:
        return
    w = ideal_member(F, J)
    assert w is not None and w.combine(J) == F


def test_non_member():
    M = QuadraticForm.identity(5, 3)
    J = MIdeal(M, (np.array([1, 0, 0]),))
    assert ideal_member(Poly.linear([0, 1, 0], 3, 5), J) is None


def test_linear_reducibility_agrees_small():
    rng = np.random.default_rng(4)
    p, d = 3, 5
    agree = 0
    for _ in range(10):
        M = QuadraticForm.random(p, d, rng)
        while True:
            h = rng.integers(0, p, d)
            if h.any() and not is_isotropic([h], M):
                break
        xi = HString(tuple(np.mod(h @ M.A, p)), 1, d, p) if agree % 2 else HString.random(1, d, p, rng)
        a = is_reducible_ideal(xi, M, [h]).reducible
        b = is_reducible_direct(xi, SphereSet(M, (h,)), 1).reducible
        assert a == b
        agree += 1


def test_direct_counterexample_is_real():
    M = QuadraticForm.identity(3, 3)
    xi = HString((1, 0, 0), 1, 3, 3)
    res = is_reducible_direct(xi, SphereSet(M), 1)
    assert not res.reducible
    n, (h,) = res.counterexample
    f = string_to_poly(xi)
    assert (f.eval(np.add(n, h)) - f.eval(np.array(n))).denominator != 1


@pytest.mark.parametrize("seed", range(5))
def test_decomposition_round_trip(seed):
    g, M, shifts = decomposition_instance(np.random.default_rng(seed))
    w = att5_decompose(g, M, shifts)
    assert w is not None and w.reconstruct(M) == g


def test_string_combination_search():
    M = QuadraticForm.identity(3, 3)
    h = np.array([1, 0, 0])
    basis = [HString((2, 0, 0), 1, 3, 3)]
    target = HString((0, 0, 0), 1, 3, 3)
    a = string_combination(target, basis, 1, M, [h])
    assert a is not None
    indep, comb = strings_independent(basis, 1, M, [h])
    assert not indep and any(comb)


def test_freiman_canonical_and_perturbed():
    H = np.arange(7).reshape(-1, 1)
    canon = AlmostLinearFunction([(Fraction(1, 7),)], [1], 7, domain=H)
    assert is_freiman(canon, H).holds
    res = is_freiman(perturbed_alf(7), H)
    assert not res.holds
    h1, h2, h3, h4 = res.quadruple
    xi = perturbed_alf(7)
    assert (h1[0] + h2[0] - h3[0] - h4[0]) % 7 == 0
    assert (xi(h1) + xi(h2) - xi(h3) - xi(h4)).denominator != 1


def test_alf_rejects_non_lattice_data():
    with pytest.raises(MalformedDataError):
        AlmostLinearFunction([(Fraction(1, 2),)], [1], 7)
