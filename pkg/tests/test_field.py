from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import PRIMES, matrices
from spherical_gowers import field as F


def brute_prime(n):
    return n >= 2 and all(n % k for k in range(2, int(n ** 0.5) + 1))


@given(st.integers(0, 5000))
def test_is_prime_matches_trial_division(n):
    assert F.is_prime(n) == brute_prime(n)


@pytest.mark.parametrize("p", [2, 4, 9, 2 ** 31 + 11])
def test_check_prime_rejects(p):
    with pytest.raises(ValueError):
        F.check_prime(p)


def test_rref_rank_one():
    R, r, piv = F.rref([[1, 2], [2, 4]], 5)
    assert r == 1 and list(piv) == [0]
    assert R.tolist() == [[1, 2], [0, 0]]


def test_null_space_example():
    assert F.null_space([[1, 2, 0]], 5).tolist() == [[3, 1, 0], [0, 0, 1]]


def test_solve_inconsistent_is_none():
    assert F.solve([[1, 1], [1, 1]], [0, 1], 5) is None


def test_solve_free_variables_zero():
    x = F.solve([[1, 2, 0]], [3], 5)
    assert x.tolist() == [3, 0, 0]


@given(matrices())
def test_rref_is_idempotent_and_rank_nullity(Ap):
    A, p = Ap
    R, r, piv = F.rref(A, p)
    R2, r2, piv2 = F.rref(R, p)
    assert np.array_equal(R, R2) and r == r2 and piv == piv2
    N = F.null_space(A, p)
    assert r + N.shape[0] == A.shape[1]
    if N.shape[0]:
        assert not F.matmul_mod(A, N.T, p).any()


@given(matrices(), st.data())
def test_solve_consistent_systems(Ap, data):
    A, p = Ap
    x0 = np.array(data.draw(st.lists(st.integers(0, p - 1), min_size=A.shape[1], max_size=A.shape[1])))
    b = F.matmul_mod(A, x0.reshape(-1, 1), p)[:, 0]
    x = F.solve(A, b, p)
    assert x is not None
    assert np.array_equal(F.matmul_mod(A, x.reshape(-1, 1), p)[:, 0], b)


@given(PRIMES, st.integers(1, 5), st.integers(0, 2 ** 32))
def test_inverse_of_random_invertible(p, n, seed):
    G = F.random_invertible(n, p, np.random.default_rng(seed))
    assert np.array_equal(F.matmul_mod(G, F.inverse(G, p), p), np.eye(n, dtype=np.int64))


@given(PRIMES, st.integers(-10 ** 6, 10 ** 6), st.integers(1, 10 ** 4))
def test_iota_is_a_ring_map_on_fractions(p, a, b):
    if b % p == 0:
        return
    x = Fraction(a, b)
    assert F.iota(x, p) == a * pow(b, -1, p) % p
    assert F.iota(x * 2, p) == 2 * F.iota(x, p) % p


@given(PRIMES, st.lists(st.integers(-50, 50), min_size=1, max_size=6))
def test_tau_iota_round_trip(p, xs):
    v = F.iota(np.array(xs), p)
    t = F.tau(v, p)
    assert ((0 <= t) & (t < p)).all()
    assert np.array_equal(np.mod(t - np.array(xs), p), np.zeros(len(xs), dtype=np.int64))


def test_fp_arithmetic():
    a, b = F.Fp(3, 7), F.Fp(5, 7)
    assert int(a * b) == 1 and int(a / b) == 3 * 3 % 7
    assert int(a ** 6) == 1 and int(-a) == 4


def test_intersection_dim():
    U = [[1, 0, 0], [0, 1, 0]]
    W = [[0, 1, 0], [0, 0, 1]]
    assert F.intersection_dim(U, W, 5) == 1
