import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherical_gowers import field as F
from spherical_gowers.mset import (MFamily, MQuadratic, MSet, ProductTestFunction, box_codimension, box_family,
                                   fiber_census, fubini_box1_product, fubini_check)
from spherical_gowers.quadform import QuadraticForm, SphereSet, sphere_points


@pytest.fixture(scope="module")
def M53():
    return QuadraticForm.random(5, 3, np.random.default_rng(11))


@pytest.mark.parametrize("s,codim", [(1, 2), (2, 4), (3, 7)])
def test_box_codimension(s, codim, M53):
    assert box_codimension(s) == codim
    assert box_family(M53, s).total_codimension() == codim


def test_box1_standard_representation(M53):
    R, dims = box_family(M53, 1).standard_representation()
    assert list(dims) == [1, 1]


def test_box1_decomposition(M53):
    Jp, Jpp = box_family(M53, 1).i_decomposition([0])
    assert len(Jp.functions) == 1 and len(Jpp.functions) == 1
    # J' only involves n, and is M(n) up to scaling
    f = Jp.functions[0]
    assert f.depends_on() == (0,)


def test_box1_point_count_and_fibers(M53):
    om = MSet(box_family(M53, 1))
    size = sphere_points(SphereSet(M53))[1]
    assert om.count() == size ** 2
    assert fiber_census(om, [0]) == {size: size}


def test_fubini_paths_agree(M53):
    f = ProductTestFunction.random(5, 3, np.random.default_rng(2))
    a = fubini_box1_product(f, M53)
    b = fubini_check(f, MSet(box_family(M53, 1)), [0])
    assert (a.flat, a.iterated, a.points) == (b.flat, b.iterated, b.points)
    assert a.discrepancy == 0


def _random_family(M, k, r, rng):
    p, d = M.p, M.d
    return MFamily(M, k, [MQuadratic(np.triu(rng.integers(0, p, (k, k))), rng.integers(0, p, (k, d)),
                                     int(rng.integers(0, p)), p) for _ in range(r)])


@given(st.integers(0, 2 ** 32))
def test_codimension_invariant_under_recombination_and_compose(seed):
    rng = np.random.default_rng(seed)
    M = QuadraticForm.random(5, 3, rng)
    J = _random_family(M, 2, 2, rng)
    if not J.flags().consistent:
        return
    G = F.random_invertible(2, 5, rng)
    mixed = MFamily(M, 2, [J.functions[0].scale(int(G[i, 0])) + J.functions[1].scale(int(G[i, 1]))
                           for i in range(2)] + [J.functions[0] + J.functions[1]])
    L = F.random_invertible(2, 5, rng)
    moved = J.compose(L, rng.integers(0, 5, (2, 3)))
    assert J.total_codimension() == mixed.total_codimension() == moved.total_codimension()


@given(st.integers(0, 2 ** 32))
def test_compose_matches_pointwise(seed):
    rng = np.random.default_rng(seed)
    M = QuadraticForm.random(5, 2, rng)
    J = _random_family(M, 2, 1, rng)
    L = F.random_invertible(2, 5, rng)
    c = rng.integers(0, 5, (2, 2))
    moved = J.compose(L, c)
    x = rng.integers(0, 5, (10, 2, 2))
    y = np.mod(np.einsum("ij,tjd->tid", L, x) + c, 5)
    assert np.array_equal(moved.eval(x), J.eval(y))


def test_json_round_trip(M53):
    J = box_family(M53, 2)
    K = MFamily.from_json(J.to_json())
    assert K.to_json() == J.to_json()


def test_flags_inconsistent_constant(M53):
    one = MQuadratic(np.zeros((1, 1), dtype=np.int64), np.zeros((1, 3), dtype=np.int64), 1, 5)
    assert not MFamily(M53, 1, [one]).flags().consistent
