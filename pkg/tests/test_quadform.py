import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherical_gowers import field as F
from spherical_gowers.errors import BudgetError
from spherical_gowers.grid import grid_points
from spherical_gowers.quadform import (AffineSubspace, QuadraticForm, SphereSet, is_isotropic, isotropy_census,
                                       perp, rank_restriction, sphere_points)


def test_identity_sphere_count():
    pts, count = sphere_points(SphereSet(QuadraticForm.identity(5, 3)))
    assert count == 25 and pts.shape == (25, 3)


def test_census_identity():
    assert isotropy_census(QuadraticForm.identity(5, 3), 1) == (1, 24)


def test_census_diag_no_isotropic_vectors():
    M = QuadraticForm(np.diag([1, 2]), [0, 0], 0, 5)
    assert isotropy_census(M, 1) == (1, 0)


def test_empty_family_is_not_isotropic():
    assert not is_isotropic(np.zeros((0, 3), dtype=np.int64), QuadraticForm.identity(5, 3))


def test_text_round_trip(rng):
    M = QuadraticForm.random(7, 4, rng, pure=False, homogeneous=False)
    assert QuadraticForm.from_text(M.to_text()) == M


@given(st.sampled_from([5, 7]), st.integers(2, 5), st.integers(0, 2), st.integers(0, 2 ** 32))
def test_rank_restriction_matches_explicit(p, d, codim, seed):
    rng = np.random.default_rng(seed)
    codim = min(codim, d - 1)
    M = QuadraticForm.random(p, d, rng, nondegenerate=False, pure=False, homogeneous=False)
    S = AffineSubspace.random(p, d, codim, rng)
    Mr = M.restrict(S)
    assert rank_restriction(M, S) == Mr.rank()
    m = rng.integers(0, p, (10, S.dim))
    assert np.array_equal(Mr.eval(m), M.eval(np.mod(F.matmul_mod(m, S.basis, p) + S.offset, p)))


@given(st.sampled_from([3, 5]), st.integers(2, 4), st.integers(1, 2), st.integers(0, 2 ** 32))
def test_isotropic_iff_degenerate_restriction(p, d, k, seed):
    rng = np.random.default_rng(seed)
    M = QuadraticForm.random(p, d, rng)
    H = rng.integers(0, p, (k, d))
    if F.rank(H, p) < k:
        return
    A_H = F.matmul_mod(F.matmul_mod(H, M.A, p), H.T, p)
    assert is_isotropic(H, M) == (F.rank(A_H, p) < k)


@given(st.sampled_from([3, 5, 7]), st.integers(2, 4), st.integers(0, 2 ** 32))
def test_perp_is_orthogonal(p, d, seed):
    rng = np.random.default_rng(seed)
    M = QuadraticForm.random(p, d, rng)
    V = rng.integers(0, p, (1, d))
    P = perp(V, M)
    if P.shape[0]:
        assert not np.mod(V @ M.A @ P.T, p).any()


def test_affine_subspace_points_and_contains(rng):
    S = AffineSubspace.random(5, 3, 1, rng)
    pts = S.points()
    assert pts.shape[0] == 25 and S.contains(pts).all()
    assert S.contains(grid_points(5, 3)).sum() == 25


def test_from_equations():
    S = AffineSubspace.from_equations([[1, 1, 0]], [2], 5)
    assert S.dim == 2 and S.contains(np.array([1, 1, 4]))


def test_eval_bilinear_polarization(rng):
    M = QuadraticForm.random(7, 4, rng, pure=False, homogeneous=False)
    x, y = rng.integers(0, 7, (2, 20, 4))
    lhs = np.mod(M.eval(x + y) - M.eval(x) - M.eval(y) + M.v, 7)
    assert np.array_equal(lhs, np.mod(2 * M.bilinear(x, y), 7))


def test_budget_error(monkeypatch):
    monkeypatch.setenv("SPHERICAL_GOWERS_MEMORY_BUDGET", "1000")
    with pytest.raises(BudgetError) as exc:
        AffineSubspace.full(5, 6).points()
    assert exc.value.required > 1000
