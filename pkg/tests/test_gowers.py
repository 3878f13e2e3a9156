import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherical_gowers.errors import PreconditionError
from spherical_gowers.gowers import (FullGrid, GridFunction, PointSet, box_count, box_member, box_member_sphere,
                                     box_terms, box_tuples, corners, gowers_norm, pla_bound, sample_box,
                                     u2_fourier)
from spherical_gowers.grid import grid_points
from spherical_gowers.quadform import AffineSubspace, QuadraticForm, SphereSet


def test_box_count_identity_p3_d3():
    om = SphereSet(QuadraticForm.identity(3, 3))
    assert box_count(om, 2, "exhaustive") == 297
    assert box_count(om, 2, "fourier") == 297


def test_box_count_full_grid():
    assert box_count(FullGrid(3, 2), 2, "exhaustive") == 3 ** 6


@given(st.integers(0, 2 ** 32), st.integers(1, 3))
def test_box_tuples_are_members(seed, s):
    rng = np.random.default_rng(seed)
    om = PointSet(rng.integers(0, 3, (5, 2)), 3, 2)
    n, hs = box_tuples(om, s)
    assert all(box_member(om, n[t], hs[t]) for t in range(n.shape[0]))


@given(st.integers(0, 2 ** 32))
def test_sphere_characterization_on_random_tuples(seed):
    rng = np.random.default_rng(seed)
    p, d = 5, 4
    M = QuadraticForm.random(p, d, rng, pure=False, homogeneous=False)
    S = AffineSubspace.random(p, d, 1, rng)
    om = SphereSet(M, (), S)
    n, hs, _, _ = sample_box(om, 2, 5, rng)
    for t in range(5):
        assert box_member_sphere(M, S, n[t], hs[t])
    for _ in range(20):
        n0, h0 = rng.integers(0, p, d), rng.integers(0, p, (2, d))
        assert box_member(om, n0, h0) == box_member_sphere(M, S, n0, h0)


def test_sampled_count_close_to_exact():
    om = SphereSet(QuadraticForm.identity(3, 3))
    est = box_count(om, 2, "sampled", samples=20000, rng=np.random.default_rng(0))
    assert abs(est.estimate - 297) < 5 * est.stderr + 1


def test_sampler_is_uniform_on_box():
    om = SphereSet(QuadraticForm.identity(3, 2))
    n, hs = box_tuples(om, 2)
    keys = {tuple(np.concatenate([n[t], hs[t].ravel()])) for t in range(n.shape[0])}
    sn, shs, _, _ = sample_box(om, 2, 6000, np.random.default_rng(1))
    seen = [tuple(np.concatenate([sn[t], shs[t].ravel()])) for t in range(sn.shape[0])]
    assert set(seen) <= keys
    counts = np.array([seen.count(k) for k in sorted(keys)])
    expected = len(seen) / len(keys)
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    assert chi2 < len(keys) + 6 * np.sqrt(2 * len(keys))


def test_norm_of_constant_is_one():
    f = GridFunction.constant(1.0, 5, 3)
    assert gowers_norm(f, SphereSet(QuadraticForm.identity(5, 3)), 2) == pytest.approx(1.0)


@given(st.integers(0, 2 ** 32))
def test_u2_identity(seed):
    rng = np.random.default_rng(seed)
    f = GridFunction(np.exp(2j * np.pi * rng.random(9)), 3, 2, bounded=True)
    assert abs(u2_fourier(f) - gowers_norm(f, FullGrid(3, 2), 2)) < 1e-9


def test_box_terms_of_character_are_one():
    f = GridFunction.character([1, 2, 0], 5, 3)
    rng = np.random.default_rng(0)
    n, hs = rng.integers(0, 5, (50, 3)), rng.integers(0, 5, (50, 2, 3))
    assert np.allclose(box_terms(f, n, hs), 1.0)


def test_corners_order():
    c = corners(np.array([[0, 0]]), np.array([[[1, 0], [0, 1]]]), 5)
    assert c[0].tolist() == [[0, 0], [1, 0], [0, 1], [1, 1]]


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    f = GridFunction(rng.standard_normal((27, 2)) + 1j * rng.standard_normal((27, 2)), 3, 3)
    f.save(tmp_path / "f.bin")
    g = GridFunction.load(tmp_path / "f.bin")
    assert np.array_equal(f.values, g.values) and (g.p, g.d, g.D) == (3, 3, 2)


def test_pla_requires_dimension():
    with pytest.raises(PreconditionError):
        pla_bound(GridFunction.constant(1.0, 5, 3), QuadraticForm.identity(5, 3))


def test_pla_constant_at_d9():
    b = pla_bound(GridFunction.constant(1.0, 5, 9), QuadraticForm.identity(5, 9))
    assert b.holds and b.lhs == pytest.approx(1.0)


def test_box_tuples_match_brute_force():
    rng = np.random.default_rng(7)
    om = PointSet(rng.integers(0, 3, (4, 2)), 3, 2)
    G = grid_points(3, 2)
    brute = sum(box_member(om, n, [h1, h2]) for n in G for h1 in G for h2 in G)
    assert box_tuples(om, 2)[0].shape[0] == brute
