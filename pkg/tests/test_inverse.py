import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherical_gowers.gowers import GridFunction, sample_box, box_terms
from spherical_gowers.grid import grid_points
from spherical_gowers.inverse import (InverseCertificate, PolyPhase, affine_pullback, converse_check, correlate,
                                      sgi1_invert)
from spherical_gowers.quadform import QuadraticForm, SphereSet


@given(st.integers(1, 3), st.integers(0, 2 ** 32))
def test_phase_is_periodic_and_unimodular(s, seed):
    rng = np.random.default_rng(seed)
    phi = PolyPhase.random(s, 3, 5, rng)
    x = rng.integers(0, 5, (20, 3))
    m = rng.integers(-3, 4, (20, 3))
    assert np.allclose(phi.eval_lift(x + 5 * m), phi(x))
    assert np.allclose(np.abs(phi(x)), 1)


@given(st.integers(0, 2 ** 32))
def test_affine_pullback_pointwise(seed):
    rng = np.random.default_rng(seed)
    phi = PolyPhase.random(2, 3, 7, rng)
    L = rng.integers(0, 7, (2, 3))
    c = rng.integers(0, 7, 3)
    psi = affine_pullback(phi, L, c)
    n = rng.integers(0, 7, (15, 2))
    assert np.allclose(psi(n), phi(np.mod(n @ L + c, 7)))


@pytest.mark.parametrize("s", [1, 2])
def test_telescoping(s):
    rng = np.random.default_rng(s)
    M = QuadraticForm.random(5, 4, rng)
    phi = PolyPhase.random(s, 4, 5, rng)
    n, hs, _, _ = sample_box(SphereSet(M), s + 1, 500, rng)
    assert np.max(np.abs(box_terms(phi.grid_function(), n, hs) - 1)) < 1e-9


def test_planted_recovery_small():
    rng = np.random.default_rng(5)
    p, d = 5, 5
    M = QuadraticForm.random(p, d, rng)
    xi = rng.integers(1, p, d)
    f = GridFunction.character(xi, p, d)
    cert = sgi1_invert(f, M)
    assert cert.xi == tuple(int(x) for x in xi)
    assert cert.recompute(f, M) == pytest.approx(cert.correlation)
    assert cert.correlation >= cert.threshold
    assert InverseCertificate.from_json(cert.to_json()) == cert


def test_converse_on_phase_itself():
    rng = np.random.default_rng(8)
    M = QuadraticForm.random(5, 4, rng)
    phi = PolyPhase.random(1, 4, 5, rng)
    rep = converse_check(phi.grid_function(), phi, SphereSet(M))
    assert rep.u_norm == pytest.approx(1.0, abs=1e-9)
    assert rep.correlation == pytest.approx(1.0, abs=1e-9)


def test_converse_on_corrupted_phase():
    rng = np.random.default_rng(9)
    p, d = 5, 4
    M = QuadraticForm.random(p, d, rng)
    phi = PolyPhase.random(1, d, p, rng)
    v = phi(grid_points(p, d))
    v = np.where(rng.random(v.size) < 0.05, -v, v)
    rep = converse_check(GridFunction(v, p, d, bounded=True), phi, SphereSet(M))
    assert rep.correlation >= 0.8 and rep.u_norm >= 0.6


def test_correlate_with_own_conjugate_is_one():
    f = GridFunction.character([1, 2], 5, 2)
    assert correlate(f, np.conj(f.scalar)) == pytest.approx(1.0)
