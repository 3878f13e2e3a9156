import numpy as np
from hypothesis import given, strategies as st

from spherical_gowers.fourier import dft, idft, naive_dft, self_convolution_counts
from spherical_gowers.grid import add_index, grid_points, grid_size


@given(st.sampled_from([3, 5]), st.integers(1, 3), st.integers(0, 2 ** 32))
def test_dft_matches_naive_and_inverts(p, d, seed):
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(p ** d) + 1j * rng.standard_normal(p ** d)
    fh = dft(f, p, d)
    assert np.allclose(fh, naive_dft(f, p, d))
    assert np.allclose(idft(fh, p, d), f)
    assert np.isclose(np.sum(np.abs(fh) ** 2), np.mean(np.abs(f) ** 2))


def test_dft_of_character_is_a_point_mass():
    p, d = 5, 2
    xi = np.array([2, 3])
    f = np.exp(2j * np.pi * (grid_points(p, d) @ xi) / p)
    fh = dft(f, p, d)
    k = int(np.argmax(np.abs(fh)))
    assert grid_points(p, d)[k].tolist() == xi.tolist()
    assert np.isclose(abs(fh[k]), 1.0) and np.isclose(np.sum(np.abs(fh)), 1.0)


@given(st.sampled_from([3, 5]), st.integers(1, 2), st.integers(0, 2 ** 32))
def test_self_convolution_counts_brute_force(p, d, seed):
    rng = np.random.default_rng(seed)
    mask = rng.random(grid_size(p, d)) < 0.4
    r = self_convolution_counts(mask, p, d)
    idx = np.flatnonzero(mask)
    brute = np.zeros(grid_size(p, d), dtype=np.int64)
    for a in idx:
        np.add.at(brute, add_index(np.full(idx.size, a), idx, p, d), 1)
    assert np.array_equal(r, brute)
