"""Transverse Fourier truncation of tube operators."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bulkedge.errors import TruncationError
from bulkedge.indices import FlowSettings, PlaneLoop, index_I
from bulkedge.potentials import dislocation, flat, mathieu
from bulkedge.propagate import ell_plus
from bulkedge.tube import (TubePotentialFamily, fourier_truncate, tube_cosine,
                           tube_flat, tube_junction_flow)

FOUR_PI2 = 4 * np.pi**2


def test_flat_tube_single_mode():
    red = fourier_truncate(tube_flat(0.0), 1)
    W = red.family(0.0, np.array([0.3]))[0]
    np.testing.assert_allclose(W, np.diag([FOUR_PI2, 0.0, FOUR_PI2]), atol=1e-12)
    assert red.n == 3 and red.modes.ravel().tolist() == [-1, 0, 1]


def test_separable_potential_adds_to_diagonal():
    v = lambda t, x: 2 * np.cos(2 * np.pi * (x - t))
    V = TubePotentialFamily(2, lambda t, x, y: v(t, x) + 0 * y)
    red = fourier_truncate(V, 2)
    x = np.linspace(0, 1, 7)
    W = red.family(0.2, x)
    for k, xv in enumerate(x):
        np.testing.assert_allclose(W[k], np.diag(v(0.2, xv) + red.shifts), atol=1e-12)


def test_cosine_couples_neighbouring_modes():
    red = fourier_truncate(tube_cosine(2.0, 1.0), 2)
    x = np.array([0.1, 0.6])
    W = red.family(0.0, x)
    for k, xv in enumerate(x):
        vx = 2 * np.cos(2 * np.pi * xv)
        ref = np.diag(vx + FOUR_PI2 * np.arange(-2, 3) ** 2.0)
        ref += 0.5 * (np.eye(5, k=1) + np.eye(5, k=-1))
        np.testing.assert_allclose(W[k], ref, atol=1e-12)


def test_three_dimensional_tube_modes():
    V = TubePotentialFamily(3, lambda t, x, y, z: np.cos(2 * np.pi * y) + 0 * x * z)
    red = fourier_truncate(V, 1)
    assert red.n == 9
    W = red.family(0.0, np.array([0.0]))[0]
    assert np.allclose(np.diag(W), FOUR_PI2 * np.sum(red.modes**2, axis=1))
    # coupling only between modes differing by one in the first transverse index
    d = red.modes[:, None, :] - red.modes[None, :, :]
    mask = (np.abs(d[..., 0]) == 1) & (d[..., 1] == 0)
    assert np.allclose(W[mask], 0.5) and np.allclose(W[~mask & ~np.eye(9, dtype=bool)], 0)


@settings(max_examples=20)
@given(seed=st.integers(0, 10**6), K=st.integers(1, 3))
def test_random_trig_potential_is_hermitian(seed, K):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(3, 3))
    ph = rng.uniform(0, 2 * np.pi, size=(3, 3))

    def f(t, x, y):
        return sum(a[i, j] * np.cos(2 * np.pi * (i * x + j * y) + ph[i, j] + t)
                   for i in range(3) for j in range(3))

    fam = fourier_truncate(TubePotentialFamily(2, f), K).family
    W = fam(rng.uniform(), rng.uniform(-2, 2, 5))
    assert np.allclose(W, np.conj(np.swapaxes(W, 1, 2)), atol=1e-12)


def test_unresolved_quadrature_is_rejected():
    V = TubePotentialFamily(2, lambda t, x, y: np.cos(2 * np.pi * 37 * y) + 0 * x)
    with pytest.raises(TruncationError):
        fourier_truncate(V, 1)
    fourier_truncate(V, 1, resolution=128)


def test_invalid_truncation_order():
    with pytest.raises(ValueError):
        fourier_truncate(tube_flat(), -1)
    with pytest.raises(ValueError):
        fourier_truncate(tube_flat(), 2, resolution=5)


def test_decoupled_channels_index_is_sum():
    # V(x - t) without y dependence: channels decouple, I adds up
    V = TubePotentialFamily(2, lambda t, x, y: 2 * np.cos(2 * np.pi * (x - t)) + 0 * y)
    fam = fourier_truncate(V, 1).family
    E = 9.9
    coupled = index_I(PlaneLoop(lambda t: ell_plus(fam, t, E)))
    single = index_I(PlaneLoop(lambda t: ell_plus(dislocation(mathieu()), t, E)))
    # shifted channels sit below their spectrum and carry a constant plane
    assert coupled == single == 1


@pytest.mark.slow
def test_tube_junction_low_truncation():
    rep = tube_junction_flow(tube_flat(20.0), tube_cosine(), None, 9.8, 1,
                             FlowSettings(L=30.0, N=1500, t_grid=32))
    assert rep.stable and rep.passed
    for vals in rep.values.values():
        assert set(vals.values()) == {1}
    ctrl = {k: r["junction"].flows["control"].flow for k, r in rep.reports.items()}
    assert set(ctrl.values()) == {0}
