import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from bulkedge.errors import EnergyClassificationError
from bulkedge.potentials import (HermitianPotentialFamily, block_diagonal,
                                 check_family, dislocation, flat, mathieu,
                                 square_well)
from bulkedge.propagate import (bulk_kernel_dimension, classify_energy,
                                decaying_frame_and_gram, ell_minus, ell_plus,
                                monodromy, symplectic_residual, transfer_matrix)
from bulkedge.symplectic import intersection_dimension, plane_distance

from oracles import bloch_bands, in_bands, shoot_monodromy, square_well_depth_for

# frozen from the Bloch oracle (m = 256 cell points, 65 quasi-momenta)
MATHIEU_GAP1 = (8.85697354, 10.8566527)
# frozen from the RK45 monodromy oracle at E = 9.9
MATHIEU_MARGIN_9_9 = 0.15870756


def random_potential(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, n, n)) + 1j * rng.normal(size=(3, n, n))
    A = 0.5 * (A + A.conj().transpose(0, 2, 1))

    def func(t, x):
        c = np.cos(2 * np.pi * (x - t))[:, None, None]
        s = np.sin(4 * np.pi * x)[:, None, None]
        return A[0] + c * A[1] + s * A[2]

    return HermitianPotentialFamily(n, func, name="random")


def test_free_transfer_matrices():
    V = flat(0.0)
    T = transfer_matrix(V, 0.0, 0.0, 0.0, 1.0)
    assert np.allclose(T.T, [[1, 1], [0, 1]], atol=1e-12)
    T = transfer_matrix(V, 0.0, -1.0, 0.0, 1.0)
    c, s = np.cosh(1.0), np.sinh(1.0)
    assert np.allclose(T.T, [[c, s], [s, c]], atol=1e-10)


@given(st.integers(0, 10**6), st.integers(1, 3), st.floats(-5, 15))
def test_symplecticity_random(seed, n, E):
    V = random_potential(seed, n)
    T = transfer_matrix(V, 0.3, E, -0.7, 1.6)
    assert T.symplectic_residual() <= 1e-8


@given(st.integers(0, 10**6), st.floats(0.05, 0.95))
def test_composition(seed, frac):
    V = random_potential(seed, 2)
    a, b = 0.0, 2.0
    c = a + frac * (b - a)
    T1 = transfer_matrix(V, 0.1, 3.0, a, c).T
    T2 = transfer_matrix(V, 0.1, 3.0, c, b).T
    T = transfer_matrix(V, 0.1, 3.0, a, b).T
    assert np.linalg.norm(T2 @ T1 - T, 2) <= 10 * 1e-8 * max(1.0, np.linalg.norm(T, 2))


def test_monodromy_examples():
    w = np.linalg.eigvals(monodromy(flat(0.0), 0.0, -1.0).T)
    assert np.allclose(np.sort(np.abs(w)), [np.exp(-1), np.exp(1)])
    w = np.linalg.eigvals(monodromy(flat(0.0), 0.0, 1.0).T)
    assert np.allclose(np.abs(w), 1.0)
    assert np.allclose(np.sort(np.angle(w)), [-1.0, 1.0])


def test_monodromy_matches_shooting_oracle():
    V = mathieu()
    M = monodromy(V, 0.0, 9.9).T
    ref = shoot_monodromy(lambda x: 2 * np.cos(2 * np.pi * x), 9.9)
    assert np.allclose(M, ref, atol=1e-8)


@given(st.integers(0, 10**6), st.floats(-3, 12))
def test_liouville(seed, E):
    M = monodromy(random_potential(seed, 2), 0.2, E).T
    assert abs(abs(np.linalg.det(M)) - 1.0) <= 1e-8


def test_classify_examples():
    assert classify_energy(flat(0.0), -1.0, 4).in_gap
    p = classify_energy(flat(0.0), 1.0, 4)
    assert p.right == "essential-spectrum" and p.left == "essential-spectrum"
    mid = 0.5 * sum(MATHIEU_GAP1)
    assert classify_energy(mathieu(), mid, 4).in_gap


def test_classify_agrees_with_bloch_oracle():
    bands = bloch_bands(lambda x: 2 * np.cos(2 * np.pi * x))
    assert np.allclose(bands[0, 1], MATHIEU_GAP1[0], atol=1e-6)
    for E in (-1.0, 5.0, 9.0, 9.9, 10.8, 12.0, 30.0):
        assert classify_energy(mathieu(), E, 2).in_gap == (not in_bands(E, bands))
    p = classify_energy(dislocation(mathieu()), 9.9, 8)
    assert p.margin == pytest.approx(MATHIEU_MARGIN_9_9, rel=1e-6)


def test_undecided_band():
    # margin ~ sqrt(E) near the band bottom of the free operator
    p = classify_energy(flat(0.0), -1e-11, 2)
    assert p.right == "undecided"


def test_ell_free():
    lp = ell_plus(flat(0.0), 0.0, -1.0)
    lm = ell_minus(flat(0.0), 0.0, -1.0)
    assert plane_distance(lp, np.array([[1.0], [-1.0]])) <= 1e-8
    assert plane_distance(lm, np.array([[1.0], [1.0]])) <= 1e-8
    assert intersection_dimension(lp, lm) == 0


@pytest.mark.parametrize("V,E", [
    (block_diagonal(mathieu(), flat(0.0)), -1.0),
    (block_diagonal(mathieu(), flat(20.0)), 9.9),
])
def test_ell_two_channels(V, E):
    for F in (ell_plus(V, 0.3, E), ell_minus(V, 0.3, E)):
        assert F.isotropy_residual() <= 1e-8
        assert np.linalg.matrix_rank(F.frame) == 2
    assert intersection_dimension(ell_plus(V, 0.3, E), ell_minus(V, 0.3, E)) == 0


def test_ell_not_in_gap():
    with pytest.raises(EnergyClassificationError):
        ell_plus(flat(0.0), 0.0, 1.0)


def test_ell_invariances():
    V = dislocation(mathieu())
    a = ell_plus(V, 0.4, 9.9)
    b = ell_plus(V, 0.4, 9.9, steps_per_period=128)
    assert plane_distance(a, b) <= 1e-6
    shifted = HermitianPotentialFamily(1, V.func, 1.0, 1.0, 1.0)
    assert plane_distance(a, ell_plus(shifted, 0.4, 9.9)) <= 1e-6
    assert plane_distance(ell_minus(V, 0.4, 9.9), ell_minus(shifted, 0.4, 9.9)) <= 1e-6


def test_ell_deep_gap_limit():
    V = mathieu(amplitude=1.0)
    dists = []
    for E in (-10.0, -100.0, -1000.0):
        kappa = np.sqrt(V(0, [0.0])[0, 0, 0] - E)
        dists.append(plane_distance(ell_plus(V, 0.0, E), np.array([[1.0], [-kappa]])))
    assert dists[0] > dists[1] > dists[2]
    assert dists[2] < 1e-3


def test_bulk_kernel_dimension():
    assert bulk_kernel_dimension(flat(0.0), 0.0, -1.0) == 0
    E = -0.5
    depth = square_well_depth_for(E, 1.0)
    assert bulk_kernel_dimension(square_well(depth, 1.0), 0.0, E) == 1
    assert bulk_kernel_dimension(square_well(depth * 1.01, 1.0), 0.0, E) == 0
    assert bulk_kernel_dimension(dislocation(mathieu()), 0.0, 9.9) == 0


@pytest.mark.parametrize("V,E,side,X,kappa", [
    (mathieu(), 9.9, "right", 60.0, None),
    (mathieu(), 9.9, "left", 60.0, None),
    (square_well(2.0, 1.0), -0.5, "right", 12.0, np.sqrt(0.5)),
])
def test_gram_matches_direct_integration(V, E, side, X, kappa):
    F0, G = decaying_frame_and_gram(V, 0.0, E, side)
    z0 = F0.frame[:, 0].real if np.allclose(F0.frame.imag, 0) else F0.frame[:, 0]
    sgn = 1.0 if side == "right" else -1.0

    def rhs(x, y):
        v = V(0.0, [sgn * x])[0, 0, 0].real
        return [sgn * y[1], sgn * (v - E) * y[0], abs(y[0]) ** 2]

    sol = solve_ivp(rhs, (0.0, X), [z0[0], z0[1], 0.0], rtol=1e-11, atol=1e-13)
    total = sol.y[2, -1]
    if kappa is not None:
        # constant potential beyond X: exact exponential tail
        total += abs(sol.y[0, -1]) ** 2 / (2 * kappa)
    assert total == pytest.approx(G[0, 0].real, rel=1e-6)


def test_check_family():
    res = check_family(dislocation(mathieu()))
    assert max(res.values()) < 1e-10
    bad = HermitianPotentialFamily(1, lambda t, x: np.cos(2 * np.pi * x) * (1 + t))
    with pytest.raises(ValueError):
        check_family(bad)
