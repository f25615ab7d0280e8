"""Finite-difference edge and junction operators and their spectral flow."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bulkedge.edgeop import (discretize_edge, discretize_junction, edge_family,
                             junction_family, smooth_switch, spectral_flow,
                             step_switch, track_branches)
from bulkedge.errors import DiscretizationError, NonRegularError
from bulkedge.indices import PlaneLoop
from bulkedge.potentials import dislocation, flat, mathieu
from bulkedge.symplectic import (dirichlet_plane, neumann_plane, random_lagrangian,
                                 robin_plane)

import oracles

MIDGAP = 9.9


def robin_at(t):
    s, c = np.sin(np.pi * t), np.cos(np.pi * t)
    return robin_plane(np.array([[s]]), np.array([[c]]))


def robin_loop(reverse=False):
    sgn = -1.0 if reverse else 1.0
    return PlaneLoop(lambda t: robin_at(sgn * t), name="robin")


# ---------------------------------------------------------------- assembly

def test_dirichlet_ground_state():
    d = discretize_edge(flat(0.0), 0.0, dirichlet_plane(1), np.pi, 2000)
    w = d.eigvalsh(0.0, 2.0)
    assert abs(w[0] - 1.0) < 1e-3


def test_neumann_ground_state_near_zero():
    # lowest Neumann-Dirichlet eigenvalue on [0, L] is (pi / 2L)^2
    L = 60.0
    d = discretize_edge(flat(0.0), 0.0, neumann_plane(1), L, 2000)
    w = d.eigvalsh(-1.0, 0.01)
    assert abs(w[0]) < 1e-3
    assert abs(w[0] - (np.pi / (2 * L)) ** 2) < 1e-6


def test_robin_bound_state():
    d = discretize_edge(flat(0.0), 0.75, robin_at(0.75), 20.0, 2000)
    w = d.eigvalsh(-2.0, -0.5)
    assert w.size == 1
    assert abs(w[0] - oracles.robin_bound_state(0.75)) < 1e-3


@pytest.mark.parametrize("plane, L, window, exact", [
    (dirichlet_plane(1), np.pi, (0.0, 2.0), 1.0),
    (robin_at(0.75), 20.0, (-2.0, -0.5), -1.0),
])
def test_second_order_convergence(plane, L, window, exact):
    errs = []
    for N in (400, 800, 1600):
        d = discretize_edge(flat(0.0), 0.75, plane, L, N)
        errs.append(abs(d.eigvalsh(*window)[0] - exact))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5))


def test_neumann_matches_ghost_node_oracle():
    v = mathieu()
    L, N = 12.0, 600
    d = discretize_edge(v, 0.0, neumann_plane(1), L, N)
    _, w_ref, _ = oracles.dense_edge_spectrum(lambda x: v(0.0, x)[:, 0, 0], L, N,
                                              dirichlet=False)
    w = d.eigvalsh(-5.0, 40.0)
    ref = w_ref[(w_ref > -5.0) & (w_ref <= 40.0)]
    np.testing.assert_allclose(w, ref, atol=1e-9)


@settings(max_examples=25)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(1, 3))
def test_random_boundary_is_hermitian(seed, n):
    from bulkedge.potentials import block_diagonal
    rng = np.random.default_rng(seed)
    V = block_diagonal(*[mathieu(rng.uniform(0.5, 3.0)) for _ in range(n)])
    F = random_lagrangian(n, rng)
    d = discretize_edge(V, rng.uniform(), F, 8.0, 200)
    assert d.hermiticity_residual() <= 1e-10 * max(1.0, abs(d.matrix).max())
    w = np.linalg.eigvalsh(d.matrix.toarray())
    assert np.all(np.isfinite(w))


def test_cauchy_data_lies_in_boundary_plane():
    F = robin_at(0.75)
    d = discretize_edge(flat(0.0), 0.75, F, 20.0, 1600)
    w, v = d.eigh(-2.0, -0.5)
    psi0, dpsi0 = d.cauchy_data(v[:, 0])
    # normalized bound state sqrt(2) e^{-x}
    assert abs(abs(psi0[0]) - np.sqrt(2.0)) < 1e-3
    resid = F.annihilator_rows() @ np.concatenate([psi0, dpsi0])
    assert np.linalg.norm(resid) < 1e-10


def test_junction_with_equal_sides_is_bulk():
    v = mathieu()
    L, N = 10.0, 400
    h = L / N
    x = -L + h * np.arange(1, 2 * N)
    ref = oracles.dense_line_matrix(v(0.3, x)[:, 0, 0], h)
    for chi in (step_switch, smooth_switch(2.0)):
        d = discretize_junction(v, v, chi, 0.3, L, N)
        np.testing.assert_allclose(d.matrix.toarray(), ref, atol=1e-9)


def test_switch_shapes():
    chi = smooth_switch(2.0)
    x = np.linspace(-3, 3, 601)
    c = chi(x)
    assert np.all(c[x <= -2] == 1.0) and np.all(c[x >= 2] == 0.0)
    assert abs(chi(np.array([0.0]))[0] - 0.5) < 1e-15
    assert np.all(np.diff(c) <= 0)
    assert step_switch(np.array([-1.0, 0.0, 1.0])).tolist() == [1.0, 0.5, 0.0]


def test_switch_plateau_violation():
    v = mathieu()
    with pytest.raises(DiscretizationError):
        discretize_junction(v, v, smooth_switch(6.0), 0.0, 10.0, 400)

    def bad(x):
        return np.where(np.asarray(x) < 5.0, 1.0, 0.0)

    bad.plateau = 1.0
    with pytest.raises(DiscretizationError):
        discretize_junction(v, v, bad, 0.0, 10.0, 400)


def test_coarse_grid_rejected():
    with pytest.raises(DiscretizationError):
        discretize_edge(flat(100.0), 0.0, dirichlet_plane(1), 10.0, 20)
    with pytest.raises(DiscretizationError):
        discretize_junction(flat(100.0), flat(100.0), step_switch, 0.0, 10.0, 10)


def test_mismatched_channels_rejected():
    from bulkedge.potentials import block_diagonal
    with pytest.raises(DiscretizationError):
        discretize_junction(flat(0.0), block_diagonal(flat(0.0), flat(0.0)),
                            step_switch, 0.0, 10.0, 100)


# ---------------------------------------------------------------- flow

def test_constant_family_has_no_crossings():
    loop = PlaneLoop.constant_loop(dirichlet_plane(1))
    br = track_branches(edge_family(mathieu(), loop, 20.0, 800), MIDGAP, t_grid=16)
    fl = spectral_flow(br)
    assert br.crossings == [] and fl.flow == 0


def test_robin_crossing_location_and_slope():
    br = track_branches(edge_family(flat(0.0), robin_loop(), 20.0, 2000), -1.0)
    fl = spectral_flow(br)
    assert fl.flow == 1 and fl.downward == 1 and fl.upward == 0
    (c,) = fl.crossings
    assert abs(c.t - 0.75) < 1e-3
    # d/dt (-cot^2 pi t) at t = 3/4
    assert abs(c.slope + 4 * np.pi) < 0.05 * 4 * np.pi


def test_reversed_orientation_negates_flow():
    fam = edge_family(flat(0.0), robin_loop(reverse=True), 20.0, 2000)
    assert spectral_flow(track_branches(fam, -1.0)).flow == -1


def test_dislocation_flow_matches_dense_oracle():
    V = dislocation(mathieu())
    L, N = 24.0, 960
    fl = spectral_flow(track_branches(
        edge_family(V, PlaneLoop.constant_loop(dirichlet_plane(1)), L, N), MIDGAP))
    ref, ts = oracles.dense_flow(lambda t, x: V(t, x)[:, 0, 0], L, N, MIDGAP,
                                 t_samples=128)
    assert fl.flow == ref == 1
    assert abs(fl.crossings[0].t - ts[0]) <= 1.0 / 128


def test_grid_refinement_keeps_flow():
    V = dislocation(mathieu())
    loop = PlaneLoop.constant_loop(dirichlet_plane(1))
    flows = [spectral_flow(track_branches(edge_family(V, loop, L, N), MIDGAP)).flow
             for L, N in ((24.0, 960), (36.0, 1920))]
    assert flows == [1, 1]


def test_far_end_states_are_not_counted():
    # Dirichlet at both ends of a flat well: every state is spread over
    # the whole interval, so nothing is localized at the cut
    V = dislocation(mathieu())
    fam = junction_family(V, V, step_switch, 12.0, 480)
    br = track_branches(fam, MIDGAP)
    fl = spectral_flow(br)
    assert fl.flow == 0
    assert all(not c.localized for c in fl.artifacts)


class _Scalar:
    """One-eigenvalue stand-in for a discretization."""

    def __init__(self, lam):
        self.lam = lam

    def eigvalsh(self, lo, hi):
        return np.array([self.lam]) if lo < self.lam <= hi else np.array([])

    def eigh(self, lo, hi):
        w = self.eigvalsh(lo, hi)
        return w, np.ones((1, w.size))

    def localization(self, vec):
        return 1.0


def test_tangential_crossing_is_non_regular():
    # lambda(t) = (sin 2 pi t)^3 crosses 0 with zero slope
    br = track_branches(lambda t: _Scalar(0.3 * np.sin(2 * np.pi * t) ** 3), 0.0,
                        window=0.5, t_grid=32)
    with pytest.raises(NonRegularError):
        spectral_flow(br)


def test_transversal_stub_crossing():
    br = track_branches(lambda t: _Scalar(0.3 * np.sin(2 * np.pi * t)), 0.0 + 1e-3,
                        window=0.5, t_grid=32)
    fl = spectral_flow(br)
    assert fl.downward == 1 and fl.upward == 1 and fl.flow == 0
