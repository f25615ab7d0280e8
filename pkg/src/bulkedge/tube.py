"""Tube operators -Delta + V on R x T^{d-1} by transverse Fourier truncation.

The transverse torus carries the periodic Laplacian with modes
e_k(y) = exp(2 pi i k.y).  Keeping |k|_inf <= K turns the tube operator
into an n-channel Hill operator with n = (2K + 1)^{d-1} and potential

    W_{kk'}(t, x) = Vhat_{k - k'}(t, x) + delta_{kk'} (2 pi |k|)^2,

which is then handled by the one-dimensional machinery.  Integers are only
reported once two consecutive truncations agree.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .edgeop import smooth_switch, step_switch
from .errors import TruncationError
from .indices import FlowSettings, PlaneLoop, verify_junction_theorem, verify_main_theorem
from .potentials import HermitianPotentialFamily
from .symplectic import dirichlet_plane, neumann_plane
from .tolerances import DEFAULT_TOLERANCES

__all__ = [
    "TubePotentialFamily", "ChannelReduction", "fourier_truncate",
    "tube_cosine", "tube_flat", "tube_junction_flow", "tube_edge_flows",
    "TubeReport",
]


@dataclass(frozen=True, eq=False)
class TubePotentialFamily:
    """Real potential V(t, x, y) on R x T^{d-1}.

    ``func(t, x, *y)`` receives broadcastable arrays, one per transverse
    axis, with y in [0, 1).
    """

    d: int
    func: Callable
    left_period: float = 1.0
    right_period: float = 1.0
    x_match: float = 0.0
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("tube dimension d must be at least 2")

    def __call__(self, t, x, *y):
        return self.func(float(t), x, *y)


def tube_cosine(amplitude_x=2.0, amplitude_y=1.0, rate=1):
    """V = amplitude_x cos(2 pi (x - rate t)) + amplitude_y cos(2 pi y), d = 2."""

    def func(t, x, y):
        return (amplitude_x * np.cos(2 * np.pi * (x - rate * t))
                + amplitude_y * np.cos(2 * np.pi * y))

    return TubePotentialFamily(2, func, 1.0, 1.0, 0.0, "tube_cosine",
                               {"amplitude_x": amplitude_x,
                                "amplitude_y": amplitude_y, "rate": rate})


def tube_flat(value=0.0, d=2):
    def func(t, x, *y):
        return np.full(np.broadcast(x, *y).shape, float(value))

    return TubePotentialFamily(d, func, 1.0, 1.0, 0.0, "tube_flat", {"value": value})


@dataclass(frozen=True, eq=False)
class ChannelReduction:
    """Truncated channel form of a tube potential."""

    K: int
    modes: np.ndarray
    shifts: np.ndarray
    family: HermitianPotentialFamily
    resolution: int

    @property
    def n(self):
        return self.modes.shape[0]


def _coefficients(V, t, x, Q, D):
    """Vhat_m(t, x) for all m on a Q^D transverse grid, FFT-ordered."""
    y = np.arange(Q) / Q
    grids = np.meshgrid(*([y] * D), indexing="ij")
    xs = x.reshape((-1,) + (1,) * D)
    vals = np.asarray(V(t, xs, *[g[None] for g in grids]), dtype=float)
    vals = np.broadcast_to(vals, (x.size,) + (Q,) * D)
    return np.fft.fftn(vals, axes=tuple(range(1, D + 1))) / Q ** D


def fourier_truncate(V, K, resolution=None, tol=1e-10, check=True):
    """Reduce a tube potential to (2K+1)^{d-1} coupled channels.

    Coefficients come from trapezoidal quadrature on ``resolution`` points
    per transverse axis (default 4 (2K + 1)).  With ``check`` the
    coefficients needed by the truncation are recomputed at twice the
    resolution on sample points and must agree within ``tol``.

    Raises
    ------
    TruncationError
        If the quadrature has not converged.
    """
    if K < 0 or int(K) != K:
        raise ValueError("K must be a nonnegative integer")
    K = int(K)
    D = V.d - 1
    Q = resolution or 4 * (2 * K + 1)
    if Q < 4 * K + 1:
        raise ValueError("resolution must resolve differences of retained modes")
    modes = np.array(list(itertools.product(range(-K, K + 1), repeat=D)), dtype=int)
    n = modes.shape[0]
    shifts = (2 * np.pi) ** 2 * np.sum(modes ** 2, axis=1).astype(float)
    diff = modes[:, None, :] - modes[None, :, :]  # k - k'
    idx = tuple(diff[..., a] % Q for a in range(D))

    if check:
        rng = np.random.default_rng(12345)
        xs = np.concatenate([rng.uniform(-V.x_match - V.left_period,
                                         V.x_match + V.right_period, 7)])
        for t in (0.0, 0.37):
            c1 = _coefficients(V, t, xs, Q, D)
            c2 = _coefficients(V, t, xs, 2 * Q, D)
            idx2 = tuple(diff[..., a] % (2 * Q) for a in range(D))
            err = np.max(np.abs(c1[(slice(None),) + idx] - c2[(slice(None),) + idx2]))
            scale = max(1.0, float(np.max(np.abs(c2))))
            if err > tol * scale:
                raise TruncationError(
                    f"transverse quadrature not converged (error {err:.2e}); "
                    f"increase the resolution", hint="increase resolution or K")

    def func(t, x):
        c = _coefficients(V, t, np.asarray(x, dtype=float), Q, D)
        W = c[(slice(None),) + idx]
        W = 0.5 * (W + np.conj(np.swapaxes(W, 1, 2)))
        W = W + np.diag(shifts)[None]
        if np.allclose(W.imag, 0.0):
            W = W.real
        return W

    fam = HermitianPotentialFamily(
        n, func, V.left_period, V.right_period, V.x_match,
        f"{V.name}[K={K}]", {"K": K, "tube": V.name})
    return ChannelReduction(K, modes, shifts, fam, Q)


@dataclass
class TubeReport:
    """Per-truncation consistency reports and the K-stability verdict."""

    kind: str
    reports: dict
    values: dict
    stable: bool
    passed: bool
    message: str = ""

    def to_dict(self):
        return {"kind": self.kind, "passed": self.passed, "stable": self.stable,
                "values": {str(k): v for k, v in self.values.items()},
                "message": self.message,
                "reports": {str(k): {b: r.to_dict() for b, r in v.items()}
                            for k, v in self.reports.items()}}


def _k_pair(K):
    return (K, K + 1) if np.isscalar(K) else tuple(K)


def tube_junction_flow(V_L, V_R, switches, E, K, settings=None,
                       tol=DEFAULT_TOLERANCES):
    """Junction theorem on truncated tubes, for K and K + 1.

    ``K`` may also be a sequence of truncations.  ``switches`` defaults to
    a step and a smooth switch.
    """
    switches = switches or {"step": step_switch, "smooth": smooth_switch(2.0)}
    reports, values = {}, {}
    for k in _k_pair(K):
        rL = fourier_truncate(V_L, k).family
        rR = fourier_truncate(V_R, k).family
        rep = verify_junction_theorem(rL, rR, switches, E, settings, tol)
        reports[k] = {"junction": rep}
        values[k] = rep.values
    stable = len({tuple(sorted(v.items())) for v in values.values()}) == 1
    passed = stable and all(r["junction"].passed for r in reports.values())
    msg = "" if stable else "truncation not converged, increase K"
    return TubeReport("tube_junction", reports, values, stable, passed, msg)


def tube_edge_flows(V, E, K, boundaries=("dirichlet", "neumann"), settings=None,
                    tol=DEFAULT_TOLERANCES):
    """Edge theorem on the truncated half-tube for several boundary planes.

    All boundary conditions must give the same flow, and every integer must
    agree between consecutive truncations.
    """
    planes = {"dirichlet": dirichlet_plane, "neumann": neumann_plane}
    reports, values = {}, {}
    for k in _k_pair(K):
        fam = fourier_truncate(V, k).family
        reports[k] = {}
        values[k] = {}
        for b in boundaries:
            loop = PlaneLoop.constant_loop(planes[b](fam.n), b)
            rep = verify_main_theorem(fam, loop, E, settings, tol)
            reports[k][b] = rep
            values[k][b] = rep.values["spectral_flow"]
    stable = len({tuple(sorted(v.items())) for v in values.values()}) == 1
    agree = all(len(set(v.values())) == 1 for v in values.values())
    passed = stable and agree and all(r.passed for v in reports.values()
                                      for r in v.values())
    msg = "" if stable else "truncation not converged, increase K"
    if not agree:
        msg = (msg + "; " if msg else "") + "boundary conditions give different flows"
    return TubeReport("tube_edge", reports, values, stable, passed, msg)
