"""Periodic families of hermitian matrix potentials and a small built-in library.

A family is a callable ``V(t, x)`` returning an array of shape
``(len(x), n, n)``.  It must be 1-periodic in ``t`` and exactly periodic in
``x`` for ``x >= x_match`` (period ``right_period``) and for ``x <= -x_match``
(period ``left_period``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "HermitianPotentialFamily", "flat", "mathieu", "dislocation",
    "square_well", "block_diagonal", "tabulated", "scaled_shift",
    "check_family",
]


@dataclass(frozen=True, eq=False)
class HermitianPotentialFamily:
    n: int
    func: Callable[[float, np.ndarray], np.ndarray]
    left_period: float = 1.0
    right_period: float = 1.0
    x_match: float = 0.0
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, t, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        V = np.asarray(self.func(float(t), x))
        if V.ndim == 1:
            V = V[:, None, None]
        return V.reshape(x.size, self.n, self.n)

    def norm_bound(self, t_samples=8, x_samples=64):
        """Crude sup-norm estimate from samples over one window."""
        xs = np.linspace(-self.x_match - self.left_period,
                         self.x_match + self.right_period, x_samples)
        best = 0.0
        for t in np.linspace(0, 1, t_samples, endpoint=False):
            V = self(t, xs)
            best = max(best, float(np.max(np.linalg.norm(V, ord=2, axis=(1, 2)))))
        return best

    def lower_bound(self, t_samples=8, x_samples=64):
        """Smallest eigenvalue of V over samples (used to size L and N)."""
        xs = np.linspace(-self.x_match - self.left_period,
                         self.x_match + self.right_period, x_samples)
        lo = np.inf
        for t in np.linspace(0, 1, t_samples, endpoint=False):
            lo = min(lo, float(np.linalg.eigvalsh(self(t, xs)).min()))
        return lo


def flat(value=0.0, n=1, period=1.0):
    """Constant potential ``value * I``; periodic with any period."""
    value = float(value)

    def func(t, x):
        return np.broadcast_to(value * np.eye(n), (x.size, n, n))

    return HermitianPotentialFamily(n, func, period, period, 0.0, "flat",
                                    {"value": value, "n": n})


def mathieu(amplitude=2.0, period=1.0, phase=0.0):
    """Scalar potential amplitude * cos(2 pi (x - phase) / period)."""

    def func(t, x):
        return amplitude * np.cos(2 * np.pi * (x - phase) / period)

    return HermitianPotentialFamily(1, func, period, period, 0.0, "mathieu",
                                    {"amplitude": amplitude, "period": period})


def dislocation(base, rate=1):
    """Shift family V(t, x) = base(x - rate * t * period).

    ``base`` must be periodic on the whole line with equal left and right
    periods; ``rate`` is an integer so the family is 1-periodic in t.
    """
    if base.left_period != base.right_period or base.x_match != 0:
        raise ValueError("dislocation needs a globally periodic base potential")
    if int(rate) != rate:
        raise ValueError("rate must be an integer")
    p = base.right_period

    def func(t, x):
        return base(0.0, x - rate * t * p)

    return HermitianPotentialFamily(base.n, func, p, p, 0.0, "dislocation",
                                    {"base": base.name, "rate": int(rate)})


def scaled_shift(base, amplitude_loop):
    """Family base(x) * (1 + amplitude_loop(t)); mostly for tests."""

    def func(t, x):
        return base(0.0, x) * (1.0 + amplitude_loop(t))

    return HermitianPotentialFamily(base.n, func, base.left_period,
                                    base.right_period, base.x_match,
                                    "scaled_shift")


def square_well(depth, half_width, n=1, outside=0.0):
    """Scalar well: ``outside - depth`` on |x| < half_width, ``outside`` elsewhere."""

    def func(t, x):
        v = np.where(np.abs(x) < half_width, outside - depth, outside)
        if n == 1:
            return v
        return v[:, None, None] * np.eye(n)

    return HermitianPotentialFamily(n, func, 1.0, 1.0, float(half_width),
                                    "square_well",
                                    {"depth": depth, "half_width": half_width})


def block_diagonal(*families):
    """Decoupled multi-channel family built from smaller ones."""
    periods_l = {f.left_period for f in families}
    periods_r = {f.right_period for f in families}
    if len(periods_l) > 1 or len(periods_r) > 1:
        raise ValueError("all blocks need the same periods")
    n = sum(f.n for f in families)
    offsets = np.cumsum([0] + [f.n for f in families])

    def func(t, x):
        out = np.zeros((x.size, n, n), dtype=complex)
        for f, o in zip(families, offsets):
            out[:, o:o + f.n, o:o + f.n] = f(t, x)
        return out

    return HermitianPotentialFamily(
        n, func, periods_l.pop(), periods_r.pop(),
        max(f.x_match for f in families), "block_diagonal",
        {"blocks": [f.name for f in families]})


def tabulated(values, period=1.0, t_values=None):
    """Scalar potential from samples on one period, linear interpolation.

    ``values`` has shape (nx,) or (nt, nx); samples are at x = k period / nx
    and, when 2-d, t = j / nt.  Both directions are periodic.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    nt, nx = values.shape

    def func(t, x):
        u = (np.asarray(x) / period) % 1.0 * nx
        i0 = np.floor(u).astype(int) % nx
        w = u - np.floor(u)
        s = (t % 1.0) * nt
        j0 = int(np.floor(s)) % nt
        ws = s - np.floor(s)
        row0 = values[j0]
        row1 = values[(j0 + 1) % nt]
        v0 = (1 - w) * row0[i0] + w * row0[(i0 + 1) % nx]
        v1 = (1 - w) * row1[i0] + w * row1[(i0 + 1) % nx]
        return (1 - ws) * v0 + ws * v1

    return HermitianPotentialFamily(1, func, period, period, 0.0, "tabulated")


def check_family(V, t_samples=5, x_samples=41, tol=1e-10):
    """Validate hermiticity, t-periodicity and eventual x-periodicity on samples.

    Returns a dict of residuals; raises ValueError on violation.
    """
    rng = np.random.default_rng(0)
    ts = rng.random(t_samples)
    res = {"hermitian": 0.0, "t_periodic": 0.0, "right_periodic": 0.0,
           "left_periodic": 0.0}
    xr = V.x_match + V.right_period * rng.random(x_samples)
    xl = -V.x_match - V.left_period * rng.random(x_samples)
    xs = np.concatenate([xl, xr, np.linspace(-V.x_match, V.x_match, x_samples)])
    for t in ts:
        A = V(t, xs)
        scale = max(1.0, float(np.abs(A).max()))
        res["hermitian"] = max(res["hermitian"],
                               float(np.abs(A - A.conj().transpose(0, 2, 1)).max()) / scale)
        res["t_periodic"] = max(res["t_periodic"],
                                float(np.abs(V(t + 1.0, xs) - A).max()) / scale)
        res["right_periodic"] = max(
            res["right_periodic"],
            float(np.abs(V(t, xr + V.right_period) - V(t, xr)).max()) / scale)
        res["left_periodic"] = max(
            res["left_periodic"],
            float(np.abs(V(t, xl - V.left_period) - V(t, xl)).max()) / scale)
    bad = {k: v for k, v in res.items() if v > tol}
    if bad:
        raise ValueError(f"potential family violates its contract: {bad}")
    return res
